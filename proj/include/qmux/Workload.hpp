#pragma once

#include "qmux/Process.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>
#include <vector>

namespace qmux {

enum class Family : std::uint8_t { Random, Mcx, Stabilizer, Arithmetic };

inline constexpr std::array<Family, 4> kAllFamilies{
    Family::Random, Family::Mcx, Family::Stabilizer, Family::Arithmetic};

[[nodiscard]] std::string_view familyName(Family f) noexcept;
[[nodiscard]] Family familyFromName(std::string_view name);

/**
 * Size parameters of one benchmark family member:
 *  - Random:     {data, helper, gates}
 *  - Mcx:        {controls}
 *  - Stabilizer: {data, rounds}
 *  - Arithmetic: {vars, depth}
 */
struct FamilyParams {
  Family family = Family::Random;
  std::vector<std::size_t> args;

  [[nodiscard]] std::string label() const;
  bool operator==(const FamilyParams&) const = default;
};

/**
 * Builds one process of the requested family. Throws ProcessError on
 * infeasible parameters (e.g. mcx with fewer than two controls).
 *
 * mcx(n) computes the AND of n controls into a chain of n-1 helpers, flips the
 * target from the last helper, and uncomputes the chain; Toffolis are expanded
 * into H/T/RZ/CX. random(d,h,g) emits exactly g gates and frees every helper
 * right after its last use. stabilizer(d,r) runs r rounds of adjacent-pair
 * parity checks, each with its own helper episode. arithmetic(v,k) runs k
 * layers of Toffoli-into-scratch / CX-out / uncompute blocks.
 */
[[nodiscard]] Process generateFamily(const FamilyParams& params,
                                     std::uint64_t seed, std::string id = "",
                                     std::uint64_t shots = 1,
                                     double arrivalTime = 0.0);

struct WorkloadSpec {
  double arrivalRate = 0.6;
  double duration = 40.0;
  std::uint64_t shotsMin = 500;
  std::uint64_t shotsMax = 8000;
  /// Weights over {random, mcx, stabilizer, arithmetic}.
  std::array<double, 4> mix{1.0, 1.0, 1.0, 1.0};
  std::size_t dataMin = 3;
  std::size_t dataMax = 12;
  std::size_t helperMin = 1;
  std::size_t helperMax = 8;
  std::uint64_t seed = 1;

  void validate() const;
};

/// Parses "1,0,2,1" or "random=1,mcx=0,..." into mix weights.
[[nodiscard]] std::array<double, 4> parseMix(std::string_view text);

void to_json(nlohmann::json& j, const WorkloadSpec& s);
void from_json(const nlohmann::json& j, WorkloadSpec& s);

struct Job {
  ProcessPtr process;
  FamilyParams params;
};

/// Poisson arrivals over [0, duration); deterministic given spec.seed.
[[nodiscard]] std::vector<Job> generateWorkload(const WorkloadSpec& spec);

/// Writes `<id>.proc` per job plus `manifest.json`.
void writeWorkload(const std::filesystem::path& dir,
                   const std::vector<Job>& jobs, const nlohmann::json& extra);
/// Reads a directory written by writeWorkload, or any directory of `.proc`
/// files (arrival times then come from the `arrival` header).
[[nodiscard]] std::vector<Job> readWorkload(const std::filesystem::path& dir);

} // namespace qmux
