#include "qmux/Topology.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <limits>
#include <queue>
#include <regex>
#include <sstream>

namespace qmux {

namespace {

constexpr auto kUnreachable = std::numeric_limits<std::uint32_t>::max();

std::string trim(std::string_view s) {
  const auto* ws = " \t\r\n";
  const auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) {
    return {};
  }
  const auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

std::size_t parsePositive(const std::string& s, std::string_view what) {
  std::size_t v = 0;
  const auto* first = s.data();
  const auto* last = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc{} || ptr != last || v == 0) {
    throw TopologyError("topology " + std::string(what) +
                        ": expected a positive integer, got '" + s + "'");
  }
  return v;
}

} // namespace

HardwareGraph::HardwareGraph(std::size_t numQubits, std::vector<Edge> edges,
                             std::string name)
    : numQubits_(numQubits), adjacency_(numQubits), name_(std::move(name)) {
  if (numQubits_ == 0) {
    throw TopologyError("hardware graph needs at least one qubit");
  }
  for (auto& [a, b] : edges) {
    if (a >= numQubits_ || b >= numQubits_) {
      throw TopologyError("edge (" + std::to_string(a) + ", " +
                          std::to_string(b) + ") references a qubit >= " +
                          std::to_string(numQubits_));
    }
    if (a == b) {
      throw TopologyError("self-loop on qubit " + std::to_string(a));
    }
    if (a > b) {
      std::swap(a, b);
    }
  }
  std::sort(edges.begin(), edges.end());
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  edges_ = std::move(edges);
  for (const auto& [a, b] : edges_) {
    adjacency_[a].push_back(b);
    adjacency_[b].push_back(a);
  }
  for (auto& adj : adjacency_) {
    std::sort(adj.begin(), adj.end());
  }

  // all-pairs BFS
  dist_.assign(numQubits_ * numQubits_, kUnreachable);
  std::vector<PhysicalQubit> frontier;
  frontier.reserve(numQubits_);
  for (PhysicalQubit src = 0; src < numQubits_; ++src) {
    auto* row = dist_.data() + src * numQubits_;
    row[src] = 0;
    frontier.clear();
    frontier.push_back(src);
    for (std::size_t head = 0; head < frontier.size(); ++head) {
      const auto u = frontier[head];
      for (const auto v : adjacency_[u]) {
        if (row[v] == kUnreachable) {
          row[v] = row[u] + 1;
          frontier.push_back(v);
        }
      }
    }
    if (frontier.size() != numQubits_) {
      const auto it = std::find(row, row + numQubits_, kUnreachable);
      throw TopologyError("hardware graph '" + name_ +
                          "' is disconnected: qubit " +
                          std::to_string(it - row) +
                          " is unreachable from qubit " + std::to_string(src));
    }
  }
}

std::span<const PhysicalQubit>
HardwareGraph::neighbors(PhysicalQubit q) const {
  if (q >= numQubits_) {
    throw std::out_of_range("qubit index " + std::to_string(q) +
                            " out of range");
  }
  return adjacency_[q];
}

std::uint32_t HardwareGraph::distance(PhysicalQubit a, PhysicalQubit b) const {
  if (a >= numQubits_ || b >= numQubits_) {
    throw std::out_of_range("distance(" + std::to_string(a) + ", " +
                            std::to_string(b) + ") on a graph with " +
                            std::to_string(numQubits_) + " qubits");
  }
  return distanceUnchecked(a, b);
}

std::uint32_t HardwareGraph::diameter() const noexcept {
  return *std::max_element(dist_.begin(), dist_.end());
}

HardwareGraph lineTopology(std::size_t n) {
  if (n == 0) {
    throw TopologyError("line(n) needs n >= 1");
  }
  std::vector<Edge> edges;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    edges.emplace_back(i, i + 1);
  }
  return {n, std::move(edges), "line(" + std::to_string(n) + ")"};
}

HardwareGraph gridTopology(std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) {
    throw TopologyError("grid(r,c) needs positive dimensions");
  }
  std::vector<Edge> edges;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const auto q = r * cols + c;
      if (c + 1 < cols) {
        edges.emplace_back(q, q + 1);
      }
      if (r + 1 < rows) {
        edges.emplace_back(q, q + cols);
      }
    }
  }
  return {rows * cols, std::move(edges),
          "grid(" + std::to_string(rows) + "," + std::to_string(cols) + ")"};
}

HardwareGraph heavyHexTopology(std::size_t rows, std::size_t cols) {
  if (rows == 0 || cols == 0) {
    throw TopologyError("heavyhex(r,c) needs positive dimensions");
  }
  std::vector<Edge> edges;
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c + 1 < cols; ++c) {
      edges.emplace_back(r * cols + c, r * cols + c + 1);
    }
  }
  auto next = rows * cols;
  for (std::size_t r = 0; r + 1 < rows; ++r) {
    for (std::size_t c = (r % 2 == 0) ? 0 : 2; c < cols; c += 4) {
      edges.emplace_back(r * cols + c, next);
      edges.emplace_back(next, (r + 1) * cols + c);
      ++next;
    }
  }
  return {next, std::move(edges),
          "heavyhex(" + std::to_string(rows) + "," + std::to_string(cols) +
              ")"};
}

HardwareGraph parseEdgeList(std::istream& in, std::string name) {
  std::vector<Edge> edges;
  std::size_t maxIndex = 0;
  std::string line;
  std::size_t lineNo = 0;
  while (std::getline(in, line)) {
    ++lineNo;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    const auto body = trim(line);
    if (body.empty()) {
      continue;
    }
    std::istringstream ls(body);
    long long u = -1;
    long long v = -1;
    std::string extra;
    if (!(ls >> u >> v) || (ls >> extra) || u < 0 || v < 0) {
      throw TopologyError(name + ":" + std::to_string(lineNo) +
                          ": expected '<u> <v>' with non-negative indices, "
                          "got '" +
                          body + "'");
    }
    edges.emplace_back(static_cast<std::size_t>(u),
                       static_cast<std::size_t>(v));
    maxIndex = std::max({maxIndex, static_cast<std::size_t>(u),
                         static_cast<std::size_t>(v)});
  }
  if (edges.empty()) {
    throw TopologyError(name + ": edge list is empty");
  }
  return {maxIndex + 1, std::move(edges), std::move(name)};
}

std::string writeEdgeList(const HardwareGraph& g) {
  std::ostringstream out;
  out << "# " << g.name() << ": " << g.numQubits() << " qubits, "
      << g.edges().size() << " edges\n";
  for (const auto& [a, b] : g.edges()) {
    out << a << ' ' << b << '\n';
  }
  return out.str();
}

HardwareGraph loadTopology(std::string_view descriptor) {
  const auto desc = trim(descriptor);
  static const std::regex generator(
      R"(^(line|grid|heavyhex)\s*(?:\(\s*([^)]*)\)|:\s*(.*))$)",
      std::regex::icase);
  std::smatch m;
  if (std::regex_match(desc, m, generator)) {
    auto kind = m[1].str();
    std::transform(kind.begin(), kind.end(), kind.begin(), ::tolower);
    const auto argText = m[2].matched ? m[2].str() : m[3].str();
    std::vector<std::size_t> args;
    std::stringstream ss(argText);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      args.push_back(parsePositive(trim(tok), kind));
    }
    if (kind == "line") {
      if (args.size() != 1) {
        throw TopologyError("line takes one argument: line(n)");
      }
      return lineTopology(args[0]);
    }
    if (args.size() != 2) {
      throw TopologyError(kind + " takes two arguments: " + kind + "(r,c)");
    }
    return kind == "grid" ? gridTopology(args[0], args[1])
                          : heavyHexTopology(args[0], args[1]);
  }
  std::string path = desc;
  if (path.rfind("file:", 0) == 0) {
    path = path.substr(5);
  }
  std::ifstream in(path);
  if (!in) {
    throw TopologyError("unknown topology descriptor '" + desc +
                        "' (not a generator and not a readable file)");
  }
  return parseEdgeList(in, path);
}

} // namespace qmux
