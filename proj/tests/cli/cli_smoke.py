"""End-to-end checks of the qmux command line: exit codes and artifacts."""

import csv
import filecmp
import json
import pathlib
import subprocess
import sys
import tempfile

QMUX = sys.argv[1]
FIXTURES = pathlib.Path(sys.argv[2])
SMALL = ["--topology", "heavyhex:3,7", "--duration", "10", "--data-max", "5",
         "--helper-max", "3", "--iterations", "5"]

failures = []


def run(*args, cwd=None):
    return subprocess.run([QMUX, *map(str, args)], capture_output=True,
                          text=True, cwd=cwd)


def check(name, cond, detail=""):
    print(("ok   " if cond else "FAIL ") + name + (f"  {detail}" if detail and not cond else ""))
    if not cond:
        failures.append(name)


def same_tree(a, b):
    cmp = filecmp.dircmp(a, b)
    if cmp.left_only or cmp.right_only or cmp.diff_files or cmp.funny_files:
        return False
    _, mismatch, errors = filecmp.cmpfiles(a, b, cmp.common_files, shallow=False)
    if mismatch or errors:
        return False
    return all(same_tree(pathlib.Path(a) / d, pathlib.Path(b) / d) for d in cmp.common_dirs)


with tempfile.TemporaryDirectory() as tmp:
    tmp = pathlib.Path(tmp)
    p1, p2 = FIXTURES / "pair_p1.proc", FIXTURES / "pair_p2.proc"

    r = run("--seed", 4, "--out", tmp / "wl", "gen", "--duration", 10)
    check("gen writes a workload", r.returncode == 0 and (tmp / "wl" / "manifest.json").exists(), r.stderr)

    r = run("gen", "--family", "mcx", "--args", 2)
    check("gen single process", r.returncode == 0 and "data 3" in r.stdout and "helper 1" in r.stdout, r.stderr)

    r = run("schedule", "--workload", tmp / "wl", "--topology", "grid:4,6")
    ok = r.returncode == 0
    if ok:
        plan = json.loads(r.stdout)
        ok = plan["schema"] == 1 and all(b["reason"] in ("threshold", "timeout") for b in plan["batches"])
    check("schedule emits batch records", ok, r.stderr)

    r = run("place", p1, p2, "--topology", "grid:2,5")
    ok = r.returncode == 0
    if ok:
        layout = json.loads(r.stdout)
        ok = layout["schema"] == 1 and "trace" in layout
    check("place emits layout json", ok, r.stderr)

    r = run("run", p1, p2, "--topology", "grid:2,5")
    check("run emits a stream with resets", r.returncode == 0 and "SYSTEM RESET" in r.stdout, r.stderr)

    r = run("--seed", 7, "--out", tmp / "sim", "simulate", "--topology", "grid:2,5", "--lambda", 0.6)
    check("simulate on grid:2,5", r.returncode == 0 and (tmp / "sim" / "report.json").exists(), r.stderr)
    for sub in ("manifest.json", "batches", "streams"):
        check(f"run directory has {sub}", (tmp / "sim" / sub).exists())

    r = run("metrics", "--in", tmp / "sim")
    report = (tmp / "sim" / "report.json").read_text()
    check("metrics reproduces report.json byte for byte", r.returncode == 0 and r.stdout == report, r.stderr)

    r = run("--out", tmp / "replay", "simulate", "--manifest", tmp / "sim" / "manifest.json")
    check("replay from manifest is identical", r.returncode == 0 and same_tree(tmp / "sim", tmp / "replay"), r.stderr)

    r = run("--out", tmp / "sweep", "sweep", "--lambdas", "0.2,0.6", *SMALL)
    rows = []
    if r.returncode == 0:
        with open(tmp / "sweep" / "sweep.csv") as f:
            rows = list(csv.DictReader(f))
    check("sweep has 2 x 4 rows", len(rows) == 8, r.stderr)
    check("sharing off never shares",
          rows and all(float(x["share_ratio"]) == 0.0 for x in rows if x["sharing"] in ("0", "false", "off")))

    cfg = tmp / "run.ini"
    cfg.write_text("seed = 3\n[simulate]\ntopology = \"grid:2,5\"\nlambda = 0.5\n")
    r = run("--config", cfg, "--out", tmp / "cfg", "simulate")
    ok = r.returncode == 0
    if ok:
        manifest = json.loads((tmp / "cfg" / "manifest.json").read_text())
        ok = manifest["config"]["topology"] == "grid:2,5" and manifest["config"]["scheduler"]["lambda"] == 0.5
    check("config file section is honoured", ok, r.stderr)

    r = run("--config", cfg, "--out", tmp / "cfg2", "simulate", "--lambda", 0.7)
    ok = r.returncode == 0 and json.loads((tmp / "cfg2" / "manifest.json").read_text())["config"]["scheduler"]["lambda"] == 0.7
    check("flags override the config file", ok, r.stderr)

    flat = tmp / "flat.ini"
    flat.write_text("topology = grid:2,5\n")
    check("unknown config key is a usage error", run("--config", flat, "simulate").returncode == 2)
    check("lambda out of range is a usage error", run("simulate", "--lambda", 1.5).returncode == 2)
    check("missing subcommand is a usage error", run().returncode == 2)
    check("help exits 0", run("--help").returncode == 0)
    r = run("place", FIXTURES / "bad_missing_header.proc", "--topology", "grid:2,5")
    check("malformed process is a runtime error", r.returncode == 1 and "line" in r.stderr, r.stderr)
    check("missing metrics input is a usage error", run("metrics", "--in", tmp / "nope").returncode == 2)

print(f"{len(failures)} failure(s)")
sys.exit(1 if failures else 0)
