import csv
import io
import pathlib

import pytest

import qmux

FIXTURES = pathlib.Path(__file__).resolve().parents[2] / "tests" / "fixtures"
SMALL = {
    "topology": "heavyhex(3,7)",
    "workload": {"duration": 10, "data_max": 5, "helper_max": 3, "seed": 2},
    "anneal": {"iterations": 5},
}


def shared_pair():
    return [qmux.load_process(str(FIXTURES / n)) for n in ("pair_p1.proc", "pair_p2.proc")]


def test_topology():
    g = qmux.load_topology("grid(2,5)")
    assert g.num_qubits == 10
    assert len(g.edges) == 13
    assert g.distance(0, 9) == 5
    assert qmux.load_topology("heavyhex(15,7)").num_qubits == 133
    with pytest.raises(ValueError):
        qmux.load_topology("grid(0,3)")


def test_process_parse_and_round_trip():
    p = qmux.parse_process("proc a\nshots 5\ndata 2\nH q0\nCX q0 q1\n")
    assert (p.num_data, p.depth, p.shots) == (2, 2, 5)
    assert qmux.parse_process(p.serialize()) == p
    with pytest.raises(qmux.ProcessError):
        qmux.parse_process("proc a\nshots 5\ndata 2\nhelper 3\nCX q0 s5\n")


def test_families():
    m = qmux.generate_family("mcx", [12])
    assert (m.num_data, m.num_helper) == (13, 11)
    r = qmux.generate_family("random", [4, 4, 15])
    assert r.gate_count == 15


def test_example_batch():
    def chain(name, n, d, s):
        body = "".join("H q0\n" for _ in range(d))
        return qmux.parse_process(f"proc {name}\nshots {s}\ndata {n}\n{body}")

    procs = [chain("P1", 8, 100, 100), chain("P2", 10, 10, 60),
             chain("P3", 12, 12, 60), chain("P4", 12, 80, 100)]
    aware = qmux.form_batch(procs, 24, 0.6, 100000)
    fifo = qmux.form_batch(procs, 24, 0.6, 100000, shot_aware=False)
    assert aware["members"] == ["P2", "P3"] and aware["shots"] == 60
    assert fifo["members"] == ["P1", "P2"] and fifo["eta"] == 0.375
    assert 2.25 <= aware["eta"] / fifo["eta"] <= 2.27


def test_place_and_run():
    layout = qmux.place(shared_pair(), "grid(2,5)", seed=3)
    assert len(layout["sites"]) == 2
    assert layout["cost"]["total"] <= layout["initial_cost"]["total"]
    out = qmux.run(shared_pair(), "grid(2,5)", seed=3)
    assert out["isolation_ok"]
    assert all(out["completed"])
    assert "SYSTEM RESET" in out["stream"]
    assert qmux.run(shared_pair(), "grid(3,5)", sharing=False)["share_ratio"] == 0.0


def test_metrics():
    assert qmux.fidelity_l1({"00": 1.0}, {"00": 0.9, "11": 0.1}) == pytest.approx(0.9)
    with pytest.raises(ValueError):
        qmux.fidelity_l1({"0": 0.4}, {"0": 1.0})
    assert qmux.hr_ratio(3, 1) == 0.25
    assert qmux.hr_ratio(0, 0) is None


def test_simulate_and_reload(tmp_path):
    report = qmux.simulate(SMALL, tmp_path / "run")
    assert report["schema"] == 1
    assert report["batches"] > 0
    assert qmux.report_from_run_directory(tmp_path / "run") == report
    assert qmux.default_config()["weights"] == {"alpha": 0.5, "beta": 0.3, "gamma": 1.0}


def test_sweep_rows():
    rows = list(csv.DictReader(io.StringIO(qmux.sweep(SMALL, [0.2, 0.6]))))
    assert len(rows) == 8
