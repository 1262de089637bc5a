"""Python interface to the qmux scheduler core."""

import json as _json

from ._qmux import (
    DistributionError,
    HardwareGraph,
    LayoutError,
    Process,
    ProcessError,
    TopologyError,
    fidelity_l1,
    form_batch,
    generate_family,
    hr_ratio,
    load_process,
    load_topology,
    parse_process,
    place,
    run,
)
from . import _qmux

__all__ = [
    "DistributionError",
    "HardwareGraph",
    "LayoutError",
    "Process",
    "ProcessError",
    "TopologyError",
    "default_config",
    "fidelity_l1",
    "form_batch",
    "generate_family",
    "hr_ratio",
    "load_process",
    "load_topology",
    "parse_process",
    "place",
    "report_from_run_directory",
    "run",
    "simulate",
    "sweep",
]


def default_config():
    """The fully resolved default run configuration as a dict."""
    return _json.loads(_qmux._default_config())


def simulate(config=None, out_dir=None):
    """Runs the full pipeline; returns the report. Missing keys take defaults."""
    text = _qmux._simulate(_json.dumps(config or {}), str(out_dir or ""))
    return _json.loads(text)


def report_from_run_directory(path):
    return _json.loads(_qmux._report_from_run_directory(str(path)))


def sweep(config=None, lambdas=(0.2, 0.4, 0.6, 0.8)):
    """Ablation sweep; returns the CSV text, one row per lambda and policy pair."""
    return _qmux._sweep(_json.dumps(config or {}), list(lambdas))
