"""Optimal multi-mode switching: value surfaces, policies and Monte Carlo checks."""

import json

from ._switchflow import (
    Error,
    InvalidInput,
    __version__,
    parse_coefficient,
    simulate_paths,
    solve,
    validate,
)
from ._switchflow import run_json as _run_json


def run(config_path, command="run", out_dir=None, seed=None):
    """Run a CLI command on a config; returns (summary dict, exit code)."""
    text, code = _run_json(str(config_path), command, out_dir, seed)
    return json.loads(text), code


__all__ = [
    "Error",
    "InvalidInput",
    "__version__",
    "parse_coefficient",
    "run",
    "simulate_paths",
    "solve",
    "validate",
]
