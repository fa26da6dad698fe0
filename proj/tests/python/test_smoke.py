import os
from pathlib import Path

import numpy as np
import pytest

import switchflow

CONFIGS = Path(os.environ.get("SWITCHFLOW_CONFIG_DIR", Path(__file__).resolve().parents[2] / "configs"))


def test_parse_coefficient():
    assert switchflow.parse_coefficient("0.1|x| + 0.5t + 2") == (0.0, 0.1, 0.5, 2.0)
    with pytest.raises(ValueError):
        switchflow.parse_coefficient("x^2")


def test_validate_examples():
    ok, rules = switchflow.validate(str(CONFIGS / "example1.cfg"))
    assert ok and rules == []
    ok, rules = switchflow.validate(str(CONFIGS / "example2.cfg"))
    assert not ok and "strict-triangle" in rules


def test_solve_example1_orders_modes():
    t, x, v = switchflow.solve(str(CONFIGS / "example1.cfg"))
    assert v.shape == (2, t.size, x.size)
    assert np.all(v[:, -1, :] == 0.0)
    assert np.all(v[0] >= v[1])


def test_paths_are_reproducible():
    a = switchflow.simulate_paths(str(CONFIGS / "example1.cfg"), 50, seed=3)
    b = switchflow.simulate_paths(str(CONFIGS / "example1.cfg"), 80, seed=3)
    assert a.shape == (50, 101)
    assert np.array_equal(a, b[:50])
    assert np.all(a[:, 0] == 1.0)


def test_run_symmetric(tmp_path):
    summary, code = switchflow.run(CONFIGS / "symmetric.cfg", out_dir=str(tmp_path))
    assert code == 0
    assert summary["total_switches"] == 0
    assert (tmp_path / "summary.json").exists()
