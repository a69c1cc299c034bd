import json
from pathlib import Path

import numpy as np
import pytest

from fbscatter import config, geometry, pipeline
from fbscatter.quasiperiodic import PeriodicCell

ROOT = Path(__file__).resolve().parents[1]
CONFIGS = ROOT / "configs"


def load_example(name, **overrides):
    data = json.loads((CONFIGS / f"{name}.json").read_text())
    data.update(overrides)
    return config.from_dict(data)


@pytest.fixture(scope="session")
def cache():
    return pipeline.CellCache()


@pytest.fixture(scope="session")
def ex1_cfg():
    return load_example("example1")


@pytest.fixture(scope="session")
def ex1_cell(ex1_cfg, cache):
    return cache.get(ex1_cfg)


@pytest.fixture(scope="session")
def ex1_run(ex1_cfg, cache):
    """Example 1 at full resolution, Green samples accumulated for cells -1..1."""
    return pipeline.solve(ex1_cfg, cache, cells=(-1, 0, 1))


@pytest.fixture(scope="session")
def small_cell():
    return PeriodicCell(geometry.disk(1.0), 1.25, np.pi, M=64, N=256, J=15)


@pytest.fixture(scope="session")
def ex2_run(cache):
    """Example 2 (plane wave, square perturbation) with cells -1..1."""
    return pipeline.solve(load_example("example2"), cache, cells=(-1, 0, 1))


ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """record(number, value, tol) stores one acceptance line and returns value <= tol."""
    def record(number, value, tol, label=""):
        ok = bool(value <= tol)
        ACCEPTANCE_LINES.append((number, f"{'PASS' if ok else 'FAIL'} criterion {number}: "
                                         f"{value:.3e} (tol {tol:.0e}){' ' + label if label else ''}"))
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(ACCEPTANCE_LINES, key=lambda t: t[0]):
            terminalreporter.write_line(line)
