"""Shared toy models and the acceptance summary hook."""

from __future__ import annotations

import numpy as np
import pytest

from tractforge.conformal import map_build
from tractforge.tract import toy_tract_build

THREE = [(8.0, 16.0), (20.0, 28.0), (32.0, 40.0)]
FOUR = THREE + [(44.0, 52.0)]
PLANTED = [0.2, 0.15, 0.25, 0.2]

# filled by tests/test_acceptance.py, printed at the end of the session
ACCEPTANCE_LINES: dict[int, str] = {}


def make_toy(walls, eps, nu0=0.5, tail=16.0):
    params = [{"r": r, "R": R, "eps": e} for (r, R), e in zip(walls, eps)]
    return toy_tract_build(params, nu0, walls[-1][1] + tail if walls else tail)


@pytest.fixture(scope="session")
def strip_tract():
    return toy_tract_build([], 0.5, 40.0)


@pytest.fixture(scope="session")
def strip_handle(strip_tract):
    return map_build(strip_tract, 1e-10)


@pytest.fixture(scope="session")
def three_tract():
    return make_toy(THREE, PLANTED[:3])


@pytest.fixture(scope="session")
def three_handle(three_tract):
    return map_build(three_tract, 1e-10)


@pytest.fixture(scope="session")
def four_tract():
    return make_toy(FOUR, PLANTED)


@pytest.fixture(scope="session")
def four_handle(four_tract):
    return map_build(four_tract)


@pytest.fixture(scope="session")
def one_tract():
    return make_toy([(10.0, 20.0)], [0.5], nu0=1.0, tail=14.0)


@pytest.fixture(scope="session")
def one_handle(one_tract):
    return map_build(one_tract)


def random_interior(tract, n, rng, margin=0.15, xmax=None):
    """Uniform samples of the tract at least ``margin`` from its boundary."""
    xmax = tract.trusted_xmax() if xmax is None else xmax
    out = []
    while len(out) < n:
        z = complex(rng.uniform(tract.x_left, xmax), rng.uniform(-np.pi, np.pi))
        if tract.contains(z) and tract.boundary_distance(z) > margin:
            out.append(z)
    return np.array(out)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
