import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from horolab import geometry as geo

settings.register_profile("horolab", deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("horolab")


def random_isometry(rng, dim, spread=2.0):
    """A random isometry: rotation, then translation to a random point."""
    if dim == 2:
        th = rng.uniform(0, 2 * math.pi)
        rot = np.array([[math.cos(th), -math.sin(th)], [math.sin(th), math.cos(th)]])
    else:
        q = rng.normal(size=4)
        q /= np.linalg.norm(q)
        u, v = complex(q[0], q[1]), complex(q[2], q[3])
        rot = np.array([[u, -np.conj(v)], [v, np.conj(u)]])
    x = random_interior(rng, dim, spread)
    return geo.Isometry(geo.translation_to(x).matrix @ rot)


def random_interior(rng, dim, spread=2.0):
    v = rng.normal(size=dim)
    v /= np.linalg.norm(v)
    return math.tanh(rng.uniform(0, spread) / 2) * v


def random_boundary(rng, dim):
    v = rng.normal(size=dim)
    return v / np.linalg.norm(v)


seeds = st.integers(min_value=0, max_value=2**32 - 1)
dims = st.sampled_from([2, 3])


@pytest.fixture(scope="session")
def schottky2():
    from horolab import config

    return config.load_presentation("schottky2")


@pytest.fixture(scope="session")
def expl1():
    from horolab import config

    return config.load_presentation("expl1")


@pytest.fixture(scope="session")
def cyclic():
    from horolab import config

    return config.load_presentation("cyclic")


# one summary line per acceptance criterion, shown after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
