import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from mortar_bddc.adaptivity import adapt_all
from mortar_bddc.bddc import BddcOperator
from mortar_bddc.coefficients import channel_field, random_field
from mortar_bddc.discretization import discretize
from mortar_bddc.geometry import build_conforming_partition
from mortar_bddc.harness import theta_rule
from mortar_bddc.schur import SchurSystem

settings.register_profile("repo", deadline=None, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repo")

_verdicts = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_verdicts] = {}


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(_verdicts, {})
    if lines:
        terminalreporter.section("acceptance criteria")
        for k in sorted(lines):
            terminalreporter.write_line(lines[k])


@pytest.fixture
def verdict(request):
    """``verdict(k, ok, detail)`` records a one-line result for criterion k."""

    def record(k, ok, detail):
        line = f"CRITERION {k}: {'PASS' if ok else 'FAIL'} {detail}"
        request.config.stash[_verdicts][k] = line
        print(line)
        return ok

    return record


class Bundle:
    """Discretization + Schur system + both adapted operators."""

    def __init__(self, k, n, beta, degree, rho=None, theta=None):
        self.n, self.beta = n, beta
        self.disc = discretize(build_conforming_partition(k, n, beta), degree, rho)
        self.system = SchurSystem(self.disc)
        self.theta = theta_rule(n, beta) if theta is None else theta
        self.adapt = {s: adapt_all(self.system, s, self.theta) for s in ("multiplicity", "deluxe")}
        self.op = {s: BddcOperator(self.system, a) for s, a in self.adapt.items()}


_cache = {}


def bundle(key, *args, **kwargs):
    if key not in _cache:
        _cache[key] = Bundle(*args, **kwargs)
    return _cache[key]


@pytest.fixture(scope="session")
def toy():
    """2x2 squares, 2 elements per side, P1: one multiplier per interface."""
    return bundle("toy", 2, 2, 1.0, 1)


@pytest.fixture(scope="session")
def small_p2():
    return bundle("small_p2", 2, 4, 0.5, 2)


@pytest.fixture(scope="session")
def ex61():
    return bundle("ex61", 3, 12, 0.5, 2)


@pytest.fixture(scope="session")
def random_p2():
    return bundle("random_p2", 3, 8, 1.5, 2, random_field(0))


@pytest.fixture(scope="session")
def channels_p1():
    return bundle("channels_p1", 3, 10, 0.5, 1, channel_field("one", 1e3))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
