import numpy as np
import pytest

from pareto_trace.domain import default_domain
from pareto_trace.model import CoexistenceModel, Scenario


@pytest.fixture(scope="session")
def domain():
    return default_domain()


@pytest.fixture(scope="session")
def model():
    """Default scenario model (6 transmitters per network)."""
    return CoexistenceModel()


@pytest.fixture(scope="session")
def small_model():
    """Two transmitters per network, cheaper for optimization-heavy tests."""
    return CoexistenceModel(scenario=Scenario(n_laa=2, n_wifi=2, n_ue=2, n_sta=2))


@pytest.fixture()
def rng():
    return np.random.default_rng(0)


class StubModel:
    """Duck-typed stand-in exposing ``throughput_unit`` and a sized domain."""

    class _Domain:
        def __init__(self, dim):
            self.dim = dim

    def __init__(self, f_wifi, f_laa, dim):
        self._f_wifi = f_wifi
        self._f_laa = f_laa
        self.domain = self._Domain(dim)

    def throughput_unit(self, u):
        u = np.asarray(u, dtype=float)
        return float(self._f_wifi(u)), float(self._f_laa(u))


@pytest.fixture()
def stub_model_factory():
    return StubModel
