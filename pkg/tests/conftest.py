import numpy as np
import pytest

from mcselect.models import CurieWeissParams, curie_weiss_chain
from mcselect.objectives import Workspace


@pytest.fixture(scope="session")
def cw10():
    return curie_weiss_chain(CurieWeissParams(10, 10.0, 1.0))


@pytest.fixture(scope="session")
def cw10_ws(cw10):
    P, pi = cw10
    return Workspace(P, pi)


@pytest.fixture(scope="session")
def cw8():
    return curie_weiss_chain(CurieWeissParams(8, 10.0, 1.0))


@pytest.fixture(scope="session")
def cw4():
    return curie_weiss_chain(CurieWeissParams(4, 10.0, 1.0))


@pytest.fixture()
def rng():
    return np.random.default_rng(20240817)
