import numpy as np
import pytest

from edgetopo import build_harper, build_kane_mele

KM_TOPO = dict(t=1.0, tp=(1.0, 1.0, 0.9), tpp=(1.0, 1.0, 1.0), lambda_r=0.3, lambda_st=0.45)


@pytest.fixture(scope="session")
def harper():
    return build_harper(3, 7, 1.0)


@pytest.fixture(scope="session")
def kane_mele():
    return build_kane_mele(lambda_so=1.0, **KM_TOPO)


@pytest.fixture(scope="session")
def kane_mele_nr():
    """Kane-Mele without Rashba coupling, so s^z is conserved."""
    return build_kane_mele(lambda_so=1.0, **dict(KM_TOPO, lambda_r=0.0))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
