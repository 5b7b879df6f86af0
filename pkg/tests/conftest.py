import numpy as np
import pytest

from bshear.geometry import build_domain
from bshear.hybrid import HybridConfig, build_boundary_shearlet_system
from bshear.shearlet import build_shearlet_system
from bshear.wavelet import build_wavelet_system


@pytest.fixture(scope="session")
def dom32():
    return build_domain(32)


@pytest.fixture(scope="session")
def ws32(dom32):
    return build_wavelet_system(dom32, "db2", 3)


@pytest.fixture(scope="session")
def ss32(dom32):
    return build_shearlet_system(dom32, 3, [1, 1, 1])


@pytest.fixture(scope="session")
def bss32(ws32, ss32):
    return build_boundary_shearlet_system(ws32, ss32, HybridConfig(t=3.0))


@pytest.fixture(scope="session")
def dom64():
    return build_domain(64)


@pytest.fixture(scope="session")
def ws64(dom64):
    return build_wavelet_system(dom64, "db2", 4)


@pytest.fixture(scope="session")
def ss64(dom64):
    return build_shearlet_system(dom64, 4, [1, 1, 2, 2])


@pytest.fixture(scope="session")
def bss64(ws64, ss64):
    return build_boundary_shearlet_system(ws64, ss64, HybridConfig(t=4.0))


def area_norm(g):
    n = g.shape[0]
    return float(np.sqrt((g**2).sum() / (n * n)))
