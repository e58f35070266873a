"""Shared fixtures: eigensystem families are expensive, so they are
decomposed once per session and reused across test modules."""
import numpy as np
import pytest

from fracfield.kernel import ModelParams, RadialKernelSpec
from fracfield.mercer import mercer_decompose


def decompose_family(params, m0, grid_size, n_keep):
    return {m: mercer_decompose(RadialKernelSpec(params=params, m=m),
                                grid_size, n_keep)
            for m in range(m0 + 1)}


@pytest.fixture(scope="session")
def p2():
    return ModelParams(N=2, H=0.5)


@pytest.fixture(scope="session")
def p3():
    return ModelParams(N=3, H=0.5)


@pytest.fixture(scope="session")
def eigs_n2(p2):
    """N=2, H=0.5 working family: m <= 4, grid 64, 12 modes kept."""
    return decompose_family(p2, 4, 64, 12)


@pytest.fixture(scope="session")
def eigs_n3(p3):
    """N=3, H=0.5 working family: m <= 4, grid 64, 12 modes kept."""
    return decompose_family(p3, 4, 64, 12)


@pytest.fixture(scope="session")
def eigs_n2_deep(p2):
    """N=2, H=0.5 at the reproducing-property truncation: m <= 12,
    grid 160, 40 modes kept (enough for n0 = 24)."""
    return decompose_family(p2, 12, 160, 40)


@pytest.fixture()
def rng():
    return np.random.default_rng(987654321)
