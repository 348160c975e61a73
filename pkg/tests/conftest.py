import numpy as np
import pytest

from xhammer.geometry import CrossbarGeometry
from xhammer.thermal import extract_kernel
from xhammer.thermal.extract import AlphaKernel


@pytest.fixture(scope="session")
def default_geometry():
    return CrossbarGeometry()


@pytest.fixture(scope="session")
def default_kernel(default_geometry):
    """Kernel extracted from the default 5x5, 50 nm spacing geometry."""
    return extract_kernel(default_geometry)


@pytest.fixture
def make_kernel():
    """Factory for hand-written kernels used by hub and engine tests."""

    def _make(alpha: dict, ambient: float = 300.0, r_th: float = 1.8e6) -> AlphaKernel:
        full = {(0, 0): 1.0, **alpha}
        return AlphaKernel(
            r_th=r_th,
            alpha=full,
            fit_r_squared={k: 1.0 for k in full},
            ambient=ambient,
        )

    return _make


@pytest.fixture
def rng():
    return np.random.default_rng(20260810)
