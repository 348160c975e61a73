"""Electro-thermal simulator for hammering attacks on passive ReRAM crossbars."""

__version__ = "0.1.0"

from .geometry import CrossbarGeometry
from .thermal import AlphaKernel, build_grid, extract_kernel, solve_steady_heat

__all__ = [
    "AlphaKernel",
    "CrossbarGeometry",
    "build_grid",
    "extract_kernel",
    "solve_steady_heat",
    "__version__",
]
