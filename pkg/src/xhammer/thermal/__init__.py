from .grid import HeatSource, ThermalGrid, build_grid
from .solve import TemperatureField, solve_steady_heat
from .extract import (
    AlphaKernel,
    PowerSweepSamples,
    ThermalFit,
    extract_alpha_kernel,
    extract_kernel,
    fit_thermal_resistance,
    sweep_power,
)

__all__ = [
    "AlphaKernel",
    "HeatSource",
    "PowerSweepSamples",
    "TemperatureField",
    "ThermalFit",
    "ThermalGrid",
    "build_grid",
    "extract_alpha_kernel",
    "extract_kernel",
    "fit_thermal_resistance",
    "solve_steady_heat",
    "sweep_power",
]
