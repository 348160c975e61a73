"""Compact model of a filamentary VCM ReRAM cell.

State x in [x_min, x_max] maps linearly to conductance (x_max is LRS,
x_min is HRS). Switching follows Arrhenius-accelerated, field-driven
kinetics: dx/dt = k0 * exp(-e_a / (kB * T)) * sinh(v / v0), saturating at
the state bounds. The filament temperature is quasi-static:
T = ambient + r_th_eff * P_d + crosstalk increment.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, asdict

from .errors import TemperatureOutOfRange, ValidationError, VoltageOutOfRange

BOLTZMANN_EV = 8.617333e-5  # eV/K

MAX_VOLTAGE = 2.0  # model validity bound, V
MIN_TEMPERATURE = 200.0  # kinetic model validity bound, K

# Attempt rate reproducing the packaged pulse-length reference point
# (943 pulses at 50 ns, 50 nm spacing, 300 K) with the default geometry
# kernel; re-derivable with `xhammer calibrate`.
DEFAULT_K0 = 1413948609344.1482


@dataclass(frozen=True)
class DeviceParams:
    g_lrs: float = 1e-4  # S
    g_hrs: float = 1e-6  # S
    k0: float = DEFAULT_K0  # 1/s
    e_a: float = 0.6  # eV
    v0: float = 0.25  # V
    r_th_eff: float = 5e6  # K/W
    x_min: float = 0.0
    x_max: float = 1.0
    flip_threshold: float = 0.5

    def __post_init__(self):
        problems = self.validation_problems()
        if problems:
            raise ValidationError(problems)

    def validation_problems(self) -> list[str]:
        p = []
        if not self.g_lrs > self.g_hrs > 0:
            p.append("device.g_lrs/g_hrs: need g_lrs > g_hrs > 0")
        for name in ("k0", "e_a", "v0", "r_th_eff"):
            if getattr(self, name) <= 0:
                p.append(f"device.{name}: must be > 0")
        if not self.x_min < self.flip_threshold < self.x_max:
            p.append("device.flip_threshold: must lie strictly between x_min and x_max")
        return p

    def to_dict(self) -> dict:
        return asdict(self)

    def replace(self, **kw) -> "DeviceParams":
        d = asdict(self)
        d.update(kw)
        return DeviceParams(**d)


@dataclass
class DeviceState:
    x: float  # normalized filament state
    t_fil: float  # filament temperature, K


def conductance(x: float, params: DeviceParams) -> float:
    """Linear state-to-conductance map; input clamped to the state bounds."""
    x = min(max(x, params.x_min), params.x_max)
    frac = (x - params.x_min) / (params.x_max - params.x_min)
    return params.g_hrs + frac * (params.g_lrs - params.g_hrs)


def device_current(v: float, x: float, params: DeviceParams) -> float:
    """Ohmic current I = G(x) * V."""
    if abs(v) > MAX_VOLTAGE:
        raise VoltageOutOfRange(f"|{v} V| exceeds the {MAX_VOLTAGE} V model bound")
    return conductance(x, params) * v


def filament_temperature(
    p_d: float, t_in: float, ambient: float, params: DeviceParams
) -> float:
    """Quasi-static filament temperature from self-heating plus crosstalk."""
    if p_d < 0:
        raise ValueError("dissipated power must be >= 0")
    if t_in < 0:
        raise ValueError("crosstalk increment must be >= 0")
    return ambient + params.r_th_eff * p_d + t_in


def state_rate(v: float, t: float, x: float, params: DeviceParams) -> float:
    """dx/dt of the filament state; zero once saturated at a bound."""
    if t < MIN_TEMPERATURE:
        raise TemperatureOutOfRange(
            f"{t} K is below the {MIN_TEMPERATURE} K model bound"
        )
    if v == 0.0:
        return 0.0
    rate = params.k0 * math.exp(-params.e_a / (BOLTZMANN_EV * t)) * math.sinh(v / params.v0)
    if rate > 0 and x >= params.x_max:
        return 0.0
    if rate < 0 and x <= params.x_min:
        return 0.0
    return rate


def integrate_state(
    x: float, v: float, t: float, dt: float, params: DeviceParams
) -> float:
    """Explicit update of x over dt, sub-stepped so each step moves x by
    at most 1% of the state range, clamped to the bounds."""
    if dt <= 0:
        raise ValueError("dt must be > 0")
    cap = 0.01 * (params.x_max - params.x_min)
    remaining = dt
    while remaining > 0:
        rate = state_rate(v, t, x, params)
        if rate == 0.0:
            break
        step = remaining if abs(rate) * remaining <= cap else cap / abs(rate)
        x = min(max(x + step * rate, params.x_min), params.x_max)
        remaining -= step
    return x
