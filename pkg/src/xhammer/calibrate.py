"""Kinetics calibration against measured pulses-to-flip references.

The attack engine itself is the forward model. Free parameters come from
{k0, e_a, r_th_eff}; r_th_eff doubles as the self-heating offset knob
because it scales the whole over-temperature (own dissipation plus
crosstalk) seen by the victim. Fits run on log(pulses) residuals.

k0 enjoys an exact structure: the whole state trajectory is a pure time
rescaling in k0, so pulses-to-flip scales as 1/k0 up to the per-pulse
quantization. A secant pass on log k0 therefore converges in a few engine
evaluations; the general case uses bounded least squares.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .circuit import CrossbarInstance
from .config import ExperimentConfig
from .device import DeviceParams
from .engine import PulseProgram, run_attack
from .errors import FitDiverged, ValidationError
from .thermal.extract import AlphaKernel

FREE_PARAMS = ("k0", "e_a", "r_th_eff")
LOG_TOL = 1e-3  # fitting tolerance in log(pulses) space

_BOUNDS = {
    "k0": (1e6, 1e18),
    "e_a": (0.2, 1.5),
    "r_th_eff": (1e4, 1e9),
}
_LOG_SCALED = {"k0", "r_th_eff"}


@dataclass(frozen=True)
class ReferencePoint:
    """One measured condition: pulses-to-flip at an optional pulse length
    (ns) and ambient (K) override."""

    pulses: int
    pulse_length_ns: float | None = None
    ambient_K: float | None = None

    def __post_init__(self):
        if self.pulses < 1:
            raise ValidationError(["reference.pulses: must be >= 1"])


@dataclass
class CalibrationResult:
    params: DeviceParams
    free: tuple[str, ...]
    residuals: list[dict] = field(default_factory=list)  # per reference point

    @property
    def max_abs_log_residual(self) -> float:
        return max((abs(r["log_residual"]) for r in self.residuals), default=0.0)


def _forward_pulses(
    config: ExperimentConfig,
    kernel: AlphaKernel,
    params: DeviceParams,
    point: ReferencePoint,
) -> int | None:
    """Pulses-to-flip under the reference condition; None if it never flips."""
    ambient = point.ambient_K if point.ambient_K is not None else config.ambient_K
    base = config.program.to_core()
    program = PulseProgram(
        aggressors=base.aggressors,
        victim=base.victim,
        v_set=base.v_set,
        pulse_length=(
            point.pulse_length_ns * 1e-9
            if point.pulse_length_ns is not None
            else base.pulse_length
        ),
        duty_cycle=base.duty_cycle,
        max_pulses=base.max_pulses,
        dt=base.dt,
    )
    xbar = CrossbarInstance(
        rows=kernel_rows(config),
        cols=kernel_cols(config),
        params=params,
        alpha_kernel=kernel.with_ambient(ambient),
        ambient=ambient,
        wire_resistance_per_segment=config.wire_resistance,
        x=config.initial_x(params),
    )
    res = run_attack(xbar, program)
    return res.pulses_to_flip


def kernel_rows(config: ExperimentConfig) -> int:
    return config.geometry.to_core().rows


def kernel_cols(config: ExperimentConfig) -> int:
    return config.geometry.to_core().cols


def _residual_table(config, kernel, params, reference) -> list[dict]:
    rows = []
    for pt in reference:
        n = _forward_pulses(config, kernel, params, pt)
        log_resid = (
            math.log(n) - math.log(pt.pulses) if n is not None else float("inf")
        )
        rows.append(
            {
                "pulse_length_ns": pt.pulse_length_ns,
                "ambient_K": pt.ambient_K,
                "reference_pulses": pt.pulses,
                "model_pulses": n,
                "log_residual": log_resid,
            }
        )
    return rows


def _fit_k0_alone(config, kernel, params, reference) -> DeviceParams:
    """Secant on log k0, exploiting the exact 1/k0 scaling of pulse counts."""
    k0 = params.k0
    for _ in range(20):
        table = _residual_table(config, kernel, params.replace(k0=k0), reference)
        resid = [r["log_residual"] for r in table]
        if any(math.isinf(r) for r in resid):
            k0 *= 10.0  # not flipping: speed the kinetics up
            if k0 > _BOUNDS["k0"][1]:
                raise FitDiverged("k0 search left its bounds without flipping")
            continue
        mean = float(np.mean(resid))
        if abs(mean) <= LOG_TOL:
            return params.replace(k0=k0)
        # pulses scale as 1/k0: shift log k0 by the mean log residual
        k0 *= math.exp(mean)
        if not _BOUNDS["k0"][0] <= k0 <= _BOUNDS["k0"][1]:
            raise FitDiverged(f"k0 = {k0:g} outside {_BOUNDS['k0']}")
    raise FitDiverged("k0 secant did not converge within 20 iterations")


def calibrate_kinetics(
    config: ExperimentConfig,
    kernel: AlphaKernel,
    reference: list[ReferencePoint],
    free: tuple[str, ...] = ("k0",),
) -> CalibrationResult:
    """Least-squares fit of the free parameters to the reference points."""
    free = tuple(free)
    unknown = [f for f in free if f not in FREE_PARAMS]
    if unknown:
        raise ValidationError([f"calibrate.free: unknown parameter {f!r}" for f in unknown])
    if not free:
        raise ValidationError(["calibrate.free: need at least one free parameter"])
    if len(reference) < len(free):
        raise ValidationError(
            [f"calibrate.reference: need at least {len(free)} points for {len(free)} free parameters"]
        )

    params = config.device.to_core()

    if free == ("k0",):
        fitted = _fit_k0_alone(config, kernel, params, reference)
    else:
        def pack(p: DeviceParams) -> np.ndarray:
            vals = []
            for name in free:
                v = getattr(p, name)
                vals.append(math.log10(v) if name in _LOG_SCALED else v)
            return np.array(vals)

        def unpack(theta: np.ndarray) -> DeviceParams:
            kw = {}
            for name, v in zip(free, theta):
                kw[name] = 10.0**v if name in _LOG_SCALED else float(v)
            return params.replace(**kw)

        cap_resid = math.log(1e6)

        def residuals(theta: np.ndarray) -> np.ndarray:
            p = unpack(theta)
            out = []
            for pt in reference:
                n = _forward_pulses(config, kernel, p, pt)
                out.append(
                    cap_resid if n is None else math.log(n) - math.log(pt.pulses)
                )
            return np.array(out)

        lo = [
            math.log10(_BOUNDS[n][0]) if n in _LOG_SCALED else _BOUNDS[n][0]
            for n in free
        ]
        hi = [
            math.log10(_BOUNDS[n][1]) if n in _LOG_SCALED else _BOUNDS[n][1]
            for n in free
        ]
        sol = least_squares(
            residuals,
            x0=pack(params),
            bounds=(lo, hi),
            diff_step=0.02,
            xtol=1e-4,
            ftol=1e-6,
        )
        if not sol.success:
            raise FitDiverged(f"least-squares fit failed: {sol.message}")
        fitted = unpack(sol.x)

    table = _residual_table(config, kernel, fitted, reference)
    if any(math.isinf(r["log_residual"]) for r in table):
        raise FitDiverged("fitted parameters still fail to flip a reference point")
    return CalibrationResult(params=fitted, free=free, residuals=table)
