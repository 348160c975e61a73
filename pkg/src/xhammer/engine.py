"""Hammering-attack engine.

Each pulse applies the V/2 biasing for the aggressor(s) for one pulse
length, then idles with all lines at 0 V. Every integration step relaxes
the coupled thermal state (self-heating plus kernel crosstalk) to a fixed
point and advances every cell's filament state explicitly. Temperatures
are quasi-static, so idle intervals leave the states untouched and reset
temperatures to ambient.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .circuit import (
    CrossbarInstance,
    LineVoltages,
    bias_lines,
    bias_lines_multi,
    cell_powers,
    cell_voltages,
    cell_voltages_ideal,
    idle_lines,
)
from .crosstalk import coupling_matrix
from .device import (
    BOLTZMANN_EV,
    MIN_TEMPERATURE,
    DeviceParams,
    DeviceState,
)
from .errors import ConfigInvalid, NoConvergence, TemperatureOutOfRange, ValidationError

DT_CAP = 1e-9  # s
DT_STEPS_PER_PULSE = 20
RELAX_TOL_K = 0.01
RELAX_MAX_ITER = 100


@dataclass(frozen=True)
class PulseProgram:
    aggressors: tuple[tuple[int, int], ...]
    victim: tuple[int, int]
    v_set: float = 1.05
    pulse_length: float = 50e-9  # s
    duty_cycle: float = 0.5
    max_pulses: int = 1_000_000
    dt: float | None = None  # None: min(pulse_length/20, 1 ns)

    def __post_init__(self):
        object.__setattr__(
            self, "aggressors", tuple((int(i), int(j)) for i, j in self.aggressors)
        )
        object.__setattr__(self, "victim", (int(self.victim[0]), int(self.victim[1])))
        problems = self.validation_problems()
        if problems:
            raise ValidationError(problems)
        if not self.victim_is_half_selected():
            warnings.warn(
                "victim shares no row or column with any aggressor; "
                "it receives no V/2 stress",
                stacklevel=2,
            )

    def validation_problems(self) -> list[str]:
        p = []
        if not self.aggressors:
            p.append("program.aggressors: need at least one aggressor")
        if self.victim in self.aggressors:
            p.append("program.victim: victim must not be an aggressor")
        if self.v_set < 0:
            p.append("program.v_set: must be >= 0")
        if self.pulse_length <= 0:
            p.append("program.pulse_length: must be > 0")
        if not 0 < self.duty_cycle <= 1:
            p.append("program.duty_cycle: must be in (0, 1]")
        if self.max_pulses < 1:
            p.append("program.max_pulses: must be >= 1")
        if self.dt is not None:
            if self.dt <= 0:
                p.append("program.dt: must be > 0")
            elif self.pulse_length < self.dt:
                p.append("program.pulse_length: must be >= dt")
        return p

    def victim_is_half_selected(self) -> bool:
        vi, vj = self.victim
        return any(i == vi or j == vj for i, j in self.aggressors)

    @property
    def effective_dt(self) -> float:
        if self.dt is not None:
            return self.dt
        return min(self.pulse_length / DT_STEPS_PER_PULSE, DT_CAP)

    @property
    def idle_duration(self) -> float:
        return self.pulse_length * (1.0 - self.duty_cycle) / self.duty_cycle

    def simultaneous_aggressors(self) -> bool:
        """Superposed biasing is only well-formed when the aggressor set is
        a full row-set x column-set product (no unintended full selections)."""
        rows = {i for i, _ in self.aggressors}
        cols = {j for _, j in self.aggressors}
        return set(self.aggressors) == {(i, j) for i in rows for j in cols}


@dataclass
class AttackTrace:
    pulse_index: np.ndarray
    victim_x: np.ndarray
    victim_t: np.ndarray
    aggressor_t: np.ndarray

    def __len__(self) -> int:
        return len(self.pulse_index)


@dataclass
class AttackResult:
    flipped: bool
    pulses_to_flip: int | None
    final_x: np.ndarray
    final_t_fil: np.ndarray
    trace: AttackTrace | None = None

    def __post_init__(self):
        if self.flipped != (self.pulses_to_flip is not None):
            raise ValidationError(
                ["result: flipped must match presence of pulses_to_flip"]
            )

    @property
    def final_states(self) -> list[list[DeviceState]]:
        return [
            [DeviceState(float(x), float(t)) for x, t in zip(xr, tr)]
            for xr, tr in zip(self.final_x, self.final_t_fil)
        ]


def detect_flip(state: DeviceState, params: DeviceParams) -> bool:
    """HRS -> LRS flip once x reaches the threshold (inclusive)."""
    return state.x >= params.flip_threshold


def _coupling(xbar: CrossbarInstance) -> np.ndarray:
    cached = getattr(xbar, "_coupling_cache", None)
    if cached is None:
        cached = coupling_matrix(xbar.alpha_kernel, xbar.rows, xbar.cols)
        xbar._coupling_cache = cached
    return cached


def electrothermal_relax(
    xbar: CrossbarInstance,
    cell_v: np.ndarray,
    tol: float = RELAX_TOL_K,
    u0: np.ndarray | None = None,
) -> np.ndarray:
    """Jacobi fixed point of T = ambient + r_th_eff * P + crosstalk(T).

    Converges when the kernel's total coupling is below 1 (contraction);
    aborts with NoConvergence after 100 iterations otherwise.
    """
    if tol <= 0:
        raise ValueError("tol must be > 0")
    p = cell_powers(cell_v, xbar).ravel()
    self_u = xbar.params.r_th_eff * p
    k = _coupling(xbar)
    u = self_u.copy() if u0 is None else np.asarray(u0, dtype=np.float64).ravel().copy()
    for _ in range(RELAX_MAX_ITER):
        u_next = self_u + k @ u
        delta = float(np.max(np.abs(u_next - u)))
        u = u_next
        if delta <= tol:
            return xbar.ambient + u.reshape(xbar.rows, xbar.cols)
    raise NoConvergence(
        "electro-thermal relaxation did not reach a fixed point; "
        "total kernel coupling is likely >= 1",
        delta,
    )


def advance_interval(
    xbar: CrossbarInstance,
    lines: LineVoltages,
    duration: float,
    dt: float,
) -> CrossbarInstance:
    """Advance the crossbar with the given line drive held constant.

    Repeats {cell voltages -> thermal relax -> state integration} in steps
    of dt (the last step truncated to land exactly on `duration`). With all
    lines at 0 V nothing dissipates and states cannot move, so the interval
    collapses to resetting temperatures to ambient.
    """
    if duration < 0:
        raise ValueError("duration must be >= 0")
    if duration == 0:
        return xbar
    if lines.all_zero:
        xbar.t_fil[:] = xbar.ambient
        return xbar

    p = xbar.params
    ideal = xbar.wire_resistance_per_segment == 0
    v = cell_voltages_ideal(lines) if ideal else None

    steps = math.ceil(duration / dt)
    k = _coupling(xbar)
    r_th = p.r_th_eff
    g_scale = (p.g_lrs - p.g_hrs) / (p.x_max - p.x_min)
    inv_v0 = 1.0 / p.v0
    u = None
    for s in range(steps):
        h = dt if s < steps - 1 else duration - dt * (steps - 1)
        if not ideal:
            v = cell_voltages(xbar, lines)
        g = p.g_hrs + (xbar.x - p.x_min) * g_scale
        self_u = (r_th * (v * v * g)).ravel()
        u = self_u.copy() if u is None else u
        for _ in range(RELAX_MAX_ITER):
            u_next = self_u + k @ u
            delta = float(np.max(np.abs(u_next - u)))
            u = u_next
            if delta <= RELAX_TOL_K:
                break
        else:
            raise NoConvergence("electro-thermal relaxation stalled", delta)
        t = xbar.ambient + u.reshape(xbar.rows, xbar.cols)
        if np.min(t) < MIN_TEMPERATURE:
            raise TemperatureOutOfRange(
                f"{np.min(t)} K is below the {MIN_TEMPERATURE} K model bound"
            )
        rate = p.k0 * np.exp(-p.e_a / (BOLTZMANN_EV * t)) * np.sinh(v * inv_v0)
        np.clip(xbar.x + h * rate, p.x_min, p.x_max, out=xbar.x)
        xbar.t_fil[:] = t
    return xbar


def _check_can_progress(xbar: CrossbarInstance, program: PulseProgram) -> None:
    if program.victim_is_half_selected():
        return
    vi, vj = program.victim
    coupled = any(
        xbar.alpha_kernel.alpha.get((i - vi, j - vj), 0.0) > 0.0
        for i, j in program.aggressors
    )
    if not coupled:
        raise ConfigInvalid(
            "victim is not half-selected and has no kernel coupling to any "
            "aggressor; the attack cannot progress"
        )


def _run(
    xbar: CrossbarInstance,
    program: PulseProgram,
    record_trace: bool,
    early_stop: bool,
) -> AttackResult:
    _check_can_progress(xbar, program)
    m, n = xbar.rows, xbar.cols
    vi, vj = program.victim
    ai, aj = program.aggressors[0]
    dt = program.effective_dt
    idle = idle_lines(m, n)
    idle_dur = program.idle_duration

    simultaneous = program.simultaneous_aggressors()
    if simultaneous:
        lines_on = (
            bias_lines(program.aggressors[0], program.v_set, m, n)
            if len(program.aggressors) == 1
            else bias_lines_multi(list(program.aggressors), program.v_set, m, n)
        )

    trace_x: list[float] = []
    trace_tv: list[float] = []
    trace_ta: list[float] = []
    flip_at: int | None = None

    for pulse in range(1, program.max_pulses + 1):
        if not simultaneous:
            agg = program.aggressors[(pulse - 1) % len(program.aggressors)]
            lines_on = bias_lines(agg, program.v_set, m, n)
        advance_interval(xbar, lines_on, program.pulse_length, dt)
        if record_trace:
            trace_x.append(float(xbar.x[vi, vj]))
            trace_tv.append(float(xbar.t_fil[vi, vj]))
            trace_ta.append(float(xbar.t_fil[ai, aj]))
        if flip_at is None and xbar.x[vi, vj] >= xbar.params.flip_threshold:
            flip_at = pulse
            if early_stop:
                break
        if idle_dur > 0:
            advance_interval(xbar, idle, idle_dur, dt)

    trace = None
    if record_trace:
        trace = AttackTrace(
            pulse_index=np.arange(1, len(trace_x) + 1),
            victim_x=np.asarray(trace_x),
            victim_t=np.asarray(trace_tv),
            aggressor_t=np.asarray(trace_ta),
        )
    return AttackResult(
        flipped=flip_at is not None,
        pulses_to_flip=flip_at,
        final_x=xbar.x.copy(),
        final_t_fil=xbar.t_fil.copy(),
        trace=trace,
    )


def run_attack(
    xbar: CrossbarInstance, program: PulseProgram, record_trace: bool = False
) -> AttackResult:
    """Hammer until the victim flips or max_pulses is exhausted."""
    return _run(xbar, program, record_trace, early_stop=True)


def run_pulse_train(
    xbar: CrossbarInstance, program: PulseProgram, record_trace: bool = True
) -> AttackResult:
    """Run the full pulse train with no early stop, recording per-pulse samples."""
    return _run(xbar, program, record_trace, early_stop=False)
