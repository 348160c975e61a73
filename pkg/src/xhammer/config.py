"""Experiment configuration: JSON schema, validation, defaults.

Pydantic models define the wire/file format (also reused by the HTTP
service); `None` fields fall back to the core defaults. Lengths are in nm,
pulse timing in ns, temperatures in K, everything else SI.
"""

from __future__ import annotations

import json
from typing import Literal, Optional

import numpy as np
import pydantic
from pydantic import BaseModel, ConfigDict

from .device import MIN_TEMPERATURE, DeviceParams
from .engine import PulseProgram
from .errors import ParseError, ValidationError
from .geometry import SPACING_MAX_NM, SPACING_MIN_NM, CrossbarGeometry
from .thermal.extract import DEFAULT_POWERS_W
from .thermal.solve import DEFAULT_TOL


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid")

    def _overrides(self) -> dict:
        return {k: v for k, v in self.model_dump().items() if v is not None}


class GeometryModel(_Model):
    rows: Optional[int] = None
    cols: Optional[int] = None
    electrode_spacing: Optional[float] = None
    electrode_width: Optional[float] = None
    electrode_thickness: Optional[float] = None
    top_electrode_thickness: Optional[float] = None
    oxide_thickness: Optional[float] = None
    substrate_thickness: Optional[float] = None
    insulator_thickness: Optional[float] = None
    filament_radius: Optional[float] = None
    filament_gap: Optional[float] = None
    material_conductivities: Optional[dict[str, float]] = None

    def to_core(self) -> CrossbarGeometry:
        return CrossbarGeometry(**self._overrides())


class DeviceModel(_Model):
    g_lrs: Optional[float] = None
    g_hrs: Optional[float] = None
    k0: Optional[float] = None
    e_a: Optional[float] = None
    v0: Optional[float] = None
    r_th_eff: Optional[float] = None
    x_min: Optional[float] = None
    x_max: Optional[float] = None
    flip_threshold: Optional[float] = None

    def to_core(self) -> DeviceParams:
        return DeviceParams(**self._overrides())


class ProgramModel(_Model):
    aggressors: list[tuple[int, int]] = [(2, 2)]
    victim: tuple[int, int] = (2, 3)
    v_set: float = 1.05
    pulse_length_ns: float = 50.0
    duty_cycle: float = 0.5
    max_pulses: int = 1_000_000
    dt_ns: Optional[float] = None  # None: min(pulse_length/20, 1 ns)

    def to_core(self) -> PulseProgram:
        return PulseProgram(
            aggressors=tuple(self.aggressors),
            victim=self.victim,
            v_set=self.v_set,
            pulse_length=self.pulse_length_ns * 1e-9,
            duty_cycle=self.duty_cycle,
            max_pulses=self.max_pulses,
            dt=None if self.dt_ns is None else self.dt_ns * 1e-9,
        )


class SolverModel(_Model):
    voxel_size: float = 5.0  # nm
    tol: float = DEFAULT_TOL
    powers_W: list[float] = list(DEFAULT_POWERS_W)


class SweepModel(_Model):
    variable: Literal["pulse_length", "spacing", "ambient"]
    values: list[float]


InitState = Literal["LRS", "HRS"]


class ExperimentConfig(_Model):
    geometry: GeometryModel = GeometryModel()
    device: DeviceModel = DeviceModel()
    ambient_K: float = 300.0
    program: ProgramModel = ProgramModel()
    init_states: list[list[float | InitState]] | Literal["default"] = "default"
    alpha_source: str = "compute"  # or a path to a kernel artifact
    wire_resistance: float = 0.0  # ohm per line segment
    solver: SolverModel = SolverModel()
    sweep: Optional[SweepModel] = None

    def validate_cross_fields(self, require_program: bool = True) -> None:
        """Collect every invariant violation; `require_program=False` skips
        the attack-program checks (kernel extraction needs no program)."""
        problems: list[str] = []
        geom = None
        try:
            geom = self.geometry.to_core()
        except ValidationError as err:
            problems.extend(err.violations)
        try:
            self.device.to_core()
        except ValidationError as err:
            problems.extend(err.violations)
        if self.ambient_K < MIN_TEMPERATURE:
            problems.append(f"ambient_K: must be >= {MIN_TEMPERATURE:g} K")
        if self.wire_resistance < 0:
            problems.append("wire_resistance: must be >= 0")
        if geom is not None and require_program:
            for label, (i, j) in [
                *((f"program.aggressors[{k}]", a) for k, a in enumerate(self.program.aggressors)),
                ("program.victim", self.program.victim),
            ]:
                if not (0 <= i < geom.rows and 0 <= j < geom.cols):
                    problems.append(f"{label}: cell {(i, j)} outside {geom.rows}x{geom.cols} crossbar")
        if geom is not None and self.init_states != "default":
            rows = len(self.init_states)
            cols = {len(r) for r in self.init_states}
            if rows != geom.rows or cols != {geom.cols}:
                problems.append(f"init_states: expected {geom.rows}x{geom.cols} grid")
        if require_program:
            import warnings

            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                try:
                    self.program.to_core()
                except ValidationError as err:
                    problems.extend(err.violations)
        if not 0 < self.solver.tol <= 1e-4:
            problems.append("solver.tol: must be in (0, 1e-4]")
        if self.solver.voxel_size <= 0:
            problems.append("solver.voxel_size: must be > 0")
        if self.sweep is not None:
            if not self.sweep.values:
                problems.append("sweep.values: must not be empty")
            for k, v in enumerate(self.sweep.values):
                path = f"sweep.values[{k}]"
                if self.sweep.variable == "spacing" and not SPACING_MIN_NM <= v <= SPACING_MAX_NM:
                    problems.append(f"{path}: spacing must be within [{SPACING_MIN_NM:g}, {SPACING_MAX_NM:g}] nm")
                if self.sweep.variable == "ambient" and v < MIN_TEMPERATURE:
                    problems.append(f"{path}: ambient must be >= {MIN_TEMPERATURE:g} K")
                if self.sweep.variable == "pulse_length" and v <= 0:
                    problems.append(f"{path}: pulse length must be > 0")
        if problems:
            raise ValidationError(problems)

    def initial_x(self, params: DeviceParams) -> np.ndarray:
        geom = self.geometry.to_core()
        x = np.full((geom.rows, geom.cols), params.x_min, dtype=np.float64)
        if self.init_states == "default":
            for i, j in self.program.aggressors:
                x[i, j] = params.x_max
            return x
        for i, row in enumerate(self.init_states):
            for j, v in enumerate(row):
                if v == "LRS":
                    x[i, j] = params.x_max
                elif v == "HRS":
                    x[i, j] = params.x_min
                else:
                    x[i, j] = min(max(float(v), params.x_min), params.x_max)
        return x

    def to_json_dict(self) -> dict:
        return self.model_dump(mode="json")


def _format_pydantic_errors(err: pydantic.ValidationError) -> list[str]:
    out = []
    for e in err.errors():
        path = ".".join(str(p) for p in e["loc"]) or "<root>"
        out.append(f"{path}: {e['msg']}")
    return out


def parse_experiment(data: dict) -> ExperimentConfig:
    """Validate a config dict, reporting every violation with a field path."""
    try:
        cfg = ExperimentConfig.model_validate(data)
    except pydantic.ValidationError as err:
        raise ValidationError(_format_pydantic_errors(err)) from None
    cfg.validate_cross_fields()
    return cfg


def load_experiment(path: str) -> ExperimentConfig:
    """Load and fully validate an experiment config file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            data = json.load(fh)
    except json.JSONDecodeError as err:
        raise ParseError(f"{path}: {err}") from None
    return parse_experiment(data)
