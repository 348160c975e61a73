"""Thermal-coupling coefficient extraction.

A power sweep on one cell yields per-cell probe temperatures; ordinary
least squares of T(P) gives the source's thermal resistance, and the slope
of each neighbour's temperature against r_th * P gives that neighbour's
coupling coefficient alpha. The kernel is stored by relative offset
(source row - cell row, source col - cell col) and treated as
translation-invariant with edge clipping.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ..errors import DegenerateFit, ValidationError
from ..geometry import CrossbarGeometry
from .grid import HeatSource, ThermalGrid, build_grid
from .solve import DEFAULT_TOL, over_temperature_vector, solve_steady_heat

DEFAULT_POWERS_W = tuple(np.linspace(0.0, 200e-6, 8))
ALPHA_FLOOR = 1e-3  # offsets with weaker coupling are dropped


@dataclass
class PowerSweepSamples:
    source_cell: tuple[int, int]
    powers: np.ndarray  # W, ascending
    temperatures: np.ndarray  # (n_powers, rows, cols), K
    ambient: float

    def source_temperatures(self) -> np.ndarray:
        i, j = self.source_cell
        return self.temperatures[:, i, j]


@dataclass
class ThermalFit:
    r_th: float  # K/W
    r_squared: float
    intercept: float  # K; equals ambient up to solver tolerance


@dataclass
class AlphaKernel:
    """Relative-offset coupling coefficients with fit diagnostics."""

    r_th: float
    alpha: dict[tuple[int, int], float]
    fit_r_squared: dict[tuple[int, int], float]
    ambient: float
    source_cell: tuple[int, int] | None = None

    def __post_init__(self):
        a00 = self.alpha.get((0, 0))
        if a00 is None or abs(a00 - 1.0) > 1e-6:
            raise ValidationError(["alpha_kernel.alpha[(0,0)]: must equal 1"])
        bad = [k for k, v in self.alpha.items() if not 0.0 < v <= 1.0 + 1e-6]
        if bad:
            raise ValidationError(
                [f"alpha_kernel.alpha[{k}]: must be in (0, 1]" for k in sorted(bad)]
            )

    @property
    def total_coupling(self) -> float:
        """Sum of alpha over all neighbour offsets (contraction factor)."""
        return float(sum(v for k, v in self.alpha.items() if k != (0, 0)))

    def with_ambient(self, ambient: float) -> "AlphaKernel":
        """Rebase the kernel to another ambient; alpha ratios are
        ambient-independent because the heat problem is linear."""
        return AlphaKernel(
            r_th=self.r_th,
            alpha=dict(self.alpha),
            fit_r_squared=dict(self.fit_r_squared),
            ambient=float(ambient),
            source_cell=self.source_cell,
        )

    def to_artifact_dict(self) -> dict:
        entries = [
            {"di": di, "dj": dj, "value": self.alpha[(di, dj)],
             "r2": self.fit_r_squared.get((di, dj), 1.0)}
            for di, dj in sorted(self.alpha)
        ]
        return {
            "ambient_K": self.ambient,
            "r_th_K_per_W": self.r_th,
            "alpha": entries,
        }

    @classmethod
    def from_artifact_dict(cls, data: dict) -> "AlphaKernel":
        try:
            alpha = {
                (int(e["di"]), int(e["dj"])): float(e["value"])
                for e in data["alpha"]
            }
            r2 = {
                (int(e["di"]), int(e["dj"])): float(e.get("r2", 1.0))
                for e in data["alpha"]
            }
            return cls(
                r_th=float(data["r_th_K_per_W"]),
                alpha=alpha,
                fit_r_squared=r2,
                ambient=float(data["ambient_K"]),
            )
        except (KeyError, TypeError) as exc:
            raise ValidationError([f"alpha_kernel: malformed artifact ({exc})"])

    def save(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_artifact_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, path: str) -> "AlphaKernel":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_artifact_dict(json.load(fh))


def sweep_power(
    grid: ThermalGrid,
    source_cell: tuple[int, int],
    powers=DEFAULT_POWERS_W,
    ambient: float = 300.0,
    tol: float = DEFAULT_TOL,
) -> PowerSweepSamples:
    """Solve the heat equation once per power level on the selected cell.

    Later solves warm-start from the previous solution scaled by the power
    ratio; each still satisfies the requested residual tolerance.
    """
    powers = np.asarray(sorted(float(p) for p in powers))
    if len(np.unique(powers)) < 4:
        raise ValidationError(["powers: need at least 4 distinct values"])
    if powers[0] < 0:
        raise ValidationError(["powers: all values must be >= 0"])
    if powers[0] != 0.0:
        raise ValidationError(["powers: must include 0"])

    rows = max(r for r, _ in grid.cell_probe_index) + 1
    cols = max(c for _, c in grid.cell_probe_index) + 1
    temps = np.empty((len(powers), rows, cols))
    x0 = None
    p_prev = 0.0
    for k, p in enumerate(powers):
        src = HeatSource.in_filament(grid, source_cell, p)
        guess = x0 * (p / p_prev) if (x0 is not None and p_prev > 0) else None
        fld = solve_steady_heat(grid, [src], ambient=ambient, tol=tol, x0=guess)
        for (i, j), t in fld.cell_temperatures.items():
            temps[k, i, j] = t
        if p > 0:
            x0 = over_temperature_vector(grid, fld, ambient)
            p_prev = p
    return PowerSweepSamples(tuple(source_cell), powers, temps, ambient)


def _ols(x: np.ndarray, y: np.ndarray) -> tuple[float, float, float]:
    """Least-squares line fit returning (slope, intercept, r_squared)."""
    x_mean = x.mean()
    y_mean = y.mean()
    sxx = float(np.sum((x - x_mean) ** 2))
    if sxx == 0.0:
        raise DegenerateFit("all abscissa values are equal")
    sxy = float(np.sum((x - x_mean) * (y - y_mean)))
    slope = sxy / sxx
    intercept = y_mean - slope * x_mean
    ss_res = float(np.sum((y - (slope * x + intercept)) ** 2))
    ss_tot = float(np.sum((y - y_mean) ** 2))
    r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
    return slope, intercept, r2


def fit_thermal_resistance(samples: PowerSweepSamples) -> ThermalFit:
    """Slope of the source cell's probe temperature against dissipated power."""
    if len(np.unique(samples.powers)) < 2:
        raise DegenerateFit("need at least 2 distinct powers")
    slope, intercept, r2 = _ols(samples.powers, samples.source_temperatures())
    return ThermalFit(r_th=slope, r_squared=r2, intercept=intercept)


def extract_alpha_kernel(samples: PowerSweepSamples, r_th: float) -> AlphaKernel:
    """Per-offset regression of neighbour temperature against r_th * power."""
    if r_th <= 0:
        raise DegenerateFit("r_th must be > 0")
    si, sj = samples.source_cell
    x = r_th * samples.powers
    _, rows, cols = samples.temperatures.shape
    alpha: dict[tuple[int, int], float] = {}
    r_squared: dict[tuple[int, int], float] = {}
    for i in range(rows):
        for j in range(cols):
            slope, _, r2 = _ols(x, samples.temperatures[:, i, j])
            offset = (si - i, sj - j)
            if offset != (0, 0) and slope < ALPHA_FLOOR:
                continue
            alpha[offset] = float(slope)
            r_squared[offset] = float(r2)
    return AlphaKernel(
        r_th=r_th,
        alpha=alpha,
        fit_r_squared=r_squared,
        ambient=samples.ambient,
        source_cell=samples.source_cell,
    )


def extract_kernel(
    geom: CrossbarGeometry,
    voxel_size: float = 5.0,
    ambient: float = 300.0,
    powers=DEFAULT_POWERS_W,
    tol: float = DEFAULT_TOL,
    source_cell: tuple[int, int] | None = None,
) -> AlphaKernel:
    """Full pipeline: build grid, sweep power on the centre cell, fit."""
    if source_cell is None:
        source_cell = (geom.rows // 2, geom.cols // 2)
    grid = build_grid(geom, voxel_size)
    samples = sweep_power(grid, source_cell, powers=powers, ambient=ambient, tol=tol)
    fit = fit_thermal_resistance(samples)
    return extract_alpha_kernel(samples, fit.r_th)
