"""Steady-state heat conduction on a ThermalGrid.

Solves -div(kappa grad T) = q with a 7-point finite-difference stencil,
harmonic-mean face conductivities, Dirichlet T = ambient on the masked
voxels and zero flux on every other boundary face. The system is assembled
over the over-temperature u = T - ambient, which makes it symmetric
positive definite with a homogeneous Dirichlet condition; it is solved with
Jacobi-preconditioned conjugate gradients.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix, csr_matrix
from scipy.sparse.linalg import LinearOperator, cg

from ..errors import NoConvergence, SingularSystem
from .grid import HeatSource, ThermalGrid

DEFAULT_TOL = 1e-6
MAX_TOL = 1e-4


@dataclass
class TemperatureField:
    """Solved temperature field plus per-cell probe readings."""

    values: np.ndarray  # (nz, ny, nx), K
    cell_temperatures: dict[tuple[int, int], float]
    iterations: int = 0
    residual: float = 0.0


@dataclass
class _AssembledSystem:
    matrix: csr_matrix  # SPD over unknown (non-Dirichlet) voxels
    unknown_of_flat: np.ndarray  # flat voxel -> unknown index, -1 if Dirichlet
    flat_of_unknown: np.ndarray
    inv_diagonal: np.ndarray


def _assemble(grid: ThermalGrid) -> _AssembledSystem:
    nx, ny, nz = grid.dims
    n = grid.n_voxels
    dirichlet = grid.dirichlet_mask.ravel()
    n_dir = int(dirichlet.sum())
    if n_dir == 0:
        raise SingularSystem("grid has no Dirichlet voxels; the field is undetermined")

    unknown_of_flat = np.full(n, -1, dtype=np.int64)
    flat_of_unknown = np.nonzero(~dirichlet)[0]
    unknown_of_flat[flat_of_unknown] = np.arange(len(flat_of_unknown))

    kappa = grid.kappa
    dz_m = grid.voxel_size_m
    shape = (nz, ny, nx)

    rows: list[np.ndarray] = []
    cols: list[np.ndarray] = []
    vals: list[np.ndarray] = []
    diag = np.zeros(len(flat_of_unknown), dtype=np.float64)

    flat_idx = np.arange(n, dtype=np.int64).reshape(shape)
    for axis in range(3):
        lo = [slice(None)] * 3
        hi = [slice(None)] * 3
        lo[axis] = slice(None, -1)
        hi[axis] = slice(1, None)
        k_lo = kappa[tuple(lo)].ravel()
        k_hi = kappa[tuple(hi)].ravel()
        g = dz_m * 2.0 * k_lo * k_hi / (k_lo + k_hi)  # W/K per face
        a = flat_idx[tuple(lo)].ravel()
        b = flat_idx[tuple(hi)].ravel()
        ua = unknown_of_flat[a]
        ub = unknown_of_flat[b]
        both = (ua >= 0) & (ub >= 0)
        np.add.at(diag, ua[ua >= 0], g[ua >= 0])
        np.add.at(diag, ub[ub >= 0], g[ub >= 0])
        rows.append(ua[both])
        cols.append(ub[both])
        vals.append(-g[both])

    r = np.concatenate(rows)
    c = np.concatenate(cols)
    v = np.concatenate(vals)
    m = len(flat_of_unknown)
    off = coo_matrix((np.concatenate([v, v]), (np.concatenate([r, c]), np.concatenate([c, r]))), shape=(m, m))
    matrix = (off + coo_matrix((diag, (np.arange(m), np.arange(m))), shape=(m, m))).tocsr()
    return _AssembledSystem(matrix, unknown_of_flat, flat_of_unknown, 1.0 / diag)


def _system(grid: ThermalGrid) -> _AssembledSystem:
    if grid._system_cache is None:
        grid._system_cache = _assemble(grid)
    return grid._system_cache  # type: ignore[return-value]


def solve_steady_heat(
    grid: ThermalGrid,
    sources: list[HeatSource],
    ambient: float = 300.0,
    tol: float = DEFAULT_TOL,
    x0: np.ndarray | None = None,
    maxiter: int = 20_000,
) -> TemperatureField:
    """Solve for the temperature field under the given heat sources.

    `tol` bounds the relative residual ||Ax - b|| / ||b||; an all-zero
    source vector short-circuits to the exact ambient field.
    """
    if not 0.0 < tol <= MAX_TOL:
        raise ValueError(f"tol must be in (0, {MAX_TOL:g}], got {tol:g}")
    sys = _system(grid)
    m = sys.matrix.shape[0]

    b = np.zeros(m, dtype=np.float64)
    for src in sources:
        u_idx = sys.unknown_of_flat[src.source_voxels]
        if np.any(u_idx < 0):
            raise SingularSystem("heat source overlaps a Dirichlet voxel")
        b[u_idx] += src.total_power / len(src.source_voxels)

    b_norm = float(np.linalg.norm(b))
    if b_norm == 0.0:
        u = np.zeros(m)
        iterations, residual = 0, 0.0
    else:
        n_iter = [0]

        def _count(_):
            n_iter[0] += 1

        precond = LinearOperator(
            (m, m), matvec=lambda x: sys.inv_diagonal * x, dtype=np.float64
        )
        u, info = cg(
            sys.matrix,
            b,
            x0=x0,
            rtol=tol,
            atol=0.0,
            maxiter=maxiter,
            M=precond,
            callback=_count,
        )
        iterations = n_iter[0]
        residual = float(np.linalg.norm(sys.matrix @ u - b)) / b_norm
        if info != 0:
            raise NoConvergence(
                f"heat solve stopped after {iterations} iterations", residual
            )

    values = np.full(grid.n_voxels, ambient, dtype=np.float64)
    values[sys.flat_of_unknown] += u
    nx, ny, nz = grid.dims
    values = values.reshape((nz, ny, nx))
    cell_t = {
        cell: float(values[idx]) for cell, idx in grid.cell_probe_index.items()
    }
    return TemperatureField(values, cell_t, iterations, residual)


def over_temperature_vector(grid: ThermalGrid, fld: TemperatureField, ambient: float) -> np.ndarray:
    """Flat over-temperature array aligned with the unknown ordering (for warm starts)."""
    sys = _system(grid)
    return fld.values.ravel()[sys.flat_of_unknown] - ambient
