"""Crosstalk hub: per-cell temperature increments from all other cells.

The increment at cell (i, j) is the kernel-weighted sum of every other
cell's over-temperature; offsets missing from the kernel contribute
nothing and the cell itself is always excluded.
"""

from __future__ import annotations

import numpy as np

from .errors import ShapeMismatch
from .thermal.extract import AlphaKernel


def coupling_matrix(kernel: AlphaKernel, rows: int, cols: int) -> np.ndarray:
    """Dense (rows*cols, rows*cols) operator K with K[v, s] = alpha of the
    offset from cell v to cell s; zero on the diagonal (no self-coupling)."""
    k = np.zeros((rows * cols, rows * cols))
    for (di, dj), a in kernel.alpha.items():
        if (di, dj) == (0, 0):
            continue
        for i in range(rows):
            p = i + di
            if not 0 <= p < rows:
                continue
            for j in range(cols):
                q = j + dj
                if 0 <= q < cols:
                    k[i * cols + j, p * cols + q] = a
    return k


def crosstalk_temperatures(
    t_fil: np.ndarray, kernel: AlphaKernel, ambient: float
) -> np.ndarray:
    """t_in[i][j] = sum over (p,q) != (i,j) of alpha[(p-i, q-j)] * (t_fil[p][q] - ambient)."""
    if abs(kernel.ambient - ambient) > 1e-9:
        raise ShapeMismatch(
            f"kernel ambient {kernel.ambient} K does not match {ambient} K"
        )
    t_fil = np.asarray(t_fil, dtype=np.float64)
    if t_fil.ndim != 2:
        raise ShapeMismatch("t_fil must be a 2-D matrix")
    rows, cols = t_fil.shape
    over = t_fil - ambient
    t_in = np.zeros_like(over)
    for (di, dj), a in kernel.alpha.items():
        if (di, dj) == (0, 0):
            continue
        # contribution of sources at (i+di, j+dj) onto victims at (i, j)
        vi0, vi1 = max(0, -di), min(rows, rows - di)
        vj0, vj1 = max(0, -dj), min(cols, cols - dj)
        if vi0 >= vi1 or vj0 >= vj1:
            continue
        t_in[vi0:vi1, vj0:vj1] += a * over[vi0 + di : vi1 + di, vj0 + dj : vj1 + dj]
    return t_in
