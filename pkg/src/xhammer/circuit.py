"""Per-cell voltages and powers for the passive crossbar.

Ideal-driver mode applies line potentials directly (the V/2 write scheme);
wired mode solves nodal analysis with a per-segment wire resistance and
ideal voltage sources at both ends of every line.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.linalg import spsolve

from .device import DeviceParams
from .errors import IndexOutOfRange, ShapeMismatch, SingularMatrix
from .thermal.extract import AlphaKernel


@dataclass
class LineVoltages:
    word_lines: np.ndarray  # (m,), V
    bit_lines: np.ndarray  # (n,), V

    def __post_init__(self):
        self.word_lines = np.asarray(self.word_lines, dtype=np.float64)
        self.bit_lines = np.asarray(self.bit_lines, dtype=np.float64)
        if not (np.all(np.isfinite(self.word_lines)) and np.all(np.isfinite(self.bit_lines))):
            raise ShapeMismatch("line voltages must be finite")

    @property
    def all_zero(self) -> bool:
        return not (self.word_lines.any() or self.bit_lines.any())


@dataclass
class CrossbarInstance:
    """An m x n crossbar: shared device params, per-cell dynamic state."""

    rows: int
    cols: int
    params: DeviceParams
    alpha_kernel: AlphaKernel
    ambient: float = 300.0
    wire_resistance_per_segment: float = 0.0  # ohm; 0 = ideal drivers
    x: np.ndarray = field(default=None)  # (m, n) filament states
    t_fil: np.ndarray = field(default=None)  # (m, n) filament temperatures, K

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ShapeMismatch("crossbar must be at least 1x1")
        if abs(self.alpha_kernel.ambient - self.ambient) > 1e-9:
            raise ShapeMismatch(
                f"kernel ambient {self.alpha_kernel.ambient} K does not match "
                f"instance ambient {self.ambient} K"
            )
        shape = (self.rows, self.cols)
        if self.x is None:
            self.x = np.full(shape, self.params.x_min, dtype=np.float64)
        else:
            self.x = np.array(self.x, dtype=np.float64)
            if self.x.shape != shape:
                raise ShapeMismatch(f"init states must have shape {shape}")
        if self.t_fil is None:
            self.t_fil = np.full(shape, self.ambient, dtype=np.float64)
        else:
            self.t_fil = np.array(self.t_fil, dtype=np.float64)
            if self.t_fil.shape != shape:
                raise ShapeMismatch(f"temperatures must have shape {shape}")

    def conductances(self) -> np.ndarray:
        p = self.params
        xc = np.clip(self.x, p.x_min, p.x_max)
        scale = (p.g_lrs - p.g_hrs) / (p.x_max - p.x_min)
        return p.g_hrs + (xc - p.x_min) * scale


def bias_lines(
    target: tuple[int, int], v_set: float, m: int, n: int
) -> LineVoltages:
    """V/2 scheme: selected word line at v_set, selected bit line at 0,
    every other line at v_set / 2."""
    i, j = target
    if not (0 <= i < m and 0 <= j < n):
        raise IndexOutOfRange(f"target {target} outside {m}x{n} crossbar")
    if v_set < 0:
        raise ValueError("v_set must be >= 0")
    word = np.full(m, v_set / 2.0)
    bit = np.full(n, v_set / 2.0)
    word[i] = v_set
    bit[j] = 0.0
    return LineVoltages(word, bit)


def bias_lines_multi(
    targets: list[tuple[int, int]], v_set: float, m: int, n: int
) -> LineVoltages:
    """Superposed V/2 biasing for simultaneously selected cells."""
    word = np.full(m, v_set / 2.0)
    bit = np.full(n, v_set / 2.0)
    for i, j in targets:
        if not (0 <= i < m and 0 <= j < n):
            raise IndexOutOfRange(f"target {(i, j)} outside {m}x{n} crossbar")
        word[i] = v_set
        bit[j] = 0.0
    return LineVoltages(word, bit)


def idle_lines(m: int, n: int) -> LineVoltages:
    """All lines driven to 0 V between pulses."""
    return LineVoltages(np.zeros(m), np.zeros(n))


def cell_voltages_ideal(lines: LineVoltages) -> np.ndarray:
    """V[i][j] = word[i] - bit[j] with ideal drivers."""
    return lines.word_lines[:, None] - lines.bit_lines[None, :]


def solve_cell_voltages_wired(
    xbar: CrossbarInstance, lines: LineVoltages
) -> np.ndarray:
    """Nodal analysis with wire resistance on every line segment.

    Unknowns are the word-node and bit-node potentials at each crosspoint;
    each line is driven by ideal sources at both ends through one segment.
    The device network is ohmic, so a single sparse solve (plus one
    iterative-refinement step) applies.
    """
    if xbar.wire_resistance_per_segment <= 0:
        raise ValueError("wired solve requires wire_resistance_per_segment > 0")
    m, n = xbar.rows, xbar.cols
    if len(lines.word_lines) != m or len(lines.bit_lines) != n:
        raise ShapeMismatch("line voltage lengths do not match the crossbar")
    g_w = 1.0 / xbar.wire_resistance_per_segment
    g_dev = xbar.conductances()

    n_nodes = 2 * m * n

    def w_idx(i, j):
        return i * n + j

    def b_idx(i, j):
        return m * n + i * n + j

    rows_l: list[int] = []
    cols_l: list[int] = []
    vals: list[float] = []
    rhs = np.zeros(n_nodes)

    def stamp(a: int, b_: int, g: float):
        rows_l.extend((a, b_, a, b_))
        cols_l.extend((a, b_, b_, a))
        vals.extend((g, g, -g, -g))

    def stamp_source(a: int, g: float, v: float):
        rows_l.append(a)
        cols_l.append(a)
        vals.append(g)
        rhs[a] += g * v

    for i in range(m):
        stamp_source(w_idx(i, 0), g_w, lines.word_lines[i])
        stamp_source(w_idx(i, n - 1), g_w, lines.word_lines[i])
        for j in range(n - 1):
            stamp(w_idx(i, j), w_idx(i, j + 1), g_w)
    for j in range(n):
        stamp_source(b_idx(0, j), g_w, lines.bit_lines[j])
        stamp_source(b_idx(m - 1, j), g_w, lines.bit_lines[j])
        for i in range(m - 1):
            stamp(b_idx(i, j), b_idx(i + 1, j), g_w)
    for i in range(m):
        for j in range(n):
            stamp(w_idx(i, j), b_idx(i, j), g_dev[i, j])

    a_mat = coo_matrix((vals, (rows_l, cols_l)), shape=(n_nodes, n_nodes)).tocsr()
    with np.errstate(all="ignore"):
        phi = spsolve(a_mat, rhs)
        if not np.all(np.isfinite(phi)):
            raise SingularMatrix("crossbar network is disconnected")
        phi = phi + spsolve(a_mat, rhs - a_mat @ phi)  # one refinement pass

    word_nodes = phi[: m * n].reshape(m, n)
    bit_nodes = phi[m * n :].reshape(m, n)
    return word_nodes - bit_nodes


def cell_voltages(xbar: CrossbarInstance, lines: LineVoltages) -> np.ndarray:
    if xbar.wire_resistance_per_segment > 0:
        return solve_cell_voltages_wired(xbar, lines)
    return cell_voltages_ideal(lines)


def cell_powers(v: np.ndarray, xbar: CrossbarInstance) -> np.ndarray:
    """Dissipated power P[i][j] = V[i][j]^2 * G(x[i][j])."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape != (xbar.rows, xbar.cols):
        raise ShapeMismatch(
            f"voltage matrix shape {v.shape} does not match "
            f"{(xbar.rows, xbar.cols)}"
        )
    return v * v * xbar.conductances()
