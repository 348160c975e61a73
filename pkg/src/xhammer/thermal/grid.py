"""Voxelization of the crossbar stack for the steady-state heat solve.

Axes: x runs along word lines (so column index j maps to x), y runs along
bit lines (row index i maps to y), z is the stack direction. Arrays are
C-ordered (z, y, x).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import GeometryInconsistent, GridTooLarge
from ..geometry import CrossbarGeometry

VOXEL_BUDGET = 10_000_000


def _vox(length_nm: float, voxel_nm: float, name: str) -> int:
    n = int(round(length_nm / voxel_nm))
    if n < 1:
        raise GeometryInconsistent(
            f"{name} = {length_nm} nm is thinner than one {voxel_nm} nm voxel"
        )
    return n


@dataclass
class ThermalGrid:
    """Voxel grid with per-voxel conductivity and Dirichlet flags.

    `dirichlet_mask` is true exactly on the bottom substrate layer, which is
    held at ambient; every other boundary face is zero-flux.
    """

    dims: tuple[int, int, int]  # (nx, ny, nz)
    voxel_size: float  # nm
    kappa: np.ndarray  # (nz, ny, nx), W/(m*K)
    dirichlet_mask: np.ndarray  # (nz, ny, nx), bool
    cell_probe_index: dict[tuple[int, int], tuple[int, int, int]]  # (iz, iy, ix)
    cell_filament_voxels: dict[tuple[int, int], np.ndarray]  # flat indices
    layer_bounds: dict[str, tuple[int, int]] = field(default_factory=dict)
    _system_cache: object = field(default=None, repr=False, compare=False)

    @property
    def n_voxels(self) -> int:
        nx, ny, nz = self.dims
        return nx * ny * nz

    @property
    def voxel_size_m(self) -> float:
        return self.voxel_size * 1e-9

    @property
    def voxel_volume_m3(self) -> float:
        return self.voxel_size_m**3

    def flat_index(self, iz: int, iy: int, ix: int) -> int:
        nx, ny, _ = self.dims
        return (iz * ny + iy) * nx + ix


@dataclass(frozen=True)
class HeatSource:
    """Prescribed total power deposited uniformly over a voxel set."""

    cell: tuple[int, int]
    total_power: float  # W
    source_voxels: np.ndarray  # flat indices
    volumetric_density: float  # W/m^3

    @classmethod
    def in_filament(
        cls, grid: ThermalGrid, cell: tuple[int, int], total_power: float
    ) -> "HeatSource":
        if total_power < 0:
            raise ValueError("heat source power must be >= 0")
        cell = (int(cell[0]), int(cell[1]))
        if cell not in grid.cell_filament_voxels:
            raise GeometryInconsistent(f"cell {cell} has no filament in this grid")
        voxels = grid.cell_filament_voxels[cell]
        density = total_power / (len(voxels) * grid.voxel_volume_m3)
        return cls(cell, float(total_power), voxels, density)


def build_grid(geom: CrossbarGeometry, voxel_size: float = 5.0) -> ThermalGrid:
    """Voxelize the crossbar stack.

    Dimensions snap to the voxel lattice (each named length must round to at
    least one voxel). Cells are laid out on a uniform pitch with half a
    spacing of margin on every side, so each cell owns a pitch x pitch tile
    and a translation-invariant coupling kernel is meaningful.
    """
    if voxel_size <= 0:
        raise GeometryInconsistent("voxel_size must be > 0")
    geom.check_filament_fits()

    dz = float(voxel_size)
    pitch_v = _vox(geom.pitch, dz, "cell pitch")
    width_v = _vox(geom.electrode_width, dz, "electrode_width")
    if width_v >= pitch_v:
        raise GeometryInconsistent(
            "electrode_spacing rounds below one voxel; adjacent electrodes merge"
        )

    n_sub = _vox(geom.substrate_thickness, dz, "substrate_thickness")
    n_ins = _vox(geom.insulator_thickness, dz, "insulator_thickness")
    n_el = _vox(geom.electrode_thickness, dz, "electrode_thickness")
    t_top = geom.top_electrode_thickness
    n_el_top = n_el if t_top is None else _vox(t_top, dz, "top_electrode_thickness")
    n_ox = _vox(geom.oxide_thickness, dz, "oxide_thickness")
    n_gap = int(round(geom.filament_gap / dz))
    if n_gap >= n_ox:
        raise GeometryInconsistent("filament_gap leaves no filament inside the oxide")

    nx = geom.cols * pitch_v
    ny = geom.rows * pitch_v
    nz = n_sub + n_ins + n_el + n_el_top + n_ox
    if nx * ny * nz > VOXEL_BUDGET:
        raise GridTooLarge(
            f"{nx}x{ny}x{nz} = {nx * ny * nz} voxels exceeds the "
            f"{VOXEL_BUDGET} voxel budget; use a coarser voxel_size"
        )

    z_sub = (0, n_sub)
    z_ins = (n_sub, n_sub + n_ins)
    z_bot = (z_ins[1], z_ins[1] + n_el)
    z_ox = (z_bot[1], z_bot[1] + n_ox)
    z_top = (z_ox[1], z_ox[1] + n_el_top)

    k = geom.material_conductivities
    kappa = np.empty((nz, ny, nx), dtype=np.float64)
    kappa[slice(*z_sub)] = k["substrate"]
    # insulator fills everything above the substrate; stripes overwrite it
    kappa[z_ins[0] :] = k["insulator"]

    margin = (pitch_v - width_v) // 2
    col_x0 = np.arange(geom.cols) * pitch_v + margin
    row_y0 = np.arange(geom.rows) * pitch_v + margin
    for x0 in col_x0:  # bottom electrodes run along y (columns)
        kappa[slice(*z_bot), :, x0 : x0 + width_v] = k["electrode"]
    kappa[slice(*z_ox)] = k["oxide"]
    for y0 in row_y0:  # top electrodes run along x (rows)
        kappa[slice(*z_top), y0 : y0 + width_v, :] = k["electrode"]

    # filament discs at each cell centre; an optional oxide barrier of
    # `filament_gap` nm separates the filament top from the top electrode
    z_fil = (z_ox[0], z_ox[1] - n_gap)
    r_v = geom.filament_radius / dz
    xs = np.arange(nx) + 0.5
    ys = np.arange(ny) + 0.5
    probe_z = z_fil[0] + (z_fil[1] - z_fil[0]) // 2
    probes: dict[tuple[int, int], tuple[int, int, int]] = {}
    filaments: dict[tuple[int, int], np.ndarray] = {}
    for i in range(geom.rows):
        cy = (i + 0.5) * pitch_v
        iy_c = min(int(cy), ny - 1)
        for j in range(geom.cols):
            cx = (j + 0.5) * pitch_v
            ix_c = min(int(cx), nx - 1)
            in_disc = (xs[None, :] - cx) ** 2 + (ys[:, None] - cy) ** 2 <= (
                r_v**2 + 1e-9
            )
            iy, ix = np.nonzero(in_disc)
            if len(iy) == 0:
                iy, ix = np.array([iy_c]), np.array([ix_c])
            kappa[slice(*z_fil), iy, ix] = k["filament"]
            flat = []
            for iz in range(*z_fil):
                flat.append((iz * ny + iy) * nx + ix)
            filaments[(i, j)] = np.sort(np.concatenate(flat))
            probes[(i, j)] = (probe_z, iy_c, ix_c)

    dirichlet = np.zeros((nz, ny, nx), dtype=bool)
    dirichlet[0] = True  # substrate bottom layer pinned at ambient

    return ThermalGrid(
        dims=(nx, ny, nz),
        voxel_size=dz,
        kappa=kappa,
        dirichlet_mask=dirichlet,
        cell_probe_index=probes,
        cell_filament_voxels=filaments,
        layer_bounds={
            "substrate": z_sub,
            "insulator": z_ins,
            "bottom_electrode": z_bot,
            "oxide": z_ox,
            "top_electrode": z_top,
        },
    )
