import numpy as np
import pytest

from xhammer.errors import NoConvergence, SingularSystem
from xhammer.geometry import CrossbarGeometry
from xhammer.thermal import build_grid, solve_steady_heat
from xhammer.thermal.grid import HeatSource, ThermalGrid

AMBIENT = 300.0


def uniform_grid(nx, ny, nz, kappa=2.0, voxel=5.0):
    """Synthetic grid: uniform conductivity, Dirichlet bottom layer."""
    k = np.full((nz, ny, nx), kappa)
    dirichlet = np.zeros((nz, ny, nx), dtype=bool)
    dirichlet[0] = True
    return ThermalGrid(
        dims=(nx, ny, nz),
        voxel_size=voxel,
        kappa=k,
        dirichlet_mask=dirichlet,
        cell_probe_index={},
        cell_filament_voxels={},
    )


def layer_source(grid, z, power):
    nx, ny, nz = grid.dims
    flat = np.arange(nx * ny) + z * nx * ny
    return HeatSource((0, 0), power, flat, power / (len(flat) * grid.voxel_volume_m3))


def test_zero_power_gives_exact_ambient():
    grid = build_grid(CrossbarGeometry(rows=2, cols=2), 5.0)
    src = HeatSource.in_filament(grid, (0, 0), 0.0)
    fld = solve_steady_heat(grid, [src], ambient=AMBIENT, tol=1e-6)
    assert np.all(fld.values == AMBIENT)
    assert fld.iterations == 0


def test_planar_sheet_matches_1d_slab_solution():
    # uniform slab, sheet of power P at layer h: analytic T = T0 + P*h_eff/(kappa*A)
    kappa, voxel = 2.0, 5.0
    nx = ny = 10
    nz = 30
    grid = uniform_grid(nx, ny, nz, kappa, voxel)
    h = 18
    power = 40e-6
    fld = solve_steady_heat(grid, [layer_source(grid, h, power)], AMBIENT, tol=1e-8)
    dz = voxel * 1e-9
    area = nx * ny * dz * dz
    for z_probe in (5, 12, 18):
        height = min(z_probe, h) * dz  # distance from the Dirichlet layer centres
        expected = AMBIENT + power * height / (kappa * area)
        got = fld.values[z_probe].mean()
        assert got == pytest.approx(expected, rel=5e-3)
    # above the sheet the field is flat (zero flux)
    assert fld.values[h:].max() - fld.values[h:].min() < 1e-6


def test_iterative_matches_dense_direct(rng):
    # heterogeneous conductivity, random sources, <= 8000 voxels
    nx, ny, nz = 12, 12, 14
    grid = uniform_grid(nx, ny, nz, 1.0)
    grid.kappa = rng.uniform(0.5, 150.0, size=(nz, ny, nx))
    from xhammer.thermal.solve import _assemble

    sys = _assemble(grid)
    b = np.zeros(sys.matrix.shape[0])
    flat = rng.choice(len(sys.flat_of_unknown), size=10, replace=False)
    b[flat] = rng.uniform(1e-6, 1e-4, size=10)
    dense = np.linalg.solve(sys.matrix.toarray(), b)

    sources = [
        HeatSource((0, 0), float(b[u]), np.array([sys.flat_of_unknown[u]]), 0.0)
        for u in flat
    ]
    fld = solve_steady_heat(grid, sources, AMBIENT, tol=1e-12)
    iterative = fld.values.ravel()[sys.flat_of_unknown] - AMBIENT
    rel = np.linalg.norm(iterative - dense) / np.linalg.norm(dense)
    assert rel < 1e-8


def test_linearity_of_over_temperature():
    grid = build_grid(CrossbarGeometry(rows=3, cols=3), 5.0)
    tol = 1e-8
    one = solve_steady_heat(grid, [HeatSource.in_filament(grid, (1, 1), 50e-6)], AMBIENT, tol=tol)
    two = solve_steady_heat(grid, [HeatSource.in_filament(grid, (1, 1), 100e-6)], AMBIENT, tol=tol)
    u1 = one.values - AMBIENT
    u2 = two.values - AMBIENT
    assert np.linalg.norm(u2 - 2 * u1) / np.linalg.norm(u2) < 10 * tol


def test_superposition_of_sources():
    grid = build_grid(CrossbarGeometry(rows=3, cols=3), 5.0)
    tol = 1e-8
    a = HeatSource.in_filament(grid, (0, 0), 80e-6)
    b = HeatSource.in_filament(grid, (2, 2), 40e-6)
    fa = solve_steady_heat(grid, [a], AMBIENT, tol=tol)
    fb = solve_steady_heat(grid, [b], AMBIENT, tol=tol)
    fab = solve_steady_heat(grid, [a, b], AMBIENT, tol=tol)
    lhs = fab.values - AMBIENT
    rhs = (fa.values - AMBIENT) + (fb.values - AMBIENT)
    assert np.linalg.norm(lhs - rhs) / np.linalg.norm(lhs) < 10 * tol


def test_maximum_principle():
    grid = build_grid(CrossbarGeometry(rows=3, cols=3), 5.0)
    src = HeatSource.in_filament(grid, (1, 1), 100e-6)
    fld = solve_steady_heat(grid, [src], AMBIENT, tol=1e-10)
    assert fld.values.min() >= AMBIENT - 1e-6
    hottest = np.argmax(fld.values.ravel())
    assert hottest in src.source_voxels


def test_probe_temperatures_match_field():
    grid = build_grid(CrossbarGeometry(rows=3, cols=3), 5.0)
    src = HeatSource.in_filament(grid, (1, 1), 100e-6)
    fld = solve_steady_heat(grid, [src], AMBIENT, tol=1e-8)
    for cell, idx in grid.cell_probe_index.items():
        assert fld.cell_temperatures[cell] == fld.values[idx]


def test_no_convergence_reports_residual():
    grid = build_grid(CrossbarGeometry(rows=2, cols=2), 5.0)
    src = HeatSource.in_filament(grid, (0, 0), 100e-6)
    with pytest.raises(NoConvergence) as err:
        solve_steady_heat(grid, [src], AMBIENT, tol=1e-10, maxiter=2)
    assert err.value.residual > 1e-10


def test_singular_without_dirichlet():
    grid = uniform_grid(4, 4, 4)
    grid.dirichlet_mask[:] = False
    with pytest.raises(SingularSystem):
        solve_steady_heat(grid, [], AMBIENT)


def test_tol_bound_enforced():
    grid = uniform_grid(4, 4, 4)
    with pytest.raises(ValueError):
        solve_steady_heat(grid, [], AMBIENT, tol=1e-3)
