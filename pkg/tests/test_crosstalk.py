import numpy as np
import pytest

from xhammer.crosstalk import coupling_matrix, crosstalk_temperatures
from xhammer.errors import ShapeMismatch

AMB = 300.0


def test_all_ambient_gives_zero(make_kernel):
    k = make_kernel({(0, 1): 0.3, (0, -1): 0.3})
    t = np.full((3, 3), AMB)
    assert not crosstalk_temperatures(t, k, AMB).any()


def test_single_neighbour_contribution(make_kernel):
    k = make_kernel({(0, 1): 0.3})
    t = np.full((1, 3), AMB)
    t[0, 2] = AMB + 100.0  # source one column to the right of cell (0,1)
    t_in = crosstalk_temperatures(t, k, AMB)
    assert t_in[0, 1] == pytest.approx(30.0)
    assert t_in[0, 0] == 0.0  # offset (0,2) not in kernel
    assert t_in[0, 2] == 0.0  # no self-coupling


def test_two_symmetric_neighbours_superpose(make_kernel):
    k = make_kernel({(0, 1): 0.3, (0, -1): 0.3})
    t = np.full((1, 3), AMB)
    t[0, 0] = AMB + 100.0
    t[0, 2] = AMB + 100.0
    t_in = crosstalk_temperatures(t, k, AMB)
    assert t_in[0, 1] == pytest.approx(60.0)


def test_self_coupling_is_excluded(make_kernel):
    k = make_kernel({(0, 1): 0.25, (1, 0): 0.25})
    t = np.full((3, 3), AMB)
    base = crosstalk_temperatures(t, k, AMB)
    t[1, 1] = AMB + 500.0  # perturb only the cell itself
    perturbed = crosstalk_temperatures(t, k, AMB)
    assert perturbed[1, 1] == base[1, 1] == 0.0


def test_linearity_in_over_temperature(make_kernel, rng):
    k = make_kernel({(0, 1): 0.2, (0, -1): 0.2, (1, 0): 0.1, (-1, 0): 0.1})
    u = rng.uniform(0.0, 80.0, size=(4, 5))
    one = crosstalk_temperatures(AMB + u, k, AMB)
    two = crosstalk_temperatures(AMB + 2 * u, k, AMB)
    assert np.allclose(two, 2 * one)


def test_mirror_equivariance(make_kernel, rng):
    sym = {(0, 1): 0.2, (0, -1): 0.2, (1, 0): 0.15, (-1, 0): 0.15}
    k = make_kernel(sym)
    u = rng.uniform(0.0, 50.0, size=(4, 4))
    flipped = crosstalk_temperatures(AMB + u[:, ::-1], k, AMB)
    direct = crosstalk_temperatures(AMB + u, k, AMB)
    assert np.allclose(flipped, direct[:, ::-1])


def test_shape_checks(make_kernel):
    k = make_kernel({(0, 1): 0.2})
    with pytest.raises(ShapeMismatch):
        crosstalk_temperatures(np.zeros(5), k, AMB)
    with pytest.raises(ShapeMismatch):
        crosstalk_temperatures(np.full((2, 2), AMB), k, AMB + 10.0)


def test_coupling_matrix_matches_direct_sum(make_kernel, rng):
    k = make_kernel({(0, 1): 0.2, (1, 1): 0.05, (-2, 0): 0.03})
    rows, cols = 4, 3
    mat = coupling_matrix(k, rows, cols)
    assert np.all(np.diag(mat) == 0.0)
    u = rng.uniform(0.0, 40.0, size=(rows, cols))
    via_matrix = (mat @ u.ravel()).reshape(rows, cols)
    direct = crosstalk_temperatures(AMB + u, k, AMB)
    assert np.allclose(via_matrix, direct)
