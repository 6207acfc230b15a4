import numpy as np
import pytest

from trigbvp.errors import InvalidInputError, InvalidPaddingError
from trigbvp.operators import (
    build_A,
    build_grid,
    build_operators,
    build_S_C,
    build_theta,
    default_padding,
    recover_coeffs,
    series_values,
)


def test_grid_example_padded():
    g = build_grid(1.0, 3.0, 128, 12)
    assert g.n == 104
    assert g.delta == pytest.approx(24 / 104)
    assert g.b == pytest.approx(256 / 104)
    assert g.delta == pytest.approx(0.23077, abs=1e-5)
    assert g.b == pytest.approx(2.46154, abs=1e-5)


def test_grid_example_unit_interval():
    g = build_grid(0.0, 1.0, 8, 1)
    assert g.n == 6
    assert g.delta == pytest.approx(1 / 6)
    assert g.b == pytest.approx(8 / 6)


def test_grid_endpoints_land_on_nodes():
    g = build_grid(-0.3, 2.2, 64, 10)
    x = g.original_points
    assert x[g.m] == pytest.approx(-0.3, abs=1e-14)
    assert x[g.m + g.n] == pytest.approx(2.2, abs=1e-14)
    assert g.points[-1] == pytest.approx(g.b)


def test_default_padding():
    assert default_padding(128) == 32
    assert build_grid(1.0, 3.0, 128).m == 32


@pytest.mark.parametrize("m", [4, 5, 0, -1])
def test_invalid_padding(m):
    with pytest.raises(InvalidPaddingError):
        build_grid(1.0, 3.0, 8, m)


@pytest.mark.parametrize("M", [6, 2, 100])
def test_grid_needs_power_of_two(M):
    with pytest.raises(InvalidInputError):
        build_grid(0.0, 1.0, M, 1)


def test_grid_needs_ordered_interval():
    with pytest.raises(InvalidInputError):
        build_grid(1.0, 1.0, 8, 1)


def test_sine_matrix_small():
    S, C = build_S_C(2)
    assert S.shape == (1, 1) and S[0, 0] == pytest.approx(1.0)
    assert C[0, 0] == pytest.approx(0.0, abs=1e-15)
    S, _ = build_S_C(4)
    assert np.allclose(S @ S, 2 * np.eye(3), atol=1e-14)


def test_sine_matrix_symmetric():
    S, C = build_S_C(128)
    assert np.max(np.abs(S - S.T)) <= 1e-15
    assert np.max(np.abs(C - C.T)) <= 1e-15


def test_theta_single_entry():
    S, _ = build_S_C(2)
    assert build_theta(S, np.array([1]), 2)[0, 0] == pytest.approx(1.0)


@pytest.mark.parametrize("M", [8, 64, 256])
def test_theta_symmetric_and_inverse(M):
    S, _ = build_S_C(M)
    K = np.arange(1, M)
    theta = build_theta(S, K, M)
    assert np.max(np.abs(theta - theta.T)) <= 1e-13
    inv = (2.0 / M) * (S * K.astype(float) ** 2) @ S
    assert np.max(np.abs(theta @ inv - np.eye(M - 1))) <= 1e-8


def test_theta_roundtrip_with_series():
    # z = S B at the nodes; -(b/pi)^2 Theta z recovers the sine part of v
    M = 8
    grid = build_grid(0.0, 1.0, M, 2)
    ops = build_operators(grid)
    rng = np.random.default_rng(8)
    B = rng.normal(size=M - 1)
    x = grid.points[1:M]
    z = series_values(0.0, 0.0, B, grid.b, x, 2)
    v = series_values(0.0, 0.0, B, grid.b, x, 0)
    assert np.max(np.abs(-(grid.b / np.pi) ** 2 * ops.Theta @ z - v)) <= 1e-10


@pytest.mark.parametrize("M", [8, 16, 64, 256])
def test_A_matches_series_derivative(M):
    grid = build_grid(1.0, 3.0, M)
    A = build_A(grid)
    rng = np.random.default_rng(M)
    a0, a1 = rng.normal(size=2)
    B = rng.normal(size=M - 1)
    V = series_values(a0, a1, B, grid.b, grid.points, 0)
    U = series_values(a0, a1, B, grid.b, grid.points, 1)
    assert np.max(np.abs(U - A @ V)) <= 1e-9 * np.max(np.abs(U))


def test_A_annihilates_constants_and_differentiates_lines():
    grid = build_grid(0.0, 2.0, 64)
    A = build_A(grid)
    assert np.max(np.abs(A @ np.ones(65))) <= 1e-9 * np.max(np.abs(A))
    assert np.allclose(A @ (3.0 * grid.points - 1.0), 3.0, atol=1e-9)


def test_operators_are_read_only():
    ops = build_operators(build_grid(0.0, 1.0, 8))
    for mat in (ops.S, ops.C, ops.Theta, ops.A):
        with pytest.raises(ValueError):
            mat[0, 0] = 1.0
    assert np.array_equal(ops.I_a, [-1, 1, -1, 1, -1, 1, -1])


def test_recover_coeffs_zero_and_linear():
    grid = build_grid(0.0, 1.0, 16)
    S, _ = build_S_C(16)
    a0, a1, B = recover_coeffs(np.zeros(17), grid, S)
    assert a0 == 0 and a1 == 0 and np.all(B == 0)
    a0, a1, B = recover_coeffs(2.5 * grid.points - 0.5, grid, S)
    assert a0 == pytest.approx(2.5) and a1 == pytest.approx(-0.5)
    assert np.max(np.abs(B)) <= 1e-12


def test_recover_coeffs_roundtrip():
    grid = build_grid(1.0, 3.0, 32)
    S, _ = build_S_C(32)
    rng = np.random.default_rng(32)
    a0, a1 = rng.normal(size=2)
    B = rng.normal(size=31)
    V = series_values(a0, a1, B, grid.b, grid.points, 0)
    r0, r1, rB = recover_coeffs(V, grid, S)
    assert r0 == pytest.approx(a0, rel=1e-9)
    assert r1 == pytest.approx(a1, rel=1e-9)
    assert np.max(np.abs(rB - B)) <= 1e-9 * np.max(np.abs(B))


def test_recover_coeffs_shape_check():
    grid = build_grid(0.0, 1.0, 8)
    S, _ = build_S_C(8)
    with pytest.raises(InvalidInputError):
        recover_coeffs(np.zeros(8), grid, S)


def test_series_values_order_check():
    with pytest.raises(InvalidInputError):
        series_values(0.0, 0.0, np.zeros(3), 1.0, 0.5, order=3)
