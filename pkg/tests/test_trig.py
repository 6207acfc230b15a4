import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from trigbvp import CutoffSpec, OddTrigPoly, cutoff_eval, evaluate, interpolate_odd, smooth_extend
from trigbvp.errors import InvalidInputError


def _odd_grid(N, b):
    return -b + 2 * b * np.arange(N) / N


def direct_coeffs(y):
    """O(N^2) reference: a_j = (2/N) sum_k (-1)^j y_k sin(2 pi j k / N)."""
    N = len(y)
    M = N // 2
    k = np.arange(N)
    return np.array(
        [(2.0 / N) * (-1) ** j * np.sum(y * np.sin(2 * np.pi * j * k / N)) for j in range(1, M)]
    )


def test_basis_function_reproduces_itself():
    b = 1.7
    y = np.sin(np.pi * _odd_grid(8, b) / b)
    poly = interpolate_odd(y, b)
    assert np.allclose(poly.coeffs, [1.0, 0.0, 0.0], atol=1e-14)
    assert poly.degree == 3 and poly.M == 4


def test_zero_samples():
    assert np.all(interpolate_odd(np.zeros(8), 1.0).coeffs == 0.0)


@pytest.mark.parametrize("N", [4, 8, 16, 64, 128, 256])
def test_fft_matches_direct_sum(N):
    b = 2.0
    x = _odd_grid(N, b)
    y = x * (b - np.abs(x))
    poly = interpolate_odd(y, b)
    assert np.max(np.abs(poly.coeffs - direct_coeffs(y))) <= 1e-12


@pytest.mark.parametrize("N", [8, 32, 256])
def test_interpolation_exact_at_nodes(N):
    rng = np.random.default_rng(N)
    b = 1.3
    x = _odd_grid(N, b)
    # odd periodic data: zero at -b and 0, antisymmetric pairs otherwise
    half = rng.normal(size=N // 2 - 1)
    y = np.zeros(N)
    y[N // 2 + 1 :] = half
    y[1 : N // 2] = -half[::-1]
    poly = interpolate_odd(y, b)
    assert np.max(np.abs(poly(x) - y)) <= 1e-10 * np.max(np.abs(y))


@pytest.mark.parametrize("bad", [np.zeros(6), np.zeros(2), np.zeros((4, 2)), np.array([0, 1, np.nan, 0.0])])
def test_interpolate_rejects_bad_input(bad):
    with pytest.raises(InvalidInputError):
        interpolate_odd(bad, 1.0)


def test_evaluate_examples():
    poly = OddTrigPoly(np.pi, [1.0, 0.0, 0.0])
    assert evaluate(poly, np.pi / 2) == pytest.approx(1.0, abs=1e-15)
    assert evaluate(poly, 0.0, order=1) == pytest.approx(1.0, abs=1e-15)
    with pytest.raises(InvalidInputError):
        evaluate(poly, 0.0, order=3)


@settings(max_examples=30, deadline=None)
@given(st.floats(-10, 10), st.integers(0, 1000))
def test_odd_symmetry(x, seed):
    rng = np.random.default_rng(seed)
    poly = OddTrigPoly(2.5, rng.normal(size=15))
    assert evaluate(poly, -x) == pytest.approx(-evaluate(poly, x), rel=1e-12, abs=1e-12)


def test_derivatives_match_finite_differences():
    rng = np.random.default_rng(3)
    b = 1.9
    poly = OddTrigPoly(b, rng.normal(size=15) / np.arange(1, 16) ** 2)
    x = rng.uniform(-b, b, 100)
    h = 1e-5
    for order in (1, 2):
        fd = (evaluate(poly, x + h, order - 1) - evaluate(poly, x - h, order - 1)) / (2 * h)
        exact = evaluate(poly, x, order)
        assert np.max(np.abs(fd - exact)) <= 1e-6 * np.max(np.abs(exact))


def test_cutoff_examples():
    spec = CutoffSpec(1.0, 3.0, 0.5)
    assert cutoff_eval(spec, 2.0) == 1.0
    assert cutoff_eval(spec, 0.4) == 0.0
    assert cutoff_eval(spec, 3.6) == 0.0
    assert np.all(cutoff_eval(spec, np.linspace(1.0, 3.0, 50)) == 1.0)
    # midpoint of the transition band
    assert cutoff_eval(spec, 0.75) == pytest.approx(0.5, abs=1e-15)


def test_cutoff_symmetries():
    spec = CutoffSpec(1.0, 3.0, 0.5)
    t = np.linspace(0.0, 1.0, 41)
    x = 0.5 + 0.5 * t
    # psi(t) + psi(1 - t) = 1 within the band, and h is mirror symmetric about (s + e)/2
    assert np.allclose(cutoff_eval(spec, x) + cutoff_eval(spec, 0.5 + 0.5 * (1 - t)), 1.0, atol=1e-15)
    assert np.allclose(cutoff_eval(spec, x), cutoff_eval(spec, 4.0 - x), atol=1e-15)


def test_cutoff_scalar_and_monotone():
    spec = CutoffSpec(0.0, 1.0, 0.25)
    assert np.ndim(cutoff_eval(spec, 0.1)) == 0
    vals = cutoff_eval(spec, np.linspace(-0.25, 0.0, 200))
    assert np.all(np.diff(vals) >= 0)


def test_cutoff_smoothness_proxy():
    spec = CutoffSpec(1.0, 3.0, 0.5)
    h = 1e-5
    for edge in (0.5, 1.0, 3.0, 3.5):
        x = edge + h * np.arange(-20, 21)
        d1 = np.diff(cutoff_eval(spec, x)) / h
        d2 = np.diff(d1) / h
        assert np.max(np.abs(np.diff(d1))) <= 1e-3
        assert np.all(np.isfinite(d2))


@pytest.mark.parametrize("args", [(1.0, 1.0, 0.1), (2.0, 1.0, 0.1), (0.0, 1.0, 0.0), (0.0, 1.0, -1.0)])
def test_cutoff_spec_validation(args):
    with pytest.raises(InvalidInputError):
        CutoffSpec(*args)


def test_smooth_extend_zero_function():
    poly = smooth_extend(lambda x: 0.0 * x, CutoffSpec(1.0, 3.0, 0.5), 64)
    assert np.all(poly.coeffs == 0.0)


def test_smooth_extend_constant_exact_on_grid():
    spec = CutoffSpec(1.0, 3.0, 0.5)
    N = 128
    poly = smooth_extend(lambda x: np.ones_like(x), spec, N)
    M = N // 2
    x = spec.s - spec.delta + np.arange(M + 1) * (3.0 / M)
    inside = x[(x >= 1.0 - 1e-12) & (x <= 3.0 + 1e-12)]
    assert np.max(np.abs(poly(inside) - 1.0)) <= 1e-10


def test_smooth_extend_off_grid_accuracy():
    # delta chosen as for a padded grid with M = 128, m = 32
    spec = CutoffSpec(1.0, 3.0, 1.0)
    f = lambda x: x * np.cos(np.pi * x / 2)
    poly = smooth_extend(f, spec, 256)
    x = np.linspace(1.0, 3.0, 2001)
    assert np.max(np.abs(poly(x) - f(x))) <= 1e-6


def test_smooth_extend_rejects_bad_input():
    spec = CutoffSpec(1.0, 3.0, 0.5)
    with pytest.raises(InvalidInputError):
        smooth_extend(np.cos, spec, 48)
    with pytest.raises(InvalidInputError):
        smooth_extend(lambda x: np.where(x > 2.0, np.inf, x), spec, 16)


def test_poly_is_immutable():
    poly = OddTrigPoly(1.0, [1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        poly.coeffs[0] = 5.0
    with pytest.raises(InvalidInputError):
        OddTrigPoly(0.0, [1.0])
