import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from mellin_lab._numerics import bracket, fit_power
from mellin_lab.kco import (
    CutoffFunction, ThetaGrid, asymptotic_remainder, cauchy_riemann_residual, delta_shift_error,
    evaluate_strip, kernel_cutoff, kernel_transform, symbol_kernel, verify_strip_membership,
)

SHIFTED = CutoffFunction("shifted", T=3.0, shift=1.0)


def growing(mu):
    return lambda r: (1 + np.asarray(r, complex) ** 2) ** ((mu + 1j) / 2)


def decaying(r):
    return bracket(np.asarray(r, float)) ** -2 + 0j


def test_cutoff_validation():
    with pytest.raises(ValueError):
        CutoffFunction("box")
    with pytest.raises(ValueError):
        CutoffFunction("shifted", T=1.0, shift=1.0)
    with pytest.raises(ValueError):
        CutoffFunction("flat", T=1.0, eps=2.0)
    for phi in (CutoffFunction(), SHIFTED, CutoffFunction("flat", T=2.0)):
        assert phi(0.0) == pytest.approx(1.0)
        assert phi(np.array([-phi.T, phi.T, 1.01 * phi.T])).max() == 0


def test_derivatives_at_zero_against_mpmath():
    phi = CutoffFunction("shifted")
    width = phi.T - abs(phi.shift)
    norm = mpmath.exp(1 - 1 / (1 - (phi.shift / width) ** 2))

    def f(x):
        z = (x - phi.shift) / width
        return mpmath.exp(1 - 1 / (1 - z**2)) / norm

    got = phi.derivatives_at_zero(4)
    ref = [float(mpmath.diff(f, 0, k)) for k in range(5)]
    np.testing.assert_allclose(got, ref, rtol=1e-8)
    bump = CutoffFunction().derivatives_at_zero(3)
    assert abs(bump[1]) < 1e-12 and abs(bump[3]) < 1e-10


def test_kernel_pair_roundtrip():
    grid = ThetaGrid(16.0, 4096)
    vals = decaying(grid.rho)
    back = kernel_transform(symbol_kernel(vals, grid), grid)
    assert np.abs(back - vals).max() < 1e-13


def test_kernel_of_bracket_minus_two():
    # (2pi)^{-1} int e^{i theta rho} <rho>^{-2} drho = e^{-|theta|}/2
    grid = ThetaGrid()
    k = symbol_kernel(decaying(grid.rho), grid)
    th = grid.theta
    sel = (np.abs(th) > 0.5) & (np.abs(th) < 10)
    assert np.abs(k[sel] - 0.5 * np.exp(-np.abs(th[sel]))).max() < 1e-6


def test_constant_symbol():
    h = kernel_cutoff(CutoffFunction(), lambda r: 2.5 + 0 * np.asarray(r), 0)
    assert np.abs(h.line_values() - 2.5).max() < 1e-12
    z = np.array([0.3 + 0.7j, 5 - 2j, -40 + 2.9j])
    assert np.abs(evaluate_strip(h, z) - 2.5).max() < 1e-12


def test_aliasing_detected():
    with pytest.raises(ValueError, match="aliasing"):
        kernel_cutoff(CutoffFunction(), lambda r: np.exp(1j * 31.0 * np.asarray(r)), 0)


def test_strip_evaluation_consistency():
    h = kernel_cutoff(SHIFTED, growing(1), 1)
    g = h.grid.rho
    sel = np.abs(g) < 50
    ref = h.line_values()[sel]
    assert np.abs(h(g[sel]) - ref).max() < 1e-10 * np.abs(ref).max()
    assert cauchy_riemann_residual(h, np.linspace(-20, 20, 9), np.linspace(-2, 2, 5)) < 1e-6
    for d in (-2.0, -1.0, 0.5, 2.0):
        assert delta_shift_error(h, d) < 1e-10
    with pytest.raises(ValueError):
        h(np.array([1 + 3.5j]))


@pytest.mark.parametrize("mu", [-1, 0, 1])
@pytest.mark.parametrize("K", [1, 2, 3])
def test_remainder_orders(mu, K):
    rep = asymptotic_remainder(SHIFTED, growing(mu), mu, K)
    assert rep.passed
    assert abs(rep.measured["exponent"] - (mu - K)) < 0.3


def test_remainder_exact_cases():
    const = asymptotic_remainder(SHIFTED, lambda r: 2 + 0 * np.asarray(r, complex), 0, 1)
    assert const.passed and const.measured["max_remainder"] < 1e-12
    # a linear symbol is reproduced by two terms; kept below the Nyquist edge of the grid
    lin = asymptotic_remainder(SHIFTED, lambda r: 3 * np.asarray(r, complex) + 1, 1, 2, rho_range=(16, 256))
    assert lin.passed and lin.measured["exponent"] == -np.inf
    with pytest.raises(ValueError):
        asymptotic_remainder(SHIFTED, decaying, -2, 0)


def test_flat_cutoff_remainder_is_fast():
    flat = CutoffFunction("flat", T=2.0)
    a = growing(1)
    h = kernel_cutoff(flat, a, 1)
    r = h.grid.rho
    sel = (r >= 16) & (r <= 200)
    diff = np.abs(h.line_values()[sel] - a(r[sel]))
    assert fit_power(r[sel], diff)[0] < 1 - 6


def test_strip_membership():
    assert verify_strip_membership(kernel_cutoff(SHIFTED, growing(1), 1)).passed
    # the narrow default bump leaves a transient beyond the sampled range; T=2 settles in time
    h = kernel_cutoff(CutoffFunction(T=2.0), decaying, -2)
    assert verify_strip_membership(h).passed
    wrong = kernel_cutoff(CutoffFunction(T=2.0), decaying, -3)
    assert not verify_strip_membership(wrong).passed


@given(a=st.floats(-3, 3), b=st.floats(-3, 3), x=st.floats(-20, 20), d=st.floats(-2, 2))
def test_bilinear(a, b, x, d):
    p = CutoffFunction()
    f = decaying
    g = lambda r: np.exp(-np.asarray(r, float) ** 2 / 50) + 0j
    h1, h2 = kernel_cutoff(p, f, -2), kernel_cutoff(p, g, -10)
    h12 = kernel_cutoff(p, lambda r: a * f(r) + b * g(r), -2)
    z = np.array([x + 1j * d])
    assert np.abs(h12(z) - a * h1(z) - b * h2(z)).max() < 1e-12
