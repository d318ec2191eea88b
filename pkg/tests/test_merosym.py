import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mellin_lab.kco import CutoffFunction, kernel_cutoff
from mellin_lab.merosym import (
    MeroSymbol, PoleDatum, Rect, compose_mero, elliptic_inverse, holo_as_mero, holo_spectrum,
    identity_residual, inverse_residual, invert_one_plus, make_index_symbol, pole_data_defect,
    rational_pole_symbol, relative_index_check, scalar_symbol, toeplitz_index_oracle,
    verify_order_drop, winding_number, zero_symbol,
)
from mellin_lab.report import InconclusiveNumerics

LINES = [-0.5, 0.5, 1.5]
C, P = 0.7 + 0.2j, 0.3 + 1.0j


@pytest.fixture(scope="module")
def index_symbols():
    return {k: make_index_symbol(k, 0.0) for k in range(-3, 4)}


def test_compose_examples():
    one = scalar_symbol(lambda w: 1 + 0 * w, order=0.0)
    f = rational_pole_symbol(2.0, -1 + 1j)
    w = np.array([0.3 + 0.2j, 4 - 1j])
    np.testing.assert_allclose(compose_mero(one, f)(w), f(w))
    f1 = rational_pole_symbol(1.0, 0.2)
    prod = compose_mero(f1, f)
    assert sorted((d.p for d in prod.poles), key=lambda z: z.real) == [-1 + 1j, 0.2]
    assert pole_data_defect(prod) < 1e-10
    sq = compose_mero(f1, f1)
    assert [(d.p, d.m) for d in sq.poles] == [(0.2, 1)]
    assert pole_data_defect(sq) < 1e-10
    e = compose_mero(scalar_symbol(lambda w: w, order=1.0), scalar_symbol(lambda w: w**2, order=2.0))
    assert e.poles == () and e.order == 3.0
    with pytest.raises(ValueError):
        compose_mero(zero_symbol(2), f)


def test_partial_fraction_residues():
    # 1/((w-a)(w-b)) = (1/(a-b)) (1/(w-a) - 1/(w-b))
    a, b = 0.2, -1 + 1j
    prod = compose_mero(rational_pole_symbol(1.0, a), rational_pole_symbol(1.0, b))
    res = {d.p: d.laurent[0][0, 0] for d in prod.poles}
    assert abs(res[a] - 1 / (a - b)) < 1e-10
    assert abs(res[b] + 1 / (a - b)) < 1e-10


def test_invert_zero():
    mi = invert_one_plus(zero_symbol())
    assert mi.poles == ()
    assert np.abs(mi(np.array([0.1 + 3j]))).max() == 0


def test_invert_scalar_pole():
    m = rational_pole_symbol(C, P)
    mi = invert_one_plus(m, betas=(0.5,))
    assert len(mi.poles) == 1
    assert abs(mi.poles[0].p - (P - C)) < 1e-8
    assert abs(mi.poles[0].laurent[0][0, 0] + C) < 1e-8
    assert identity_residual(m, mi, LINES) < 1e-8
    w = np.array([2 + 3j, -1 + 0.5j])
    assert np.abs(mi(w)[:, 0, 0] + C / (w - P + C)).max() < 1e-12


def test_invert_rank_one():
    proj = np.array([[1, 1], [0, 0]], dtype=complex)
    m = rational_pole_symbol(C, P, proj)
    mi = invert_one_plus(m)
    assert len(mi.poles) == 1 and mi.poles[0].rank == 1
    assert identity_residual(m, mi, LINES) < 1e-8


def test_involution():
    m = rational_pole_symbol(C, P)
    back = invert_one_plus(invert_one_plus(m))
    for b in LINES:
        w = b + 1j * np.linspace(-40, 40, 201)
        assert np.abs(back(w) - m(w)).max() < 1e-7


def test_no_invertible_line():
    with pytest.raises(ValueError):
        invert_one_plus(scalar_symbol(lambda w: -1 + 0 * w))


def test_rank_bound():
    datum = PoleDatum(0.0, 0, (np.eye(2),))
    with pytest.raises(ValueError):
        MeroSymbol(lambda w: 0 * w, (datum,), -1.0, 2, rank_bound=1)


def test_holo_spectrum():
    def D(w):
        z = 0 * w
        return np.stack([np.stack([w - 0.3, z], -1), np.stack([z, (w - 1j) * (w + 0.5)], -1)], -2)

    zeros, smin = holo_spectrum(D, Rect(-1.0137, 1.0113, -2.0071, 2.0093))
    pts = sorted((z for z, _ in zeros), key=lambda z: (z.real, z.imag))
    np.testing.assert_allclose(pts, [-0.5, 1j, 0.3], atol=1e-10)
    assert smin > 1e-8


def test_winding_trivial_and_blaschke():
    assert winding_number(zero_symbol(), 0.5)[0] == 0
    beta, a, b = 0.5, 0.2, 0.8
    # 1 + f = ((w - a)/(w - b))^2: zero left of the line, pole right of it
    f = scalar_symbol(lambda w: ((w - a) / (w - b)) ** 2 - 1)
    k, res = winding_number(f, beta, tau_max=4000.0, n=400001)
    assert k == 2 and res < 0.01
    # oracle: (2pi)^{-1} int Re(F'/F)(beta + i tau) dtau over the whole line, tau = tan(t)
    t = np.linspace(-np.pi / 2, np.pi / 2, 200001)[1:-1]
    w = beta + 1j * np.tan(t)
    integrand = np.real(2 / (w - a) - 2 / (w - b)) / np.cos(t) ** 2
    assert abs(np.trapezoid(integrand, t) / (2 * np.pi) - k) < 1e-4


def test_winding_vanishing_symbol():
    f = scalar_symbol(lambda w: (w - 0.5) - 1)
    with pytest.raises(ZeroDivisionError):
        winding_number(f, 0.5)


def test_index_symbols_wind(index_symbols):
    for k, f in index_symbols.items():
        w, res = winding_number(f, 0.5)
        assert w == k and res < 0.01


def test_toeplitz_zero():
    assert toeplitz_index_oracle(zero_symbol(), 0.0).index == 0


@pytest.mark.parametrize("k", [1, -2])
def test_toeplitz_matches_winding(index_symbols, k):
    r = toeplitz_index_oracle(index_symbols[k], 0.0)
    assert r.per_size == {128: k, 256: k, 512: k}


def test_relative_index(index_symbols):
    S = index_symbols
    rep = relative_index_check(S[2], S[-1], (S[1], S[-2]))
    assert rep.passed
    assert rep.measured["lhs"] == rep.measured["rhs"] == 3


def test_elliptic_inverse_entire():
    g = scalar_symbol(lambda w: w + 2, order=1.0)
    f = elliptic_inverse(g, 0.0, 1.0)
    assert inverse_residual(g, f, [-0.25, 0.0, 0.25]) < 1e-10
    z = np.array([0.1 + 2j, -0.3 - 1j])
    assert np.abs(f(z)[:, 0, 0] - 1 / (z + 2)).max() < 1e-10


def test_elliptic_inverse_with_zero():
    lam = 1.5 + 0.3j
    g = scalar_symbol(lambda w: (w - lam) * (1 + 0.3 * np.exp(w**2)), order=1.0)
    f = elliptic_inverse(g, 0.0, 1.0, region=Rect(-1.0137, 2.0113, -6.0071, 6.0093))
    assert inverse_residual(g, f, [-0.25, 0.0, 0.25]) < 1e-7
    z = np.array([0.1 + 2j, 0.6 + 0.3j, 1.4 + 0.2j])
    closed = 1 / ((z - lam) * (1 + 0.3 * np.exp(z**2)))
    assert np.abs(f(z)[:, 0, 0] - closed).max() < 1e-7
    assert any(abs(d.p - lam) < 1e-8 for d in f.poles)


def test_elliptic_inverse_rejects_non_elliptic():
    with pytest.raises(ValueError, match="not elliptic"):
        elliptic_inverse(scalar_symbol(lambda w: w - 0.25), 0.25, 1.0)


def test_order_drop():
    a = lambda r: (1 + np.asarray(r, complex) ** 2) ** ((1 + 1j) / 2)
    h = holo_as_mero(kernel_cutoff(CutoffFunction("shifted", T=3.0, shift=1.0), a, 1, delta_max=1.0), 0.5)
    assert verify_order_drop(h, 0.5, 0.0, 1.0).passed
    assert not verify_order_drop(h, 0.5, 0.5, 1.0).passed


@settings(max_examples=10)
@given(cr=st.floats(0.2, 1.5), ci=st.floats(-1, 1), pr=st.floats(-1, 1), pi=st.floats(-2, 2))
def test_scalar_inverse_property(cr, ci, pr, pi):
    c, p = complex(cr, ci), complex(pr, pi)
    m = rational_pole_symbol(c, p)
    lines = [b for b in LINES if min(abs(b - p.real), abs(b - (p - c).real)) > 0.1]
    mi = invert_one_plus(m, betas=lines[:1] or (2.5,))
    w = np.array([3.1 + 0.7j, -2.3 - 1.1j])
    assert np.abs(mi(w)[:, 0, 0] + c / (w - p + c)).max() < 1e-10
    assert any(abs(d.p - (p - c)) < 1e-7 for d in mi.poles)
