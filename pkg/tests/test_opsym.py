import numpy as np
import pytest
from hypothesis import given, strategies as st

from mellin_lab.opsym import (
    OperatorSymbol, bracket_symbol, compose_symbols, differentiate_symbol, gaussian_smoothing_symbol,
    identity_symbol, is_member, polynomial_symbol, reduction_symbol, symbol_seminorm,
    verify_growth_bound, verify_smoothing_characterization, verify_zero_order_bound,
)
from mellin_lab.scales import OrderReducingFamily, make_fourier_scale


@pytest.fixture(scope="module")
def sc():
    return make_fourier_scale(3)


@pytest.fixture(scope="module")
def fam(sc):
    return OrderReducingFamily(sc)


def test_seminorm_of_reduction_is_one(fam):
    assert symbol_seminorm(reduction_symbol(fam, 2), fam, fam, 0) == pytest.approx(1.0, abs=1e-12)


def test_seminorm_of_identity(sc, fam):
    assert symbol_seminorm(identity_symbol(sc), fam, fam, 0) == pytest.approx(1.0, abs=1e-12)


def test_quadratic_polynomial_is_order_two(sc, fam):
    p = polynomial_symbol(sc, {(2,): 1.0})
    assert p.order == 2
    val = symbol_seminorm(p, fam, fam, 1)
    # |eta|^2 <eta>^{-2} and 2|eta| <eta>^{-1} both stay below 2
    assert np.isfinite(val) and val < 2.0
    assert is_member(p, fam, fam, 2).passed
    assert not is_member(p, fam, fam, 1).passed


def test_shape_check(sc):
    bad = OperatorSymbol(0, sc, sc, lambda y, eta: np.eye(2))
    with pytest.raises(ValueError):
        bad(0, [1.0])


def test_smoothing_characterization(sc, fam):
    gauss = verify_smoothing_characterization(gaussian_smoothing_symbol(sc), fam)
    assert gauss.passed and gauss.measured["consistent"]
    const = verify_smoothing_characterization(identity_symbol(sc), fam)
    assert not const.passed and const.measured["consistent"]
    inv = verify_smoothing_characterization(bracket_symbol(sc, -1), fam)
    assert not inv.passed and inv.measured["consistent"]


def test_zero_order_bound(sc, fam):
    r1 = verify_zero_order_bound(reduction_symbol(fam, -1), -1)
    assert r1.passed and r1.measured["exponent"] == pytest.approx(-1, abs=1e-6)
    r0 = verify_zero_order_bound(identity_symbol(sc), 0)
    assert r0.passed and r0.measured["exponent"] == pytest.approx(0, abs=1e-12)
    r2 = verify_zero_order_bound(reduction_symbol(fam, -2), -2)
    assert r2.passed and r2.measured["exponent"] == pytest.approx(-2, abs=1e-6)
    assert not verify_zero_order_bound(bracket_symbol(sc, -0.5), -1).passed
    with pytest.raises(ValueError):
        verify_zero_order_bound(identity_symbol(sc), 1)


def test_growth_bound(fam):
    rep = verify_growth_bound(reduction_symbol(fam, 2), 2, 3, 0.5)
    assert rep.passed
    assert rep.measured["A"] == pytest.approx(2, abs=1e-6)
    with pytest.raises(ValueError):
        verify_growth_bound(reduction_symbol(fam, 2), 2, 1)


def test_composition_examples(sc, fam):
    eta = [5.0]
    c = compose_symbols(reduction_symbol(fam, 1), reduction_symbol(fam, -1))
    np.testing.assert_allclose(c(0, eta), np.eye(sc.dim), atol=1e-14)
    a = reduction_symbol(fam, 1.5)
    np.testing.assert_allclose(compose_symbols(identity_symbol(sc), a)(0, eta), a(0, eta))
    with pytest.raises(ValueError):
        compose_symbols(identity_symbol(make_fourier_scale(2)), a)


def test_derivatives(sc, fam):
    zero = differentiate_symbol(identity_symbol(sc))
    assert np.abs(zero(0, [2.0])).max() == 0
    d = differentiate_symbol(reduction_symbol(fam, 1))
    assert d.order == 0
    assert is_member(d, fam, fam, 0).passed
    p = polynomial_symbol(sc, {(2,): 1.0})
    d2 = differentiate_symbol(p, 0, (2,))
    np.testing.assert_allclose(d2(0, [3.0]), 2 * np.eye(sc.dim), atol=1e-5)


@given(mu=st.floats(-3, 3), nu=st.floats(-3, 3), eta=st.floats(-100, 100))
def test_composition_orders_add(mu, nu, eta):
    fam = OrderReducingFamily(make_fourier_scale(3))
    c = compose_symbols(reduction_symbol(fam, mu), reduction_symbol(fam, nu))
    assert c.order == pytest.approx(mu + nu)
    np.testing.assert_allclose(c(0, [eta]), fam.matrix(mu + nu, [eta]), rtol=1e-12)


@given(mu=st.floats(-2, 2), extra=st.floats(0, 2))
def test_inclusion(mu, extra):
    fam = OrderReducingFamily(make_fourier_scale(2))
    a = reduction_symbol(fam, mu)
    assert is_member(a, fam, fam, mu + extra, k=0).passed


@given(mu=st.floats(-2, 2), nu=st.floats(-2, 2))
def test_seminorm_submultiplicative(mu, nu):
    sc = make_fourier_scale(2)
    fam = OrderReducingFamily(sc)
    a, b = bracket_symbol(sc, mu), reduction_symbol(fam, nu)
    ab = compose_symbols(a, b)
    lhs = symbol_seminorm(ab, fam, fam, 0)
    rhs = symbol_seminorm(a, fam, fam, 0) * symbol_seminorm(b, fam, fam, 0)
    assert lhs <= rhs * (1 + 1e-10)
