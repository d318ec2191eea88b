import numpy as np
import pytest
from hypothesis import given, strategies as st

from mellin_lab.scales import (
    OrderReducingFamily, apply_reduction, dual_pairing, japanese_bracket, make_fourier_scale,
    pi_bound_violations, pi_exponent, reduction_norm, scale_norm, verify_equivalence,
    verify_order_reducing, verify_scaling_bound,
)
from mellin_lab._numerics import fit_power


@pytest.fixture
def sc():
    return make_fourier_scale(4, 1)


def test_mode_counts():
    assert make_fourier_scale(0, 0).dim == 1
    s = make_fourier_scale(8, 1)
    assert s.dim == 17
    assert s.base_dim == 1


def test_norm_of_basis_vector(sc):
    assert scale_norm(sc, 1, sc.basis(3)) == pytest.approx(np.sqrt(10), rel=1e-14)
    assert scale_norm(make_fourier_scale(8), 0, make_fourier_scale(8).basis(5)) == 1.0
    s3 = make_fourier_scale(3)
    assert scale_norm(s3, 1, s3.basis(1)) == pytest.approx(np.sqrt(2))
    assert scale_norm(s3, 2, np.zeros(s3.dim)) == 0.0


def test_reduction_examples(sc):
    fam = OrderReducingFamily(sc)
    u = sc.basis(0) + 2 * sc.basis(-2)
    np.testing.assert_array_equal(apply_reduction(fam, 0, [1.3], u), u)
    np.testing.assert_allclose(apply_reduction(fam, 2, [0.0], sc.basis(0)), sc.basis(0))
    v = apply_reduction(fam, -1, [2.0], sc.basis(0))
    assert abs(v[4] - 1 / np.sqrt(5)) < 1e-15


def test_reduction_wrong_eta_dim(sc):
    with pytest.raises(ValueError):
        OrderReducingFamily(sc).diag(1, [1.0, 2.0])


def test_pairing():
    s = make_fourier_scale(2)
    u = s.basis(0) + s.basis(1)
    assert dual_pairing(u, u) == 2
    assert dual_pairing(s.basis(0), s.basis(1)) == 0
    assert dual_pairing(1j * u, u) == 2j
    with pytest.raises(ValueError):
        dual_pairing(np.ones(3), np.ones(4))


def test_pi_exponent():
    assert pi_exponent(2, 3) == 2
    assert pi_exponent(-1, 0) == -1
    assert pi_exponent(1, 1) == 1
    with pytest.raises(ValueError):
        pi_exponent(2, 1)


@pytest.mark.parametrize("mu,nu", [(1, 2), (2, 3), (0, 1), (-1, 0), (-2, 2)])
def test_pi_bound_has_no_violations(mu, nu):
    g = np.linspace(-50, 50, 200)
    assert pi_bound_violations(mu, nu, g, g) == 0


def test_naive_exponent_is_too_small():
    # for mu > 0 the exponent mu - nu fails on the line xi = 0
    mu, nu = 2.0, 3.0
    eta = np.linspace(1, 50, 50)
    lhs = np.sqrt(1 + eta**2) ** mu
    assert np.all(lhs > np.sqrt(1 + eta**2) ** (mu - nu))
    assert np.all(lhs <= np.sqrt(1 + eta**2) ** pi_exponent(mu, nu) * (1 + 1e-14))


def test_order_reducing_family_passes():
    rep = verify_order_reducing(OrderReducingFamily(make_fourier_scale(8)))
    assert rep.passed
    for mu, fit in rep.measured["decay_fits"].items():
        if mu <= 0:
            assert fit["exponent"] <= mu + 0.05
    assert rep.measured["decay_fits"][-1]["exponent"] <= -0.95


def test_reduction_norm_growth(sc):
    fam = OrderReducingFamily(sc)
    e = np.geomspace(10, 1e3, 30)
    a, c, res = fit_power(np.sqrt(1 + e**2), [reduction_norm(fam, 2, 1, -2, [x]) for x in e])
    assert a == pytest.approx(2, abs=1e-10)


def test_equivalence(sc):
    fam = OrderReducingFamily(sc)
    stretched = OrderReducingFamily(sc, multiplier=lambda s, e, k: japanese_bracket(s, 2 * np.asarray(e), k))
    doubled = OrderReducingFamily(sc, multiplier=lambda s, e, k: japanese_bracket(2 * s, e, k))
    assert verify_equivalence(fam, fam).passed
    assert verify_equivalence(fam, stretched).passed
    assert not verify_equivalence(fam, doubled).passed


def test_scaling_bound(sc):
    fam = OrderReducingFamily(sc)
    rep = verify_scaling_bound(fam, 1, [0.125, 0.25, 0.5, 2, 4, 8])
    assert rep.passed
    assert rep.measured["M"] == pytest.approx(1, abs=1e-3)
    trivial = verify_scaling_bound(fam, 0, [0.5, 1, 2])
    np.testing.assert_allclose(trivial.measured["norms"], 1.0)


@given(s=st.floats(-3, 3), eta=st.floats(-20, 20), seed=st.integers(0, 2**16))
def test_reduction_inverse(s, eta, seed):
    sc = make_fourier_scale(6, 1)
    fam = OrderReducingFamily(sc)
    u = np.random.default_rng(seed).standard_normal(sc.dim)
    back = apply_reduction(fam, -s, [eta], apply_reduction(fam, s, [eta], u))
    assert np.abs(back - u).max() <= 1e-12 * max(1.0, np.abs(u).max())


@given(s=st.floats(-3, 3), ds=st.floats(0, 3), seed=st.integers(0, 2**16))
def test_embedding_monotone(s, ds, seed):
    sc = make_fourier_scale(6)
    u = np.random.default_rng(seed).standard_normal(sc.dim)
    assert scale_norm(sc, s, u) <= scale_norm(sc, s + ds, u) * (1 + 1e-14)


@given(N=st.integers(1, 40), ds=st.floats(0.5, 2))
def test_embedding_operator_norm_is_tail_weight(N, ds):
    # norm of E^{s+ds} -> E^s on the truncated scale is attained at the top mode
    sc = make_fourier_scale(N)
    ratio = sc.weights(-ds)
    assert ratio.max() == pytest.approx(1.0)
    assert ratio.min() == pytest.approx((1 + N**2) ** (-ds / 2))


@given(mu=st.floats(-3, 3), nu=st.floats(0, 4))
def test_pi_bound_grid_inequality(mu, nu):
    g = np.linspace(-30, 30, 61)
    assert pi_bound_violations(mu, mu + nu, g, g) == 0
