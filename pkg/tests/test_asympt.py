import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mellin_lab.asympt import (
    AsymptoticType, Cutoff, SingularExpansion, default_extraction_window, extract_coefficients,
    flat_norm, flatness_tail,
    plant_asymptotics, push_type, shadow_closure, verify_push,
)
from mellin_lab.mellin import GridFunction, LogGrid, mellin_at
from mellin_lab.merosym import rational_pole_symbol, scalar_symbol

GRID = LogGrid(-5.0, 40.0, 8192)
THREE = ((0.3, 0), (-0.2 + 0.8j, 2), (-1.4, 1))
PUSH_TYPE = AsymptoticType(((-1.0, 0), (-1.3 + 0.5j, 1)), gamma=1.0)
PUSH_COEFFS = [np.array([1.0]), np.array([0.5, -0.25j])]


def test_type_validation():
    with pytest.raises(ValueError, match="window"):
        AsymptoticType(((0.6, 0),), gamma=0.0)
    with pytest.raises(ValueError):
        AsymptoticType(((0.1, 0), (0.1, 1)), gamma=0.0)
    with pytest.raises(ValueError):
        AsymptoticType(((0.1, -1),), gamma=0.0)
    with pytest.raises(ValueError):
        AsymptoticType((), gamma=0.0, theta=0.5)
    P = AsymptoticType(THREE, gamma=0.0)
    assert P.window == (-2.5, 0.5)
    assert AsymptoticType.from_dict(P.to_dict()) == P


def test_shadow_examples():
    P = AsymptoticType(((0.9, 0),), gamma=-0.5, theta=-3.5)
    assert P.window == (-2.5, 1.0)
    got = [p for p, _ in shadow_closure(P).points]
    np.testing.assert_allclose(got, [0.9, -0.1, -1.1, -2.1], atol=1e-15)
    narrow = AsymptoticType(((0.2, 1),), gamma=0.0, theta=-0.5)
    assert shadow_closure(narrow).points == narrow.points


@given(ps=st.lists(st.tuples(st.floats(-2.45, 0.45), st.floats(-2, 2), st.integers(0, 2)), min_size=1, max_size=4,
                   unique_by=lambda t: (round(t[0], 3), round(t[1], 3))))
def test_shadow_idempotent(ps):
    P = AsymptoticType(tuple((complex(a, b), m) for a, b, m in ps), gamma=0.0)
    Q = shadow_closure(P)
    assert shadow_closure(Q).points == Q.points
    lo, hi = Q.window
    assert all(lo < p.real < hi for p, _ in Q.points)
    assert {p for p, _ in P.points} <= {p for p, _ in Q.points}


def test_cutoff_properties():
    om = Cutoff()
    assert om(0.3) == 1 and om(0.7) == 0
    r = np.linspace(0.51, 0.66, 7)
    h = 1e-6
    np.testing.assert_allclose(om.derivative(r), (om(r + h) - om(r - h)) / (2 * h), rtol=1e-6, atol=1e-8)


def test_mellin_continuation_matches_quadrature():
    P = AsymptoticType(THREE, gamma=0.0)
    exp = SingularExpansion(P, [np.array([1.0]), np.array([0.3, 1j, -0.5]), np.array([2.0, 0.1])])
    u = GridFunction(GRID, exp.values(GRID.y)[:, 0])
    # the truncated direct integral needs Re w well above max Re p
    for w in (1.3 + 0.3j, 1.5 - 2j, 2.0 + 4j):
        assert abs(exp.mellin(w)[0] - mellin_at(u, w)) < 1e-8


def test_single_term_extraction():
    P = AsymptoticType(((0.3, 0), (-1.1 + 0.4j, 1)), gamma=0.0)
    u = plant_asymptotics(P, [np.array([1.0]), np.zeros(2)], GRID)
    got = extract_coefficients(u, P)
    assert abs(got[0][0] - 1) < 1e-6
    assert np.abs(got[1]).max() < 1e-8


def test_round_trip_with_logs():
    P = AsymptoticType(THREE, gamma=0.0)
    rng = np.random.default_rng(1)
    co = [rng.normal(size=m + 1) + 1j * rng.normal(size=m + 1) for _, m in P.points]
    got = extract_coefficients(plant_asymptotics(P, co, GRID), P)
    assert max(np.abs(a - b).max() for a, b in zip(got, co)) < 1e-6


def test_flat_function_has_no_coefficients():
    P = AsymptoticType(THREE, gamma=0.0)
    om = Cutoff()
    u = GridFunction(GRID, om(GRID.r) * np.exp(-1.0 / GRID.r))
    got = extract_coefficients(u, P)
    assert max(np.abs(c).max() for c in got) < 1e-8
    assert np.isfinite(flat_norm(u, 0.0, -3.0))


def test_finite_order_flatness_leaks_less_further_out():
    # r^4 is flat for this type, but a least-squares window near the origin
    # cannot tell e^{-4y} from the deepest terms; leakage shrinks with depth
    P = AsymptoticType(THREE, gamma=0.0)
    om = Cutoff()
    u = GridFunction(GRID, om(GRID.r) * GRID.r**4)
    leak = []
    for off in (3.5, 6.0, 8.0):
        got = extract_coefficients(u, P, window=default_extraction_window(GRID, om, offset=off))
        leak.append(max(np.abs(c).max() for c in got))
    assert leak[0] > leak[1] > leak[2]
    assert leak[2] < 1e-8


def test_extraction_errors():
    P = AsymptoticType(((0.3, 0), (0.3 + 5e-5, 0)), gamma=0.0)
    u = GridFunction(GRID, np.zeros(GRID.n))
    with pytest.raises(ValueError, match="collision"):
        extract_coefficients(u, P)
    Q = AsymptoticType(((0.3, 0),), gamma=0.0)
    with pytest.raises(ValueError, match="window"):
        extract_coefficients(u, Q, window=(-2.0, 5.0))


def test_flatness_tail_separates():
    om = Cutoff()
    flat = GridFunction(GRID, om(GRID.r) * GRID.r**4)
    # r^{-0.2} is not flat at depth 1 for gamma = 1 (window (-1.5, -0.5))... it lies above the window
    bad = GridFunction(GRID, om(GRID.r) * GRID.r**1.2)
    assert flatness_tail(flat, 1.0, -1.0, y_cap=30.0) < 1e-6
    assert flatness_tail(bad, 1.0, -1.0, y_cap=30.0) > 1e-3


def test_push_identity():
    one = scalar_symbol(lambda w: 1 + 0 * w, order=0.0)
    pred = push_type(one, PUSH_TYPE, PUSH_COEFFS)
    assert pred.type.points == PUSH_TYPE.points
    for a, b in zip(pred.coeffs, PUSH_COEFFS):
        assert np.abs(a - b).max() < 1e-10


def test_push_entire_residue_oracle():
    f = scalar_symbol(lambda w: np.exp(w**2))
    P = AsymptoticType(((-1.0, 0),), gamma=1.0)
    pred = push_type(f, P, [np.array([0.7])])
    assert pred.type.points == P.points
    assert abs(pred.coeffs[0][0] - np.exp(1.0) * 0.7) < 1e-10


def test_push_collision_laurent_oracle():
    p, c = -1.0, 0.7
    f = scalar_symbol(lambda w: np.exp(w**2) / (w - p), poles=rational_pole_symbol(1.0, p).poles)
    P = AsymptoticType(((p, 0),), gamma=1.0)
    pred = push_type(f, P, [np.array([c])])
    assert pred.type.points == ((p, 1),)
    om = Cutoff()
    r = np.linspace(om.inner, om.outer, 20001)
    # regular part of M[omega r^{-p}] at p: -int log(r) omega'(r) dr
    greg = -np.trapezoid(np.log(r) * om.derivative(r), r)
    e = np.exp(p**2)
    c0 = c * (2 * p * e + e * greg)
    c1 = -c * e
    np.testing.assert_allclose(pred.coeffs[0], [c0, c1], atol=1e-8)
    assert len(pred.collisions) == 0


def test_push_merges_near_collisions():
    p = -1.0
    f = scalar_symbol(lambda w: np.exp(w**2) / (w - p - 5e-5), poles=rational_pole_symbol(1.0, p + 5e-5).poles)
    pred = push_type(f, AsymptoticType(((p, 0),), gamma=1.0), [np.array([1.0])])
    assert len(pred.collisions) == 1
    assert pred.type.points[0][1] == 1


@pytest.mark.slow
def test_verify_push_cases():
    gauss = scalar_symbol(lambda w: np.exp(w**2))
    rep = verify_push(gauss, PUSH_TYPE, PUSH_COEFFS)
    assert rep.passed, rep.measured
    col = scalar_symbol(lambda w: np.exp(w**2) / (w + 1.0), poles=rational_pole_symbol(1.0, -1.0).poles)
    rep = verify_push(col, PUSH_TYPE, PUSH_COEFFS)
    assert rep.passed, rep.measured
    assert any(t["m"] == 1 and t["p"] == [-1.0, 0.0] for t in rep.measured["poles"])


def test_verify_push_detects_wrong_prediction():
    # declared type misses a pole of the symbol inside the window
    gauss = scalar_symbol(lambda w: np.exp(w**2) * (1 + 0.5 / (w + 0.7)))
    rep = verify_push(gauss, PUSH_TYPE, PUSH_COEFFS)
    assert not rep.passed


@settings(max_examples=15)
@given(a=st.floats(-3, 3), b=st.floats(-3, 3), seed=st.integers(0, 2**16))
def test_extract_linear(a, b, seed):
    P = AsymptoticType(THREE, gamma=0.0)
    rng = np.random.default_rng(seed)
    c1 = [rng.normal(size=m + 1) for _, m in P.points]
    c2 = [rng.normal(size=m + 1) for _, m in P.points]
    u, v = plant_asymptotics(P, c1, GRID), plant_asymptotics(P, c2, GRID)
    lhs = extract_coefficients(u.scale(a) + v.scale(b), P)
    eu, ev = extract_coefficients(u, P), extract_coefficients(v, P)
    for l, x, y in zip(lhs, eu, ev):
        assert np.abs(l - (a * x + b * y)).max() < 1e-8 * (1 + abs(a) + abs(b))
