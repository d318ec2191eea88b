"""Named verification suites, one per acceptance criterion.

Each suite returns a SuiteResult: its individual Reports, wall time and runtime limit.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

import mpmath
import numpy as np

from . import asympt, conormal, kco, mellin, merosym, scales
from .report import Report


@dataclass(frozen=True)
class SuiteConfig:
    seed: int = 0
    grid_scale: float = 1.0

    def n(self, base: int) -> int:
        """Grid size scaled by grid_scale, rounded to a power of two."""
        return int(2 ** round(np.log2(max(16.0, base * self.grid_scale))))


@dataclass
class SuiteResult:
    name: str
    reports: list
    elapsed: float
    limit: float
    seed: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.reports) and self.elapsed < self.limit

    def summary(self) -> str:
        bad = [r.name for r in self.reports if not r.passed]
        verdict = "PASS" if self.passed else "FAIL"
        tail = f"failed: {', '.join(bad)}" if bad else f"{len(self.reports)} checks"
        return f"{verdict}  {self.name:<20} {self.elapsed:7.1f}s / {self.limit:.0f}s  {tail}"


# --- 1 ------------------------------------------------------------------------

def suite_order_reduction(cfg: SuiteConfig) -> list:
    fam = scales.OrderReducingFamily(scales.make_fourier_scale(8))
    rep = scales.verify_order_reducing(fam, mus=(-2, -1, 0), s_range=(-2, -1, 0, 1, 2), beta_max=2)
    sups = rep.measured["mixed_sup"]
    finite = all(np.isfinite(v) for v in sups.values())
    fits = {mu: f["exponent"] for mu, f in rep.measured["decay_fits"].items()}
    ok_fit = all(a <= mu + 0.05 for mu, a in fits.items())
    return [rep, Report("decay_exponents", ok_fit, {"exponents": fits}),
            Report("mixed_suprema_finite", finite, {"count": len(sups), "max": max(sups.values())})]


# --- 2 ------------------------------------------------------------------------

def suite_pi_bound(cfg: SuiteConfig) -> list:
    g = np.linspace(-50.0, 50.0, 200)
    out = []
    for mu, nu in [(1, 2), (2, 3), (0, 1), (-1, 0)]:
        v = scales.pi_bound_violations(mu, nu, g, g)
        out.append(Report(f"pi_bound({mu},{nu})", v == 0, {"violations": v, "pi": scales.pi_exponent(mu, nu)}))
    return out


# --- 3 ------------------------------------------------------------------------

def suite_mellin_conjugation(cfg: SuiteConfig) -> list:
    rng = np.random.default_rng(cfg.seed)
    grid = mellin.LogGrid(-12.0, 12.0, cfg.n(1024))
    worst = 0.0
    for _ in range(20):
        u = mellin.random_test_function(grid, rng)
        for s in (-1, 0, 1, 2):
            for gam in (-1, 0, 1):
                # Mellin side by direct quadrature, cylinder side by FFT of the pull-back
                a = mellin.hs_gamma_norm(s, gam, u, method="direct")
                b = mellin.cyl_norm(s, mellin.s_gamma_map(gam, u), grid)
                worst = max(worst, abs(a - b) / b)
    out = [Report("conjugation", worst < 1e-6, {"max_rel_diff": worst, "tests": 20})]
    g2 = mellin.LogGrid(-5.0, 60.0, cfg.n(8192))
    u = mellin.GridFunction.from_callable(g2, lambda r: np.exp(-r))
    errs = {}
    for w in (1.0, 0.5, 2.0):
        errs[w] = abs(complex(mellin.mellin_at(u, w)[0]) - float(mpmath.gamma(w)))
    out.append(Report("gamma_oracle", max(errs.values()) < 1e-6, {"abs_errors": errs}))
    return out


# --- 4 ------------------------------------------------------------------------

def _continuity_corpus():
    br = lambda w, p: (1 + np.imag(w) ** 2) ** (p / 2)
    return [
        ("bracket^-1", mellin.MellinLineSymbol(-1, lambda w: br(w, -1))),
        ("bracket^-2", mellin.MellinLineSymbol(-2, lambda w: br(w, -2))),
        ("bracket^1", mellin.MellinLineSymbol(1, lambda w: br(w, 1))),
        ("gaussian", mellin.MellinLineSymbol(0, lambda w: np.exp(w**2))),
        ("linear", mellin.MellinLineSymbol(1, lambda w: w)),
        ("quadratic", mellin.MellinLineSymbol(2, lambda w: w**2 + 1)),
        ("rational", mellin.MellinLineSymbol(0, lambda w: (w + 1) / (w + 3))),
        ("pole_off_line", mellin.MellinLineSymbol(-1, lambda w: 1 / (w - 2.0))),
        ("oscillatory", mellin.MellinLineSymbol(0, lambda w: np.exp(1j * np.tanh(np.imag(w))))),
        ("sech", mellin.MellinLineSymbol(0, lambda w: 1 / np.cosh(0.5 * np.imag(w)))),
    ]


def suite_mellin_continuity(cfg: SuiteConfig) -> list:
    grid = mellin.LogGrid(-12.0, 12.0, cfg.n(1024))
    out = []
    for name, f in _continuity_corpus():
        ratio, c = mellin.op_mellin_bound(f, 1.0, 0.0, grid=grid, seed=cfg.seed)
        out.append(Report(f"bound[{name}]", ratio <= c * 1.001, {"ratio": ratio, "c": c}))
    rng = np.random.default_rng(cfg.seed)
    u = mellin.random_test_function(grid, rng)
    one = mellin.MellinLineSymbol(0, lambda w: np.ones_like(w))
    err = float(np.abs(mellin.op_mellin(0.0, one, u).values - u.values).max())
    out.append(Report("identity_symbol", err < 1e-10, {"max_abs_err": err}))
    return out


# --- 5 ------------------------------------------------------------------------

def suite_kernel_cutoff(cfg: SuiteConfig) -> list:
    sh = kco.CutoffFunction("shifted", T=3.0, shift=1.0)
    out = []
    for mu in (-1, 0, 1):
        a = lambda r, mu=mu: (1 + np.asarray(r, complex) ** 2) ** ((mu + 1j) / 2)
        for K in (1, 2, 3):
            rep = kco.asymptotic_remainder(sh, a, mu, K, rho_range=(128.0, 1024.0))
            e = rep.measured["exponent"]
            out.append(Report(f"remainder(mu={mu},K={K})", bool(abs(e - (mu - K)) <= 0.3),
                              {"exponent": e, "target": mu - K}))
    c = kco.kernel_cutoff(kco.CutoffFunction(), lambda r: 2.5 + 0 * np.asarray(r), 0)
    err = max(float(np.abs(c.line_values() - 2.5).max()),
              float(np.abs(c(np.array([0.3 + 0.7j, 5 - 2j, -40 + 1j])) - 2.5).max()))
    out.append(Report("constant_symbol", err < 1e-10, {"max_abs_err": err}))
    a = lambda r: (1 + np.asarray(r, complex) ** 2) ** ((1 + 1j) / 2)
    h = kco.kernel_cutoff(sh, a, 1)
    cr = kco.cauchy_riemann_residual(h, np.linspace(-20, 20, 9), np.linspace(-2, 2, 5))
    out.append(Report("cauchy_riemann", cr < 1e-6, {"residual": cr}))
    sh_err = max(kco.delta_shift_error(h, d) for d in (-2.0, -1.0, 0.5, 2.0))
    out.append(Report("delta_shift", sh_err < 1e-8, {"max_err": sh_err}))
    return out


# --- 6 ------------------------------------------------------------------------

RELATIVE_PAIRS = [(1, 0, 0, 1), (2, -1, 1, -2), (3, 1, -1, 2), (-3, 2, 0, -1), (0, -2, 3, 1)]


def suite_index(cfg: SuiteConfig) -> list:
    gamma = 0.0
    beta = mellin.line_offset(gamma)
    syms = {k: merosym.make_index_symbol(k, gamma) for k in range(-3, 4)}
    out = []
    for k, f in syms.items():
        w, res = merosym.winding_number(f, beta)
        t = merosym.toeplitz_index_oracle(f, gamma)
        out.append(Report(f"index(k={k})", w == k and t.index == k,
                          {"winding": w, "residue": res, "toeplitz": t.per_size, "agree": w == t.index}))
    for a, b, g1, g2 in RELATIVE_PAIRS:
        rep = merosym.relative_index_check(syms[a], syms[b], (syms[g1], syms[g2]), gamma)
        rep.name = f"relative_index{(a, b, g1, g2)}"
        out.append(rep)
    return out


# --- 7 ------------------------------------------------------------------------

def suite_mero_inversion(cfg: SuiteConfig) -> list:
    lines = [-0.5, 0.5, 1.5]
    c, p = 0.7 + 0.2j, 0.3 + 1.0j
    out = []
    m = merosym.rational_pole_symbol(c, p)
    mi = merosym.invert_one_plus(m, betas=(0.5,))
    res = merosym.identity_residual(m, mi, lines)
    out.append(Report("scalar_identity", res < 1e-8, {"residual": res}))
    loc = min((abs(d.p - (p - c)) for d in mi.poles), default=np.inf)
    out.append(Report("scalar_pole_location", loc < 1e-8 and len(mi.poles) == 1,
                      {"error": loc, "poles": [d.to_dict() for d in mi.poles]}))
    P = np.array([[1, 1], [0, 0]], dtype=complex)
    m2 = merosym.rational_pole_symbol(c, p, P)
    mi2 = merosym.invert_one_plus(m2, betas=(0.5,))
    res2 = merosym.identity_residual(m2, mi2, lines)
    out.append(Report("rank_one_identity", res2 < 1e-8 and len(mi2.poles) == 1,
                      {"residual": res2, "poles": len(mi2.poles)}))
    lam = 1.5 + 0.3j
    g = merosym.scalar_symbol(lambda w: (w - lam) * (1 + 0.3 * np.exp(w**2)), order=1.0)
    region = merosym.Rect(-1.0137, 2.0113, -6.0071, 6.0093)
    f = merosym.elliptic_inverse(g, 0.0, 1.0, region=region)
    r = merosym.inverse_residual(g, f, [-0.25, 0.0, 0.25])
    z = np.array([0.1 + 2j, -0.3 - 1j, 0.6 + 0.3j, 1.4 + 0.2j])
    closed = 1 / ((z - lam) * (1 + 0.3 * np.exp(z**2)))
    cf = float(np.abs(f(z)[:, 0, 0] - closed).max())
    out.append(Report("elliptic_inverse", r < 1e-7 and cf < 1e-7, {"residual": r, "closed_form_err": cf}))
    return out


# --- 8 ------------------------------------------------------------------------

def suite_conormal(cfg: SuiteConfig) -> list:
    S = scales.make_fourier_scale(2)
    k = S.modes.astype(float)
    A = conormal.FuchsOperator(2, (np.diag(-k**2), 0.0, 1.0), S)
    P = conormal.conormal_symbol(A)
    rng = np.random.default_rng(cfg.seed)
    Q = rng.normal(size=(S.dim, S.dim)) + 1j * rng.normal(size=(S.dim, S.dim))
    # a conjugated pencil is not diagonal, so the companion route is exercised
    spec = conormal.pencil_spectrum(P.conjugate(Q), (-3.0, 3.0))
    roots = np.concatenate([np.roots([1.0, 0.0, -kk**2]) for kk in k]).astype(complex)
    oracle = sorted({complex(round(z.real, 12), round(z.imag, 12)) for z in roots}, key=lambda z: (z.real, z.imag))
    got = sorted(spec.points, key=lambda z: (z.real, z.imag))
    err = float(max(abs(a - b) for a, b in zip(got, oracle))) if len(got) == len(oracle) else np.inf
    out = [Report("pencil_spectrum", err < 1e-8, {"max_err": err, "points": len(got),
                                                   "multiplicities": spec.multiplicities})]
    rep = conormal.admissible_weights(A, (-3.0, 3.0), 0, margin=1e-6)
    expected = sorted({0.5 - kk for kk in k} | {0.5 + kk for kk in k})
    expected = [g for g in expected if -3.0 <= g <= 3.0]
    same = len(rep.forbidden) == len(expected) and np.allclose(rep.forbidden, expected, atol=1e-8)
    out.append(Report("admissible_weights", bool(same and rep.passed),
                      {"forbidden": rep.forbidden, "expected": expected}))
    grid = mellin.LogGrid()
    u = mellin.random_test_function(grid, rng)
    worst = 0.0
    for beta in (0.7, -1.3):
        a = mellin.hs_gamma_norm(1.0, 0.3 + beta, conormal.weight_shift(beta, u))
        b = mellin.hs_gamma_norm(1.0, 0.3, u)
        worst = max(worst, abs(a - b) / b)
    out.append(Report("weight_shift", worst < 1e-8, {"rel_err": worst}))
    return out


# --- 9 ------------------------------------------------------------------------

ROUND_TRIP_TYPE = ((0.3, 0), (-0.2 + 0.8j, 1), (-0.7 - 0.5j, 2), (-1.4, 1), (-2.1 + 0.3j, 2))


def suite_asymptotics(cfg: SuiteConfig) -> list:
    rng = np.random.default_rng(cfg.seed)
    P = asympt.AsymptoticType(ROUND_TRIP_TYPE, gamma=0.0)
    co = [rng.normal(size=m + 1) + 1j * rng.normal(size=m + 1) for _, m in P.points]
    grid = mellin.LogGrid(-5.0, 40.0, cfg.n(8192))
    u = asympt.plant_asymptotics(P, co, grid)
    got = asympt.extract_coefficients(u, P)
    err = max(float(np.abs(a - b).max()) for a, b in zip(got, co))
    out = [Report("round_trip", err < 1e-6, {"max_abs_err": err})]
    Q = asympt.AsymptoticType(((-1.0, 0), (-1.3 + 0.5j, 1)), gamma=1.0)
    cq = [np.array([1.0]), np.array([0.5, -0.25j])]
    gauss = merosym.scalar_symbol(lambda w: np.exp(w**2))
    rep = asympt.verify_push(gauss, Q, cq)
    rep.name = "push_entire"
    out.append(rep)
    p = -1.0
    col = merosym.scalar_symbol(lambda w: np.exp(w**2) / (w - p), poles=merosym.rational_pole_symbol(1.0, p).poles)
    rep = asympt.verify_push(col, Q, cq)
    rep.name = "push_collision"
    rep.passed = bool(rep.passed and any(t["m"] == 1 and abs(complex(*t["p"]) - p) < 1e-12
                                         for t in rep.measured["poles"]))
    out.append(rep)
    return out


# --- 10 -----------------------------------------------------------------------

def suite_quantisation(cfg: SuiteConfig) -> list:
    out = []
    corpus = [
        ("gaussian", mellin.EdgeDegenerateSymbol(profile=lambda s: np.exp(-s**2),
                                                 kernel=lambda x: np.exp(-x**2 / 4) / (2 * np.sqrt(np.pi)))),
        ("sech", mellin.EdgeDegenerateSymbol(profile=lambda s: 1 / np.cosh(s),
                                             kernel=lambda x: 0.5 / np.cosh(np.pi * x / 2))),
    ]
    for name, a in corpus:
        _, rep = mellin.mellin_quantize(a)
        rep.name = f"quantisation[{name}]"
        out.append(rep)
    # i r rho quantizes to r d/dr
    h, _ = mellin.mellin_quantize(mellin.EdgeDegenerateSymbol(poly=(0, 1j)))
    grid = mellin.LogGrid(-8.0, 40.0, 4096)
    worst = 0.0
    for c in (0.5, 1.0, 2.5):
        u = mellin.GridFunction.from_callable(grid, lambda r, c=c: r**c * np.exp(-r))
        v = mellin.op_mellin(0.0, h, u)
        exact = (c - grid.r) * grid.r**c * np.exp(-grid.r)
        sel = (grid.y > -3) & (grid.y < 20)
        worst = max(worst, float(np.abs(v.values - exact)[sel].max()))
    out.append(Report("r_dr_power_action", worst < 1e-5, {"max_abs_err": worst}))
    return out


SUITES: dict[str, tuple[Callable, float]] = {
    "order-reduction": (suite_order_reduction, 30.0),
    "pi-bound": (suite_pi_bound, 5.0),
    "mellin-conjugation": (suite_mellin_conjugation, 60.0),
    "mellin-continuity": (suite_mellin_continuity, 60.0),
    "kernel-cutoff": (suite_kernel_cutoff, 90.0),
    "index": (suite_index, 180.0),
    "mero-inversion": (suite_mero_inversion, 120.0),
    "conormal": (suite_conormal, 30.0),
    "asymptotics": (suite_asymptotics, 60.0),
    "quantisation": (suite_quantisation, 120.0),
}


def run_suite(name: str, cfg: SuiteConfig = SuiteConfig()) -> SuiteResult:
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    fn, limit = SUITES[name]
    t0 = time.perf_counter()
    reports = fn(cfg)
    return SuiteResult(name, reports, time.perf_counter() - t0, limit, cfg.seed)
