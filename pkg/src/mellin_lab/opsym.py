"""Operator-valued symbols measured through order-reducing families."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from ._numerics import bracket, fd_derivative, fd_partial, fit_power, tail_slope
from .report import Report
from .scales import OrderReducingFamily, ScaleSpec, _eta_points, _multi_indices


@dataclass(frozen=True)
class OperatorSymbol:
    """a(y, eta): matrix from the domain scale modes to the codomain scale modes.

    `y_box` is None for y-independent symbols, else an interval (lo, hi).
    """

    order: float
    domain: ScaleSpec
    codomain: ScaleSpec
    func: Callable = field(compare=False)
    param_dim: int = 1
    y_box: Optional[tuple] = None

    def __call__(self, y, eta) -> np.ndarray:
        eta = np.atleast_1d(np.asarray(eta, dtype=float))
        val = np.asarray(self.func(y, eta), dtype=complex)
        if val.shape != (self.codomain.dim, self.domain.dim):
            raise ValueError(f"symbol returned shape {val.shape}")
        return val

    def y_samples(self, n: int = 3) -> np.ndarray:
        if self.y_box is None:
            return np.array([0.0])
        return np.linspace(self.y_box[0], self.y_box[1], n)


# --- constructors -----------------------------------------------------------

def identity_symbol(scale: ScaleSpec, q: int = 1) -> OperatorSymbol:
    eye = np.eye(scale.dim)
    return OperatorSymbol(0.0, scale, scale, lambda y, eta: eye, q)


def reduction_symbol(fam: OrderReducingFamily, mu: float) -> OperatorSymbol:
    return OperatorSymbol(mu, fam.scale, fam.scale, lambda y, eta: fam.matrix(mu, eta), fam.param_dim)


def bracket_symbol(scale: ScaleSpec, mu: float, q: int = 1) -> OperatorSymbol:
    """<eta>^mu times the identity."""
    eye = np.eye(scale.dim)
    return OperatorSymbol(mu, scale, scale, lambda y, eta: bracket(*eta) ** mu * eye, q)


def polynomial_symbol(scale: ScaleSpec, coeffs: dict, q: int = 1) -> OperatorSymbol:
    """sum_alpha c_alpha eta^alpha times the identity; coeffs maps multi-index tuples to numbers."""
    eye = np.eye(scale.dim)
    order = float(max(sum(a) for a in coeffs))

    def f(y, eta):
        val = sum(c * np.prod(np.asarray(eta, float) ** np.asarray(a)) for a, c in coeffs.items())
        return val * eye

    return OperatorSymbol(order, scale, scale, f, q)


def gaussian_smoothing_symbol(scale: ScaleSpec, u=None, v=None, q: int = 1) -> OperatorSymbol:
    """exp(-|eta|^2) times the rank-one operator u (x) conj(v)."""
    u = scale.basis(0) if u is None else np.asarray(u, complex)
    v = u if v is None else np.asarray(v, complex)
    rank_one = np.outer(u, np.conj(v))
    return OperatorSymbol(-np.inf, scale, scale, lambda y, eta: np.exp(-np.sum(eta**2)) * rank_one, q)


# --- seminorms --------------------------------------------------------------

def _derivative(a: OperatorSymbol, y: float, eta, alpha: int, beta, h: float) -> np.ndarray:
    def in_eta(e, yy):
        return fd_partial(lambda z: a(yy, z), e, beta, h)

    if alpha == 0:
        return in_eta(eta, y)
    return fd_derivative(lambda yy: in_eta(eta, yy), y, alpha, h)


def seminorm_profile(a: OperatorSymbol, fam: OrderReducingFamily, fam_t: OrderReducingFamily,
                     order: float, alpha: int, beta, s: float, eta_pts, h: float = 1e-3) -> np.ndarray:
    """sup over y of ||b~^{s-order+|beta|}(eta) {D_y^alpha D_eta^beta a} b^{-s}(eta)|| per eta."""
    nb = int(sum(beta))
    out = []
    for eta in eta_pts:
        worst = 0.0
        for y in a.y_samples():
            d = _derivative(a, y, eta, alpha, beta, h)
            m = fam_t.diag(s - order + nb, eta)[:, None] * d * fam.diag(-s, eta)[None, :]
            worst = max(worst, float(np.linalg.norm(m, 2)))
        out.append(worst)
    out = np.array(out)
    if not np.all(np.isfinite(out)):
        raise FloatingPointError("non-finite symbol seminorm")
    return out


def _default_grid():
    return np.concatenate([[1.0], np.geomspace(1.5, 300.0, 24)])


def symbol_seminorm(a: OperatorSymbol, fam: OrderReducingFamily, fam_t: OrderReducingFamily, k: int,
                    h_min: float = 1.0, grid=None, s_values: Sequence[float] = (-1.0, 0.0, 1.0),
                    order: Optional[float] = None) -> float:
    """Largest measured seminorm over |alpha| + |beta| <= k on the grid |eta| >= h_min."""
    order = a.order if order is None else order
    pts = _eta_points(_default_grid() if grid is None else grid, a.param_dim)
    pts = pts[np.linalg.norm(pts, axis=1) >= h_min]
    best = 0.0
    for total in range(k + 1):
        for alpha in range(total + 1 if a.y_box is not None else 1):
            for beta in _multi_indices(a.param_dim, total - alpha):
                if sum(beta) != total - alpha:
                    continue
                for s in s_values:
                    best = max(best, float(seminorm_profile(a, fam, fam_t, order, alpha, beta, s, pts).max()))
    return best


def is_member(a: OperatorSymbol, fam, fam_t, order: float, k: int = 1, grid=None,
              s_values=(-1.0, 0.0, 1.0), slack: float = 0.05) -> Report:
    """Operational membership: every seminorm profile stays bounded (tail slope <= slack)."""
    pts = _eta_points(_default_grid() if grid is None else grid, a.param_dim)
    nrm = np.linalg.norm(pts, axis=1)
    worst = -np.inf
    sup = 0.0
    for total in range(k + 1):
        for beta in _multi_indices(a.param_dim, total):
            for s in s_values:
                prof = seminorm_profile(a, fam, fam_t, order, 0, beta, s, pts)
                sup = max(sup, float(prof.max()))
                if prof.max() == 0.0:
                    continue
                worst = max(worst, tail_slope(bracket(nrm), np.maximum(prof, 1e-300)))
    return Report("membership", bool(worst <= slack), {"order": order, "worst_growth": worst, "sup": sup})


def verify_smoothing_characterization(a: OperatorSymbol, fam: OrderReducingFamily, grid=None,
                                      mus: Sequence[float] = (-2.0, -4.0, -8.0),
                                      Ms: Sequence[int] = (0, 2, 4, 8),
                                      st_pairs: Sequence[tuple] = ((0.0, 0.0), (1.0, -1.0), (-1.0, 1.0)),
                                      beta_max: int = 1, slack: float = 0.05) -> Report:
    """Compare the two descriptions of order -infinity on the grid.

    Route 1: membership at every tested order mu. Route 2: <eta>^M ||D^beta a||_{s,t}
    bounded for every tested (M, s, t, beta). Passes iff both routes say smoothing.
    """
    if grid is None:
        grid = np.concatenate([[0.0], np.geomspace(0.2, 12.0, 30)])
    pts = _eta_points(grid, a.param_dim)
    nrm = np.linalg.norm(pts, axis=1)
    by_seminorms = all(is_member(a, fam, fam, mu, k=beta_max, grid=grid, s_values=(-1.0, 0.0, 1.0),
                                 slack=slack).passed for mu in mus)
    scale_d, scale_c = a.domain, a.codomain
    by_decay = True
    for M in Ms:
        for (s, t) in st_pairs:
            for total in range(beta_max + 1):
                for beta in _multi_indices(a.param_dim, total):
                    vals = []
                    for eta in pts:
                        d = fd_partial(lambda z: a(0.0, z), eta, beta)
                        m = scale_c.weights(t)[:, None] * d * scale_d.weights(-s)[None, :]
                        vals.append(bracket(*eta) ** M * np.linalg.norm(m, 2))
                    vals = np.array(vals)
                    if vals.max() == 0.0:
                        continue
                    if tail_slope(bracket(nrm), np.maximum(vals, 1e-300)) > slack:
                        by_decay = False
    measured = {"by_seminorms": by_seminorms, "by_decay": by_decay, "consistent": by_seminorms == by_decay}
    return Report("smoothing_characterization", bool(by_seminorms and by_decay), measured)


def verify_zero_order_bound(a: OperatorSymbol, mu: float, grid=None, slack: float = 0.05) -> Report:
    """Fit ||a(y, eta)||_{0,0} <= c <eta>^mu for mu <= 0."""
    if mu > 0:
        raise ValueError("zero-order bound needs mu <= 0")
    if grid is None:
        grid = np.geomspace(10.0, 1e3, 30)
    pts = _eta_points(grid, a.param_dim)
    vals = np.array([max(np.linalg.norm(a(y, e), 2) for y in a.y_samples()) for e in pts])
    x = bracket(np.linalg.norm(pts, axis=1))
    expo, c, rel = fit_power(x, vals)
    return Report("zero_order_bound", bool(expo <= mu + slack), {"exponent": expo, "constant": c})


def verify_growth_bound(a: OperatorSymbol, mu: float, nu: float, s: float = 0.0, grid=None) -> Report:
    """Fit ||a(y, eta)||_{s, s-nu} <= c <eta>^A and record A."""
    if nu < mu:
        raise ValueError("growth bound needs nu >= mu")
    if grid is None:
        grid = np.geomspace(10.0, 1e3, 30)
    pts = _eta_points(grid, a.param_dim)
    wc = a.codomain.weights(s - nu)
    wd = a.domain.weights(-s)
    vals = np.array([max(np.linalg.norm(wc[:, None] * a(y, e) * wd[None, :], 2) for y in a.y_samples())
                     for e in pts])
    x = bracket(np.linalg.norm(pts, axis=1))
    A, c, rel = fit_power(x, vals)
    return Report("growth_bound", bool(np.isfinite(A) and rel <= 0.1),
                  {"A": A, "constant": c, "fit_residual": rel})


# --- algebra ----------------------------------------------------------------

def compose_symbols(a: OperatorSymbol, at: OperatorSymbol) -> OperatorSymbol:
    """Pointwise product a(y,eta) at(y,eta); orders add."""
    if at.codomain != a.domain:
        raise ValueError("codomain of the right factor must be the domain of the left factor")
    if a.param_dim != at.param_dim:
        raise ValueError("parameter dimensions differ")
    box = a.y_box if a.y_box is not None else at.y_box
    return OperatorSymbol(a.order + at.order, at.domain, a.codomain,
                          lambda y, eta: a(y, eta) @ at(y, eta), a.param_dim, box)


def differentiate_symbol(a: OperatorSymbol, alpha: int = 0, beta=(1,), h: float = 1e-3) -> OperatorSymbol:
    """Partial derivative d_y^alpha d_eta^beta a; the result has order mu - |beta|."""
    beta = tuple(beta)
    nb = sum(beta)
    return OperatorSymbol(a.order - nb, a.domain, a.codomain,
                          lambda y, eta: _derivative(a, y, eta, alpha, beta, h),
                          a.param_dim, a.y_box)
