"""Truncated Fourier scales and their order-reducing families."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ._numerics import bracket, fd_partial, fit_power, tail_slope
from .report import Report


@dataclass(frozen=True)
class ScaleSpec:
    """Hilbert scale realized by Fourier modes k = -N..N on the circle.

    N = 0 gives the trivial one-dimensional base. `base_dim` is the dimension
    entering the weight-line offset (d+1)/2 - gamma.
    """

    mode_cutoff: int
    base_dim: int = 0

    def __post_init__(self):
        if self.mode_cutoff < 0 or self.base_dim < 0:
            raise ValueError("mode_cutoff and base_dim must be non-negative")

    @property
    def dim(self) -> int:
        return 2 * self.mode_cutoff + 1

    @property
    def modes(self) -> np.ndarray:
        return np.arange(-self.mode_cutoff, self.mode_cutoff + 1)

    def basis(self, k: int) -> np.ndarray:
        if abs(k) > self.mode_cutoff:
            raise ValueError(f"mode {k} outside the scale")
        e = np.zeros(self.dim, dtype=complex)
        e[k + self.mode_cutoff] = 1.0
        return e

    def weights(self, s: float) -> np.ndarray:
        return bracket(self.modes) ** s

    def check(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=complex)
        if u.shape[-1] != self.dim:
            raise ValueError(f"element has {u.shape[-1]} modes, scale has {self.dim}")
        return u


def make_fourier_scale(N: int, d: int = 0) -> ScaleSpec:
    return ScaleSpec(int(N), int(d))


def japanese_bracket(s: float, eta, k) -> np.ndarray:
    """Default multiplier <eta, k>^s = (1 + |eta|^2 + k^2)^(s/2)."""
    eta = np.atleast_1d(np.asarray(eta, dtype=float))
    return (1.0 + np.sum(eta**2) + np.asarray(k, dtype=float) ** 2) ** (s / 2)


@dataclass(frozen=True)
class OrderReducingFamily:
    """Diagonal family b^s(eta) acting mode-wise by multiplier(s, eta, k)."""

    scale: ScaleSpec
    param_dim: int = 1
    multiplier: Callable = field(default=japanese_bracket, compare=False)

    def diag(self, s: float, eta) -> np.ndarray:
        eta = np.atleast_1d(np.asarray(eta, dtype=float))
        if eta.shape != (self.param_dim,):
            raise ValueError(f"expected eta of dimension {self.param_dim}")
        return np.asarray(self.multiplier(s, eta, self.scale.modes), dtype=float)

    def matrix(self, s: float, eta) -> np.ndarray:
        return np.diag(self.diag(s, eta))


def apply_reduction(fam: OrderReducingFamily, s: float, eta, u) -> np.ndarray:
    u = fam.scale.check(u)
    return fam.diag(s, eta) * u


def scale_norm(spec: ScaleSpec, s: float, u) -> float:
    u = spec.check(u)
    return float(np.linalg.norm(spec.weights(s) * u))


def dual_pairing(u, v) -> complex:
    """Sesquilinear pairing sum u_k conj(v_k), conjugate-linear in v."""
    u = np.asarray(u, dtype=complex)
    v = np.asarray(v, dtype=complex)
    if u.shape != v.shape:
        raise ValueError("elements belong to different scales")
    return complex(np.sum(u * np.conj(v)))


def pi_exponent(mu: float, nu: float) -> float:
    if nu < mu:
        raise ValueError("pi_exponent requires nu >= mu")
    return max(mu, mu - nu)


def pi_bound_violations(mu: float, nu: float, xi, eta) -> int:
    """Count grid points where <xi,eta>^mu / <xi>^nu > <eta>^pi(mu,nu).

    Compared in log form, no tolerance.
    """
    p = pi_exponent(mu, nu)
    X, E = np.meshgrid(np.asarray(xi, float), np.asarray(eta, float), indexing="ij")
    lhs = 0.5 * mu * np.log1p(X**2 + E**2) - 0.5 * nu * np.log1p(X**2)
    rhs = 0.5 * p * np.log1p(E**2)
    return int(np.count_nonzero(lhs > rhs))


def reduction_norm(fam: OrderReducingFamily, mu: float, s: float, t: float, eta) -> float:
    """Operator norm of b^mu(eta): E^s -> E^t (exact, diagonal maximum)."""
    w = fam.scale.weights(t - s)
    return float(np.max(np.abs(w * fam.diag(mu, eta))))


def _mixed_diag(fam_outer, fam_inner, mu, s, beta, eta, h):
    """Diagonal of b_outer^{s-mu+|beta|}(eta) {D^beta b_inner^mu(eta)} b_outer^{-s}(eta)."""
    order = int(sum(beta))
    # D = -i d/d eta; the modulus is what enters the operator norm
    deriv = fd_partial(lambda z: fam_inner.diag(mu, z), eta, beta, h)
    return fam_outer.diag(s - mu + order, eta) * deriv * fam_outer.diag(-s, eta)


def _multi_indices(q: int, max_order: int):
    import itertools

    for order in range(max_order + 1):
        for beta in itertools.product(range(order + 1), repeat=q):
            if sum(beta) == order:
                yield beta


def _eta_points(eta_grid, q):
    g = np.asarray(eta_grid, dtype=float)
    if g.ndim == 1:
        pts = np.zeros((len(g), q))
        pts[:, 0] = g
        return pts
    return g


def mixed_suprema(fam_outer, fam_inner, mus, s_values, beta_max, eta_grid, h=1e-3):
    """Measured sup over the grid of the mixed quantity, per (mu, s, beta).

    Returns dict with keys (mu, s, beta) -> (sup, tail growth exponent).
    """
    q = fam_outer.param_dim
    pts = _eta_points(eta_grid, q)
    norms_eta = np.linalg.norm(pts, axis=1)
    out = {}
    for mu in mus:
        for s in s_values:
            for beta in _multi_indices(q, beta_max):
                vals = np.array([np.max(np.abs(_mixed_diag(fam_outer, fam_inner, mu, s, beta, e, h)))
                                 for e in pts])
                if not np.all(np.isfinite(vals)):
                    raise FloatingPointError("non-finite norm in mixed quantity")
                big = norms_eta >= 1.0
                growth = tail_slope(1 + norms_eta[big], vals[big]) if big.sum() >= 4 else 0.0
                out[(mu, s, beta)] = (float(vals.max()), growth)
    return out


def verify_order_reducing(fam: OrderReducingFamily, mus: Sequence[float] = (-2, -1, 0),
                          s_range: Sequence[float] = (-2, -1, 0, 1, 2), beta_max: int = 2,
                          eta_grid=None, slack: float = 0.05) -> Report:
    """Check the defining estimates of an order-reducing family on finite grids.

    Bounded mixed quantities (tail growth exponent <= slack) for all listed
    mu, s and |beta| <= beta_max, plus the decay fit ||b^mu(eta)|| <~ <eta>^mu
    for mu <= 0.
    """
    if eta_grid is None:
        eta_grid = np.concatenate([[0.0], np.geomspace(0.1, 1e3, 60)])
    eta_grid = np.asarray(eta_grid, float)
    sup = mixed_suprema(fam, fam, mus, s_range, beta_max, eta_grid)
    bounded = all(g <= slack for (_, g) in sup.values())
    fits = {}
    ok_decay = True
    q = fam.param_dim
    pts = _eta_points(eta_grid, q)
    nrm = np.linalg.norm(pts, axis=1)
    big = nrm >= 10.0
    for mu in mus:
        if mu > 0:
            continue
        vals = np.array([reduction_norm(fam, mu, 0.0, 0.0, e) for e in pts[big]])
        a, c, _ = fit_power(np.sqrt(1 + nrm[big] ** 2), vals)
        fits[mu] = {"exponent": a, "constant": c}
        ok_decay &= a <= mu + slack
    id_ratio = float(np.max(np.abs(fam.diag(0.0, pts[-1]) - 1.0)))
    measured = {
        "mixed_sup": {f"mu={k[0]},s={k[1]},beta={k[2]}": v[0] for k, v in sup.items()},
        "mixed_growth": {f"mu={k[0]},s={k[1]},beta={k[2]}": v[1] for k, v in sup.items()},
        "decay_fits": fits,
        "identity_defect": id_ratio,
    }
    return Report("order_reducing", bool(bounded and ok_decay and id_ratio == 0.0), measured)


def verify_equivalence(fam1: OrderReducingFamily, fam2: OrderReducingFamily, grid=None,
                       mus: Sequence[float] = (-1.0, 1.0), s_values: Sequence[float] = (-1.0, 0.0, 1.0),
                       beta_max: int = 1, slack: float = 0.05) -> Report:
    """Boundedness of b1^{s-mu+|beta|}{D^beta b2^mu}b1^{-s} and of the swapped expression."""
    if fam1.scale != fam2.scale or fam1.param_dim != fam2.param_dim:
        raise ValueError("families live on different scales")
    if grid is None:
        grid = np.concatenate([[0.0], np.geomspace(0.1, 1e3, 50)])
    a = mixed_suprema(fam1, fam2, mus, s_values, beta_max, grid)
    b = mixed_suprema(fam2, fam1, mus, s_values, beta_max, grid)
    worst = max(g for (_, g) in list(a.values()) + list(b.values()))
    return Report("equivalence", bool(worst <= slack), {"worst_growth": worst})


def verify_scaling_bound(fam: OrderReducingFamily, s: float, m_grid, eta_grid=None) -> Report:
    """Fit sup_eta ||b^s(eta) b^{-s}(m eta)|| against c max(m, 1/m)^M."""
    if eta_grid is None:
        eta_grid = np.concatenate([[0.0], np.geomspace(0.01, 1e3, 40)])
    q = fam.param_dim
    pts = _eta_points(eta_grid, q)
    m_grid = np.asarray(m_grid, dtype=float)
    if np.any(m_grid <= 0):
        raise ValueError("m must be positive")
    norms = np.array([max(float(np.max(fam.diag(s, e) * fam.diag(-s, m * e))) for e in pts)
                      for m in m_grid])
    lam = np.maximum(m_grid, 1 / m_grid)
    # m > 1 and m < 1 are fitted separately; M is the larger branch exponent
    M, rel = 0.0, 0.0
    for mask in (m_grid > 1, m_grid < 1):
        if mask.sum() >= 2:
            a, _, r = fit_power(lam[mask], norms[mask])
            M, rel = max(M, a), max(rel, r)
    # envelope constant: every measured point lies below c max(m,1/m)^M
    c_env = float(np.max(norms / lam**M))
    measured = {"M": M, "c": c_env, "fit_residual": rel, "norms": norms}
    return Report("scaling_bound", bool(np.isfinite(M) and rel < 0.1), measured)
