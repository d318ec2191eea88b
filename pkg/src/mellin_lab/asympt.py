"""Discrete asymptotic types as r -> 0 and their behaviour under Mellin operators.

A type is a finite list of pairs (p, m) standing for the terms r^{-p} log^k r, k <= m.
Functions are sampled in y = -log r, so these terms read e^{p y} (-y)^k.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import comb, factorial
from typing import Callable, Optional, Sequence

import numpy as np

from ._numerics import cutoff, laurent_coefficients, smoothstep
from .mellin import GridFunction, LogGrid, MellinLineSymbol, hs_gamma_norm, line_offset, op_mellin
from .merosym import MeroSymbol
from .report import Report

COLLISION = 1e-4
DEFAULT_DEPTH = 3.0


@lru_cache(maxsize=8)
def _gauss_legendre(nodes: int):
    return np.polynomial.legendre.leggauss(nodes)


def _same(p: complex, q: complex, tol: float = 1e-12) -> bool:
    return abs(p - q) <= tol * max(1.0, abs(p))


@dataclass(frozen=True)
class AsymptoticType:
    """Pairs (p_j, m_j) with weight data gamma and Theta = (theta, 0].

    theta = -inf is realized by the finite depth `depth`.
    """

    points: tuple
    gamma: float
    theta: float = -DEFAULT_DEPTH
    d: int = 0
    depth: float = DEFAULT_DEPTH

    def __post_init__(self):
        pts = tuple((complex(p), int(m)) for p, m in self.points)
        object.__setattr__(self, "points", pts)
        if self.theta > 0:
            raise ValueError("theta must be <= 0")
        lo, hi = self.window
        for p, m in pts:
            if m < 0:
                raise ValueError("multiplicities must be >= 0")
            if not lo < p.real < hi:
                raise ValueError(f"Re p = {p.real:.6g} outside the weight window ({lo:.6g}, {hi:.6g})")
        for i, (p, _) in enumerate(pts):
            if any(_same(p, q) for q, _ in pts[i + 1:]):
                raise ValueError("repeated point in asymptotic type")

    @property
    def beta(self) -> float:
        return line_offset(self.gamma, self.d)

    @property
    def window(self) -> tuple[float, float]:
        th = self.theta if np.isfinite(self.theta) else -self.depth
        return self.beta + th, self.beta

    @property
    def shape(self) -> list[int]:
        return [m + 1 for _, m in self.points]

    def with_points(self, points) -> "AsymptoticType":
        return AsymptoticType(tuple(points), self.gamma, self.theta, self.d, self.depth)

    def to_dict(self) -> dict:
        return {"points": [{"p": [p.real, p.imag], "m": m} for p, m in self.points],
                "gamma": self.gamma, "theta": self.theta if np.isfinite(self.theta) else "-inf",
                "d": self.d}

    @classmethod
    def from_dict(cls, data: dict) -> "AsymptoticType":
        theta = data.get("theta", -DEFAULT_DEPTH)
        theta = -np.inf if theta == "-inf" else float(theta)
        pts = tuple((complex(*e["p"]), int(e["m"])) for e in data["points"])
        return cls(pts, float(data["gamma"]), theta, int(data.get("d", 0)))


def shadow_closure(P: AsymptoticType) -> AsymptoticType:
    """Add (p - j, m) for every integer j >= 1 with Re(p - j) still inside the window."""
    lo, _ = P.window
    out: list[tuple[complex, int]] = []

    def put(p, m):
        for i, (q, mq) in enumerate(out):
            if _same(p, q):
                out[i] = (q, max(m, mq))
                return
        out.append((p, m))

    for p, m in P.points:
        put(p, m)
        j = 1
        while (p - j).real > lo:
            put(p - j, m)
            j += 1
    out.sort(key=lambda t: (-t[0].real, t[0].imag))
    return P.with_points(out)


@dataclass(frozen=True)
class Cutoff:
    """omega(r): 1 on (0, inner], 0 on [outer, inf)."""

    inner: float = 0.5
    outer: float = 2.0 / 3.0

    def __call__(self, r) -> np.ndarray:
        return cutoff(r, self.inner, self.outer)

    def derivative(self, r) -> np.ndarray:
        x = (np.asarray(r, dtype=float) - self.inner) / (self.outer - self.inner)
        inside = (x > 0) & (x < 1)
        xs = np.where(inside, x, 0.5)
        # s'(x) = s(x)(1 - s(x)) (1/x^2 + 1/(1-x)^2)
        s = smoothstep(xs)
        ds = s * (1 - s) * (1 / xs**2 + 1 / (1 - xs) ** 2)
        return np.where(inside, -ds / (self.outer - self.inner), 0.0)

    def moments(self, z, jmax: int, nodes: int = 400) -> np.ndarray:
        """int r^z log^j r omega'(r) dr for j = 0..jmax (Gauss-Legendre on the transition)."""
        x, wts = _gauss_legendre(nodes)
        r = 0.5 * (self.outer - self.inner) * (x + 1) + self.inner
        wts = 0.5 * (self.outer - self.inner) * wts * self.derivative(r)
        z = np.asarray(z, dtype=complex)
        lr = np.log(r)
        base = np.exp(z[..., None] * lr)
        return np.stack([(base * lr**j) @ wts for j in range(jmax + 1)])

    @property
    def plateau_y(self) -> float:
        """omega = 1 for y >= plateau_y."""
        return -np.log(self.inner)


def _coeff_arrays(P: AsymptoticType, coeffs) -> list[np.ndarray]:
    if len(coeffs) != len(P.points):
        raise ValueError(f"expected {len(P.points)} coefficient blocks, got {len(coeffs)}")
    out = []
    for (p, m), c in zip(P.points, coeffs):
        c = np.asarray(c, dtype=complex)
        if c.ndim == 1:
            c = c[:, None]
        if c.shape[0] != m + 1:
            raise ValueError(f"point {p}: expected {m + 1} log powers, got {c.shape[0]}")
        out.append(c)
    if len({c.shape[1] for c in out}) > 1:
        raise ValueError("coefficient blocks disagree on the value dimension")
    return out


@dataclass(frozen=True)
class SingularExpansion:
    """omega(r) sum_j sum_k c_jk r^{-p_j} log^k r for a type P."""

    type: AsymptoticType
    coeffs: tuple = field(compare=False)
    omega: Cutoff = Cutoff()

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(_coeff_arrays(self.type, self.coeffs)))

    @property
    def dim(self) -> int:
        return self.coeffs[0].shape[1] if self.coeffs else 1

    def values(self, y) -> np.ndarray:
        y = np.asarray(y, dtype=float)
        out = np.zeros(y.shape + (self.dim,), dtype=complex)
        for (p, m), c in zip(self.type.points, self.coeffs):
            e = np.exp(p * y)
            for k in range(m + 1):
                out += (e * (-y) ** k)[..., None] * c[k]
        return self.omega(np.exp(-y))[..., None] * out

    def mellin(self, w) -> np.ndarray:
        """Meromorphic continuation of M(planted)(w); poles at the p_j only.

        For one term: M[omega r^{-p} log^k r](w) = g^{(k)}(w - p) with g(z) = -Omega(z)/z,
        Omega(z) = int r^z omega'(r) dr.
        """
        w = np.asarray(w, dtype=complex)
        out = np.zeros(w.shape + (self.dim,), dtype=complex)
        for (p, m), c in zip(self.type.points, self.coeffs):
            z = w - p
            om = self.omega.moments(z, m)
            for k in range(m + 1):
                gk = np.zeros(w.shape, dtype=complex)
                for j in range(k + 1):
                    i = k - j
                    gk -= comb(k, j) * om[j] * (-1) ** i * factorial(i) / z ** (i + 1)
                out += gk[..., None] * c[k]
        return out


def plant_asymptotics(P: AsymptoticType, coeffs, grid: LogGrid, omega: Cutoff = Cutoff()) -> GridFunction:
    """omega(r) sum c_jk r^{-p_j} log^k r sampled on the grid (scalar values when dim = 1)."""
    vals = SingularExpansion(P, coeffs, omega).values(grid.y)
    return GridFunction(grid, vals[:, 0] if vals.shape[1] == 1 else vals)


def _check_resolution(points: Sequence[complex]):
    for i, p in enumerate(points):
        for q in points[i + 1:]:
            if abs(p - q) < COLLISION:
                raise ValueError(f"pole collision below resolution: |{p} - {q}| < {COLLISION}")


def default_extraction_window(grid: LogGrid, omega: Cutoff = Cutoff(), offset: float = 3.5,
                              length: float = 12.0) -> tuple[float, float]:
    """Window [plateau + offset, plateau + offset + length], clipped away from the grid end."""
    lo = omega.plateau_y + offset
    hi = min(lo + length, grid.y_max - 2.0)
    return lo, hi


def extract_coefficients(u: GridFunction, P: AsymptoticType, window: Optional[tuple] = None,
                         omega: Cutoff = Cutoff()) -> list[np.ndarray]:
    """Coefficients c_jk of the terms of P in u, by weighted least squares on a far y-window.

    Rows carry the weight e^{-beta y} of the ambient space, columns are normalized; the
    window must lie where omega = 1 and the flat part of u is negligible.
    """
    _check_resolution([p for p, _ in P.points])
    grid = u.grid
    lo, hi = default_extraction_window(grid, omega) if window is None else window
    if lo < omega.plateau_y or hi > grid.y_max or lo >= hi:
        raise ValueError(f"extraction window ({lo}, {hi}) not inside the cut-off plateau of the grid")
    sel = (grid.y >= lo) & (grid.y <= hi)
    y = grid.y[sel]
    vals = np.asarray(u.values)[sel]
    scalar = vals.ndim == 1
    if scalar:
        vals = vals[:, None]
    rw = np.exp(-P.beta * y)
    cols = [np.exp(p * y) * (-y) ** k for p, m in P.points for k in range(m + 1)]
    if not cols:
        return []
    B = np.stack(cols, axis=1) * rw[:, None]
    norms = np.linalg.norm(B, axis=0)
    sol, *_ = np.linalg.lstsq(B / norms, vals * rw[:, None], rcond=None)
    sol = sol / norms[:, None]
    out, i = [], 0
    for _, m in P.points:
        block = sol[i:i + m + 1]
        out.append(block[:, 0] if scalar else block)
        i += m + 1
    return out


def _localizer(grid: LogGrid, y_cap: Optional[float]) -> np.ndarray:
    if y_cap is None:
        return np.ones(grid.n)
    return 1.0 - smoothstep((grid.y - (y_cap - 2.0)) / 2.0)


def flat_norm(u: GridFunction, gamma: float, theta: float, s: float = 0.0, m_grid: Sequence[int] = (1, 2, 3),
              omega: Cutoff = Cutoff(), y_cap: Optional[float] = None, fam=None) -> float:
    """max_m ||omega u||_{s, gamma - theta - 1/(m+1)} + ||(1 - omega) u||_{s, gamma}.

    `y_cap` restricts the localized part to y <= y_cap, where the samples are trusted.
    """
    if not np.isfinite(theta):
        raise ValueError("flat_norm needs a finite theta")
    grid = u.grid
    om = omega(grid.r)
    vals = np.asarray(u.values)
    loc = om * _localizer(grid, y_cap)
    shape = (-1,) + (1,) * (vals.ndim - 1)
    inner = GridFunction(grid, vals * loc.reshape(shape))
    outer = GridFunction(grid, vals * (1 - om).reshape(shape))
    best = max(hs_gamma_norm(s, gamma - theta - 1.0 / (m + 1), inner, fam) for m in m_grid)
    return float(best + hs_gamma_norm(s, gamma, outer, fam))


def flatness_tail(u: GridFunction, gamma: float, theta: float, m: int = 3, omega: Cutoff = Cutoff(),
                  y_cap: Optional[float] = None, tail: float = 4.0, d: int = 0) -> float:
    """Share of the weighted L2 mass of omega u in the last `tail` units below y_cap.

    A non-flat term grows under the stronger weight and concentrates there; a flat one does not.
    """
    grid = u.grid
    cap = grid.y_max if y_cap is None else y_cap
    beta = line_offset(gamma - theta - 1.0 / (m + 1), d)
    vals = np.asarray(u.values)
    if vals.ndim > 1:
        vals = np.linalg.norm(vals, axis=1)
    wv = np.abs(vals * omega(grid.r) * np.exp(-beta * grid.y)) ** 2
    inside = grid.y <= cap
    total = wv[inside].sum()
    if total == 0:
        return 0.0
    return float(wv[inside & (grid.y >= cap - tail)].sum() / total)


@dataclass(frozen=True)
class PushPrediction:
    type: AsymptoticType
    coeffs: list
    collisions: list

    def to_dict(self) -> dict:
        return {"type": self.type.to_dict(),
                "coeffs": [[[complex(x).real, complex(x).imag] for x in np.ravel(c)] for c in self.coeffs],
                "collisions": [[complex(a).real, complex(a).imag, complex(b).real, complex(b).imag]
                               for a, b in self.collisions]}


def push_type(f: MeroSymbol, P: AsymptoticType, coeffs, omega: Cutoff = Cutoff()) -> PushPrediction:
    """Predicted type and leading coefficients of op_M(f) applied to the planted expansion.

    Points: those of P and the poles of f in the window. Multiplicities follow from the
    Laurent-product degrees; points closer than COLLISION are merged with escalated
    multiplicity. Coefficients are Laurent coefficients of f * M(planted), by contour quadrature.
    """
    exp = SingularExpansion(P, coeffs, omega)
    lo, hi = P.window
    cand = [(p, m + 1) for p, m in P.points]
    for pd in f.poles:
        if pd.p.real == hi:
            raise ValueError("pole of the symbol on the weight line")
        if lo < pd.p.real < hi:
            cand.append((complex(pd.p), pd.m + 1))
    # merge coincident and colliding points; orders add
    groups: list[list] = []
    collisions = []
    for p, order in cand:
        for g in groups:
            if abs(g[0] - p) < COLLISION:
                if not _same(g[0], p):
                    collisions.append((g[0], p))
                g[1] += order
                g[2].append(p)
                break
        else:
            groups.append([p, order, [p]])
    centers = [g[0] for g in groups]

    def F(w):
        w = np.asarray(w, dtype=complex)
        return np.einsum("...ij,...j->...i", f(w), exp.mellin(w))

    points, out = [], []
    for g in groups:
        c, order, members = g
        others = [q for q in centers if q is not c]
        gap = min([abs(c - q) for q in others] + [c.real - lo, hi - c.real])
        radius = min(0.5 * gap, 0.25)
        if radius <= max(abs(c - q) for q in members):
            raise ValueError("contour collision: pole cluster wider than its isolation radius")
        lc = laurent_coefficients(F, c, radius, -order, -1)
        m = order - 1
        # a_{-(k+1)} = (-1)^k k! c_k
        block = np.array([np.asarray(lc[order - k - 1]) * (-1) ** k / factorial(k) for k in range(m + 1)])
        points.append((c, m))
        out.append(block[:, 0] if exp.dim == 1 else block)
    return PushPrediction(P.with_points(points), out, collisions)


def _line_symbol(f: MeroSymbol) -> MellinLineSymbol:
    if f.dim == 1:
        return MellinLineSymbol(f.order, lambda w: f(w)[..., 0, 0])
    return MellinLineSymbol(f.order, f, dim=f.dim)


def verify_push(f: MeroSymbol, P: AsymptoticType, coeffs, s: float = 0.0,
                grid: LogGrid = LogGrid(-20.0, 76.0, 4096), window: Optional[tuple] = None,
                omega: Cutoff = Cutoff(), tol: float = 1e-5, tail_tol: float = 1e-6) -> Report:
    """Plant, apply op_M^gamma(f), extract against the push_type prediction; residual flat at depth 1."""
    u = plant_asymptotics(P, coeffs, grid, omega)
    v = op_mellin(P.gamma, _line_symbol(f), u, P.d)
    pred = push_type(f, P, coeffs, omega)
    # op_M(f)u is accurate to eps in the beta-weighted sense only, and its flat remainder
    # is spread by the convolution kernel of f: read the terms far out, but not too far
    window = default_extraction_window(grid, omega, offset=11.0) if window is None else window
    got = extract_coefficients(v, pred.type, window, omega)
    table = []
    worst = 0.0
    for (p, m), a, b in zip(pred.type.points, pred.coeffs, got):
        err = float(np.abs(np.asarray(a) - np.asarray(b)).max())
        worst = max(worst, err / max(1.0, float(np.abs(a).max())))
        table.append({"p": [p.real, p.imag], "m": m,
                      "predicted": [[complex(x).real, complex(x).imag] for x in np.ravel(a)],
                      "extracted": [[complex(x).real, complex(x).imag] for x in np.ravel(b)],
                      "abs_error": err})
    resid = v - plant_asymptotics(pred.type, pred.coeffs, grid, omega)
    cap = window[1]
    fn = flat_norm(resid, P.gamma, -1.0, s, omega=omega, y_cap=cap)
    tail = flatness_tail(resid, P.gamma, -1.0, omega=omega, y_cap=cap, d=P.d)
    ok = worst < tol and np.isfinite(fn) and tail < tail_tol
    return Report("push", bool(ok), {"poles": table, "worst_rel_error": worst, "flat_norm": fn,
                                     "flat_tail_share": tail, "collisions": len(pred.collisions)})
