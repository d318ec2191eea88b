"""Fuchs-type operators on the model cone, conormal pencils and admissible weights."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence, Union

import numpy as np

from .mellin import GridFunction
from .report import _plain
from .scales import ScaleSpec

Coefficient = Union[Callable, np.ndarray, float]


def _as_matrix_fn(c: Coefficient, dim: int) -> Callable:
    if callable(c):
        return c
    m = np.asarray(c, dtype=complex)
    if m.ndim == 0:
        m = m * np.eye(dim)
    return lambda r, m=m: m


@dataclass(frozen=True)
class FuchsOperator:
    """r^{-mu} sum_{j<=mu} a_j(r) (-r d_r)^j with a_j(r) matrices on the scale modes."""

    mu: int
    coeffs: tuple = field(compare=False)
    scale: ScaleSpec = field(default_factory=lambda: ScaleSpec(0))

    def __post_init__(self):
        if self.mu < 0 or int(self.mu) != self.mu:
            raise ValueError("order must be a non-negative integer")
        if len(self.coeffs) != self.mu + 1:
            raise ValueError(f"expected {self.mu + 1} coefficients, got {len(self.coeffs)}")
        fns = tuple(_as_matrix_fn(c, self.scale.dim) for c in self.coeffs)
        for f in fns:
            a0 = np.asarray(f(0.0), dtype=complex)
            if a0.shape != (self.scale.dim, self.scale.dim):
                raise ValueError(f"coefficient has shape {a0.shape}, scale has dimension {self.scale.dim}")
            if not np.all(np.isfinite(a0)):
                raise ValueError("coefficient is not finite at r = 0")
        object.__setattr__(self, "coeffs", fns)

    def coefficient(self, j: int, r) -> np.ndarray:
        """a_j evaluated at the points r, shape (len(r), dim, dim)."""
        r = np.atleast_1d(np.asarray(r, float))
        vals = np.asarray(self.coeffs[j](r[:, None, None]), dtype=complex)
        return np.broadcast_to(vals, (len(r), self.scale.dim, self.scale.dim))


def spectral_dy(v, y_len: float, alias_tol: float = 1e-8) -> np.ndarray:
    """d/dy of periodic samples along axis 0 by FFT; raises if the top frequencies carry mass."""
    v = np.asarray(v, dtype=complex)
    n = v.shape[0]
    vh = np.fft.fft(v, axis=0)
    k = 2 * np.pi * np.fft.fftfreq(n, y_len / n)
    mag = np.abs(vh).reshape(n, -1).max(axis=1)
    top = np.abs(k) >= 0.9 * np.abs(k).max()
    if mag.max() > 0 and mag[top].max() > alias_tol * mag.max():
        raise ValueError("differentiation aliasing: function not resolved on the grid")
    kk = k.reshape((n,) + (1,) * (v.ndim - 1))
    return np.fft.ifft(1j * kk * vh, axis=0)


def apply_fuchs(A: FuchsOperator, u: GridFunction, beta: float = 0.0) -> GridFunction:
    """A u with -r d_r = d_y applied spectrally to the periodic part e^{-beta y} u.

    beta lets pure powers be differentiated exactly: u = r^c is handled with beta = -c,
    where e^{-beta y} u is constant.
    """
    grid = u.grid
    vals = u.values
    vec = vals.ndim == 2
    if (vals.shape[1] if vec else 1) != A.scale.dim:
        raise ValueError("function values do not match the operator scale")
    y = grid.y
    ey = np.exp(beta * y)
    v = vals * (np.exp(-beta * y)[:, None] if vec else np.exp(-beta * y))
    L = grid.y_max - grid.y_min
    # (d_y)^j u = e^{beta y} (d_y + beta)^j v
    derivs = [v]
    for _ in range(A.mu):
        derivs.append(spectral_dy(derivs[-1], L) + beta * derivs[-1])
    r = grid.r
    total = np.zeros((grid.n, A.scale.dim), dtype=complex)
    for j, dj in enumerate(derivs):
        d2 = dj if vec else dj[:, None]
        total += np.einsum("nij,nj->ni", A.coefficient(j, r), d2)
    total *= (ey * r ** (-A.mu))[:, None]
    return GridFunction(grid, total if vec else total[:, 0])


@dataclass(frozen=True)
class OperatorPencil:
    """w -> sum_j A_j w^j."""

    matrices: tuple

    def __post_init__(self):
        mats = tuple(np.atleast_2d(np.asarray(m, dtype=complex)) for m in self.matrices)
        if not mats:
            raise ValueError("empty pencil")
        if any(m.shape != mats[0].shape or m.shape[0] != m.shape[1] for m in mats):
            raise ValueError("pencil coefficients must be square of equal size")
        object.__setattr__(self, "matrices", mats)

    @property
    def degree(self) -> int:
        return len(self.matrices) - 1

    @property
    def dim(self) -> int:
        return self.matrices[0].shape[0]

    @property
    def is_diagonal(self) -> bool:
        return all(np.count_nonzero(m - np.diag(np.diag(m))) == 0 for m in self.matrices)

    def __call__(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=complex)
        out = np.zeros(w.shape + (self.dim, self.dim), dtype=complex)
        for j, m in enumerate(self.matrices):
            out = out + (w**j)[..., None, None] * m
        return out

    def conjugate(self, S) -> "OperatorPencil":
        S = np.asarray(S, dtype=complex)
        Si = np.linalg.inv(S)
        return OperatorPencil(tuple(S @ m @ Si for m in self.matrices))


def conormal_symbol(A: FuchsOperator) -> OperatorPencil:
    return OperatorPencil(tuple(A.coefficient(j, 0.0)[0] for j in range(A.mu + 1)))


@dataclass(frozen=True)
class PencilSpectrum:
    points: np.ndarray
    multiplicities: np.ndarray
    eigenvalue_count: int

    def to_dict(self) -> dict:
        return {"points": [[float(p.real), float(p.imag)] for p in self.points],
                "multiplicities": [int(m) for m in self.multiplicities],
                "eigenvalue_count": self.eigenvalue_count}


def _dedupe(values, tol: float = 1e-8):
    pts, mult = [], []
    for v in sorted(values, key=lambda z: (round(z.real, 6), round(z.imag, 6))):
        for i, p in enumerate(pts):
            if abs(v - p) <= tol * max(1.0, abs(p)):
                mult[i] += 1
                break
        else:
            pts.append(v)
            mult.append(1)
    return np.array(pts, dtype=complex), np.array(mult, dtype=int)


def _cluster_means(ev: np.ndarray, tol: float) -> np.ndarray:
    """Replace each tight cluster by its mean.

    A defective eigenvalue of multiplicity m splits under round-off into m points at
    distance ~eps^{1/m}; their mean is accurate to ~eps.
    """
    ev = np.array(ev, dtype=complex)
    if tol <= 0 or len(ev) < 2:
        return ev
    label = np.arange(len(ev))
    for i in range(len(ev)):
        for j in range(i):
            if abs(ev[i] - ev[j]) <= tol * max(1.0, abs(ev[j])):
                label[label == label[i]] = label[j]
    for lab in np.unique(label):
        sel = label == lab
        ev[sel] = ev[sel].mean()
    return ev


def pencil_eigenvalues(P: OperatorPencil, cluster_tol: float = 1e-6) -> np.ndarray:
    """All finite eigenvalues (degree * dim of them) of a pencil with invertible leading matrix.

    Eigenvalues closer than `cluster_tol` (relative) are reported as their common mean.
    """
    lead = P.matrices[-1]
    sv = np.linalg.svd(lead, compute_uv=False)
    if sv.min() <= 1e-12 * max(sv.max(), 1.0):
        raise ValueError("singular leading coefficient")
    mu, d = P.degree, P.dim
    if mu == 0:
        return np.zeros(0, dtype=complex)
    if P.is_diagonal:
        out = []
        for i in range(d):
            c = [m[i, i] for m in P.matrices][::-1]
            out.extend(np.roots(c))
        return _cluster_means(np.array(out, dtype=complex), cluster_tol)
    inv = np.linalg.inv(lead)
    C = np.zeros((mu * d, mu * d), dtype=complex)
    C[: (mu - 1) * d, d:] = np.eye((mu - 1) * d)
    for j in range(mu):
        C[(mu - 1) * d:, j * d:(j + 1) * d] = -inv @ P.matrices[j]
    return _cluster_means(np.linalg.eigvals(C), cluster_tol)


def pencil_spectrum(P: OperatorPencil, strip: Sequence[float], dedupe_tol: float = 1e-8) -> PencilSpectrum:
    """Points of D with c <= Re w <= c', deduplicated with multiplicities."""
    c0, c1 = float(strip[0]), float(strip[1])
    if not (np.isfinite(c0) and np.isfinite(c1)):
        raise ValueError("strip must be bounded")
    if c1 < c0:
        raise ValueError("empty strip")
    ev = pencil_eigenvalues(P)
    # snap round-off at the strip boundary
    inside = ev[(ev.real >= c0 - 1e-12) & (ev.real <= c1 + 1e-12)]
    pts, mult = _dedupe(inside, dedupe_tol)
    return PencilSpectrum(pts, mult, len(ev))


@dataclass
class WeightReport:
    strip: tuple
    points: np.ndarray
    multiplicities: np.ndarray
    forbidden: list
    intervals: list
    sigma_min: list
    margin: float
    base_dim: int
    passed: bool

    def to_dict(self) -> dict:
        return _plain({
            "strip": list(self.strip),
            "points": [[p.real, p.imag] for p in self.points],
            "multiplicities": self.multiplicities,
            "forbidden_gamma": self.forbidden,
            "admissible_intervals": self.intervals,
            "sigma_min": self.sigma_min,
            "margin": self.margin,
            "base_dim": self.base_dim,
            "passed": self.passed,
        })

    def table(self) -> str:
        lines = [f"strip Re w in [{self.strip[0]:.6g}, {self.strip[1]:.6g}]  (base dim {self.base_dim})",
                 f"{'Re p':>14} {'Im p':>14} {'mult':>5} {'gamma':>12}"]
        for p, m in zip(self.points, self.multiplicities):
            g = (self.base_dim + 1) / 2 - p.real
            lines.append(f"{p.real:14.8f} {p.imag:14.8f} {m:5d} {g:12.8f}")
        lines.append("admissible gamma intervals:")
        for (a, b), s in zip(self.intervals, self.sigma_min):
            lines.append(f"  [{a:.8f}, {b:.8f}]   min sigma on sampled lines {s:.3e}")
        return "\n".join(lines)


def admissible_weights(A: Union[FuchsOperator, OperatorPencil], gamma_range: Sequence[float], n: int = 0,
                       margin: float = 1e-6, rho_max: float = 50.0, n_rho: int = 2001,
                       lines_per_interval: int = 3) -> WeightReport:
    """Maximal gamma-subintervals whose lines Re w = (n+1)/2 - gamma avoid D by `margin`.

    Each interval is additionally checked by sampling the smallest singular value of
    the pencil along a few of its lines.
    """
    P = conormal_symbol(A) if isinstance(A, FuchsOperator) else A
    g0, g1 = float(gamma_range[0]), float(gamma_range[1])
    if g1 < g0:
        raise ValueError("empty gamma range")
    off = (n + 1) / 2
    strip = (off - g1, off - g0)
    spec = pencil_spectrum(P, strip)
    forbidden = sorted({float(round(off - p.real, 12)) for p in spec.points})
    intervals = []
    edges = [g for g in forbidden if g0 - margin <= g <= g1 + margin]
    lo = g0
    for g in edges:
        hi = g - margin
        if hi > lo:
            intervals.append((float(lo), float(hi)))
        lo = max(lo, g + margin)
    if g1 > lo:
        intervals.append((float(lo), g1))
    rho = np.linspace(-rho_max, rho_max, n_rho)
    sig = []
    ok = True
    for a, b in intervals:
        worst = np.inf
        for g in np.linspace(a, b, lines_per_interval):
            w = (off - g) + 1j * rho
            worst = min(worst, float(np.linalg.svd(P(w), compute_uv=False).min()))
        sig.append(worst)
        ok &= worst > 0
        for p in spec.points:
            if a < off - p.real < b:
                ok = False
    return WeightReport(strip, spec.points, spec.multiplicities, forbidden, intervals, sig, margin, n, bool(ok))


def weight_shift(beta: float, u: GridFunction) -> GridFunction:
    """Multiplication by r^beta, an isomorphism H^{s,gamma} -> H^{s,gamma+beta}."""
    f = u.grid.r ** beta
    return GridFunction(u.grid, u.values * (f[:, None] if u.values.ndim == 2 else f))


def frozen_symbol_defect(A: FuchsOperator, w0: complex, v, grid, r_fit=None) -> float:
    """|| lim_{r->0} r^{mu + w0} A(r^{-w0} v) - sigma_c(w0) v ||, limit by polynomial extrapolation in r.

    w0 must be real or have Im w0 a multiple of 2pi / (y_max - y_min) so the oscillating
    factor is periodic on the grid.
    """
    v = np.asarray(v, dtype=complex)
    w0 = complex(w0)
    if abs(np.exp(1j * w0.imag * (grid.y_max - grid.y_min)) - 1) > 1e-9:
        raise ValueError("Im w0 must be grid periodic")
    vals = np.exp(w0 * grid.y)[:, None] * v[None, :]  # r^{-w0} v
    u = GridFunction(grid, vals if A.scale.dim > 1 else vals[:, 0])
    Au = apply_fuchs(A, u, beta=float(np.real(w0)))
    scaled = Au.values if Au.values.ndim == 2 else Au.values[:, None]
    scaled = scaled * np.exp(-(A.mu + w0) * grid.y)[:, None]
    r = grid.r
    if r_fit is None:
        r_fit = (r > 1e-4) & (r < 1e-2)
    sel = np.where(r_fit)[0]
    # quadratic extrapolation in r to r = 0
    V = np.vstack([np.ones(len(sel)), r[sel], r[sel] ** 2]).T
    coef, *_ = np.linalg.lstsq(V, scaled[sel], rcond=None)
    limit = coef[0]
    target = conormal_symbol(A)(w0) @ v
    return float(np.linalg.norm(limit - target))
