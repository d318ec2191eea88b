"""Meromorphic Mellin symbols with finite-rank pole data, inversion, ellipticity and index."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from ._numerics import bracket, cauchy_derivatives, cutoff, laurent_coefficients, tail_slope
from .kco import CutoffFunction, HoloSymbol, ThetaGrid, kernel_cutoff
from .report import InconclusiveNumerics, Report


# --- data ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PoleDatum:
    """Principal part sum_{k<=m} L_k (w - p)^{-(k+1)} at the pole p."""

    p: complex
    m: int
    laurent: tuple = field(compare=False)

    def principal_part(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=complex)
        out = 0
        for k, L in enumerate(self.laurent):
            out = out + ((w - self.p) ** (-(k + 1)))[..., None, None] * L
        return out

    @property
    def rank(self) -> int:
        return max((np.linalg.matrix_rank(L, tol=1e-10 * max(1.0, np.abs(L).max())) for L in self.laurent), default=0)

    def to_dict(self) -> dict:
        return {"p": [float(np.real(self.p)), float(np.imag(self.p))], "m": int(self.m),
                "laurent": [[[[float(z.real), float(z.imag)] for z in row] for row in L] for L in self.laurent]}


@dataclass(frozen=True)
class MeroSymbol:
    """A meromorphic (dim x dim)-matrix valued family w -> func(w) with declared pole data.

    func evaluates the whole symbol (poles included) and broadcasts over arrays of w,
    returning shape w.shape + (dim, dim).
    """

    func: Callable = field(compare=False)
    poles: tuple = ()
    order: float = -np.inf
    dim: int = 1
    rank_bound: Optional[int] = None

    def __post_init__(self):
        if self.rank_bound is not None and any(p.rank > self.rank_bound for p in self.poles):
            raise ValueError("pole coefficients exceed the declared rank bound")

    def __call__(self, w) -> np.ndarray:
        w = np.asarray(w, dtype=complex)
        vals = np.asarray(self.func(w), dtype=complex)
        if vals.shape != w.shape + (self.dim, self.dim):
            vals = np.broadcast_to(vals, w.shape + (self.dim, self.dim))
        return vals

    @property
    def pole_points(self) -> np.ndarray:
        return np.array([p.p for p in self.poles], dtype=complex)

    def on_line(self, beta: float, rho) -> np.ndarray:
        return self(beta + 1j * np.asarray(rho, float))


def scalar_symbol(f: Callable, poles=(), order: float = -np.inf) -> MeroSymbol:
    return MeroSymbol(lambda w: np.asarray(f(np.asarray(w, dtype=complex)), dtype=complex)[..., None, None],
                      tuple(poles), order, 1)


def zero_symbol(dim: int = 1) -> MeroSymbol:
    return MeroSymbol(lambda w: np.zeros(np.shape(w) + (dim, dim), dtype=complex), (), -np.inf, dim)


def rational_pole_symbol(c: complex, p: complex, P=None) -> MeroSymbol:
    """c P / (w - p); P defaults to the 1x1 identity."""
    P = np.eye(1) if P is None else np.asarray(P, dtype=complex)
    d = P.shape[0]
    datum = PoleDatum(complex(p), 0, (c * P,))
    return MeroSymbol(lambda w: (c / (np.asarray(w, dtype=complex) - p))[..., None, None] * P, (datum,), -1.0, d)


def holo_as_mero(h: HoloSymbol, beta: float) -> MeroSymbol:
    """Entire symbol w -> V(phi)a at zeta = -i (w - beta), so the line Re w = beta is delta = 0."""
    shape = h.value_shape
    dim = 1 if shape == () else shape[0]

    def f(w):
        v = h.at_w(w, beta)
        return v[..., None, None] if shape == () else v

    return MeroSymbol(f, (), h.order, dim)


# --- composition ----------------------------------------------------------------------

def _merge_points(points, tol=1e-8):
    out = []
    for p in points:
        if not any(abs(p - q) <= tol for q in out):
            out.append(p)
    return out


def _isolation_radius(p, others, cap=0.25):
    d = [abs(p - q) for q in others if abs(p - q) > 1e-12]
    return min([cap] + [0.5 * x for x in d])


def _principal_data(func: Callable, p: complex, others, kmax: int, tol: float = 1e-10) -> Optional[PoleDatum]:
    """Laurent coefficients of func at p for (w-p)^{-1}..(w-p)^{-kmax}, truncated to finite rank."""
    radius = _isolation_radius(p, others)
    coeffs = laurent_coefficients(func, p, radius, -kmax, -1, nodes=256)
    # coeffs[i] multiplies (w-p)^{-kmax+i}; reorder to L_k for (w-p)^{-(k+1)}
    L = [np.asarray(c, dtype=complex) for c in coeffs[::-1]]
    scale = max(1.0, max(float(np.abs(x).max()) for x in L))
    cleaned = []
    for M in L:
        U, s, Vh = np.linalg.svd(np.atleast_2d(M))
        s = np.where(s > tol * scale, s, 0.0)
        cleaned.append((U * s) @ Vh)
    nz = [k for k, M in enumerate(cleaned) if np.abs(M).max() > 0]
    if not nz:
        return None
    m = max(nz)
    return PoleDatum(complex(p), m, tuple(cleaned[: m + 1]))


def compose_mero(h: MeroSymbol, f: MeroSymbol) -> MeroSymbol:
    """Pointwise product h(w) f(w) with merged pole data; coincident poles combine by Laurent product."""
    if h.dim != f.dim:
        raise ValueError("symbols act on different scales")
    pts = _merge_points(list(h.pole_points) + list(f.pole_points))

    def func(w):
        return h(w) @ f(w)

    poles = []
    for p in pts:
        mh = max([d.m + 1 for d in h.poles if abs(d.p - p) <= 1e-8], default=0)
        mf = max([d.m + 1 for d in f.poles if abs(d.p - p) <= 1e-8], default=0)
        datum = _principal_data(func, p, pts, max(mh + mf, 1))
        if datum is not None:
            poles.append(datum)
    return MeroSymbol(func, tuple(poles), h.order + f.order, h.dim)


def pole_data_defect(m: MeroSymbol, radius_cap: float = 0.25) -> float:
    """Largest principal coefficient left in func minus declared principal parts (should vanish)."""
    pts = list(m.pole_points)
    worst = 0.0
    for d in m.poles:
        rest = lambda w, d=d: m(w) - d.principal_part(w)
        c = laurent_coefficients(rest, d.p, _isolation_radius(d.p, pts, radius_cap), -(d.m + 2), -1)
        worst = max(worst, max(float(np.abs(x).max()) for x in c))
    return worst


# --- argument principle -----------------------------------------------------------------

@dataclass(frozen=True)
class Rect:
    x0: float
    x1: float
    y0: float
    y1: float

    @property
    def size(self) -> float:
        return max(self.x1 - self.x0, self.y1 - self.y0)

    @property
    def center(self) -> complex:
        return complex(0.5 * (self.x0 + self.x1), 0.5 * (self.y0 + self.y1))

    def contains(self, z, pad: float = 0.0) -> bool:
        return (self.x0 - pad <= z.real <= self.x1 + pad) and (self.y0 - pad <= z.imag <= self.y1 + pad)

    def boundary(self, n: int) -> np.ndarray:
        t = np.arange(n) / n
        a, b, c, d = self.x0, self.x1, self.y0, self.y1
        return np.concatenate([a + (b - a) * t + 1j * c, b + 1j * (c + (d - c) * t),
                               b - (b - a) * t + 1j * d, a + 1j * (d - (d - c) * t)])

    def split(self):
        # split slightly off-centre so zeros rarely sit on the new edges
        if self.x1 - self.x0 >= self.y1 - self.y0:
            xm = self.x0 + 0.5127 * (self.x1 - self.x0)
            return [Rect(self.x0, xm, self.y0, self.y1), Rect(xm, self.x1, self.y0, self.y1)]
        ym = self.y0 + 0.4873 * (self.y1 - self.y0)
        return [Rect(self.x0, self.x1, self.y0, ym), Rect(self.x0, self.x1, ym, self.y1)]


class _DetFunction:
    """D(w) = det F(w) * prod (w - p_j)^{n_j}, holomorphic in the search region.

    Only its phase and logarithmic derivative are needed, so F is never reduced to a
    possibly under- or overflowing scalar determinant.
    """

    def __init__(self, F: Callable, compensate=(), fd_step: float = 1e-4):
        self.F = F
        self.comp = [(complex(p), int(n)) for p, n in compensate]
        self.h = fd_step

    def phase(self, w) -> np.ndarray:
        vals = self.F(np.asarray(w, dtype=complex))
        sign, logabs = np.linalg.slogdet(vals)
        if np.any(~np.isfinite(logabs)) or np.any(logabs < np.log(1e-300)):
            raise ZeroDivisionError("determinant vanishes on the contour")
        ph = np.angle(sign)
        for p, n in self.comp:
            ph = ph + n * np.angle(w - p)
        return ph

    def logabs(self, w) -> np.ndarray:
        return np.linalg.slogdet(self.F(np.asarray(w, dtype=complex)))[1]

    def log_derivative(self, w: complex) -> complex:
        h = self.h
        pts = w + h * np.array([-2, -1, 1, 2])
        vals = self.F(pts)
        dF = (vals[0] - 8 * vals[1] + 8 * vals[2] - vals[3]) / (12 * h)
        Fw = self.F(np.array([w]))[0]
        out = np.trace(np.linalg.solve(Fw, dF))
        for p, n in self.comp:
            out += n / (w - p)
        return complex(out)


def winding_on_contour(D: _DetFunction, pts_fn: Callable[[int], np.ndarray], n0: int = 64,
                       n_max: int = 1 << 15, max_step: float = np.pi / 4) -> tuple[int, float]:
    """Winding of D along a closed contour, refining the sampling until phase steps stay small."""
    n = n0
    prev = None
    while n <= n_max:
        z = pts_fn(n)
        ph = D.phase(z)
        steps = np.angle(np.exp(1j * np.diff(np.concatenate([ph, ph[:1]]))))
        if np.abs(steps).max() <= max_step:
            total = steps.sum() / (2 * np.pi)
            k = int(round(total))
            if prev is not None and prev == k:
                return k, abs(total - k)
            prev = k
        n *= 2
    raise InconclusiveNumerics("contour collision: phase not resolved on the contour")


def _count(D: _DetFunction, R: Rect) -> int:
    return winding_on_contour(D, lambda n: R.boundary(n // 4 if n >= 16 else 4))[0]


def _newton(D: _DetFunction, z0: complex, mult: int, R: Rect, iters: int = 60) -> Optional[complex]:
    z = z0
    for _ in range(iters):
        try:
            ld = D.log_derivative(z)
        except np.linalg.LinAlgError:
            return z
        except ValueError:
            return None
        if ld == 0 or not np.isfinite(ld):
            return None
        step = mult / ld
        z = z - step
        if not R.contains(z, pad=R.size):
            return None
        if abs(step) < 1e-14 * max(1.0, abs(z)):
            break
    return z


def find_zeros(F: Callable, region: Rect, compensate=(), min_size: float = 1e-3,
               max_depth: int = 40) -> list:
    """Zeros (point, multiplicity) of det F in `region` by subdivision, counting and Newton."""
    D = _DetFunction(F, compensate)
    total = _count(D, region)
    if total < 0:
        raise InconclusiveNumerics("negative zero count: pole compensation insufficient")
    queue = [(region, total, 0)]
    found = []
    while queue:
        R, Z, depth = queue.pop()
        if Z == 0:
            continue
        if Z == 1 or R.size < min_size:
            z = _newton(D, R.center, Z, R)
            if z is not None and R.contains(z, pad=1e-9):
                found.append((z, Z))
                continue
            if R.size < 1e-9 or depth >= max_depth:
                raise InconclusiveNumerics("root refinement failed")
        subs = R.split()
        counts = [_count(D, S) for S in subs]
        if sum(counts) != Z:
            raise InconclusiveNumerics("inconsistent zero counts under subdivision")
        queue.extend((S, c, depth + 1) for S, c in zip(subs, counts))
    found.sort(key=lambda t: (t[0].real, t[0].imag))
    # a multiple zero found as separate simple zeros is merged
    merged = []
    for z, k in found:
        for i, (q, kq) in enumerate(merged):
            if abs(z - q) < 1e-7:
                merged[i] = (q, kq + k)
                break
        else:
            merged.append((z, k))
    return merged


# --- inversion ------------------------------------------------------------------------

def _identity_plus(m: MeroSymbol) -> Callable:
    eye = np.eye(m.dim)
    return lambda w: eye + m(w)


def invertible_line(F: Callable, betas, rho_max: float = 40.0, n: int = 801, tol: float = 1e-8):
    rho = np.linspace(-rho_max, rho_max, n)
    for b in betas:
        s = np.linalg.svd(F(b + 1j * rho), compute_uv=False).min()
        if s > tol:
            return b, float(s)
    return None, 0.0


def default_region(m: MeroSymbol, betas=(0.5,), pad_x: float = 2.0, pad_y: float = 4.0) -> Rect:
    xs = [p.real for p in m.pole_points] + list(betas)
    ys = [p.imag for p in m.pole_points] + [0.0]
    return Rect(min(xs) - pad_x + 0.0137, max(xs) + pad_x + 0.0113, min(ys) - pad_y + 0.0071, max(ys) + pad_y + 0.0093)


def invert_one_plus(m: MeroSymbol, region: Optional[Rect] = None, betas: Sequence[float] = (0.5,)) -> MeroSymbol:
    """m^(-1) with (1 + m)(1 + m^(-1)) = 1; pole data from zeros of det(1 + m) and from poles of m."""
    F = _identity_plus(m)
    b, _ = invertible_line(F, list(betas) + [float(x) for x in np.linspace(-3, 3, 13)])
    if b is None:
        raise ValueError("no invertible line found for 1 + m")
    region = default_region(m, betas) if region is None else region
    comp = [(p.p, m.dim * (p.m + 1)) for p in m.poles if region.contains(p.p)]
    zeros = [(z, k) for z, k in find_zeros(F, region, comp)
             if all(abs(z - p) > 1e-6 for p, _ in comp)]
    for i, (z, _) in enumerate(zeros):
        for q, _ in zeros[i + 1:]:
            if abs(z - q) < 1e-6:
                raise InconclusiveNumerics("contour collision: zeros closer than resolution")
    eye = np.eye(m.dim)

    def inv(w):
        return np.linalg.inv(F(w)) - eye

    singular = [z for z, _ in zeros] + [p for p, _ in comp]
    poles = []
    for z, k in zeros:
        d = _principal_data(inv, z, singular, k)
        if d is not None:
            poles.append(d)
    for p in m.poles:
        if region.contains(p.p):
            d = _principal_data(inv, p.p, singular, m.dim * (p.m + 1))
            if d is not None and np.abs(np.array(d.laurent)).max() > 1e-9:
                poles.append(d)
    return MeroSymbol(inv, tuple(poles), m.order, m.dim)


def identity_residual(m: MeroSymbol, minv: MeroSymbol, betas: Sequence[float], rho_max: float = 40.0,
                      n: int = 801) -> float:
    """max over sampled lines of ||(1 + m)(1 + m^(-1)) - 1||."""
    eye = np.eye(m.dim)
    rho = np.linspace(-rho_max, rho_max, n)
    worst = 0.0
    for b in betas:
        w = b + 1j * rho
        prod = (eye + m(w)) @ (eye + minv(w))
        worst = max(worst, float(np.abs(prod - eye).max()))
    return worst


def holo_spectrum(h: Callable, region: Rect, check_points: int = 200, seed: int = 0):
    """Zeros of det h in the region, with off-D invertibility sampled at random points."""
    zeros = find_zeros(h, region)
    rng = np.random.default_rng(seed)
    pts = region.x0 + (region.x1 - region.x0) * rng.random(check_points) \
        + 1j * (region.y0 + (region.y1 - region.y0) * rng.random(check_points))
    far = np.array([all(abs(p - z) > 1e-2 for z, _ in zeros) for p in pts])
    smin = np.linalg.svd(h(pts[far]), compute_uv=False).min(axis=-1) if far.any() else np.array([np.inf])
    return zeros, float(smin.min())


# --- index -----------------------------------------------------------------------------

def winding_number(f: MeroSymbol, beta: float, tau_max: float = 40.0, n: int = 8001) -> tuple[int, float]:
    """Winding of det(1 + f(beta + i tau)) for increasing tau, with the rounding residue."""
    tau = np.linspace(-tau_max, tau_max, n)
    F = _identity_plus(f)
    vals = F(beta + 1j * tau)
    sign, logabs = np.linalg.slogdet(vals)
    if np.exp(logabs).min() <= 1e-6:
        raise ZeroDivisionError("det(1 + f) vanishes on the line")
    ph = np.unwrap(np.angle(sign))
    total = (ph[-1] - ph[0]) / (2 * np.pi)
    k = int(round(total))
    res = abs(total - k)
    if res >= 0.01:
        raise InconclusiveNumerics(f"winding residue {res:.3g} too large")
    return k, res


def index_line_profile(k: int):
    """1 + f_k on the line: exp(2 pi i k s(tau)) with s(tau) = (1 + tanh tau)/2."""
    return lambda tau: np.exp(1j * np.pi * k * (1 + np.tanh(np.asarray(tau, dtype=complex)))) - 1


def make_index_symbol(k: int, gamma: float, d: int = 0, T: float = 16.0, flat: float = 14.0) -> MeroSymbol:
    """Smoothing symbol f_k with winding k on the line Re w = (d+1)/2 - gamma, made entire by kernel cut-off."""
    beta = (d + 1) / 2 - gamma
    if k == 0:
        return zero_symbol()
    h = kernel_cutoff(CutoffFunction("flat", T=T, eps=flat), index_line_profile(k), -np.inf, ThetaGrid(),
                      delta_max=1.0)
    return holo_as_mero(h, beta)


@dataclass(frozen=True)
class ToeplitzResult:
    per_size: dict
    index: int


def line_kernel(f: MeroSymbol, beta: float, t, rho_max: float = 40.0, n_rho: int = 3201) -> np.ndarray:
    """Convolution kernel of op_M(f) in y: (1/2pi) int exp(i t rho) f(beta + i rho) d rho (trapezoid)."""
    t = np.asarray(t, dtype=float)
    rho = np.linspace(-rho_max, rho_max, n_rho)
    wts = np.full(n_rho, rho[1] - rho[0])
    wts[[0, -1]] *= 0.5
    fw = wts * f.on_line(beta, rho)[:, 0, 0]
    out = np.empty(t.shape, dtype=complex)
    for i in range(0, t.size, 128):
        out.flat[i:i + 128] = np.exp(1j * np.outer(t.flat[i:i + 128], rho)) @ fw
    return out / (2 * np.pi)


def tip_cutoffs(y):
    """omega (1 on r <= 1/2, 0 on r >= 2/3) and omega~ (1 on r <= 2/3, 0 on r >= 5/6) in y = -log r."""
    r = np.exp(-np.asarray(y, float))
    return cutoff(r, 0.5, 2.0 / 3.0), cutoff(r, 2.0 / 3.0, 5.0 / 6.0)


def far_cutoffs(y):
    """omega_inf (0 on r <= 3/2, 1 on r >= 2) and omega~_inf (0 on r <= 5/4, 1 on r >= 3/2)."""
    r = np.exp(-np.asarray(y, float))
    return 1 - cutoff(r, 1.5, 2.0), 1 - cutoff(r, 1.25, 1.5)


def assemble_truncation(f: MeroSymbol, beta: float, n: int, y_range=(-40.0, 40.0),
                        g: Optional[MeroSymbol] = None) -> tuple[np.ndarray, np.ndarray]:
    """Nystrom matrix of 1 + omega op_M(f) omega~ (+ omega_inf op_M(g) omega~_inf) on a uniform y-grid.

    Conjugation by S_gamma turns op_M(f) into convolution with the inverse Fourier
    transform of f(beta + i rho); the kernel is sampled exactly, so coarse grids do not alias.
    """
    y = np.linspace(y_range[0], y_range[1], n)
    dy = y[1] - y[0]
    lag = np.subtract.outer(np.arange(n), np.arange(n)) + n - 1
    om, omt = tip_cutoffs(y)
    A = np.eye(n, dtype=complex)
    A += om[:, None] * (dy * line_kernel(f, beta, dy * np.arange(-(n - 1), n))[lag]) * omt[None, :]
    if g is not None:
        oi, oit = far_cutoffs(y)
        A += oi[:, None] * (dy * line_kernel(g, beta, dy * np.arange(-(n - 1), n))[lag]) * oit[None, :]
    return A, y


def _count_localized(A: np.ndarray, y: np.ndarray, core: tuple, rel_tol: float) -> tuple[int, int]:
    U, s, Vh = np.linalg.svd(A)
    small = s < rel_tol * s.max()
    inside = (y >= core[0]) & (y <= core[1])

    def localized(vec):
        mass = np.abs(vec) ** 2
        return mass[inside].sum() > 0.5 * mass.sum()

    ker = sum(localized(Vh[i].conj()) for i in np.where(small)[0])
    coker = sum(localized(U[:, i]) for i in np.where(small)[0])
    return int(ker), int(coker)


def toeplitz_index_single(f: MeroSymbol, beta: float, n: int, y_range=(-40.0, 40.0), core=(-20.0, 20.0),
                          g: Optional[MeroSymbol] = None, rel_tol: float = 1e-8) -> int:
    """dim ker - dim coker of the truncation, counting near-null vectors localized in `core`.

    Truncating the half-line creates an artificial boundary far from the true one; its
    near-null vectors sit outside the core window and are not counted.
    """
    A, y = assemble_truncation(f, beta, n, y_range, g)
    ker, coker = _count_localized(A, y, core, rel_tol)
    return ker - coker


def toeplitz_index_oracle(f: MeroSymbol, gamma: float, sizes: Sequence[int] = (128, 256, 512), d: int = 0,
                          **kw) -> ToeplitzResult:
    beta = (d + 1) / 2 - gamma
    per = {int(n): toeplitz_index_single(f, beta, int(n), **kw) for n in sizes}
    if len(set(per.values())) != 1:
        raise InconclusiveNumerics(f"truncation index did not stabilize: {per}")
    return ToeplitzResult(per, next(iter(per.values())))


def relative_index_check(fA: MeroSymbol, fB: MeroSymbol, glue: tuple, gamma: float = 0.0,
                         sizes: Sequence[int] = (128, 256, 512)) -> Report:
    """ind A - ind B = ind A~ - ind B~ for two-ended operators sharing their far ends pairwise.

    glue = (g1, g2) are the far-end symbols: A = (fA, g1), B = (fB, g1), A~ = (fA, g2), B~ = (fB, g2).
    """
    g1, g2 = glue
    ind = {}
    for name, (tip, far) in {"A": (fA, g1), "B": (fB, g1), "A~": (fA, g2), "B~": (fB, g2)}.items():
        ind[name] = toeplitz_index_oracle(tip, gamma, sizes, g=far).index
    lhs = ind["A"] - ind["B"]
    rhs = ind["A~"] - ind["B~"]
    return Report("relative_index", lhs == rhs, {"indices": ind, "lhs": lhs, "rhs": rhs})


# --- elliptic inverse ------------------------------------------------------------------

def elliptic_inverse(g: MeroSymbol, beta: float, order: float, lines: Sequence[float] = None,
                     region: Optional[Rect] = None, cutoff_fn: Optional[CutoffFunction] = None,
                     grid: Optional[ThetaGrid] = None) -> MeroSymbol:
    """f with g f = 1: h = V(phi)(g^{-1} on the line), 1 + m = g h, f = h (1 + m)^{-1}."""
    lines = [beta - 0.25, beta, beta + 0.25] if lines is None else list(lines)
    grid = ThetaGrid() if grid is None else grid
    rho = np.linspace(-200, 200, 4001)
    for b in lines:
        smin = np.linalg.svd(g.on_line(b, rho), compute_uv=False).min()
        if not smin > 1e-8:
            raise ValueError(f"symbol is not elliptic: singular on the line Re w = {b}")
    phi = CutoffFunction("flat", T=2.0, eps=1.0) if cutoff_fn is None else cutoff_fn

    def line_inverse(r):
        return np.linalg.inv(g.on_line(beta, r))

    if region is None:
        span = max(abs(b - beta) for b in lines) + 0.5
        region = Rect(beta - span + 0.0137, beta + span + 0.0113, -6.0071, 6.0093)
    reach = max(abs(region.x0 - beta), abs(region.x1 - beta), *(abs(b - beta) for b in lines)) + 0.35
    h = holo_as_mero(kernel_cutoff(phi, line_inverse, -order, grid, delta_max=reach), beta)
    eye = np.eye(g.dim)
    m = MeroSymbol(lambda w: g(w) @ h(w) - eye, g.poles, -np.inf, g.dim)
    minv = invert_one_plus(m, region, lines)
    f = compose_mero(h, MeroSymbol(lambda w: eye + minv(w), minv.poles, 0.0, g.dim))
    return MeroSymbol(f.func, f.poles, -order, g.dim)


def inverse_residual(g: MeroSymbol, f: MeroSymbol, lines: Sequence[float], rho_max: float = 40.0,
                     n: int = 801) -> float:
    eye = np.eye(g.dim)
    rho = np.linspace(-rho_max, rho_max, n)
    return max(float(np.abs(g.on_line(b, rho) @ f.on_line(b, rho) - eye).max()) for b in lines)


def verify_order_drop(h: MeroSymbol, beta: float, eps: float, order: float, others: Sequence[float] = None,
                      rho_grid=None, kmax: int = 2, slack: float = 0.05) -> Report:
    """Order mu - eps seminorms on the line beta and on two other lines, uniformly bounded."""
    others = [beta - 0.5, beta + 0.5] if others is None else list(others)
    if rho_grid is None:
        rho_grid = np.geomspace(1.0, 1000.0, 32)
    rho_grid = np.asarray(rho_grid, float)
    target = order - eps
    sups, worst = {}, -np.inf
    for b in [beta] + others:
        # matrix axes first: the Cauchy nodes must sit on the last axis
        dv = cauchy_derivatives(lambda z: np.moveaxis(h(b + 1j * z), (-2, -1), (0, 1)), rho_grid, kmax,
                                radius=0.25, nodes=32)
        for k in range(kmax + 1):
            mag = np.abs(dv[k]).reshape(-1, len(rho_grid)).max(axis=0)
            prof = bracket(rho_grid) ** (-target + k) * mag
            sups[f"beta={b:.3g},k={k}"] = float(prof.max())
            if prof.max() > 0:
                worst = max(worst, tail_slope(bracket(rho_grid), np.maximum(prof, 1e-300)))
    ok = all(np.isfinite(v) for v in sups.values()) and worst <= slack
    return Report("order_drop", bool(ok), {"suprema": sups, "worst_growth": worst, "order": target})
