"""Weighted Mellin transform on a logarithmic grid, Mellin-Sobolev norms and Mellin operators.

Conventions: r = e^{-y}; (M u)(w) = int_0^inf r^{w-1} u(r) dr; on the weight line
Re w = beta0 := (d+1)/2 - gamma, (M_gamma u)(beta0 + i rho) = (F S_gamma u)(rho) with
(S_gamma u)(y) = e^{-beta0 y} u(e^{-y}) and (F v)(rho) = int e^{-i y rho} v(y) dy.
All line integrals carry drho / 2pi, which makes the transform unitary.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ._numerics import bracket, fit_power, smoothstep
from .report import Report
from .scales import OrderReducingFamily


@dataclass(frozen=True)
class LogGrid:
    """y_j = y_min + j dy, j < n, dy = (y_max - y_min)/n, and r_j = e^{-y_j}."""

    y_min: float = -12.0
    y_max: float = 12.0
    n: int = 4096

    def __post_init__(self):
        if self.n < 2 or self.n & (self.n - 1):
            raise ValueError("n must be a power of two")
        if not self.y_max > self.y_min:
            raise ValueError("empty grid")

    @property
    def dy(self) -> float:
        return (self.y_max - self.y_min) / self.n

    @property
    def y(self) -> np.ndarray:
        return self.y_min + self.dy * np.arange(self.n)

    @property
    def r(self) -> np.ndarray:
        return np.exp(-self.y)

    @property
    def rho(self) -> np.ndarray:
        """Line frequencies in FFT order."""
        return 2 * np.pi * np.fft.fftfreq(self.n, self.dy)

    @property
    def drho(self) -> float:
        return 2 * np.pi / (self.n * self.dy)

    def window(self, frac: float = 0.1) -> np.ndarray:
        """Raised-cosine taper on the outer `frac` of the y-range at each end."""
        s = (self.y - self.y_min) / (self.y_max - self.y_min)
        w = np.ones(self.n)
        lo = s < frac
        hi = s > 1 - frac
        w[lo] = 0.5 - 0.5 * np.cos(np.pi * s[lo] / frac)
        w[hi] = 0.5 - 0.5 * np.cos(np.pi * (1 - s[hi]) / frac)
        return w


@dataclass(frozen=True)
class GridFunction:
    """Samples u(r_j) with values in C (shape (n,)) or in a scale (shape (n, dim))."""

    grid: LogGrid
    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=complex)
        if v.shape[0] != self.grid.n or v.ndim > 2:
            raise ValueError("values do not match the grid")
        object.__setattr__(self, "values", v)

    @classmethod
    def from_callable(cls, grid: LogGrid, f: Callable, windowed: bool = False) -> "GridFunction":
        vals = np.asarray(f(grid.r), dtype=complex)
        if windowed:
            w = grid.window()
            vals = vals * (w if vals.ndim == 1 else w[:, None])
        return cls(grid, vals)

    def __add__(self, other: "GridFunction") -> "GridFunction":
        return GridFunction(self.grid, self.values + other.values)

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        return GridFunction(self.grid, self.values - other.values)

    def scale(self, c) -> "GridFunction":
        return GridFunction(self.grid, c * self.values)


@dataclass(frozen=True)
class LineFunction:
    """Samples of a function on the line Re w = beta at the grid frequencies (FFT order)."""

    beta: float
    rho: np.ndarray
    values: np.ndarray

    @property
    def w(self) -> np.ndarray:
        return self.beta + 1j * self.rho


def line_offset(gamma: float, d: int = 0) -> float:
    return (d + 1) / 2 - gamma


def _expand(x, like):
    x = np.asarray(x)
    return x if like.ndim == 1 else x[:, None]


def s_gamma_map(gamma: float, u: GridFunction, d: int = 0) -> np.ndarray:
    """(S_gamma u)(y) = e^{-beta0 y} u(e^{-y}) on the y-grid."""
    b0 = line_offset(gamma, d)
    return _expand(np.exp(-b0 * u.grid.y), u.values) * u.values


def s_gamma_inverse(gamma: float, v, grid: LogGrid, d: int = 0) -> GridFunction:
    v = np.asarray(v, dtype=complex)
    b0 = line_offset(gamma, d)
    return GridFunction(grid, _expand(np.exp(b0 * grid.y), v) * v)


def fourier_y(v, grid: LogGrid) -> np.ndarray:
    """int e^{-i y rho} v(y) dy at the grid frequencies."""
    v = np.asarray(v, dtype=complex)
    phase = np.exp(-1j * grid.rho * grid.y_min)
    return np.fft.fft(v, axis=0) * grid.dy * _expand(phase, v)


def inverse_fourier_y(vh, grid: LogGrid) -> np.ndarray:
    vh = np.asarray(vh, dtype=complex)
    phase = np.exp(1j * grid.rho * grid.y_min)
    return np.fft.ifft(vh * _expand(phase, vh), axis=0) / grid.dy


def mellin_transform(gamma: float, u: GridFunction, d: int = 0, method: str = "fft",
                     nyquist_tol: Optional[float] = 1e-6) -> LineFunction:
    """M_gamma u on the line Re w = (d+1)/2 - gamma.

    method "fft" transforms S_gamma u; method "direct" sums r_j^w u_j dy with
    explicit complex powers (slow, independent route).
    """
    grid = u.grid
    b0 = line_offset(gamma, d)
    if method == "fft":
        vals = fourier_y(s_gamma_map(gamma, u, d), grid)
    elif method == "direct":
        w = b0 + 1j * grid.rho
        logr = -grid.y
        vals = np.empty((grid.n,) + u.values.shape[1:], dtype=complex)
        chunk = 256
        for i in range(0, grid.n, chunk):
            kern = np.exp(np.outer(w[i:i + chunk], logr)) * grid.dy
            vals[i:i + chunk] = kern @ u.values
    else:
        raise ValueError(f"unknown method {method!r}")
    if nyquist_tol is not None:
        mag = np.abs(vals).reshape(grid.n, -1).max(axis=1)
        top = mag.max()
        edge = mag[np.abs(grid.rho) >= 0.9 * np.abs(grid.rho).max()].max()
        if top > 0 and edge > nyquist_tol * top:
            raise ValueError("grid too coarse: transform not resolved at the Nyquist frequency")
    return LineFunction(b0, grid.rho, vals)


def mellin_inverse(gamma: float, line: LineFunction, grid: LogGrid, d: int = 0) -> GridFunction:
    if not np.isclose(line.beta, line_offset(gamma, d)):
        raise ValueError("line does not match the weight")
    return s_gamma_inverse(gamma, inverse_fourier_y(line.values, grid), grid, d)


def mellin_at(u: GridFunction, w) -> np.ndarray:
    """(M u)(w) = int r^{w-1} u dr by the log-grid trapezoid sum, at arbitrary complex w."""
    w = np.atleast_1d(np.asarray(w, dtype=complex))
    kern = np.exp(-np.outer(w, u.grid.y)) * u.grid.dy
    return kern @ u.values


def _line_weights(s: float, rho, fam: Optional[OrderReducingFamily], dim: int) -> np.ndarray:
    """b^s(rho) as an array (n_rho, dim) of diagonal entries."""
    if fam is None:
        if dim != 1:
            raise ValueError("vector-valued functions need an order-reducing family")
        return bracket(rho)[:, None] ** s
    return np.array([fam.diag(s, [x]) for x in rho])


def line_norm(s: float, vh, rho, drho: float, fam: Optional[OrderReducingFamily] = None) -> float:
    vh = np.asarray(vh, dtype=complex)
    v2 = vh if vh.ndim == 2 else vh[:, None]
    wts = _line_weights(s, rho, fam, v2.shape[1])
    return float(np.sqrt(np.sum(np.abs(wts * v2) ** 2) * drho / (2 * np.pi)))


def cyl_norm(s: float, v, grid: LogGrid, fam: Optional[OrderReducingFamily] = None) -> float:
    """{int ||b^s(eta) (F v)(eta)||^2 deta / 2pi}^{1/2} for v on the y-line."""
    return line_norm(s, fourier_y(v, grid), grid.rho, grid.drho, fam)


def hs_gamma_norm(s: float, gamma: float, u: GridFunction, fam: Optional[OrderReducingFamily] = None,
                  method: str = "fft") -> float:
    """{(2 pi i)^{-1} int_Gamma ||b^s(Im w) (M u)(w)||^2 dw}^{1/2} on Re w = (d+1)/2 - gamma."""
    d = fam.scale.base_dim if fam is not None else 0
    line = mellin_transform(gamma, u, d, method=method, nyquist_tol=None)
    return line_norm(s, line.values, line.rho, u.grid.drho, fam)


# --- Mellin operators ---------------------------------------------------------

@dataclass(frozen=True)
class MellinLineSymbol:
    """f(r, r', w) on a weight line; `kind` is "const" (f(w)), "r" (f(r, w)) or "full".

    Values are scalars or (dim, dim) matrices; callables must broadcast over arrays.
    """

    order: float
    func: Callable = field(compare=False)
    kind: str = "const"
    dim: int = 1

    def __post_init__(self):
        if self.kind not in ("const", "r", "full"):
            raise ValueError(f"unknown symbol kind {self.kind!r}")

    def on_line(self, w) -> np.ndarray:
        if self.kind != "const":
            raise ValueError("symbol depends on r")
        vals = np.asarray(self.func(np.asarray(w)), dtype=complex)
        return np.broadcast_to(vals, np.shape(w) + vals.shape[np.ndim(w):]).copy() if vals.ndim < np.ndim(w) else vals


def _apply_line(vals, uh):
    if uh.ndim == 1:
        return vals * uh
    if vals.ndim == 1:
        return vals[:, None] * uh
    return np.einsum("nij,nj->ni", vals, uh)


def op_mellin(gamma: float, f: MellinLineSymbol, u: GridFunction, d: int = 0, chunk: int = 64) -> GridFunction:
    """op_M^gamma(f) u, i.e. M_gamma^{-1} f M_gamma for r-independent f.

    For r-dependent symbols the pushed-forward double symbol
    g(y, y', rho) = e^{beta0 (y-y')} f(e^{-y}, e^{-y'}, beta0 + i rho) is integrated directly.
    """
    grid = u.grid
    line = mellin_transform(gamma, u, d, nyquist_tol=None)
    w = line.w
    if f.kind == "const":
        vals = np.asarray(f.func(w), dtype=complex)
        if vals.ndim == 0:
            vals = np.full(w.shape, vals)
        return mellin_inverse(gamma, LineFunction(line.beta, line.rho, _apply_line(vals, line.values)), grid, d)
    if u.values.ndim != 1:
        raise NotImplementedError("variable-coefficient operators are implemented for scalar values")
    y = grid.y
    out = np.zeros(grid.n, dtype=complex)
    if f.kind == "r":
        # op u(r) = (2pi)^{-1} int r^{-w} f(r, w) (M u)(w) drho
        for i in range(0, grid.n, chunk):
            rows = slice(i, i + chunk)
            fw = np.asarray(f.func(grid.r[rows, None], w[None, :]), dtype=complex)
            out[rows] = (np.exp(np.outer(y[rows], w)) * fw) @ line.values * grid.drho / (2 * np.pi)
        return GridFunction(grid, out)
    # full double symbol: kernel K(y, y') = (2pi)^{-1} int e^{w (y-y')} f(r, r', w) drho
    for i in range(grid.n):
        diff = y[i] - y
        fw = np.asarray(f.func(grid.r[i], grid.r[:, None], w[None, :]), dtype=complex)
        kern = np.sum(np.exp(diff[:, None] * w[None, :]) * fw, axis=1) * grid.drho / (2 * np.pi)
        out[i] = np.sum(kern * u.values) * grid.dy
    return GridFunction(grid, out)


def random_test_function(grid: LogGrid, rng: np.random.Generator, dim: int = 1, bumps: int = 3,
                         spread: float = 0.5) -> GridFunction:
    """Windowed sum of modulated Gaussians in y, centred in the inner part of the grid."""
    y = grid.y
    span = grid.y_max - grid.y_min
    mid = 0.5 * (grid.y_max + grid.y_min)
    vals = np.zeros((grid.n, dim), dtype=complex)
    for _ in range(bumps):
        c = mid + spread * span * (rng.random() - 0.5) * 0.6
        width = 0.5 + 1.5 * rng.random()
        freq = 4 * (rng.random() - 0.5)
        amp = rng.normal(size=dim) + 1j * rng.normal(size=dim)
        vals += np.exp(-((y - c) / width) ** 2 + 1j * freq * y)[:, None] * amp[None, :]
    vals *= grid.window()[:, None]
    return GridFunction(grid, vals[:, 0] if dim == 1 else vals)


def op_mellin_bound(f: MellinLineSymbol, s: float, gamma: float, fam: Optional[OrderReducingFamily] = None,
                    fam_t: Optional[OrderReducingFamily] = None, grid: Optional[LogGrid] = None,
                    n_tests: int = 8, seed: int = 0) -> tuple[float, float]:
    """(measured ratio, c) with c = sup_rho ||b~^{s-mu} f(beta0 + i rho) b^{-s}|| on the sampled line."""
    grid = LogGrid(-12.0, 12.0, 1024) if grid is None else grid
    fam_t = fam if fam_t is None else fam_t
    d = fam.scale.base_dim if fam is not None else 0
    dim = fam.scale.dim if fam is not None else 1
    b0 = line_offset(gamma, d)
    w = b0 + 1j * grid.rho
    vals = np.asarray(f.func(w), dtype=complex)
    if vals.ndim <= 1:
        vals = np.broadcast_to(vals, w.shape)[:, None, None] * np.eye(dim)[None]
    left = _line_weights(s - f.order, grid.rho, fam_t, dim)
    right = _line_weights(-s, grid.rho, fam, dim)
    c = max(float(np.linalg.norm(left[i][:, None] * vals[i] * right[i][None, :], 2)) for i in range(grid.n))
    rng = np.random.default_rng(seed)
    ratio = 0.0
    for _ in range(n_tests):
        u = random_test_function(grid, rng, dim)
        out = op_mellin(gamma, f, u, d)
        ratio = max(ratio, hs_gamma_norm(s - f.order, gamma, out, fam_t) / hs_gamma_norm(s, gamma, u, fam))
    return ratio, c


# --- Mellin quantisation ---------------------------------------------------------

@dataclass(frozen=True)
class EdgeDegenerateSymbol:
    """a(r, rho) = coeff(r) * profile(r rho).

    `kernel(x)` is the closed form of (2pi)^{-1} int e^{i x sigma} profile(sigma) dsigma; if
    `poly` is given the profile is the polynomial sum_k poly[k] sigma^k.
    """

    profile: Optional[Callable] = field(default=None, compare=False)
    kernel: Optional[Callable] = field(default=None, compare=False)
    coeff: Callable = field(default=lambda r: np.ones_like(np.asarray(r, float)), compare=False)
    poly: Optional[tuple] = None


def _quotient_cutoff(t, lo=(0.4, 0.85), hi=(1.18, 2.2)):
    t = np.asarray(t, float)
    return smoothstep((t - lo[0]) / (lo[1] - lo[0])) * (1 - smoothstep((t - hi[0]) / (hi[1] - hi[0])))


def _falling(w, k):
    out = np.ones_like(w)
    for j in range(k):
        out = out * (-w - j)
    return out


def quantized_symbol(a: EdgeDegenerateSymbol, n_x: int = 4096) -> MellinLineSymbol:
    """h(r, w) with op_M(h) = Op_r(a) modulo an operator with smooth kernel.

    Polynomial profiles give the exact differential-operator correspondence
    r^k D_r^k <-> (-i)^k (-w)(-w-1)...(-w-k+1). Otherwise the Schwartz kernel in the
    quotient t = r'/r is cut off near t = 1 and Mellin transformed:
    h(w) = int_0^inf t^{-w} psi(t) K(1 - t) dt.
    """
    if a.poly is not None:
        coeffs = tuple(a.poly)

        def h(r, w):
            w = np.asarray(w, dtype=complex)
            tot = sum(c * (-1j) ** k * _falling(w, k) for k, c in enumerate(coeffs))
            return a.coeff(r) * tot

        return MellinLineSymbol(float(len(coeffs) - 1), h, "r")
    hw = _quotient_transform(a, n_x)

    def h(r, w):
        return a.coeff(r) * hw(w)

    return MellinLineSymbol(-np.inf, h, "r")


def _quotient_transform(a: EdgeDegenerateSymbol, n_x: int = 4096) -> Callable:
    """w -> int_0^inf t^{-w} psi(t) K(1 - t) dt, entire in w because psi has compact support."""
    if a.kernel is None:
        raise ValueError("non-polynomial symbols need a closed-form kernel")
    x = np.linspace(np.log(1 / 2.3), np.log(1 / 0.38), n_x)
    dx = x[1] - x[0]
    t = np.exp(-x)
    g = np.asarray(a.kernel(1 - t), dtype=complex) * _quotient_cutoff(t)
    if not np.all(np.isfinite(g)):
        raise OverflowError("kernel assembly produced non-finite values")

    def hw(w):
        w = np.asarray(w, dtype=complex)
        flat = w.reshape(-1)
        out = np.empty(flat.shape, dtype=complex)
        for i in range(0, flat.size, 512):
            out[i:i + 512] = np.exp(np.outer(flat[i:i + 512] - 1, x)) @ g * dx
        return out.reshape(w.shape)

    return hw


def apply_edge_operator(a: EdgeDegenerateSymbol, u: Callable, r_eval, r_support=(0.2, 3.0), n: int = 4001):
    """Op_r(a) u(r) = coeff(r) int K(1 - r'/r) u(r') dr'/r by direct quadrature in r'."""
    rp = np.linspace(r_support[0], r_support[1], n)
    drp = rp[1] - rp[0]
    uv = np.asarray(u(rp), dtype=complex)
    r_eval = np.asarray(r_eval, float)
    K = np.asarray(a.kernel(1 - rp[None, :] / r_eval[:, None]), dtype=complex)
    return a.coeff(r_eval) * (K @ uv) * drp / r_eval


def _bump(r, lo, hi):
    """Smooth bump supported in [lo, hi], equal to 1 only at the midpoint."""
    x = (np.asarray(r, float) - lo) / (hi - lo)
    return smoothstep(2 * x) * (1 - smoothstep(2 * x - 1))


def mellin_quantize(a: EdgeDegenerateSymbol, delta: float = 0.0, omegas=None,
                    r_eval=None, grid: Optional[LogGrid] = None, support=(0.3, 2.0)) -> tuple:
    """Build h and measure ||(op_M^delta(h) - Op_r(a)) u_omega|| for u_omega = chi(r) e^{i omega r}.

    Returns (h, Report) where the report carries the decay exponent fitted over omega.
    Both sides are evaluated at the points r_eval; the log grid must be long enough
    that its period exceeds the spread of log(r'/r) plus the support of the cut-off kernel.
    """
    h = quantized_symbol(a)
    if a.poly is not None:
        return h, Report("mellin_quantisation", True, {"exact": True})
    omegas = np.geomspace(32.0, 256.0, 7) if omegas is None else np.asarray(omegas, float)
    grid = LogGrid(-3.0, 3.0, 4096) if grid is None else grid
    r_eval = np.linspace(support[0], support[1], 64) if r_eval is None else np.asarray(r_eval, float)
    if grid.rho.max() < 2 * omegas.max() * support[1]:
        raise ValueError("insufficient grid for the requested frequencies")
    lo, hi = support
    hw = _quotient_transform(a)
    w = line_offset(delta) + 1j * grid.rho
    hv = a.coeff(r_eval)[:, None] * hw(w)[None, :]
    rpow = np.exp(-np.outer(np.log(r_eval), w))
    disc, ref = [], []
    for om in omegas:
        uf = lambda r, om=om: _bump(r, lo, hi) * np.exp(1j * om * np.asarray(r, float))
        direct = apply_edge_operator(a, uf, r_eval, (lo, hi), n=max(4001, int(80 * om)))
        line = mellin_transform(delta, GridFunction.from_callable(grid, uf), nyquist_tol=None)
        mell = (rpow * hv) @ line.values * grid.drho / (2 * np.pi)
        disc.append(float(np.linalg.norm(mell - direct) / np.sqrt(len(r_eval))))
        ref.append(float(np.linalg.norm(direct) / np.sqrt(len(r_eval))))
    disc = np.array(disc)
    keep = disc > 1e-12
    expo = fit_power(omegas[keep], disc[keep])[0] if keep.sum() >= 3 else -np.inf
    measured = {"omegas": omegas, "discrepancy": disc, "reference": np.array(ref), "exponent": expo,
                "points_above_floor": int(keep.sum()), "line": line_offset(delta)}
    return h, Report("mellin_quantisation", bool(expo < -4), measured)
