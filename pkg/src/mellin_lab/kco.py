"""Kernel cut-off: holomorphic extension of line symbols by cutting off their Fourier kernel.

For a symbol a(rho) with kernel k(theta) = (2pi)^{-1} int e^{i theta rho} a(rho) drho,
V(phi)a(zeta) = int e^{-i theta zeta} phi(theta) k(theta) dtheta. The theta-integral runs over
the compact support of phi, so the result is entire in zeta = rho + i delta.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import ceil, factorial
from typing import Callable, Optional

import numpy as np

from ._numerics import bracket, cauchy_derivatives, fit_power, smoothstep, tail_slope
from .report import Report


@dataclass(frozen=True)
class CutoffFunction:
    """Compactly supported phi on [-T, T] with phi(0) = 1.

    kind "bump": exp(1 - 1/(1 - (theta/T)^2)), even, so odd derivatives at 0 vanish.
    kind "shifted": the bump recentred at `shift` and shrunk to stay inside [-T, T];
    generic non-zero derivatives at 0.
    kind "flat": 1 on [-eps, eps], smooth ramp to 0 at |theta| = T; all derivatives at 0 vanish.
    """

    kind: str = "bump"
    T: float = 1.0
    shift: float = 0.3
    eps: float = 0.1

    def __post_init__(self):
        if self.kind not in ("bump", "shifted", "flat"):
            raise ValueError(f"unknown cutoff kind {self.kind!r}")
        if self.T <= 0:
            raise ValueError("support bound must be positive")
        if self.kind == "shifted" and not abs(self.shift) < self.T:
            raise ValueError("shift must lie inside the support")
        if self.kind == "flat" and not 0 < self.eps < self.T:
            raise ValueError("flat region must be inside the support")

    @staticmethod
    def _bump(x):
        x = np.asarray(x)
        inside = np.abs(x.real) < 1 if np.iscomplexobj(x) else np.abs(x) < 1
        safe = np.where(inside, x, 0.0)
        return np.where(inside, np.exp(1.0 - 1.0 / (1.0 - safe**2)), 0.0)

    def _shifted_parts(self):
        width = self.T - abs(self.shift)
        return width, float(self._bump(-self.shift / width))

    def __call__(self, theta):
        theta = np.asarray(theta)
        if self.kind == "bump":
            return self._bump(theta / self.T)
        if self.kind == "shifted":
            width, norm = self._shifted_parts()
            return self._bump((theta - self.shift) / width) / norm
        t = np.abs(np.asarray(theta, float))
        return 1.0 - smoothstep((t - self.eps) / (self.T - self.eps))

    @property
    def smoothness(self) -> float:
        return np.inf

    def derivatives_at_zero(self, kmax: int) -> np.ndarray:
        """phi^{(k)}(0) for k = 0..kmax (Cauchy integrals; the bump is analytic near 0)."""
        if self.kind == "flat":
            out = np.zeros(kmax + 1)
            out[0] = 1.0
            return out
        if self.kind == "bump":
            radius = 0.3 * self.T
        else:
            width, _ = self._shifted_parts()
            radius = 0.3 * (width - abs(self.shift))
        d = cauchy_derivatives(self.__call__, 0.0, kmax, radius=radius, nodes=128)
        return np.real(d)


@dataclass(frozen=True)
class ThetaGrid:
    """Periodic theta grid on [-L, L) with n points; its dual rho grid is the FFT frequency set."""

    half_width: float = 32.0
    n: int = 32768

    @property
    def dtheta(self) -> float:
        return 2 * self.half_width / self.n

    @property
    def theta(self) -> np.ndarray:
        return -self.half_width + self.dtheta * np.arange(self.n)

    @property
    def rho(self) -> np.ndarray:
        return 2 * np.pi * np.fft.fftfreq(self.n, self.dtheta)

    @property
    def edge_phase(self) -> np.ndarray:
        """e^{-i L rho_m} = (-1)^m exactly, since L rho_m = pi m."""
        m = np.fft.fftfreq(self.n, 1.0 / self.n).astype(int)
        return np.where(m % 2 == 0, 1.0, -1.0)


def _expand(x, like):
    x = np.asarray(x)
    return x.reshape(x.shape + (1,) * (like.ndim - 1))


def symbol_kernel(a_vals, grid: ThetaGrid) -> np.ndarray:
    """k(theta_j) = (2pi)^{-1} sum_m e^{i theta_j rho_m} a(rho_m) drho."""
    a_vals = np.asarray(a_vals, dtype=complex)
    phase = _expand(grid.edge_phase, a_vals)
    return np.fft.ifft(a_vals * phase, axis=0) / grid.dtheta


def kernel_transform(k, grid: ThetaGrid) -> np.ndarray:
    """sum_j e^{-i theta_j rho_m} k_j dtheta, the inverse of symbol_kernel."""
    k = np.asarray(k, dtype=complex)
    phase = _expand(grid.edge_phase, k)
    return np.fft.fft(k, axis=0) * grid.dtheta * phase


def edge_mass(a: Callable, order: float, grid: ThetaGrid, frac: float = 0.05) -> float:
    """Relative kernel mass in the outer `frac` of the theta grid.

    Measured on a(rho) <rho>^{-m} with m = max(0, ceil(order) + 3), so the kernel is
    continuous and the check sees only its decay (a growing symbol has a singular kernel
    at 0, which the cut-off handles exactly).
    """
    m = max(0, ceil(order) + 3) if np.isfinite(order) else 0
    vals = np.asarray(a(grid.rho), dtype=complex)
    vals = vals * _expand(bracket(grid.rho) ** (-m), vals)
    k = np.abs(symbol_kernel(vals, grid)).reshape(grid.n, -1).max(axis=1)
    top = k.max()
    if top == 0:
        return 0.0
    edge = np.abs(grid.theta) >= (1 - frac) * grid.half_width
    return float(k[edge].max() / top)


@dataclass(frozen=True)
class HoloSymbol:
    """V(phi)a stored as its cut-off kernel: weights phi(theta_j) k(theta_j) dtheta on supp phi.

    `kernel` keeps k on the full grid for the FFT route; evaluation at arbitrary complex
    zeta uses the direct sum over the support, which is entire in zeta.
    """

    phi: CutoffFunction
    order: float
    grid: ThetaGrid
    kernel: np.ndarray = field(repr=False)
    theta_s: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    delta_max: float = 3.0

    @property
    def value_shape(self) -> tuple:
        return self.weights.shape[1:]

    def _check_delta(self, delta):
        if np.max(np.abs(delta), initial=0.0) > self.delta_max + 1e-12:
            raise ValueError(f"|delta| exceeds the configured strip half-width {self.delta_max}")

    def __call__(self, zeta) -> np.ndarray:
        """Direct evaluation sum_j e^{-i theta_j zeta} weights_j at complex zeta (any shape)."""
        zeta = np.asarray(zeta, dtype=complex)
        self._check_delta(zeta.imag)
        flat = zeta.reshape(-1)
        out = np.empty((flat.size,) + self.value_shape, dtype=complex)
        n = len(self.theta_s)
        # theta_j = theta_0 + (a B + b) dtheta: factor the exponential into two short tables
        B = max(1, int(np.sqrt(n)))
        nA = -(-n // B)
        W = np.zeros((nA * B, int(np.prod(self.value_shape, dtype=int))), dtype=complex)
        W[:n] = self.weights.reshape(n, -1)
        W = W.reshape(nA, B, -1)
        dth = self.grid.dtheta
        for i in range(0, flat.size, 512):
            z = flat[i:i + 512]
            E0 = np.exp(-1j * z * self.theta_s[0])
            E1 = np.exp(-1j * np.outer(z, np.arange(nA) * B * dth))
            E2 = np.exp(-1j * np.outer(z, np.arange(B) * dth))
            inner = np.einsum("zb,abk->zak", E2, W)
            vals = E0[:, None] * np.einsum("za,zak->zk", E1, inner)
            out[i:i + 512] = vals.reshape((-1,) + self.value_shape)
        return out.reshape(zeta.shape + self.value_shape)

    def at_w(self, w, beta: float) -> np.ndarray:
        """Value at the Mellin point w, with the line Re w = beta playing the role of delta = 0."""
        w = np.asarray(w, dtype=complex)
        return self(-1j * (w - beta))

    def line_values(self, delta: float = 0.0) -> np.ndarray:
        """V(phi_delta)a on the FFT rho grid, phi_delta(theta) = e^{theta delta} phi(theta)."""
        self._check_delta(delta)
        th = self.grid.theta
        phid = np.exp(th * delta) * self.phi(th)
        return kernel_transform(_expand(phid, self.kernel) * self.kernel, self.grid)


def kernel_cutoff(phi: CutoffFunction, a: Callable, order: float, grid: Optional[ThetaGrid] = None,
                  delta_max: float = 3.0, edge_tol: float = 1e-8) -> HoloSymbol:
    """V(phi)a for a line symbol a(rho) (vectorized; values scalar or matrices)."""
    grid = ThetaGrid() if grid is None else grid
    if phi.T >= grid.half_width:
        raise ValueError("cutoff support exceeds the theta grid")
    em = edge_mass(a, order, grid)
    if em > edge_tol:
        raise ValueError(f"aliasing detected: kernel edge mass {em:.2e}")
    vals = np.asarray(a(grid.rho), dtype=complex)
    k = symbol_kernel(vals, grid)
    th = grid.theta
    ph = phi(th)
    supp = np.abs(ph) > 0
    weights = _expand(ph[supp], k) * k[supp] * grid.dtheta
    return HoloSymbol(phi, order, grid, k, th[supp], weights, delta_max)


def evaluate_strip(h: HoloSymbol, zeta) -> np.ndarray:
    return h(zeta)


def cauchy_riemann_residual(h: HoloSymbol, rho, delta, step: float = 1e-3) -> float:
    """max |d_delta f - i d_rho f| on the stencil, relative to max |f|, by Richardson differences."""
    rho = np.asarray(rho, float)
    delta = np.asarray(delta, float)
    R, D = np.meshgrid(rho, delta, indexing="ij")
    z = R + 1j * D

    def d(direction, hh):
        return (h(z + direction * hh) - h(z - direction * hh)) / (2 * hh)

    drho = (4 * d(1.0, step / 2) - d(1.0, step)) / 3
    ddelta = (4 * d(1j, step / 2) - d(1j, step)) / 3
    scale = max(float(np.abs(h(z)).max()), 1e-300)
    return float(np.abs(ddelta - 1j * drho).max() / scale)


def delta_shift_error(h: HoloSymbol, delta: float, rho_max: float = 64.0) -> float:
    """Direct strip evaluation at rho + i delta against the FFT route with phi_delta."""
    rho = h.grid.rho
    sel = np.abs(rho) <= rho_max
    fft_vals = h.line_values(delta)[sel]
    direct = h(rho[sel] + 1j * delta)
    scale = max(float(np.abs(fft_vals).max()), 1e-300)
    return float(np.abs(fft_vals - direct).max() / scale)


def expansion_terms(phi: CutoffFunction, a: Callable, K: int, rho, radius: float = 0.5) -> np.ndarray:
    """sum_{k<K} i^k phi^{(k)}(0)/k! d^k a(rho), with d^k a by Cauchy integrals of the analytic a."""
    rho = np.asarray(rho, float)
    dphi = phi.derivatives_at_zero(max(K - 1, 0))
    da = cauchy_derivatives(a, rho, max(K - 1, 0), radius=radius, nodes=64)
    tot = np.zeros(da.shape[1:], dtype=complex)
    for k in range(K):
        tot = tot + (1j**k) * dphi[k] / factorial(k) * da[k]
    return tot


def asymptotic_remainder(phi: CutoffFunction, a: Callable, order: float, K: int,
                         rho_range=(128.0, 1024.0), grid: Optional[ThetaGrid] = None,
                         noise: float = 1e-13) -> Report:
    """Fit the decay of V(phi)a - (first K expansion terms) along the line.

    Passes iff the fitted exponent is at most order - K + 0.3, or the remainder is
    below `noise` relative to |a| (exact expansion).
    """
    if K < 1:
        raise ValueError("K must be at least 1")
    grid = ThetaGrid() if grid is None else grid
    h = kernel_cutoff(phi, a, order, grid)
    rho = grid.rho
    sel = (rho >= rho_range[0]) & (rho <= rho_range[1])
    r = rho[sel]
    vphi = h.line_values()[sel]
    rem = vphi - expansion_terms(phi, a, K, r)
    mag = np.abs(rem).reshape(len(r), -1).max(axis=1)
    ref = np.abs(np.asarray(a(r), dtype=complex)).reshape(len(r), -1).max(axis=1)
    if np.all(mag <= noise * np.maximum(ref, 1.0)):
        return Report("kernel_cutoff_expansion", True,
                      {"exponent": -np.inf, "target": order - K, "max_remainder": float(mag.max())})
    # thin to a log-spaced subset so the fit is not dominated by the dense upper end
    idx = np.unique(np.searchsorted(r, np.geomspace(r[0], r[-1], 40)).clip(0, len(r) - 1))
    expo, c, rel = fit_power(r[idx], mag[idx])
    return Report("kernel_cutoff_expansion", bool(expo <= order - K + 0.3),
                  {"exponent": expo, "target": order - K, "fit_residual": rel,
                   "max_remainder": float(mag.max())})


def verify_strip_membership(h: HoloSymbol, delta_interval=(-1.0, 1.0), n_delta: int = 5, kmax: int = 2,
                            rho_grid=None, slack: float = 0.05, tail: float = 0.25) -> Report:
    """Order-mu seminorms sup <rho>^{-mu+k} |d^k h(rho + i delta)| on sampled delta, uniformly bounded.

    Growth is read off the last `tail` fraction of the positive rho grid, past the
    oscillating transient that the cut-off leaves at moderate rho.
    """
    if rho_grid is None:
        g = np.geomspace(1.0, 1000.0, 32)
        rho_grid = np.concatenate([-g[::-1], [0.0], g])
    rho_grid = np.asarray(rho_grid, float)
    deltas = np.linspace(delta_interval[0], delta_interval[1], n_delta)
    sups = {}
    worst = -np.inf
    for dl in deltas:
        d = cauchy_derivatives(lambda z: h(z + 1j * dl), rho_grid, kmax, radius=0.25, nodes=32)
        for k in range(kmax + 1):
            mag = np.abs(d[k]).reshape(len(rho_grid), -1).max(axis=1)
            prof = bracket(rho_grid) ** (-h.order + k) * mag
            sups[(float(dl), k)] = float(prof.max())
            pos = rho_grid >= 1
            if prof[pos].max() > 0:
                worst = max(worst, tail_slope(bracket(rho_grid[pos]), np.maximum(prof[pos], 1e-300), tail))
    finite = all(np.isfinite(v) for v in sups.values())
    measured = {"suprema": {f"delta={k[0]:.3g},k={k[1]}": v for k, v in sups.items()},
                "uniform_bound": max(sups.values()), "worst_growth": worst}
    return Report("strip_membership", bool(finite and worst <= slack), measured)
