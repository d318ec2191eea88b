"""Dilation group actions, edge-space norms and twisted symbol estimates.

Functions of one variable t live on a periodic uniform grid; operators that
commute with translations in t are represented by their Fourier multiplier
p(tau), so that conjugation by the dilation is exact: kappa_lam^{-1} p kappa_lam
is the multiplier p(lam tau).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ._numerics import bracket, fd_derivative, fit_power, tail_slope
from .report import Report
from .scales import pi_exponent


@dataclass(frozen=True)
class LineGrid:
    """Periodic grid t_j = -L + j 2L/n on [-L, L)."""

    half_width: float = 20.0
    n: int = 512

    @property
    def t(self) -> np.ndarray:
        return -self.half_width + np.arange(self.n) * self.dt

    @property
    def dt(self) -> float:
        return 2 * self.half_width / self.n

    @property
    def freqs(self) -> np.ndarray:
        return 2 * np.pi * np.fft.fftfreq(self.n, self.dt)

    def fourier(self, u, axis: int = -1) -> np.ndarray:
        """Samples of the continuous transform int e^{-i t tau} u(t) dt at the grid frequencies."""
        u = np.asarray(u, dtype=complex)
        shape = [1] * u.ndim
        shape[axis] = self.n
        phase = np.exp(-1j * self.freqs * self.t[0]).reshape(shape)
        return np.fft.fft(u, axis=axis) * self.dt * phase

    def inverse_fourier(self, uh, axis: int = -1) -> np.ndarray:
        uh = np.asarray(uh, dtype=complex)
        shape = [1] * uh.ndim
        shape[axis] = self.n
        phase = np.exp(1j * self.freqs * self.t[0]).reshape(shape)
        return np.fft.ifft(uh * phase, axis=axis) / self.dt

    def l2(self, u) -> float:
        return float(np.sqrt(np.sum(np.abs(u) ** 2) * self.dt))


@dataclass(frozen=True)
class GroupAction:
    """kappa_lam u(t) = lam^{1/2} u(lam t), or the trivial action."""

    kind: str = "dilation"

    def __post_init__(self):
        if self.kind not in ("dilation", "trivial"):
            raise ValueError(f"unknown group action {self.kind!r}")

    def stretch(self, lam) -> np.ndarray:
        """Factor applied to the frequency variable by conjugation with kappa_lam."""
        return np.asarray(lam, float) if self.kind == "dilation" else np.ones_like(np.asarray(lam, float))

    def hs_norm(self, lam: float, uh, freqs, s: float, measure: float) -> float:
        """H^s norm of kappa_lam v given the transform uh of v on `freqs`.

        ||kappa_lam v||^2 = int <lam zeta>^{2s} |v^(zeta)|^2 dzeta / 2pi for the dilation.
        """
        f = freqs * self.stretch(lam)
        return float(np.sqrt(np.sum(bracket(f) ** (2 * s) * np.abs(uh) ** 2) * measure / (2 * np.pi)))


def kappa_apply(act: GroupAction, lam: float, u, grid: LineGrid) -> np.ndarray:
    """Evaluate lam^{1/2} u(lam t) on the grid by band-limited interpolation of u.

    u is taken to vanish outside the window, so points with |lam t| >= L map to 0.
    """
    if lam <= 0:
        raise ValueError("lambda must be positive")
    u = np.asarray(u, dtype=complex)
    if act.kind == "trivial" or lam == 1.0:
        return u.copy()
    n = grid.n
    c = np.fft.fft(u) / n
    k = np.fft.fftfreq(n, 1.0 / n)
    x = lam * grid.t
    # wrap into the periodic window and evaluate the trigonometric interpolant
    xw = (x + grid.half_width) % (2 * grid.half_width)
    arg = 2j * np.pi * np.outer(xw / (2 * grid.half_width), k)
    vals = np.exp(arg) @ c
    if n % 2 == 0:
        # split the Nyquist mode symmetrically so real data stays real
        nyq = c[n // 2]
        vals = vals - nyq * np.exp(arg[:, n // 2]) + nyq * np.cos(np.pi * n * xw / (2 * grid.half_width))
    vals = np.where(np.abs(x) < grid.half_width, vals, 0.0)
    return np.sqrt(lam) * vals


def kappa_operator_norm(act: GroupAction, lam: float, s: float, freqs) -> float:
    """||kappa_lam||_{H^s -> H^s} = sup_zeta (<lam zeta>/<zeta>)^s on the frequency grid."""
    ratio = bracket(np.asarray(freqs) * act.stretch(lam)) / bracket(freqs)
    return float(np.max(ratio**s))


def kappa_growth_fit(act: GroupAction, s: float, lam_grid, freqs=None) -> tuple[float, float]:
    """Envelope (c, M) with ||kappa_lam||_{H^s} <= c max(lam, 1/lam)^M on lam_grid."""
    if freqs is None:
        freqs = LineGrid().freqs
    lam_grid = np.asarray(lam_grid, float)
    if np.any(lam_grid <= 0):
        raise ValueError("lambda grid must be positive")
    norms = np.array([kappa_operator_norm(act, l, s, freqs) for l in lam_grid])
    big = np.maximum(lam_grid, 1 / lam_grid)
    c = float(norms[np.isclose(big, 1.0)].max()) if np.any(np.isclose(big, 1.0)) else 1.0
    mask = big > 1
    M = float(np.max(np.log(norms[mask] / c) / np.log(big[mask]))) if mask.any() else 0.0
    M = max(M, 0.0)
    c = float(np.max(norms / big**M))
    return c, M


@dataclass(frozen=True)
class EdgeSpaceSpec:
    """W^s(R_y, H^s(R_t)) with the group action twisting the inner norm."""

    action: GroupAction = field(default_factory=GroupAction)
    y_grid: LineGrid = field(default_factory=lambda: LineGrid(12.0, 128))
    t_grid: LineGrid = field(default_factory=lambda: LineGrid(12.0, 128))

    def weight(self, s: float) -> np.ndarray:
        """w_s(eta, tau) with ||u||_{W^s}^2 = int int w_s^2 |u^|^2 deta dtau / (2pi)^2."""
        eta = self.y_grid.freqs[:, None]
        tau = self.t_grid.freqs[None, :]
        lam = bracket(eta)
        return lam**s * bracket(tau / self.action.stretch(lam)) ** s


def edge_norm(spec: EdgeSpaceSpec, s: float, u) -> float:
    """{int <eta>^{2s} ||kappa^{-1}_{<eta>} u^(eta)||^2_{H^s} deta}^{1/2}, with deta/2pi."""
    u = np.asarray(u, dtype=complex)
    uh_y = spec.y_grid.fourier(u, axis=0)
    total = 0.0
    uh = spec.t_grid.fourier(uh_y, axis=1)
    for i, eta in enumerate(spec.y_grid.freqs):
        lam = bracket(eta)
        inner = spec.action.hs_norm(1.0 / lam, uh[i], spec.t_grid.freqs, s, 2 * np.pi / (spec.t_grid.n * spec.t_grid.dt))
        total += lam ** (2 * s) * inner**2
    total *= 2 * np.pi / (spec.y_grid.n * spec.y_grid.dt) / (2 * np.pi)
    return float(np.sqrt(total))


def twisted_seminorm(p: Callable, mu: float, alpha: int, beta: int, eta_grid, act: GroupAction,
                     act_t: GroupAction | None = None, y_samples: Sequence[float] = (0.0,),
                     tau_grid=None, s_in: float = 0.0, s_out: float = 0.0, h: float = 1e-3) -> float:
    """sup <eta>^{-mu+beta} ||kappa~^{-1}_{<eta>} {D_y^alpha D_eta^beta a} kappa_{<eta>}||.

    `p(y, eta, tau)` is the t-multiplier of a(y, eta); operator norms are taken
    H^{s_in} -> H^{s_out} and are exact suprema over `tau_grid`.
    """
    act_t = act if act_t is None else act_t
    if act.kind != act_t.kind:
        raise ValueError("both sides must carry the same kind of action for multiplier symbols")
    if tau_grid is None:
        tau_grid = np.linspace(-200, 200, 2001)
    tau = np.asarray(tau_grid, float)
    best = 0.0
    for eta in np.asarray(eta_grid, float):
        lam = bracket(eta)
        st = act.stretch(lam)
        for y in y_samples:
            def at(yy, ee):
                return np.asarray(p(yy, ee, st * tau), dtype=complex)

            if alpha == 0:
                d = fd_derivative(lambda e: at(y, e), eta, beta, h) if beta else at(y, eta)
            else:
                d = fd_derivative(lambda yy: fd_derivative(lambda e: at(yy, e), eta, beta, h), y, alpha, h)
            # D = -i d has the same modulus as d
            val = np.max(bracket(tau) ** s_out * np.abs(d) * bracket(tau) ** (-s_in))
            val *= lam ** (-mu + beta)
            if not np.isfinite(val):
                raise FloatingPointError("non-finite twisted seminorm")
            best = max(best, float(val))
    return best


# --- Fourier multiplier families on the edge space ---------------------------

def bracket_multiplier(mu: float, with_tau: bool = True) -> Callable:
    """p(xi, eta, tau) = <xi, eta, tau>^mu, or <xi, eta>^mu times the identity."""
    if with_tau:
        return lambda xi, eta, tau: bracket(xi, eta, tau) ** mu
    return lambda xi, eta, tau: bracket(xi, eta) ** mu * np.ones_like(np.asarray(tau, float))


@dataclass
class MultiplierOperator:
    """Op_x(p)(eta): u(x, t) -> F^{-1} p(xi, eta, tau) F u on an EdgeSpaceSpec grid."""

    spec: EdgeSpaceSpec
    values: np.ndarray

    def apply(self, u) -> np.ndarray:
        uh = self.spec.t_grid.fourier(self.spec.y_grid.fourier(u, axis=0), axis=1)
        return self.spec.y_grid.inverse_fourier(self.spec.t_grid.inverse_fourier(self.values * uh, axis=1), axis=0)

    def inverse(self) -> "MultiplierOperator":
        if np.min(np.abs(self.values)) == 0.0:
            raise ZeroDivisionError("multiplier is singular on the grid")
        return MultiplierOperator(self.spec, 1.0 / self.values)

    def norm(self, s: float, t: float) -> float:
        """Exact operator norm W^s -> W^t of the discrete multiplier."""
        return float(np.max(self.spec.weight(t) * np.abs(self.values) / self.spec.weight(s)))


def fourier_mult_family(p: Callable, eta: float, spec: EdgeSpaceSpec | None = None) -> MultiplierOperator:
    spec = EdgeSpaceSpec() if spec is None else spec
    xi = spec.y_grid.freqs[:, None]
    tau = spec.t_grid.freqs[None, :]
    vals = np.broadcast_to(np.asarray(p(xi, eta, tau), dtype=complex), (xi.shape[0], tau.shape[1])).copy()
    if not np.all(np.isfinite(vals)) or np.min(np.abs(vals)) == 0.0:
        raise ZeroDivisionError("symbol is not invertible on the grid")
    return MultiplierOperator(spec, vals)


def verify_nn9(p: Callable, s: float, mu: float, nu: float, eta_grid=None,
               spec: EdgeSpaceSpec | None = None, lam_grid=None) -> Report:
    """Growth of ||b^mu(eta)||_{W^s -> W^{s-nu}} against pi(mu,nu) + M(s) + M(s-mu)."""
    spec = EdgeSpaceSpec() if spec is None else spec
    if eta_grid is None:
        eta_grid = np.geomspace(4.0, 400.0, 20)
    if lam_grid is None:
        lam_grid = np.geomspace(1.0, 100.0, 12)
    eta_grid = np.asarray(eta_grid, float)
    freqs = spec.t_grid.freqs
    _, Ms = kappa_growth_fit(spec.action, s, lam_grid, freqs)
    _, Msm = kappa_growth_fit(spec.action, s - mu, lam_grid, freqs)
    bound = pi_exponent(mu, nu) + Ms + Msm
    norms = np.array([fourier_mult_family(p, e, spec).norm(s, s - nu) for e in eta_grid])
    expo, c, _ = fit_power(bracket(eta_grid), norms)
    ok = expo <= bound + 0.1
    measured = {"exponent": expo, "bound": bound, "M(s)": Ms, "M(s-mu)": Msm}
    if mu <= 0:
        n0 = np.array([fourier_mult_family(p, e, spec).norm(0.0, 0.0) for e in eta_grid])
        e0, _, _ = fit_power(bracket(eta_grid), n0)
        measured["W0_exponent"] = e0
        ok = ok and e0 <= mu + 0.05
    return Report("multiplier_family_bounds", bool(ok), measured)
