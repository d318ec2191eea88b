"""Small numerical helpers shared by the modules: fits, differences, contours, cutoffs."""
from __future__ import annotations

from math import comb, factorial
from typing import Callable

import numpy as np


def bracket(*xs) -> np.ndarray:
    """Japanese bracket (1 + sum x_i^2)^(1/2), broadcasting over the inputs."""
    acc = 1.0
    for x in xs:
        acc = acc + np.abs(np.asarray(x, dtype=float)) ** 2
    return np.sqrt(acc)


def fit_power(x, y) -> tuple[float, float, float]:
    """Least-squares fit y ~ c x^a in log-log coordinates.

    Returns (a, c, rel) where rel is the largest relative deviation of the
    data from the fitted curve.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    lx = np.log(x)
    ly = np.log(np.maximum(y, 1e-300))
    A = np.vstack([lx, np.ones_like(lx)]).T
    (a, lc), *_ = np.linalg.lstsq(A, ly, rcond=None)
    fitted = np.exp(lc + a * lx)
    rel = float(np.max(np.abs(y / fitted - 1.0)))
    return float(a), float(np.exp(lc)), rel


def tail_slope(x, y, frac: float = 0.5) -> float:
    """Log-log slope fitted on the upper `frac` portion of a sorted x-grid."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    order = np.argsort(x)
    x, y = x[order], y[order]
    start = int(len(x) * (1 - frac))
    start = min(start, len(x) - 2)
    return fit_power(x[start:], y[start:])[0]


def _central(f: Callable, x: float, order: int, h: float):
    total = 0.0
    for j in range(order + 1):
        total = total + (-1) ** j * comb(order, j) * np.asarray(f(x + (order / 2 - j) * h))
    return total / h**order


def fd_derivative(f: Callable, x: float, order: int, h: float = 1e-3):
    """Central difference of given order with one Richardson step (error O(h^4))."""
    if order == 0:
        return np.asarray(f(x))
    d1 = _central(f, x, order, h)
    d2 = _central(f, x, order, h / 2)
    return (4 * d2 - d1) / 3


def fd_partial(f: Callable, x, multi_index, h: float = 1e-3):
    """Mixed partial derivative of f: R^q -> array at x, by nested differences."""
    x = np.asarray(x, dtype=float)
    g = f
    for axis, order in enumerate(multi_index):
        if order == 0:
            continue

        def g_axis(z, g=g, axis=axis, order=order):
            def along(t):
                zz = np.array(z, dtype=float)
                zz[axis] = t
                return g(zz)

            return fd_derivative(along, float(z[axis]), order, h)

        g = g_axis
    return np.asarray(g(x))


def cauchy_derivatives(f: Callable, z0, kmax: int, radius: float = 0.5, nodes: int = 64):
    """Taylor derivatives f^(k)(z0), k=0..kmax, of an analytic f via the Cauchy formula.

    z0 may be an array; f must accept complex arrays. Returns array (kmax+1, *z0.shape).
    """
    z0 = np.asarray(z0, dtype=complex)
    theta = 2 * np.pi * np.arange(nodes) / nodes
    e = np.exp(1j * theta)
    vals = np.asarray(f(z0[..., None] + radius * e))
    out = []
    for k in range(kmax + 1):
        ck = np.mean(vals * e ** (-k), axis=-1) / radius**k
        out.append(ck * factorial(k))
    return np.array(out)


def laurent_coefficients(f: Callable, center: complex, radius: float, kmin: int, kmax: int,
                         nodes: int = 256) -> list:
    """Coefficients a_k, kmin <= k <= kmax, of f(w) = sum a_k (w - center)^k.

    Trapezoid rule on a circle; f may be scalar- or matrix-valued.
    """
    theta = 2 * np.pi * np.arange(nodes) / nodes
    e = np.exp(1j * theta)
    vals = [np.asarray(f(center + radius * t)) for t in e]
    vals = np.array(vals)
    coeffs = []
    for k in range(kmin, kmax + 1):
        w = (e ** (-k)) / radius**k
        coeffs.append(np.tensordot(w, vals, axes=(0, 0)) / nodes)
    return coeffs


def smoothstep(x) -> np.ndarray:
    """C-infinity step: 0 for x <= 0, 1 for x >= 1."""
    x = np.asarray(x, dtype=float)
    a = np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)
    b = np.where(x < 1, np.exp(-1.0 / np.where(x < 1, 1 - x, 1.0)), 0.0)
    return a / (a + b)


def cutoff(r, inner: float = 0.5, outer: float = 2.0 / 3.0) -> np.ndarray:
    """Cut-off on the half-line: 1 on (0, inner], 0 on [outer, inf)."""
    r = np.asarray(r, dtype=float)
    return 1.0 - smoothstep((r - inner) / (outer - inner))


def unwrapped_phase(values) -> np.ndarray:
    return np.unwrap(np.angle(values))
