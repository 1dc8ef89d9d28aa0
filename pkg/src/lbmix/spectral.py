"""Sine-series analysis of boundary data.

Coefficients use the orthonormal basis sqrt(2) sin(pi k x) on [0, 1]. Integrals
come from composite Gauss-Legendre panels, refined dyadically until two
successive refinements agree to tol/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from .errors import QuadratureError
from .kernels import SQRT2, sinpi
from .model import BoundaryData, evaluate_callable

GL_ORDER = 16
MAX_PANELS = 1 << 12
_GL_X, _GL_W = np.polynomial.legendre.leggauss(GL_ORDER)
_CHUNK = 4_000_000  # max entries of one (k, node) sine matrix


@dataclass(frozen=True)
class SpectralBoundary:
    """phi_sk, psi_sk for s = 0..n-1 (rows) and k = 1..K (columns)."""

    phi_sk: np.ndarray
    psi_sk: np.ndarray

    @property
    def K(self) -> int:
        return self.phi_sk.shape[1]

    @property
    def n(self) -> int:
        return self.phi_sk.shape[0]

    def at(self, k: int):
        return self.phi_sk[:, k - 1], self.psi_sk[:, k - 1]

    def magnitude(self) -> np.ndarray:
        """sum_s (|phi_sk| + |psi_sk|) per k, shape (K,)."""
        return np.abs(self.phi_sk).sum(axis=0) + np.abs(self.psi_sk).sum(axis=0)

    def scaled(self, factor: float) -> "SpectralBoundary":
        return SpectralBoundary(self.phi_sk * factor, self.psi_sk * factor)

    def denoised(self, floor: float) -> "SpectralBoundary":
        """Zero entries at or below floor * max(1, largest |entry| of that function)."""

        def clean(m):
            scale = np.maximum(1.0, np.abs(m).max(axis=1, initial=0.0))[:, None]
            return np.where(np.abs(m) > floor * scale, m, 0.0)

        return SpectralBoundary(clean(self.phi_sk), clean(self.psi_sk))


@dataclass
class SmoothnessReport:
    order_checked: int
    failures: list = field(default_factory=list)  # (function id, order, endpoint, magnitude)

    @property
    def ok(self) -> bool:
        return not self.failures


def _nodes(panels: int):
    half = 0.5 / panels
    mids = (np.arange(panels) + 0.5) / panels
    x = (mids[:, None] + half * _GL_X[None, :]).ravel()
    w = np.tile(half * _GL_W, panels)
    return x, w


def _integrals(fx_w: np.ndarray, x: np.ndarray, ks: np.ndarray) -> np.ndarray:
    out = np.empty(ks.shape[0])
    step = max(1, _CHUNK // x.shape[0])
    for lo in range(0, ks.shape[0], step):
        kk = ks[lo:lo + step]
        out[lo:lo + step] = sinpi(np.outer(kk, x)) @ fx_w
    return SQRT2 * out


def sine_coefficients(f: Callable, ks, tol: float = 1e-12) -> np.ndarray:
    """sqrt(2) * int_0^1 f(x) sin(pi k x) dx for every k in ``ks``."""
    ks = np.asarray(ks, dtype=float).ravel()
    if ks.size == 0:
        return np.zeros(0)
    if np.any(ks < 1):
        raise ValueError("mode indices start at k = 1")
    panels = max(2, int(math.ceil(ks.max() / 4.0)))
    x, w = _nodes(panels)
    fx = evaluate_callable(f, x)
    tol = tol * max(1.0, float(np.max(np.abs(fx))))  # absolute for O(1) data, relative beyond
    prev = _integrals(fx * w, x, ks)
    budget = max(MAX_PANELS, 64 * int(ks.max()))
    diff = np.full_like(prev, np.inf)
    while panels * 2 <= budget:
        panels *= 2
        x, w = _nodes(panels)
        cur = _integrals(evaluate_callable(f, x) * w, x, ks)
        diff = np.abs(cur - prev)
        if np.all(diff < tol / 2):
            return cur
        prev = cur
    worst = int(ks[int(np.argmax(diff))])
    raise QuadratureError(f"sine quadrature did not converge for k={worst}", k=worst)


def sine_coefficient(f: Callable, k: int, tol: float = 1e-12) -> float:
    """Single coefficient sqrt(2) int_0^1 f sin(pi k x) dx with abs error <= tol."""
    if k < 1:
        raise ValueError("k must be >= 1")
    return float(sine_coefficients(f, [k], tol)[0])


def boundary_spectrum(data: BoundaryData, n: int, K: int, tol: float = 1e-12) -> SpectralBoundary:
    """Sine coefficients of every boundary function for k = 1..K.

    A function carrying a ``coefficients`` callable (K -> array) supplies its
    exact values and skips quadrature.
    """
    if K < 1:
        raise ValueError("K must be >= 1")
    ks = np.arange(1, K + 1)
    phi = np.zeros((n, K))
    psi = np.zeros((n, K))
    for which, fs, out in (("phi", data.phi, phi), ("psi", data.psi, psi)):
        for s in range(n):
            exact = getattr(fs[s], "coefficients", None)
            if exact is not None:
                out[s] = exact(K)
                continue
            try:
                out[s] = sine_coefficients(fs[s], ks, tol)
            except QuadratureError as exc:
                raise QuadratureError(
                    f"{which}[{s}]: {exc}", s=s, k=exc.k, which=which
                ) from exc
    return SpectralBoundary(phi, psi)


def spectrum_from_modes(n: int, K: int, phi_modes=None, psi_modes=None) -> SpectralBoundary:
    """Build a spectrum directly from {(s, k): value} dictionaries."""
    phi = np.zeros((n, K))
    psi = np.zeros((n, K))
    for table, out in ((phi_modes or {}, phi), (psi_modes or {}, psi)):
        for (s, k), v in table.items():
            out[s, k - 1] = v
    return SpectralBoundary(phi, psi)


# ------------------------------------------------------------ smoothness
def alpha_from_gamma(gamma: float) -> int:
    if gamma < 0:
        raise ValueError("gamma must be >= 0")
    if float(gamma).is_integer():
        return int(gamma)
    return int(math.floor(gamma)) + 1


def _exact_solve(mat, rhs):
    n = len(rhs)
    m = [row[:] + [rhs[i]] for i, row in enumerate(mat)]
    for c in range(n):
        piv = next(r for r in range(c, n) if m[r][c] != 0)
        m[c], m[piv] = m[piv], m[c]
        for r in range(n):
            if r != c and m[r][c] != 0:
                fac = m[r][c] / m[c][c]
                m[r] = [a - fac * b for a, b in zip(m[r], m[c])]
    return [m[i][n] / m[i][i] for i in range(n)]


def central_weights(order: int, half_width: int) -> np.ndarray:
    """Exact centred finite-difference weights on offsets -p..p (unit spacing)."""
    offs = range(-half_width, half_width + 1)
    size = 2 * half_width + 1
    mat = [[Fraction(o) ** j / math.factorial(j) for o in offs] for j in range(size)]
    rhs = [Fraction(int(j == order)) for j in range(size)]
    return np.array([float(v) for v in _exact_solve(mat, rhs)])


def endpoint_derivative(f: Callable, x0: float, order: int) -> float:
    """Even/odd derivative at x0 by centred differences plus one Richardson step."""
    if order == 0:
        return float(evaluate_callable(f, np.array([x0]))[0])
    p = order // 2 + 1
    w = central_weights(order, p)
    h = min(0.1, 1e-7 ** (1.0 / order))
    offs = np.arange(-p, p + 1)

    def d(step):
        vals = evaluate_callable(f, x0 + offs * step)
        return float(w @ vals) / step ** order

    d1, d2 = d(h), d(h / 2)
    acc = 2 * p + 2 - order  # stencil accuracy order
    r = 2.0 ** acc
    return (r * d2 - d1) / (r - 1.0)


def smoothness_check(data: BoundaryData, n: int, gamma_exponent: float = 0.0) -> SmoothnessReport:
    """Check that every even derivative up to 2n + alpha vanishes at x = 0 and x = 1."""
    alpha = alpha_from_gamma(gamma_exponent)
    report = SmoothnessReport(order_checked=2 * n + 1 + alpha)
    grid = np.linspace(0.0, 1.0, 201)
    for name, fs in (("phi", data.phi), ("psi", data.psi)):
        for s in range(n):
            f = fs[s]
            fmax = float(np.max(np.abs(evaluate_callable(f, grid))))
            tol = 1e-6 * (1.0 + fmax)
            for order in range(0, 2 * n + alpha + 1, 2):
                for x0 in (0.0, 1.0):
                    v = endpoint_derivative(f, x0, order)
                    if abs(v) > tol:
                        report.failures.append((f"{name}[{s}]", order, x0, abs(v)))
    report.failures.sort(key=lambda t: (t[0], t[1], t[2]))
    return report


def parseval_tail(spectrum: SpectralBoundary, weight_power: int, K0: int) -> float:
    """sqrt(sum_{k>K0} (k^w * max_s(|phi_sk| + |psi_sk|))^2) over the stored range."""
    if not 1 <= K0 <= spectrum.K:
        raise ValueError("need 1 <= K0 <= K")
    if weight_power < 0:
        raise ValueError("weight_power must be >= 0")
    mags = (np.abs(spectrum.phi_sk) + np.abs(spectrum.psi_sk)).max(axis=0)[K0:]
    ks = np.arange(K0 + 1, spectrum.K + 1, dtype=float)
    terms = ks ** weight_power * mags
    return float(math.sqrt(math.fsum(terms * terms)))
