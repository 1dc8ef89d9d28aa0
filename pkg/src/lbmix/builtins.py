"""Named boundary functions usable from configuration files.

Each builder returns ``(callable, exact_coefficients_or_None)``. When the sine
coefficients are known in closed form they are returned for k = 1..K on demand
and quadrature is skipped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from numpy.polynomial import Polynomial

from .kernels import SQRT2, sinpi


@dataclass(frozen=True)
class BoundaryFunction:
    f: Callable
    coefficients: Optional[Callable] = None  # K -> array of length K

    def __call__(self, x):
        return self.f(x)


def zero() -> BoundaryFunction:
    return BoundaryFunction(lambda x: np.zeros_like(np.asarray(x, dtype=float)), lambda K: np.zeros(K))


def sine(terms) -> BoundaryFunction:
    """sum amp * sin(pi k x) over [[k, amp], ...]."""
    pairs = [(int(k), float(amp)) for k, amp in terms]
    for k, _ in pairs:
        if k < 1:
            raise ValueError("sine terms need k >= 1")

    def f(x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        for k, amp in pairs:
            out = out + amp * sinpi(k * x)
        return out

    def coeffs(K):
        c = np.zeros(K)
        for k, amp in pairs:
            if k <= K:
                c[k - 1] += amp / SQRT2
        return c

    return BoundaryFunction(f, coeffs)


def tabulated(values) -> BoundaryFunction:
    """Coefficients in the orthonormal basis sqrt(2) sin(pi k x), k = 1, 2, ..."""
    vals = np.asarray(values, dtype=float)
    ks = np.arange(1, vals.shape[0] + 1)

    def f(x):
        x = np.asarray(x, dtype=float)
        return SQRT2 * (vals @ sinpi(np.multiply.outer(ks, x)))

    def coeffs(K):
        c = np.zeros(K)
        m = min(K, vals.shape[0])
        c[:m] = vals[:m]
        return c

    return BoundaryFunction(f, coeffs)


def smooth_polynomial(order: int) -> Polynomial:
    """Polynomial whose even derivatives of order 0..2*order vanish at x = 0 and x = 1.

    Built from f_0 = 1 by f_q'' = -f_(q-1), f_q(0) = f_q(1) = 0; the result is f_(order+1).
    """
    if order < 0:
        raise ValueError("order must be >= 0")
    f = Polynomial([1.0])
    for _ in range(order + 1):
        g = -f.integ(2)
        f = g - Polynomial([g(0.0), g(1.0) - g(0.0)])
    return f


def polynomial_coefficient(order: int, k: int) -> float:
    """Exact sqrt(2) int_0^1 smooth_polynomial(order) sin(pi k x) dx."""
    if k % 2 == 0:
        return 0.0
    return 2.0 * SQRT2 / (math.pi * k) ** (2 * order + 3)


def polynomial(order: int, amplitude: float = 1.0) -> BoundaryFunction:
    p = smooth_polynomial(order)
    return BoundaryFunction(lambda x: amplitude * p(np.asarray(x, dtype=float)))


def bump(center: float = 0.5, width: float = 0.25, amplitude: float = 1.0) -> BoundaryFunction:
    """C-infinity bump exp(1 - 1/(1 - r^2)), r = (x - center)/width, peak value amplitude."""
    if width <= 0 or center - width < 0 or center + width > 1:
        raise ValueError("bump support must lie inside [0, 1]")

    def f(x):
        x = np.asarray(x, dtype=float)
        r2 = ((x - center) / width) ** 2
        inside = r2 < 1.0
        safe = np.where(inside, 1.0 - r2, 1.0)
        return np.where(inside, amplitude * np.exp(1.0 - 1.0 / safe), 0.0)

    return BoundaryFunction(f)


def build(spec) -> BoundaryFunction:
    """Decode one config entry such as {"type": "sine", "terms": [[1, 1.0]]}."""
    if spec is None:
        return zero()
    if not isinstance(spec, dict) or "type" not in spec:
        raise ValueError(f"boundary entry needs a 'type': {spec!r}")
    kind = spec["type"]
    args = {key: v for key, v in spec.items() if key != "type"}
    if kind == "zero":
        return zero()
    if kind == "sine":
        return sine(args.get("terms", []))
    if kind == "coefficients":
        return tabulated(args.get("values", []))
    if kind == "polynomial":
        return polynomial(int(args.get("order", 0)), float(args.get("amplitude", 1.0)))
    if kind == "bump":
        return bump(
            float(args.get("center", 0.5)), float(args.get("width", 0.25)), float(args.get("amplitude", 1.0))
        )
    raise ValueError(f"unknown boundary type {kind!r}")
