"""Core domain types: coefficients, boundary data, problem definition, sampled fields."""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import CoefficientError

_INT_RE = re.compile(r"^[+-]?\d+$")
_RAT_RE = re.compile(r"^[+-]?\d+\s*/\s*\d+$")
_DEC_RE = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")


class Regime(str, enum.Enum):
    NATURAL = "Natural"
    RATIONAL = "Rational"
    FLOATING = "Floating"


@dataclass(frozen=True)
class Coefficients:
    """Ordered speeds a_1 < ... < a_n of the factored operator.

    ``exact`` carries the rational values when the input was written with
    integers or fractions only; decimal input is always ``Floating``.
    """

    a: tuple
    regime: Regime
    exact: Optional[tuple] = None

    @property
    def n(self) -> int:
        return len(self.a)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.a, dtype=float)

    def render(self) -> list:
        """Canonical string form; ``make_coefficients(c.render()) == c``."""
        if self.exact is not None:
            return [str(q) for q in self.exact]
        return [repr(float(v)) for v in self.a]


def _parse_entry(text: str):
    s = text.strip()
    if _INT_RE.match(s):
        return Fraction(int(s)), True
    if _RAT_RE.match(s):
        num, den = (int(p) for p in s.split("/"))
        if den == 0:
            raise CoefficientError(f"zero denominator in {text!r}")
        return Fraction(num, den), True
    if _DEC_RE.match(s):
        return float(s), False
    raise CoefficientError(f"cannot parse coefficient {text!r}")


def make_coefficients(entries: Sequence[str]) -> Coefficients:
    """Decode coefficient strings and infer the arithmetic regime from syntax."""
    if len(entries) == 0:
        raise CoefficientError("at least one coefficient is required")
    parsed = [_parse_entry(str(e)) for e in entries]
    values = [float(v) for v, _ in parsed]
    for v, e in zip(values, entries):
        if not (math.isfinite(v) and v > 0):
            raise CoefficientError(f"coefficient {e!r} must be positive and finite")
    for i in range(1, len(values)):
        if not values[i] > values[i - 1]:
            raise CoefficientError(
                f"coefficients must be strictly increasing: {entries[i - 1]!r} >= {entries[i]!r}"
            )
    if all(is_exact for _, is_exact in parsed):
        exact = tuple(v for v, _ in parsed)
        regime = Regime.NATURAL if all(q.denominator == 1 for q in exact) else Regime.RATIONAL
        return Coefficients(a=tuple(float(q) for q in exact), regime=regime, exact=exact)
    return Coefficients(a=tuple(values), regime=Regime.FLOATING, exact=None)


@dataclass(frozen=True)
class BoundaryData:
    """Boundary functions phi_s (top edge y=1) and psi_s (bottom edge y=-1).

    Callables should accept numpy arrays. They are sampled on [0, 1] and, for
    the endpoint smoothness check only, a few steps outside it.
    """

    phi: tuple
    psi: tuple

    @property
    def n(self) -> int:
        return len(self.phi)

    @classmethod
    def zeros(cls, n: int) -> "BoundaryData":
        z = _zero
        return cls(phi=(z,) * n, psi=(z,) * n)


def _zero(x):
    return np.zeros_like(np.asarray(x, dtype=float))


@dataclass(frozen=True)
class Tolerances:
    quadrature_tol: float = 1e-12
    degeneracy_tol: float = 1e-8
    series_tol: float = 1e-8


@dataclass(frozen=True)
class ProblemSpec:
    coefficients: Coefficients
    boundary: BoundaryData
    tolerances: Tolerances = field(default_factory=Tolerances)
    k_cap: int = 256


@dataclass(frozen=True)
class Field:
    xs: np.ndarray
    ys: np.ndarray
    values: np.ndarray  # shape (len(ys), len(xs)); row = fixed y


def validate_coefficients(c: Coefficients) -> list:
    problems = []
    if c.n < 1:
        problems.append("n must be >= 1")
    for i, v in enumerate(c.a):
        if not (math.isfinite(v) and v > 0):
            problems.append(f"a[{i}]={v!r} is not positive")
    for i in range(1, c.n):
        if not c.a[i] > c.a[i - 1]:
            problems.append(f"ordering violation: a[{i - 1}]={c.a[i - 1]!r} >= a[{i}]={c.a[i]!r}")
    if c.regime in (Regime.NATURAL, Regime.RATIONAL):
        if c.exact is None or len(c.exact) != c.n:
            problems.append("exact values missing for an exact regime")
        else:
            for i, (q, v) in enumerate(zip(c.exact, c.a)):
                if float(q) != v:
                    problems.append(f"a[{i}] disagrees with its exact value {q}")
            if c.regime is Regime.NATURAL and any(q.denominator != 1 for q in c.exact):
                problems.append("Natural regime with a non-integer entry")
    return problems


def validate_problem(spec: ProblemSpec) -> list:
    """Return a list of violated invariants; empty means the spec is well formed."""
    problems = validate_coefficients(spec.coefficients)
    n = spec.coefficients.n
    b = spec.boundary
    if len(b.phi) != n or len(b.psi) != n:
        problems.append(f"boundary data needs {n} phi and {n} psi functions")
    for name, fs in (("phi", b.phi), ("psi", b.psi)):
        for s, f in enumerate(fs):
            if not callable(f):
                problems.append(f"{name}[{s}] is not callable")
    t = spec.tolerances
    for name in ("quadrature_tol", "degeneracy_tol", "series_tol"):
        v = getattr(t, name)
        if not (isinstance(v, (int, float)) and v > 0):
            problems.append(f"{name} must be > 0, got {v!r}")
    if not (isinstance(spec.k_cap, int) and spec.k_cap >= 1):
        problems.append(f"k_cap must be >= 1, got {spec.k_cap!r}")
    return problems


def evaluate_callable(f: Callable, x: np.ndarray) -> np.ndarray:
    """Sample ``f`` on ``x``, falling back to pointwise calls for scalar-only callables."""
    x = np.asarray(x, dtype=float)
    try:
        y = np.asarray(f(x), dtype=float)
        if y.shape != x.shape:
            y = np.broadcast_to(y, x.shape).astype(float) if y.ndim == 0 else None
    except (TypeError, ValueError):
        y = None
    if y is None:
        y = np.array([float(f(t)) for t in x.ravel()]).reshape(x.shape)
    if not np.all(np.isfinite(y)):
        raise ValueError("boundary callable returned non-finite values")
    return y
