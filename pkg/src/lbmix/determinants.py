"""Structure of the mode determinant: Delta = Delta1 * (Delta2 + Delta_k).

Delta1 = exp(pi k sum a) * prod_{j>s}(a_j^2 - a_s^2) is explicit. The scaled
mode matrix already has the exponential removed, so its determinant divided
by the squares-Vandermonde product is the bounded factor Delta2 + Delta_k.
Delta2 alone is the oscillatory sum over sign vectors; it is known only up to
a constant independent of k, which is why comparisons go through ratios.
"""

from __future__ import annotations

import itertools
import math
import statistics
from dataclasses import dataclass, field
from fractions import Fraction
from functools import reduce

import numpy as np

from . import kernels
from .errors import AllZero, NumericalBreakdown, RegimeMismatch
from .mode_solver import mode_matrix
from .model import Coefficients, Regime

ZERO_RTOL = 1e-12
ENVELOPE_MARGIN = 1e-9


@dataclass(frozen=True)
class DeterminantReport:
    k: int
    log_delta1: float
    delta_ratio: float
    delta2_closed: float
    degenerate: bool


@dataclass(frozen=True)
class RegimeAnalysis:
    regime: Regime
    lcm_M: int
    period: int
    min_abs_delta2: float
    zero_residues: tuple
    min_nonzero_abs_delta2: float = float("nan")


@dataclass
class SmallDenominatorEstimate:
    M_fit: float
    gamma_fit: float
    k_scanned: int
    violations: int
    zero_ks: list = field(default_factory=list)


def _floats(coeffs) -> np.ndarray:
    if isinstance(coeffs, Coefficients):
        return coeffs.as_array()
    return np.atleast_1d(np.asarray(coeffs, dtype=float))


def vandermonde_sq(coeffs) -> float:
    """prod_{j>s} (a_j^2 - a_s^2); exact when rational values are available."""
    if isinstance(coeffs, Coefficients) and coeffs.exact is not None:
        q = coeffs.exact
        prod = reduce(lambda x, y: x * y,
                      (q[j] ** 2 - q[s] ** 2 for j in range(len(q)) for s in range(j)),
                      Fraction(1))
        return float(prod)
    a = _floats(coeffs)
    out = 1.0
    for j in range(a.shape[0]):
        for s in range(j):
            out *= a[j] ** 2 - a[s] ** 2
    return out


def log_delta1(k: int, coeffs) -> float:
    a = _floats(coeffs)
    return math.pi * k * math.fsum(a) + math.log(vandermonde_sq(coeffs))


def delta_ratio(k: int, coeffs) -> float:
    """det(scaled mode matrix) / vandermonde_sq, i.e. Delta2 + Delta_k in this ordering."""
    A = mode_matrix(k, _floats(coeffs))
    try:
        sign, logdet = np.linalg.slogdet(A)
    except np.linalg.LinAlgError as exc:
        raise NumericalBreakdown(f"LU failed at k={k}") from exc
    if not np.isfinite(logdet) and sign != 0:
        raise NumericalBreakdown(f"determinant overflow at k={k}")
    if sign == 0:
        return 0.0
    value = sign * math.exp(logdet) / vandermonde_sq(coeffs)
    if not math.isfinite(value):
        raise NumericalBreakdown(f"determinant ratio not finite at k={k}")
    return value


def alpha_angle(a_j: float, a_s: float, t_j: int, t_s: int) -> float:
    """Phase of a_j a_s (1 - t_j t_s) - i (t_j a_j^2 + t_s a_s^2), sign-flipped.

    sin(alpha) = (t_j a_j^2 + t_s a_s^2) / (a_j^2 + a_s^2), and the cosine is
    a_j a_s (1 - t_j t_s) / (a_j^2 + a_s^2); atan2 fixes the quadrant.
    """
    return math.atan2(t_j * a_j ** 2 + t_s * a_s ** 2, a_j * a_s * (1 - t_j * t_s))


def sign_vectors(n: int) -> list:
    return [(1,) + rest for rest in itertools.product((1, -1), repeat=n - 1)]


@dataclass(frozen=True)
class _Delta2Terms:
    weight: np.ndarray
    cos_alpha: np.ndarray
    sin_alpha: np.ndarray
    slope: np.ndarray  # sum_j a_j t_j  (float path)
    offset: np.ndarray  # sum_j t_j / 4
    use_cos: bool
    exact: tuple | None  # (P, Q, D): phase in turns = (k P + Q mod 2D) / D


def _delta2_terms(coeffs) -> _Delta2Terms:
    a = _floats(coeffs)
    n = a.shape[0]
    exact = coeffs.exact if isinstance(coeffs, Coefficients) else None
    signs = sign_vectors(n)
    weight, alpha, slope, offset = [], [], [], []
    for t in signs:
        plus = sum(1 for v in t if v > 0)
        prod = 1.0
        ang = 0.0
        for j in range(n):
            for s in range(j):
                prod *= t[j] * a[j] - t[s] * a[s]
                ang += alpha_angle(a[j], a[s], t[j], t[s])
        weight.append((-1) ** plus * prod)
        alpha.append(ang)
        slope.append(math.fsum(t[j] * a[j] for j in range(n)))
        offset.append(sum(t) / 4.0)
    exact_phase = None
    if exact is not None:
        den = 4 * reduce(math.lcm, (q.denominator for q in exact), 1)
        P = [sum(int(t[j] * exact[j] * den) for j in range(n)) for t in signs]
        Q = [sum(t) * den // 4 for t in signs]
        exact_phase = (tuple(P), tuple(Q), den)
    alpha = np.array(alpha)
    return _Delta2Terms(
        weight=np.array(weight),
        cos_alpha=np.cos(alpha),
        sin_alpha=np.sin(alpha),
        slope=np.array(slope),
        offset=np.array(offset),
        use_cos=n % 4 in (0, 3),
        exact=exact_phase,
    )


def _turns(terms: _Delta2Terms, ks: np.ndarray) -> np.ndarray:
    if terms.exact is not None:
        P, Q, D = terms.exact
        bound = (int(np.max(np.abs(ks))) + 1) * (max(abs(p) for p in P) + max(abs(q) for q in Q) + 1)
        if bound < 2 ** 62:
            num = (ks.astype(np.int64)[:, None] * np.array(P, dtype=np.int64)[None, :]
                   + np.array(Q, dtype=np.int64)[None, :]) % (2 * D)
            return num / float(D)
        out = np.empty((ks.shape[0], len(P)))
        for i, k in enumerate(ks.tolist()):
            for t in range(len(P)):
                out[i, t] = ((int(k) * P[t] + Q[t]) % (2 * D)) / D
        return out
    return np.fmod(np.outer(ks, terms.slope) + terms.offset[None, :], 2.0)


def delta2_scan(coeffs, ks) -> np.ndarray:
    """Closed-form Delta2 (up to a k-independent constant) for each k in ``ks``."""
    ks = np.atleast_1d(np.asarray(ks, dtype=np.int64))
    terms = _delta2_terms(coeffs)
    return kernels.delta2_scan(
        _turns(terms, ks), terms.cos_alpha, terms.sin_alpha, terms.weight, terms.use_cos
    )


def delta2_closed_form(k: int, coeffs) -> float:
    return float(delta2_scan(coeffs, [k])[0])


def delta2_zero_scale(coeffs) -> float:
    """Magnitude below which a closed-form value counts as an exact zero."""
    return ZERO_RTOL * float(np.sum(np.abs(_delta2_terms(coeffs).weight)))


# ------------------------------------------------------------ rational regime
def subset_denominators(exact) -> list:
    dens = []
    n = len(exact)
    for r in range(1, n + 1):
        for J in itertools.combinations(range(n), r):
            dens.append(sum((exact[j] for j in J), Fraction(0)).denominator)
    return dens


def rational_min_delta2(coeffs: Coefficients) -> RegimeAnalysis:
    """Scan one exact period of Delta2 for rational coefficients."""
    if not isinstance(coeffs, Coefficients) or coeffs.exact is None or coeffs.regime is Regime.FLOATING:
        raise RegimeMismatch("rational_min_delta2 needs Natural or Rational coefficients")
    M = reduce(math.lcm, subset_denominators(coeffs.exact), 1)
    period = 2 * M
    ks = np.arange(1, period + 1)
    vals = np.abs(delta2_scan(coeffs, ks))
    zero = vals <= delta2_zero_scale(coeffs)
    residues = tuple(sorted(int(k % period) for k in ks[zero]))
    nonzero = vals[~zero]
    return RegimeAnalysis(
        regime=coeffs.regime,
        lcm_M=M,
        period=period,
        min_abs_delta2=float(vals.min()),
        zero_residues=residues,
        min_nonzero_abs_delta2=float(nonzero.min()) if nonzero.size else 0.0,
    )


# ------------------------------------------------------------ envelope fit
def _lower_hull(x: np.ndarray, y: np.ndarray) -> list:
    hull = []
    for i in range(x.shape[0]):
        while len(hull) >= 2:
            i0, i1 = hull[-2], hull[-1]
            cross = (x[i1] - x[i0]) * (y[i] - y[i0]) - (y[i1] - y[i0]) * (x[i] - x[i0])
            if cross <= 0:
                hull.pop()
            else:
                break
        hull.append(i)
    return hull


def estimate_gamma(coeffs, k_max: int = 10_000) -> SmallDenominatorEstimate:
    """Fit |Delta2(k)| > M k^-gamma over k = 1..k_max.

    Among all lines in (log k, log|Delta2|) that stay below every scanned
    point with gamma >= 0, pick the one that is highest at k_max; its slope is
    one of the lower-hull edges (or zero).
    """
    if k_max < 100:
        raise ValueError("k_max must be >= 100")
    ks = np.arange(1, k_max + 1)
    vals = np.abs(delta2_scan(coeffs, ks))
    zero = vals <= delta2_zero_scale(coeffs)
    if np.all(zero):
        raise AllZero("closed-form Delta2 vanishes at every scanned k")
    x = np.log(ks[~zero].astype(float))
    y = np.log(vals[~zero])
    hull = _lower_hull(x, y)
    candidates = {0.0}
    for i0, i1 in zip(hull[:-1], hull[1:]):
        slope = (y[i1] - y[i0]) / (x[i1] - x[i0])
        if slope < 0:
            candidates.add(float(-slope))
    xmax = math.log(k_max)
    best = None
    for g in sorted(candidates):
        level = float(np.min(y + g * x))
        score = level - g * xmax
        if best is None or score > best[0] + 1e-14:
            best = (score, g, level)
    _, gamma, level = best
    M = math.exp(level) * (1.0 - ENVELOPE_MARGIN)
    bound = M * ks[~zero].astype(float) ** (-gamma)
    violations = int(np.count_nonzero(vals[~zero] <= bound))
    return SmallDenominatorEstimate(
        M_fit=M,
        gamma_fit=gamma,
        k_scanned=k_max,
        violations=violations,
        zero_ks=[int(k) for k in ks[zero]],
    )


# ------------------------------------------------------------ degeneracy scan
def closed_form_constant(coeffs, k_ref: int) -> float:
    """c with delta_ratio(k) ~ c * delta2_closed_form(k) for large k.

    Uses the k in [k_ref, k_ref + 16) where the closed form is largest, so a
    zero of Delta2 near k_ref does not spoil the fit.
    """
    ks = np.arange(k_ref, k_ref + 16)
    vals = delta2_scan(coeffs, ks)
    k = int(ks[int(np.argmax(np.abs(vals)))])
    return delta_ratio(k, coeffs) / delta2_closed_form(k, coeffs)


def delta_k_remainder(k: int, coeffs, c: float) -> float:
    return delta_ratio(k, coeffs) - c * delta2_closed_form(k, coeffs)


def smallest_singular_ratio(k: int, coeffs) -> float:
    sv = np.linalg.svd(mode_matrix(k, _floats(coeffs)), compute_uv=False)
    return float(sv[-1] / sv[0])


def determinant_scan(coeffs, K: int, degeneracy_tol: float = 1e-8) -> list:
    """DeterminantReport for every k = 1..K."""
    ks = np.arange(1, K + 1)
    ratios = np.array([delta_ratio(int(k), coeffs) for k in ks])
    closed = delta2_scan(coeffs, ks)
    typical = statistics.median(np.abs(ratios).tolist()) if K else 0.0
    reports = []
    for k, r, c in zip(ks.tolist(), ratios.tolist(), closed.tolist()):
        flagged = abs(r) < degeneracy_tol * typical
        if flagged:
            flagged = smallest_singular_ratio(k, coeffs) < degeneracy_tol
        reports.append(DeterminantReport(
            k=k, log_delta1=log_delta1(k, coeffs), delta_ratio=r, delta2_closed=c, degenerate=flagged,
        ))
    return reports


def find_degenerate_modes(coeffs, K: int, degeneracy_tol: float = 1e-8) -> list:
    if K < 1:
        raise ValueError("K must be >= 1")
    return [r for r in determinant_scan(coeffs, K, degeneracy_tol) if r.degenerate]
