"""Truncated sine-series solution of the Dirichlet problem and its evaluation."""

from __future__ import annotations

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import kernels
from .determinants import (
    RegimeAnalysis,
    SmallDenominatorEstimate,
    estimate_gamma,
    rational_min_delta2,
)
from .errors import CapExceeded, DegenerateUnsolvable, NotDegenerate
from .mode_solver import ModeSolution, assemble_mode_system, mode_matrix, mode_values, solve_mode
from .model import Coefficients, Field, ProblemSpec, validate_problem
from .spectral import SpectralBoundary, boundary_spectrum

log = logging.getLogger(__name__)

TAIL_WINDOW = 2  # spectrum is stored to TAIL_WINDOW * k_cap to bound the discarded tail
SMALL_DENOMINATOR_WARN = 1e-4  # sigma_min/sigma_max below this logs a warning


@dataclass(frozen=True)
class DegenerateModeRecord:
    k: int
    data_orthogonal: bool
    homogeneous_dim: int
    homogeneous_sample: Optional[ModeSolution] = None


@dataclass
class SeriesSolution:
    K: int
    modes: list
    degenerate_modes: list = field(default_factory=list)
    tail_bound: float = 0.0
    estimate: Optional[SmallDenominatorEstimate] = None
    regime_analysis: Optional[RegimeAnalysis] = None
    small_denominator_ks: list = field(default_factory=list)

    @property
    def ks(self) -> np.ndarray:
        return np.array([m.k for m in self.modes], dtype=float)

    def coefficient_arrays(self):
        if not self.modes:
            return np.zeros((0, 0)), np.zeros((0, 0))
        return np.array([m.c_hat for m in self.modes]), np.array([m.d for m in self.modes])

    def mode(self, k: int) -> Optional[ModeSolution]:
        for m in self.modes:
            if m.k == k:
                return m
        return None


def _noise_floor(quadrature_tol: float) -> float:
    return max(quadrature_tol, 1e-10)


def choose_truncation(spectrum: SpectralBoundary, coeffs, est: SmallDenominatorEstimate,
                      series_tol: float, k_cap: Optional[int] = None,
                      noise_floor: float = 0.0) -> int:
    """Smallest K whose weighted tail sum_{k>K} k^(2n+gamma) sum_s(|phi|+|psi|) / M is below tol.

    Entries below the relative ``noise_floor`` count as zero. The tail is summed
    over the stored spectrum only, so callers store more modes than ``k_cap``
    (solve_dirichlet uses 2 * k_cap). Raises CapExceeded when K > k_cap.
    """
    tail = truncation_tails(spectrum, coeffs, est, noise_floor)
    K = int(np.nonzero(tail < series_tol)[0][0]) + 1  # tail beyond the stored range counts as 0
    if k_cap is not None and K > k_cap:
        raise CapExceeded(
            f"tail bound {series_tol:g} not met by k_cap={k_cap}; data not smooth enough"
        )
    return K


def truncation_tails(spectrum: SpectralBoundary, coeffs, est: SmallDenominatorEstimate,
                     noise_floor: float = 0.0) -> np.ndarray:
    """tail[K-1] = weighted tail beyond K, for K = 1..spectrum.K."""
    n = spectrum.n
    mags = spectrum.denoised(noise_floor).magnitude()
    ks = np.arange(1, spectrum.K + 1, dtype=float)
    terms = ks ** (2 * n + est.gamma_fit) * mags / est.M_fit
    suffix = np.concatenate([np.cumsum(terms[::-1])[::-1], [0.0]])
    return suffix[1:]


def homogeneous_dim(k: int, coeffs, degeneracy_tol: float = 1e-8) -> int:
    sv = np.linalg.svd(mode_matrix(k, coeffs), compute_uv=False)
    return int(np.count_nonzero(sv < degeneracy_tol * sv[0]))


def homogeneous_mode(k: int, coeffs, degeneracy_tol: float = 1e-8) -> ModeSolution:
    """Nullspace element of a singular mode system (unit 2-norm, largest entry positive)."""
    A = mode_matrix(k, coeffs)
    _, sv, Vt = np.linalg.svd(A)
    if not sv[-1] < degeneracy_tol * sv[0]:
        raise NotDegenerate(f"mode k={k} is regular (sigma_min/sigma_max={sv[-1] / sv[0]:.3e})")
    v = Vt[-1].copy()
    v /= np.linalg.norm(v)
    if v[int(np.argmax(np.abs(v)))] < 0:
        v = -v
    return ModeSolution.from_vector(
        k, v, cond_estimate=math.inf, smallest_singular=float(sv[-1]), degenerate=True
    )


def _solve_one(k, coeffs, spectrum, tols):
    phi_k, psi_k = spectrum.at(k)  # already denoised
    system = assemble_mode_system(k, coeffs, phi_k, psi_k)
    orthogonal = not (np.any(phi_k) or np.any(psi_k))
    try:
        sol = solve_mode(system, tols.degeneracy_tol)
    except DegenerateUnsolvable:
        sol = None
    if sol is not None and not sol.degenerate:
        return "ok", sol
    if orthogonal:
        record = DegenerateModeRecord(
            k=k,
            data_orthogonal=True,
            homogeneous_dim=homogeneous_dim(k, coeffs, tols.degeneracy_tol),
            homogeneous_sample=homogeneous_mode(k, coeffs, tols.degeneracy_tol),
        )
        return "degenerate", record
    return "unsolvable", k


def solve_dirichlet(spec: ProblemSpec, workers: int = 1, spectrum: SpectralBoundary = None) -> SeriesSolution:
    """Spectrum, regime analysis, truncation and per-mode solves for one problem.

    ``spectrum`` may be supplied (for tabulated data); it should extend past
    k_cap so the truncation tail is meaningful.
    """
    problems = validate_problem(spec)
    if problems:
        raise ValueError("invalid problem: " + "; ".join(problems))
    coeffs = spec.coefficients
    tols = spec.tolerances
    n = coeffs.n
    if spectrum is None:
        spectrum = boundary_spectrum(spec.boundary, n, TAIL_WINDOW * spec.k_cap, tols.quadrature_tol)
    est = estimate_gamma(coeffs, max(100, spec.k_cap))
    regime = rational_min_delta2(coeffs) if coeffs.exact is not None else None
    spectrum = spectrum.denoised(_noise_floor(tols.quadrature_tol))
    K = choose_truncation(spectrum, coeffs, est, tols.series_tol, spec.k_cap)
    tail = float(truncation_tails(spectrum, coeffs, est)[K - 1])

    ks = range(1, K + 1)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda k: _solve_one(k, coeffs, spectrum, tols), ks))
    else:
        results = [_solve_one(k, coeffs, spectrum, tols) for k in ks]

    modes, records, offending, small = [], [], [], []
    for status, payload in results:
        if status == "ok":
            modes.append(payload)
            if payload.cond_estimate > 1.0 / SMALL_DENOMINATOR_WARN:
                small.append(payload.k)
        elif status == "degenerate":
            records.append(payload)
        else:
            offending.append(payload)
    if offending:
        raise DegenerateUnsolvable(
            f"data not orthogonal to degenerate modes k={offending}; no classical solution",
            ks=offending,
        )
    for k in small:
        log.warning("small denominator at k=%d (near-singular mode system)", k)
    for r in records:
        log.info("mode k=%d is degenerate; solution is not unique (dim %d)", r.k, r.homogeneous_dim)
    return SeriesSolution(
        K=K,
        modes=modes,
        degenerate_modes=records,
        tail_bound=tail,
        estimate=est,
        regime_analysis=regime,
        small_denominator_ks=small,
    )


def _check_order(n, jx, jy, ys):
    if jx < 0 or jy < 0:
        raise ValueError("derivative orders must be non-negative")
    if jx + jy > 2 * n:
        raise ValueError(f"total derivative order {jx + jy} exceeds 2n={2 * n}")
    if jx + jy == 2 * n and np.any(np.asarray(ys) == 0.0):
        raise ValueError("order-2n derivatives are not defined on the interface y = 0")


def evaluate_grid(sol: SeriesSolution, coeffs, xs, ys, jx: int = 0, jy: int = 0) -> Field:
    """Sample d^jx/dx^jx d^jy/dy^jy u on the tensor grid ys x xs (rows = fixed y)."""
    a = coeffs.as_array() if isinstance(coeffs, Coefficients) else np.atleast_1d(coeffs)
    xs = np.atleast_1d(np.asarray(xs, dtype=float))
    ys = np.atleast_1d(np.asarray(ys, dtype=float))
    _check_order(a.shape[0], jx, jy, ys)
    if np.any((xs < 0) | (xs > 1)) or np.any((ys < -1) | (ys > 1)):
        raise ValueError("points must lie in [0,1] x [-1,1]")
    if not sol.modes:
        return Field(xs, ys, np.zeros((ys.shape[0], xs.shape[0])))
    y_eval = np.where(ys == 0.0, -0.0, ys)  # interface: hyperbolic representation
    c_hat, d = sol.coefficient_arrays()
    ks = sol.ks
    vals = mode_values(c_hat, d, ks, a, y_eval, jy)
    return Field(xs, ys, kernels.series_sum(vals, ks, xs, jx))


def evaluate(sol: SeriesSolution, coeffs, x: float, y: float) -> float:
    return float(evaluate_grid(sol, coeffs, [x], [y]).values[0, 0])


def evaluate_derivative(sol: SeriesSolution, coeffs, x: float, y: float, jx: int, jy: int) -> float:
    return float(evaluate_grid(sol, coeffs, [x], [y], jx, jy).values[0, 0])
