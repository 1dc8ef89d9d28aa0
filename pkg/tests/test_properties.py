"""Property tests over randomly drawn coefficients, data and modes."""

import math

import numpy as np
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from lbmix.determinants import delta2_scan, delta_ratio, estimate_gamma, rational_min_delta2, vandermonde_sq
from lbmix.mode_solver import assemble_mode_system, closed_form_n1, matching_residual, mode_matrix, ode_residual, solve_mode
from lbmix.model import make_coefficients
from lbmix.spectral import sine_coefficients
from lbmix.verify import manufactured_case

SETTINGS = settings(max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow])


@st.composite
def increasing_floats(draw, max_n=3):
    n = draw(st.integers(1, max_n))
    gaps = draw(st.lists(st.floats(0.05, 2.0), min_size=n, max_size=n))
    a = np.cumsum(gaps)
    return make_coefficients([repr(float(v)) for v in a])


@st.composite
def increasing_fractions(draw, max_n=3):
    n = draw(st.integers(1, max_n))
    nums = sorted(draw(st.lists(st.integers(1, 30), min_size=n, max_size=n, unique=True)))
    den = draw(st.integers(1, 6))
    return make_coefficients([f"{p}/{den}" for p in nums])


@SETTINGS
@given(increasing_fractions())
def test_render_idempotent(c):
    again = make_coefficients(c.render())
    assert again == c and make_coefficients(again.render()) == again


@SETTINGS
@given(increasing_fractions())
def test_rational_period(c):
    p = rational_min_delta2(c).period
    ks = np.arange(1, p + 1)
    np.testing.assert_allclose(delta2_scan(c, ks + p), delta2_scan(c, ks), atol=1e-12, rtol=0)


@SETTINGS
@given(increasing_floats(), st.integers(1, 400), st.integers(0, 2 ** 32 - 1))
def test_solved_modes_match_and_satisfy_ode(c, k, seed):
    rng = np.random.default_rng(seed)
    sysm = assemble_mode_system(k, c, rng.standard_normal(c.n), rng.standard_normal(c.n))
    sol = solve_mode(sysm)
    if sol.degenerate or sol.cond_estimate > 1e8:
        return
    assert matching_residual(sol, c) <= 1e-9
    for y in (0.9, 0.3, -0.2, -1.0):
        assert ode_residual(sol, c, y) <= 1e-9


@SETTINGS
@given(st.floats(0.1, 3.0), st.integers(1, 60), st.floats(-5, 5), st.floats(-5, 5))
def test_n1_oracle(a1, k, phi, psi):
    ref_det = abs((math.cos(math.pi * k * a1) + math.sin(math.pi * k * a1)))
    if ref_det < 1e-6:
        return
    c = make_coefficients([repr(a1)])
    got = solve_mode(assemble_mode_system(k, c, [phi], [psi]))
    ref = closed_form_n1(k, a1, phi, psi)
    scale = max(1e-300, float(np.max(np.abs(ref.vector))))
    assert np.max(np.abs(got.vector - ref.vector)) <= 1e-9 * scale + 1e-300


@SETTINGS
@given(increasing_floats(), st.integers(1, 10_000))
def test_scaled_matrix_bounded(c, k):
    assert np.max(np.abs(mode_matrix(k, c))) <= max(1.0, c.a[-1] ** (2 * c.n - 1))


@SETTINGS
@given(increasing_floats(max_n=4))
def test_vandermonde_positive_and_direct(c):
    a = c.as_array()
    direct = np.linalg.det(np.vander(a ** 2, increasing=True))
    v = vandermonde_sq(c)
    assert v > 0 and math.isclose(v, direct, rel_tol=1e-9)


@SETTINGS
@given(increasing_floats(max_n=2))
def test_envelope_has_no_violations(c):
    est = estimate_gamma(c, 500)
    ks = np.arange(1, 501, dtype=float)
    vals = np.abs(delta2_scan(c, ks))
    nz = np.array([int(k) not in set(est.zero_ks) for k in ks])
    assert est.violations == 0
    assert np.all(vals[nz] > est.M_fit * ks[nz] ** -est.gamma_fit)


@SETTINGS
@given(increasing_floats(), st.integers(1, 30), st.integers(0, 1000))
def test_manufactured_matching(c, k, seed):
    mc = manufactured_case(k, c, seed)
    assert matching_residual(mc.exact_mode, c) <= 1e-12


@SETTINGS
@given(st.lists(st.tuples(st.integers(1, 25), st.floats(-3, 3)), min_size=1, max_size=4), st.floats(-2, 2), st.floats(-2, 2))
def test_sine_coefficients_linear(terms, alpha, beta):
    f = lambda x: sum(a * np.sin(m * np.pi * x) for m, a in terms)  # noqa: E731
    g = lambda x: np.exp(-x) * x * (1 - x)  # noqa: E731
    ks = np.arange(1, 30)
    lhs = sine_coefficients(lambda x: alpha * f(x) + beta * g(x), ks)
    rhs = alpha * sine_coefficients(f, ks) + beta * sine_coefficients(g, ks)
    scale = max(1.0, abs(alpha) * sum(abs(a) for _, a in terms) + abs(beta))
    assert np.max(np.abs(lhs - rhs)) <= 4e-12 * scale


@SETTINGS
@given(increasing_floats(max_n=2), st.integers(1, 40))
def test_delta_ratio_finite(c, k):
    assert math.isfinite(delta_ratio(k, c))
