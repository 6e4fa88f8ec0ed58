"""Acceptance gate: one PASS/FAIL line per criterion, printed in the terminal summary.

Parameter samples are drawn with fixed seeds from ranges that keep
coordinates moderate (mu, d0 >= 0.05, beta <= 2) so absolute tolerances
stay meaningful.
"""

import time

import numpy as np

from mosqdyn import ORIGIN, State2, iterate_w0, step_w0, validate_params
from mosqdyn.harness import (
    Verdict,
    absorption_violations,
    both_increase_steps,
    converges_to_origin,
    envelope_violations,
    joint_decrease_violations,
)
from mosqdyn.simplex import (
    CaseTag,
    Shape,
    TCoefficients,
    budan_fourier_variations,
    closed_form_fixed_point,
    derivative_sign_shape,
    fixed_point_cubic,
    omega_limit,
    period2_certificate,
    step_u,
    t_derivative,
    t_fixed_point,
    t_fixed_point_stability,
    t_map,
    t_monotonicity_profile,
    two_cycle_gap,
)
from mosqdyn.spectral import (
    classify_fixed_point,
    coexistence_point,
    fixed_points_w0,
    origin_regime,
    regime_thresholds,
)
from oracles import bisect, central_diff, cubic_l, sample_valid, sign_changes, t_exact

BASELINE = (0.8, 0.9, 0.8, 0.2)
MODERATE = dict(alpha=(0.05, 0.95), mu=(0.05, 1.0), beta=(0.01, 2.0), d0_min=0.05)


def _params(rng, n, **kw):
    return [validate_params(*t) for t in sample_valid(rng, n, **{**MODERATE, **kw})]


def _below_t1(rng, n):
    out = []
    for a, _, m, d0 in sample_valid(rng, n, **MODERATE):
        t1 = m * (1 + d0 / a)
        out.append(validate_params(a, rng.uniform(0.01, 0.999) * t1, m, d0))
    return out


def test_criterion_01_baseline_reproduction(criterion):
    p = validate_params(*BASELINE)
    t0 = time.perf_counter()
    rep = converges_to_origin(p, State2(0.002, 0.2), tol=1e-10, max_iter=100_000)
    elapsed = time.perf_counter() - t0
    dist = rep.final.max_dist(ORIGIN)
    ok = (rep.verdict is Verdict.CONVERGED_TO_ORIGIN and dist < 1e-8
          and rep.monotone_tail_index is not None and rep.iterations_used <= 100_000 and elapsed < 1.0)
    assert criterion(1, ok, f"dist={dist:.2e} iters={rep.iterations_used} "
                            f"tail={rep.monotone_tail_index} time={elapsed:.3f}s")


def test_criterion_02_fixed_point_formulas(criterion):
    rng = np.random.default_rng(2)
    above, below = [], []
    while len(above) < 1000 or len(below) < 1000:
        p = _params(rng, 1)[0]
        (above if p.beta > p.origin_threshold else below).append(p)
    worst = 0.0
    for p in above[:1000]:
        fps = fixed_points_w0(p)
        assert len(fps) == 2
        worst = max(worst, step_w0(fps[1], p).max_dist(fps[1]))
    # include exact boundary cases beta = t1
    boundary = [validate_params(0.5, 0.75, 0.5, 0.25), validate_params(0.8, 1.0, 0.8, 0.2)]
    only_origin = all(fixed_points_w0(p) == [ORIGIN] for p in below[:1000] + boundary)
    ok = worst < 1e-11 and only_origin
    assert criterion(2, ok, f"max residual={worst:.2e} over 1000; origin-only below t1: {only_origin}")


def test_criterion_03_classification_consistency(criterion):
    rng = np.random.default_rng(3)
    agree = total = z2_total = z2_attracting = 0
    for p in _params(rng, 10_000):
        th = regime_thresholds(p)
        if abs(p.beta - th.t1) <= 1e-6 or abs(p.beta - th.t2) <= 1e-6:
            continue
        total += 1
        agree += origin_regime(p) is classify_fixed_point(p, ORIGIN).stability
        if p.beta > th.t1:
            z2_total += 1
            z2_attracting += classify_fixed_point(p, coexistence_point(p)).stability.value == "Attracting"
    ok = agree == total and z2_attracting == z2_total and total > 9000
    assert criterion(3, ok, f"regime agreement {agree}/{total}; z2 attracting {z2_attracting}/{z2_total}")


def test_criterion_04_simplex_invariance(criterion):
    rng = np.random.default_rng(4)
    params = [validate_params(*t) for t in sample_valid(rng, 1000)]
    in_range = True
    worst = 0.0
    n = 0
    for p in params:
        xs = rng.uniform(0.0, 1.0, 100)
        xs[:2] = 0.0, 1.0
        tx = t_map(xs, p)
        in_range &= bool(np.all((tx >= 0.0) & (tx <= 1.0)))
        for x, t in zip(xs, tx):
            worst = max(worst, abs(step_u(State2(x, 1.0 - x), p).x - t))
        n += len(xs)
    ok = n >= 100_000 and in_range and worst < 1e-12
    assert criterion(4, ok, f"{n} points; all in [0,1]: {in_range}; max |T - U_x|={worst:.2e}")


def test_criterion_05_cubic_fixed_point(criterion):
    rng = np.random.default_rng(5)
    grid = np.linspace(0.0, 1.0, 4001)
    failures = []
    worst = 0.0
    for p in _params(rng, 1000):
        coeffs = fixed_point_cubic(p)
        ref = bisect(cubic_l((p.alpha, p.beta, p.mu, p.d0)), 0.0, 1.0)
        xs = t_fixed_point(p)
        res = abs(np.polyval(coeffs, xs))
        worst = max(worst, res)
        n0, n1 = budan_fourier_variations(coeffs, 0.0), budan_fourier_variations(coeffs, 1.0)
        table = (1, 0) if coeffs[0] > 0 else (2, 1)
        unique = sign_changes(np.polyval(coeffs, grid).tolist()) == 1
        if not (res < 1e-11 and 0 <= xs <= 1 and abs(xs - ref) < 1e-12 and unique and (n0, n1) == table):
            failures.append(p)
    # beta + d0 = mu exactly (e = 0): closed form against bisection
    worst_closed = 0.0
    n_closed = 0
    for _ in range(200):
        m = rng.uniform(0.1, 1.0)
        d0 = rng.uniform(0.01, 0.9 * m)
        a = rng.uniform(0.01, 1.0 - d0)
        p = validate_params(a, m - d0, m, d0)
        if abs(TCoefficients.from_params(p).e) >= 1e-12:
            continue
        n_closed += 1
        ref = bisect(cubic_l((p.alpha, p.beta, p.mu, p.d0)), 0.0, 1.0)
        worst_closed = max(worst_closed, abs(closed_form_fixed_point(p) - ref), abs(t_fixed_point(p) - ref))
    ok = not failures and worst < 1e-11 and worst_closed < 1e-10 and n_closed >= 100
    assert criterion(5, ok, f"failures={len(failures)}/1000 max residual={worst:.2e}; "
                            f"closed form vs bisection={worst_closed:.2e} over {n_closed} e=0 sets")


def test_criterion_06_attractivity(criterion):
    rng = np.random.default_rng(6)
    max_abs = 0.0
    fd_err = 0.0
    for p in _params(rng, 1000):
        m = t_fixed_point_stability(p)
        max_abs = max(max_abs, abs(m))
        exact = lambda u: float(t_exact(u, p.alpha, p.beta, p.mu, p.d0))  # noqa: E731
        xs = t_fixed_point(p)
        pts = [min(max(xs, 1e-5), 1 - 1e-5), rng.uniform(1e-5, 1 - 1e-5)]
        for x in pts:
            fd_err = max(fd_err, abs(float(t_derivative(x, p)) - central_diff(exact, x, 1e-6)))
    ok = max_abs < 1 and fd_err < 1e-6
    assert criterion(6, ok, f"max |T'(x*)|={max_abs:.4f}; max derivative vs finite difference={fd_err:.2e}")


def test_criterion_07_period_two_exclusion(criterion):
    p = validate_params(*BASELINE)
    cert = period2_certificate(p)
    a, mu, d0 = p.alpha, p.mu, p.d0
    identity = 2 * (1 - d0) * (a + mu + 2 * d0 - 3) + (1 - mu) * (a + 2 * d0 - 2)
    coeffs_ok = (abs(cert.A - 0.4) < 1e-12 and abs(cert.B + 1.04) < 1e-12 and abs(cert.C + 1.12) < 1e-12
                 and abs(cert.abc_sum + 1.76) < 1e-12 and abs(identity + 1.76) < 1e-12)
    rng = np.random.default_rng(7)
    sample = _params(rng, 1000)
    all_true = all(period2_certificate(q).conclusion for q in sample)
    gaps = [two_cycle_gap(q, spacing=1e-5) for q in [p] + sample[:4]]
    ok = coeffs_ok and all_true and min(gaps) > 1e-12
    assert criterion(7, ok, f"A={cert.A:.6g} B={cert.B:.6g} C={cert.C:.6g} sum={cert.abc_sum:.6g} "
                            f"identity={identity:.6g}; certified 1000/1000: {all_true}; "
                            f"min grid gap={min(gaps):.2e}")


def test_criterion_08_global_convergence(criterion):
    rng = np.random.default_rng(8)
    worst = 0.0
    for p in _params(rng, 100):
        xs = t_fixed_point(p)
        for x0 in rng.uniform(0.0, 1.0, 10):
            worst = max(worst, abs(omega_limit(float(x0), p, tol=1e-10) - xs))
    ok = worst < 1e-8
    assert criterion(8, ok, f"1000 orbits; max |omega-limit - x*|={worst:.2e}")


MONOTONE_CASES = {
    "e=0 interior": ((0.5, 0.2, 0.7, 0.5), CaseTag.E_ZERO, Shape.DECREASING_THEN_INCREASING),
    "e=0 increasing": ((0.3, 0.2, 0.5, 0.3), CaseTag.E_ZERO, Shape.INCREASING),
    "e=0 decreasing": ((0.3, 0.5, 0.95, 0.45), CaseTag.E_ZERO, Shape.DECREASING),
    "e=f": ((0.6, 0.3, 0.9, 0.2), CaseTag.E_EQUALS_F, Shape.DECREASING_THEN_INCREASING),
    "general interior": ((0.7, 0.3, 0.9, 0.25), CaseTag.GENERAL, Shape.DECREASING_THEN_INCREASING),
    "general monotone": (BASELINE, CaseTag.GENERAL, None),
}


def test_criterion_09_monotonicity_cases(criterion):
    details = []
    ok = True
    for name, (vals, tag, shape) in MONOTONE_CASES.items():
        p = validate_params(*vals)
        prof = t_monotonicity_profile(p)
        grid_shape, _ = derivative_sign_shape(p)
        good = prof.case_tag is tag and prof.shape is grid_shape and (shape is None or prof.shape is shape)
        if prof.x_min is not None:
            zero = bisect(lambda u: float(t_derivative(u, p)), 1e-9, 1 - 1e-9)
            err = abs(prof.x_min - zero)
            good &= err < 1e-8 and prof.source == "closed-form"
            details.append(f"{name}: x_min err {err:.1e}")
        else:
            details.append(f"{name}: {prof.shape.value}")
        ok &= good
    assert criterion(9, ok, "; ".join(details))


def test_criterion_10_orbit_properties(criterion):
    rng = np.random.default_rng(10)
    counts = dict(envelope=0, absorption=0, both_increase=0, joint_decrease=0, literal_envelope=0)
    steps = 0
    for p in _below_t1(rng, 100):
        tr = iterate_w0(State2(0.002, 0.2), p, 100_000, 1e-10, target=ORIGIN)
        steps += len(tr) - 1
        counts["envelope"] += bool(envelope_violations(tr))
        counts["absorption"] += bool(absorption_violations(tr))
        counts["both_increase"] += bool(both_increase_steps(tr))
        counts["joint_decrease"] += bool(joint_decrease_violations(tr))
        # informational: the larvae envelope started at step 0 (see README)
        counts["literal_envelope"] += bool(envelope_violations(tr, anchored=False))
    ok = all(v == 0 for k, v in counts.items() if k != "literal_envelope")
    detail = ", ".join(f"{k}={v}" for k, v in counts.items())
    assert criterion(10, ok, f"100 orbits, {steps} steps; orbits with violations: {detail}")
