"""Acceptance criteria, one test each.

Every test measures its headline number and wall-clock runtime, appends a
one-line PASS/FAIL record to the session report (printed in the terminal
summary) and then asserts against the stated tolerance and time limit.
Run them alone with ``pytest tests/test_acceptance.py -v -s`` or
``python3 -m tests.test_acceptance``.
"""

import time

import numpy as np
import pytest

from circlebody.algebraic import trajectory_algebraic
from circlebody.experiments import (
    angle_trajectory,
    angular_deviation,
    circle_angles,
    circle_trajectory,
    invariant_series,
    line_angles,
    line_trajectory,
    radius_error,
)
from circlebody.geometry import AngleState, identity_residuals
from circlebody.integrator import IntegratorConfig, Projection, recurrence_error
from circlebody.interp import SeedBasis, diff_matrix, interp_q
from circlebody.models import ROTATION_COVARIANT_KINDS, TAN_KINDS, ModelSpec, rhs_angle
from circlebody.sampling import draw_safe, min_pairwise_sin, random_angle_state
from circlebody.verify import DEFAULT_SEED, ETA3, MU3, isochrony_grid, safe_state, six_models

TOL = IntegratorConfig(rel_tol=1e-10, abs_tol=1e-12, projection=Projection.OFF)


def report(lines, k, what, value, threshold, runtime, limit, above=False):
    ok_value = bool(np.isfinite(value)) and (value > threshold if above else value < threshold)
    ok_time = limit is None or runtime < limit
    status = "PASS" if ok_value and ok_time else "FAIL"
    rel = ">" if above else "<"
    budget = "no limit" if limit is None else f"limit {limit:g} s"
    line = f"CRITERION {k} {status}: {what} = {value:.3e} (need {rel} {threshold:.0e}); runtime {runtime:.2f} s ({budget})"
    lines.append(line)
    print(line)
    assert ok_value, line
    assert ok_time, line


# --- shared initial data ---------------------------------------------------------


def invariant_data():
    """Screened N=3 data for the many-body and two-body runs."""
    rng = np.random.default_rng(DEFAULT_SEED)
    models = six_models()
    return {name: (models[name], safe_state(models[name], rng, 5.0)) for name in ("many_body", "two_body")}


def equivalence_data():
    rng = np.random.default_rng(DEFAULT_SEED + 1)
    return {name: (model, safe_state(model, rng, 5.0)) for name, model in six_models().items()}


def isochrony_data():
    rng = np.random.default_rng(DEFAULT_SEED + 2)
    return [
        random_angle_state(rng, 3, angular_spread=2.0, min_separation=0.2, tan_margin=0.2)
        for _ in range(20)
    ]


# --- criteria --------------------------------------------------------------------------


def test_criterion_1_kronecker(acceptance_report):
    start = time.perf_counter()
    rng = np.random.default_rng(DEFAULT_SEED)
    worst = 0.0
    for i in range(100):
        n = 2 + i % 9
        th = random_angle_state(rng, n, min_separation=0.05).theta
        basis = SeedBasis(n)
        q = np.array([[interp_q(basis, th, a + 1, th[b]) for b in range(n)] for a in range(n)])
        worst = max(worst, float(np.abs(q - np.eye(n)).max()))
    runtime = time.perf_counter() - start
    report(acceptance_report, 1, "max |q_n(theta_m) - delta_nm|, 100 node sets, N=2..10", worst, 1e-12, runtime, 1.0)


def test_criterion_2_diff_matrix_exactness(acceptance_report):
    start = time.perf_counter()
    rng = np.random.default_rng(DEFAULT_SEED)
    worst = 0.0
    for n in range(2, 9):
        basis = SeedBasis(n)
        for _ in range(20):
            th = random_angle_state(rng, n, min_separation=0.1).theta
            h = rng.normal(size=n) + 1j * rng.normal(size=n)
            m = basis.matrix(th)
            f, fp = m @ h, m @ (1j * basis.exponents * h)
            worst = max(worst, float(np.abs(diff_matrix(th) @ f - fp).max() / np.abs(fp).max()))
    runtime = time.perf_counter() - start
    report(acceptance_report, 2, "max ||D f - f'|| / ||f'||, N=2..8", worst, 1e-10, runtime, 1.0)


def test_criterion_3_constants_of_motion(acceptance_report):
    start = time.perf_counter()
    t_grid = np.linspace(0.0, 5.0, 51)
    worst = 0.0
    for model, s in invariant_data().values():
        _, _, drift = invariant_series(model, angle_trajectory(model, s, t_grid, TOL).states)
        worst = max(worst, float(drift.max()))
    runtime = time.perf_counter() - start
    report(acceptance_report, 3, "max relative drift of h_m, many/two-body N=3", worst, 1e-6, runtime, 10.0)


def test_criterion_4_angle_vector_equivalence(acceptance_report):
    start = time.perf_counter()
    t_grid = np.linspace(0.0, 5.0, 51)
    worst = 0.0
    for model, s in equivalence_data().values():
        ta = angle_trajectory(model, s, t_grid, TOL).positions()
        tc = circle_trajectory(model, s, t_grid, TOL)
        worst = max(worst, angular_deviation(ta, circle_angles(tc)))
        if model.kind in TAN_KINDS:
            tl = line_trajectory(model, s, t_grid, TOL)
            worst = max(worst, angular_deviation(ta, line_angles(tl), modulus=np.pi))
    runtime = time.perf_counter() - start
    report(acceptance_report, 4, "max angular deviation, six model pairs", worst, 1e-7, runtime, 30.0)


def test_criterion_5_isochrony(acceptance_report):
    start = time.perf_counter()
    model = ModelSpec.isochronous_tan(1.0)
    t_grid = isochrony_grid()
    worst = max(
        recurrence_error(angle_trajectory(model, s, t_grid, TOL), np.pi, modulus=np.pi) for s in isochrony_data()
    )
    control = ModelSpec.sutherland(1.0)
    s = random_angle_state(np.random.default_rng(DEFAULT_SEED + 3), 3, min_separation=0.2)
    ctrl = recurrence_error(angle_trajectory(control, s, t_grid, TOL), np.pi)
    runtime = time.perf_counter() - start
    print(f"  Sutherland control recurrence at pi: {ctrl:.3e} (need > 1e-2)")
    assert ctrl > 1e-2
    report(acceptance_report, 5, "max recurrence error at period pi, 20 ICs", worst, 1e-6, runtime, 20.0)


def test_criterion_6_algebraic_vs_numeric(acceptance_report):
    start = time.perf_counter()
    rng = np.random.default_rng(DEFAULT_SEED)
    t_grid = np.linspace(0.0, 1.0, 21)
    cases = [(np.array([1.0, 1.7]), np.array([0.4, -0.3])), (MU3, ETA3)]
    worst = 0.0
    for mu, eta in cases:
        model = ModelSpec.many_body(mu, eta)
        s = safe_state(model, rng, 1.0, n=mu.size)
        alg = trajectory_algebraic(model, s, t_grid).positions()
        num = angle_trajectory(model, s, t_grid, TOL).positions()
        worst = max(worst, angular_deviation(alg, num))
    runtime = time.perf_counter() - start
    report(acceptance_report, 6, "max |theta_alg - theta_num| mod 2pi, N=2,3", worst, 1e-6, runtime, 5.0)


def test_criterion_7_identity_suite(acceptance_report):
    start = time.perf_counter()
    rng = np.random.default_rng(DEFAULT_SEED)
    worst = 0.0
    for n in (2, 3, 4, 5):
        states = [random_angle_state(rng, n, min_separation=0.05, tan_margin=0.05) for _ in range(2500)]
        th = np.array([s.theta for s in states])
        thd = np.array([s.theta_dot for s in states])
        thdd = rng.uniform(-1.0, 1.0, size=th.shape)
        worst = max(worst, max(identity_residuals(th, thd, thdd).values()))
    runtime = time.perf_counter() - start
    report(acceptance_report, 7, "max identity residual, 10^4 states", worst, 1e-12, runtime, 2.0)


def test_criterion_8_unit_circle_constraint(acceptance_report):
    # vector-form runs on the data of criteria 3, 4 and 5, projection off
    start = time.perf_counter()
    worst = 0.0
    grid5 = np.linspace(0.0, 5.0, 51)
    for model, s in [*invariant_data().values(), *equivalence_data().values()]:
        worst = max(worst, radius_error(circle_trajectory(model, s, grid5, TOL)))
    model = ModelSpec.isochronous_tan(1.0)
    for s in isochrony_data():
        worst = max(worst, radius_error(circle_trajectory(model, s, isochrony_grid(), TOL)))
    runtime = time.perf_counter() - start
    report(acceptance_report, 8, "max ||r_n| - 1|, vector runs of criteria 3-5", worst, 1e-9, runtime, None)


def test_criterion_9_sutherland_conservation(acceptance_report):
    start = time.perf_counter()
    model = ModelSpec.sutherland(1.0)
    s = draw_safe(model, 3, np.random.default_rng(DEFAULT_SEED), 10.0, min_separation=0.5)
    _, values, _ = invariant_series(model, angle_trajectory(model, s, np.linspace(0.0, 10.0, 101), TOL).states)
    drift = float(np.abs(values - values[0]).max())
    runtime = time.perf_counter() - start
    report(acceptance_report, 9, "max drift of P and E over [0, 10]", drift, 1e-8, runtime, 5.0)


def test_criterion_10_rotation_dichotomy(acceptance_report):
    start = time.perf_counter()
    rng = np.random.default_rng(DEFAULT_SEED)
    models = six_models()
    covariant_dev = 0.0
    for model in models.values():
        if model.kind not in ROTATION_COVARIANT_KINDS:
            continue
        for _ in range(20):
            # dyadic angles and shifts: theta + c is exact, so the rhs must be identical
            th = np.round(rng.uniform(-1.0, 1.0, 3) * 64) / 64
            if min_pairwise_sin(th) <= 0.05:
                continue
            s = AngleState(th, rng.normal(size=3))
            c = rng.integers(-64, 64) / 32
            d = np.abs(rhs_angle(model, s) - rhs_angle(model, AngleState(s.theta + c, s.theta_dot))).max()
            covariant_dev = max(covariant_dev, float(d))
    tan_dev = np.inf
    for model in models.values():
        if model.kind not in TAN_KINDS:
            continue
        for _ in range(20):
            s = random_angle_state(rng, 3, angular_spread=2.0, min_separation=0.2, tan_margin=0.3)
            c = rng.uniform(0.05, 0.3)
            shifted = AngleState(s.theta + c, s.theta_dot)
            if np.any(np.abs(np.cos(shifted.theta)) < 0.05):
                continue
            d = np.abs(rhs_angle(model, s) - rhs_angle(model, shifted)).max()
            tan_dev = min(tan_dev, float(d))
    runtime = time.perf_counter() - start
    print(f"  covariant kinds, max |rhs(theta + c) - rhs(theta)|: {covariant_dev!r} (need exactly 0)")
    assert covariant_dev == 0.0
    report(acceptance_report, 10, "min tan-kind rhs deviation under shifts", tan_dev, 1e-6, runtime, 1.0, above=True)


if __name__ == "__main__":  # pragma: no cover
    import sys

    sys.exit(pytest.main([__file__, "-v", "-s"]))
