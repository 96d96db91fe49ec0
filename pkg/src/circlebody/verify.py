"""Self-contained randomized verification suites.

Every suite takes a seed, runs a fixed battery of checks and returns a list
of :class:`Check` records; :func:`run_suite` is what ``circlebody verify``
calls.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebraic import trajectory_algebraic
from .experiments import (
    angle_trajectory,
    angular_deviation,
    circle_angles,
    circle_trajectory,
    invariant_series,
    line_angles,
    line_trajectory,
    radius_error,
)
from .geometry import identity_residuals
from .integrator import recurrence_error
from .interp import SeedBasis, diff_matrix, interp_q, interpolate
from .models import TAN_KINDS, ModelSpec
from .sampling import draw_safe, random_angle_state

DEFAULT_SEED = 2024

# parameters shared by the suites and the acceptance tests
MU3 = np.array([1.0, 1.5, 0.7])
ETA3 = np.array([0.3, -0.2, 0.5])


@dataclass(frozen=True)
class Check:
    name: str
    value: float
    threshold: float
    upper: bool = True  # value must stay below threshold; else above

    @property
    def passed(self) -> bool:
        v = float(self.value)
        if not np.isfinite(v):
            return False
        return v < self.threshold if self.upper else v > self.threshold

    def line(self) -> str:
        rel = "<" if self.upper else ">"
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.name}: {self.value:.3e} {rel} {self.threshold:.1e}"


def six_models():
    """One representative of every concrete model kind, keyed by kind name."""
    return {
        "many_body": ModelSpec.many_body(MU3, ETA3),
        "two_body": ModelSpec.two_body(MU3, ETA3),
        "sutherland": ModelSpec.sutherland(1.0),
        "goldfish_circle": ModelSpec.goldfish_circle(0.1, -0.1, 0.2, 0.3),
        "isochronous_tan": ModelSpec.isochronous_tan(1.0),
        "goldfish_tan": ModelSpec.goldfish_tan(),
    }


def safe_state(model, rng, t_end, n=3):
    """Screened initial data; the tan-derived kinds draw within (-1, 1)."""
    spread = 2.0 if model.kind in TAN_KINDS else 2 * np.pi
    return draw_safe(model, n, rng, t_end, angular_spread=spread)


# --- suites -----------------------------------------------------------------


def suite_interp(seed=DEFAULT_SEED):
    rng = np.random.default_rng(seed)
    kron = 0.0
    for i in range(100):
        n = 2 + i % 9
        th = random_angle_state(rng, n, min_separation=0.05).theta
        basis = SeedBasis(n)
        q = np.array([[interp_q(basis, th, a + 1, th[b]) for b in range(n)] for a in range(n)])
        kron = max(kron, float(np.abs(q - np.eye(n)).max()))

    exact = 0.0
    for n in range(1, 9):
        basis = SeedBasis(n)
        for _ in range(10):
            th = random_angle_state(rng, n, min_separation=0.1).theta
            h = rng.normal(size=n) + 1j * rng.normal(size=n)
            m = basis.matrix(th)
            f, fp = m @ h, m @ (1j * basis.exponents * h)
            if n == 1:
                exact = max(exact, float(np.abs(diff_matrix(th) @ f - fp).max()))
            else:
                err = np.abs(diff_matrix(th) @ f - fp).max() / np.abs(fp).max()
                exact = max(exact, float(err))

    real = 0.0
    for n in range(2, 9):
        basis = SeedBasis(n)
        th = random_angle_state(rng, n, min_separation=0.1).theta
        vals = rng.normal(size=n)
        for x in rng.uniform(-np.pi, np.pi, size=5):
            real = max(real, abs(interpolate(basis, th, vals, x).imag))
    return [
        Check("kronecker", kron, 1e-12),
        Check("diff_matrix_exactness", exact, 1e-10),
        Check("real_interpolant", real, 1e-12),
    ]


def suite_identities(seed=DEFAULT_SEED, n_states=10_000):
    rng = np.random.default_rng(seed)
    worst = {}
    sizes = 2 + np.arange(n_states) % 4
    for n in np.unique(sizes):
        states = [
            random_angle_state(rng, n, min_separation=0.05, tan_margin=0.05)
            for _ in range(int(np.count_nonzero(sizes == n)))
        ]
        th = np.array([s.theta for s in states])
        thd = np.array([s.theta_dot for s in states])
        thdd = rng.uniform(-1.0, 1.0, size=th.shape)
        for name, val in identity_residuals(th, thd, thdd).items():
            worst[name] = max(worst.get(name, 0.0), val)
    return [Check(f"identity_{k}", v, 1e-12) for k, v in sorted(worst.items())]


def suite_equivalence(seed=DEFAULT_SEED, t_end=5.0):
    rng = np.random.default_rng(seed)
    t_grid = np.linspace(0.0, t_end, 51)
    checks = []
    for name, model in six_models().items():
        s = safe_state(model, rng, t_end)
        ta = angle_trajectory(model, s, t_grid)
        tc = circle_trajectory(model, s, t_grid)
        checks.append(Check(f"{name}_angle_vs_vector", angular_deviation(ta.positions(), circle_angles(tc)), 1e-7))
        checks.append(Check(f"{name}_radius_error", radius_error(tc), 1e-9))
        if model.kind in TAN_KINDS:
            tl = line_trajectory(model, s, t_grid)
            dev = angular_deviation(ta.positions(), line_angles(tl), modulus=np.pi)
            checks.append(Check(f"{name}_angle_vs_line", dev, 1e-7))
    return checks


def suite_invariants(seed=DEFAULT_SEED):
    rng = np.random.default_rng(seed)
    models = six_models()
    checks = []
    t_grid = np.linspace(0.0, 5.0, 51)
    for name in ("many_body", "two_body"):
        model = models[name]
        s = safe_state(model, rng, 5.0)
        _, _, drift = invariant_series(model, angle_trajectory(model, s, t_grid).states)
        checks.append(Check(f"{name}_h_drift", float(drift.max()), 1e-6))
        tc = circle_trajectory(model, s, t_grid)
        checks.append(Check(f"{name}_vector_radius_error", radius_error(tc), 1e-9))
    model = models["sutherland"]
    t_grid = np.linspace(0.0, 10.0, 101)
    # moderate-energy data: close approaches make the energy error grow
    s = draw_safe(model, 3, rng, 10.0, min_separation=0.5)
    _, values, _ = invariant_series(model, angle_trajectory(model, s, t_grid).states)
    checks.append(Check("sutherland_P_drift", float(np.abs(values[:, 0] - values[0, 0]).max()), 1e-8))
    checks.append(Check("sutherland_E_drift", float(np.abs(values[:, 1] - values[0, 1]).max()), 1e-8))
    return checks


def isochrony_grid(period=np.pi, window=0.5, n=6):
    """Sample times covering [0, window] and the same window one period later."""
    base = np.linspace(0.0, window, n)
    return np.concatenate([base, period + base])


def suite_isochrony(seed=DEFAULT_SEED, n_initial=20):
    rng = np.random.default_rng(seed)
    model = ModelSpec.isochronous_tan(1.0)
    t_grid = isochrony_grid()
    worst = 0.0
    for _ in range(n_initial):
        s = random_angle_state(rng, 3, angular_spread=2.0, min_separation=0.2, tan_margin=0.2)
        worst = max(worst, recurrence_error(angle_trajectory(model, s, t_grid), np.pi, modulus=np.pi))
    control = ModelSpec.sutherland(1.0)
    s = random_angle_state(rng, 3, min_separation=0.2)
    ctrl = recurrence_error(angle_trajectory(control, s, t_grid), np.pi)
    return [
        Check("isochronous_tan_recurrence_pi", worst, 1e-6),
        Check("sutherland_control_recurrence_pi", ctrl, 1e-2, upper=False),
    ]


def suite_algebraic(seed=DEFAULT_SEED):
    rng = np.random.default_rng(seed)
    t_grid = np.linspace(0.0, 1.0, 21)
    cases = {
        2: (np.array([1.0, 1.7]), np.array([0.4, -0.3])),
        3: (MU3, ETA3),
    }
    checks = []
    for n, (mu, eta) in cases.items():
        model = ModelSpec.many_body(mu, eta)
        s = safe_state(model, rng, 1.0, n=n)
        alg = trajectory_algebraic(model, s, t_grid).positions()
        num = angle_trajectory(model, s, t_grid).positions()
        checks.append(Check(f"many_body_N{n}_algebraic_vs_numeric", angular_deviation(alg, num), 1e-6))
    return checks


SUITES = {
    "interp": suite_interp,
    "identities": suite_identities,
    "equivalence": suite_equivalence,
    "invariants": suite_invariants,
    "isochrony": suite_isochrony,
    "algebraic": suite_algebraic,
}


def run_suite(name: str, seed=DEFAULT_SEED) -> list[Check]:
    try:
        suite = SUITES[name]
    except KeyError:
        raise ValueError(f"unknown suite {name!r}; choose from {', '.join(SUITES)}") from None
    return suite(seed)
