"""Random initial data that stays away from the singular sets.

Collisions are boundaries of phase space for every model here (including
antipodal pairs, where sin(theta_n - theta_l) also vanishes), and the
tan-derived models additionally break down at theta = +-pi/2. Draws are
rejected until they respect the requested margins; the trajectory-level
screen also rejects data whose motion approaches those sets within a horizon.
"""

from __future__ import annotations

import numpy as np

from .errors import CircleBodyError
from .geometry import AngleState
from .integrator import IntegratorConfig, integrate
from .models import TAN_KINDS, ModelSpec, angle_accel

MAX_DRAWS = 1000


class SamplingError(RuntimeError):
    pass


class _MarginBreached(Exception):
    """Raised inside the screening force to abandon a draw early."""


def min_pairwise_sin(theta) -> float:
    """min over n != l of |sin(theta_n - theta_l)|; inf for a single particle."""
    theta = np.asarray(theta, dtype=float)
    if theta.size < 2:
        return np.inf
    s = np.abs(np.sin(theta[:, None] - theta[None, :]))
    np.fill_diagonal(s, np.inf)
    return float(s.min())


def random_angle_state(
    rng,
    n,
    angular_spread=2 * np.pi,
    velocity_spread=1.0,
    min_separation=0.1,
    center=0.0,
    tan_margin=None,
    max_draws=MAX_DRAWS,
):
    """Draw theta uniform on [center - spread/2, center + spread/2] and theta_dot
    uniform on [-velocity_spread, velocity_spread].

    A draw is rejected when min |sin(theta_n - theta_l)| <= min_separation or,
    if ``tan_margin`` is given, when some |cos theta_n| <= tan_margin.
    """
    if not min_separation > 0:
        raise ValueError("min_separation must be positive")
    for _ in range(max_draws):
        theta = center + angular_spread * (rng.random(n) - 0.5)
        theta_dot = velocity_spread * (2.0 * rng.random(n) - 1.0)
        if min_pairwise_sin(theta) <= min_separation:
            continue
        if tan_margin is not None and np.any(np.abs(np.cos(theta)) <= tan_margin):
            continue
        return AngleState(theta, theta_dot)
    raise SamplingError(f"no admissible draw in {max_draws} attempts")


def trajectory_margin(model: ModelSpec, traj) -> float:
    """Smallest distance-to-singularity proxy along an angle trajectory."""
    th = traj.positions()
    margin = min(min_pairwise_sin(row) for row in th)
    if model.kind in TAN_KINDS:
        margin = min(margin, float(np.abs(np.cos(th)).min()))
    return margin


def _guarded_accel(model, q, v, margin):
    if min_pairwise_sin(q) < margin or (model.kind in TAN_KINDS and np.abs(np.cos(q)).min() < margin):
        raise _MarginBreached
    return angle_accel(model, q, v)


def draw_safe(
    model: ModelSpec,
    n,
    rng,
    t_end,
    *,
    angular_spread=2 * np.pi,
    velocity_spread=1.0,
    min_separation=0.2,
    path_margin=0.05,
    center=0.0,
    n_check=101,
    cfg=IntegratorConfig(rel_tol=1e-8, abs_tol=1e-10, max_steps=5000),
    max_draws=200,
):
    """Initial data whose angle-form motion on [0, t_end] keeps every pair at
    |sin(theta_n - theta_l)| >= path_margin (and |cos theta_n| >= path_margin
    for the tan-derived kinds).

    The screen integrates at a looser tolerance than the experiments use;
    it only has to detect close approaches. Every force evaluation checks
    the margins, so a draw heading into a collision is abandoned as soon as
    it crosses them instead of being integrated into the blow-up.
    """
    tan_margin = min_separation if model.kind in TAN_KINDS else None
    t_grid = np.linspace(0.0, t_end, n_check)
    for _ in range(max_draws):
        s = random_angle_state(
            rng, n, angular_spread, velocity_spread, min_separation, center, tan_margin
        )
        try:
            traj = integrate(lambda q, v: _guarded_accel(model, q, v, path_margin), s, t_grid, cfg)
        except (CircleBodyError, _MarginBreached):
            continue
        if trajectory_margin(model, traj) >= path_margin:
            return s
    raise SamplingError(f"no safe initial data found in {max_draws} draws")
