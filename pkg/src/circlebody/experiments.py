"""Trajectory helpers shared by the verification suites and the CLI."""

from __future__ import annotations

import numpy as np

from .geometry import AngleState, angle_to_circle, angle_to_line, line_to_angle
from .integrator import IntegratorConfig, Trajectory, integrate
from .models import (
    INTERPOLATION_KINDS,
    ModelKind,
    ModelSpec,
    angle_accel,
    circle_accel,
    constants_of_motion,
    line_accel,
    momentum_energy_oracle,
)


def angle_trajectory(model: ModelSpec, s0: AngleState, t_grid, cfg=IntegratorConfig()) -> Trajectory:
    return integrate(lambda q, v: angle_accel(model, q, v), s0, t_grid, cfg)


def circle_trajectory(model: ModelSpec, s0: AngleState, t_grid, cfg=IntegratorConfig()) -> Trajectory:
    return integrate(lambda q, v: circle_accel(model, q, v), angle_to_circle(s0), t_grid, cfg)


def line_trajectory(model: ModelSpec, s0: AngleState, t_grid, cfg=IntegratorConfig()) -> Trajectory:
    return integrate(lambda q, v: line_accel(model, q, v), angle_to_line(s0), t_grid, cfg)


def circle_angles(traj: Trajectory, theta0=None) -> np.ndarray:
    """Continuous angles (T, N) of a circle trajectory, unwrapped in time.

    If ``theta0`` is given the first row is shifted onto it by multiples of 2 pi.
    """
    r = traj.positions()
    th = np.unwrap(np.arctan2(r[..., 1], r[..., 0]), axis=0)
    if theta0 is not None:
        th = th + 2 * np.pi * np.round((np.asarray(theta0) - th[0]) / (2 * np.pi))
    return th


def circle_angle_velocities(traj: Trajectory) -> np.ndarray:
    r, v = traj.positions(), traj.velocities()
    return r[..., 0] * v[..., 1] - r[..., 1] * v[..., 0]


def line_angles(traj: Trajectory) -> np.ndarray:
    return np.array([line_to_angle(s).theta for s in traj.states])


def angular_deviation(a, b, modulus=2 * np.pi) -> float:
    d = np.asarray(a) - np.asarray(b)
    d = np.mod(d + 0.5 * modulus, modulus) - 0.5 * modulus
    return float(np.abs(d).max()) if d.size else 0.0


def radius_error(traj: Trajectory) -> float:
    return max(s.radius_error() for s in traj.states)


def invariant_series(model: ModelSpec, states):
    """Conserved quantities along a sequence of angle states.

    Returns ``(names, values, drift)`` where ``values`` is (T, k) real and
    ``drift`` is the per-sample relative change from the first sample, or
    None when the model kind has no conserved quantity implemented.
    """
    if model.kind in INTERPOLATION_KINDS:
        h = np.array([constants_of_motion(model, s).h for s in states])
        n = h.shape[1]
        names = [f"{p}_h_{m + 1}" for m in range(n) for p in ("re", "im")]
        values = np.empty((h.shape[0], 2 * n))
        values[:, 0::2] = h.real
        values[:, 1::2] = h.imag
        drift = (np.abs(h - h[0]) / (1.0 + np.abs(h[0]))).max(axis=1)
        return names, values, drift
    if model.kind is ModelKind.SUTHERLAND:
        values = np.array([momentum_energy_oracle(model, s) for s in states])
        drift = np.abs(values - values[0]).max(axis=1)
        return ["P", "E"], values, drift
    return None
