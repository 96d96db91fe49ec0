"""Adaptive explicit Runge-Kutta integration of Newtonian systems.

The stepper is the Dormand-Prince 5(4) pair (FSAL, 7 stages) with the
free 4th-order continuous extension, so samples are produced at exactly the
requested times without shortening steps. Step size follows a
proportional-integral controller.

Second-order systems q'' = a(q, q') are integrated as the doubled
first-order system (q, v)' = (v, a(q, v)).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    DegenerateVector,
    GridMismatch,
    SingularityEncountered,
    SingularityError,
    StepLimitExceeded,
)
from .geometry import AngleState, CircleState

# Dormand & Prince (1980) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = [
    np.array([]),
    np.array([1 / 5]),
    np.array([3 / 40, 9 / 40]),
    np.array([44 / 45, -56 / 15, 32 / 9]),
    np.array([19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729]),
    np.array([9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656]),
]
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_E = np.array(
    [71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40]
)
# continuous extension: y(t + s h) = y + h K^T (P @ [s, s^2, s^3, s^4])
_P = np.array(
    [
        [1.0, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
        [0.0, 0.0, 0.0, 0.0],
        [0.0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
        [0.0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
        [0.0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
        [0.0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
        [0.0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
    ]
)
ORDER = 5

# PI controller constants (Hairer, Norsett & Wanner, DOPRI5)
_BETA = 0.04
_EXPO = 1.0 / ORDER - 0.75 * _BETA
_SAFETY = 0.9
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0

SINGULARITY_RESOLUTION = 1e-9


class Projection(str, enum.Enum):
    OFF = "off"
    RENORMALIZE = "renormalize"


@dataclass(frozen=True)
class IntegratorConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_step: float = math.inf
    max_steps: int = 1_000_000
    projection: Projection = Projection.OFF

    def __post_init__(self):
        object.__setattr__(self, "projection", Projection(self.projection))
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if not self.max_step > 0:
            raise ValueError("max_step must be positive")
        if int(self.max_steps) != self.max_steps or self.max_steps < 1:
            raise ValueError("max_steps must be an integer >= 1")


@dataclass
class StepStats:
    n_accepted: int = 0
    n_rejected: int = 0
    n_evals: int = 0


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    states: list
    constraint_residual: np.ndarray
    stats: StepStats = field(default_factory=StepStats)

    def __post_init__(self):
        if len(self.times) != len(self.states):
            raise ValueError("times and states differ in length")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    @property
    def diagnostics(self) -> dict:
        return {
            "max_constraint_residual": float(np.max(self.constraint_residual, initial=0.0)),
            "n_accepted": self.stats.n_accepted,
            "n_rejected": self.stats.n_rejected,
            "n_evals": self.stats.n_evals,
        }

    def positions(self) -> np.ndarray:
        return np.array([s.arrays()[0] for s in self.states])

    def velocities(self) -> np.ndarray:
        return np.array([s.arrays()[1] for s in self.states])


def _rms(x):
    return math.sqrt(float(np.mean(x * x)))


def _initial_step(f, t0, y0, f0, rtol, atol, direction_end):
    scale = atol + rtol * np.abs(y0)
    d0, d1 = _rms(y0 / scale), _rms(f0 / scale)
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, direction_end)
    try:
        f1 = f(t0 + h0, y0 + h0 * f0)
    except SingularityError:
        return h0
    d2 = _rms((f1 - f0) / scale) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / ORDER)
    return min(100 * h0, h1, direction_end)


def integrate_first_order(f, y0, t_grid, cfg: IntegratorConfig = IntegratorConfig(), post_step=None):
    """Integrate y' = f(t, y) and sample at ``t_grid``.

    Parameters
    ----------
    f : callable
        ``f(t, y) -> dy/dt`` on flat float arrays. May raise
        :class:`~circlebody.errors.SingularityError`.
    y0 : array_like
    t_grid : array_like
        Strictly increasing sample times starting at the initial time.
    cfg : IntegratorConfig
    post_step : callable, optional
        Applied to y after every accepted step (e.g. a projection).

    Returns
    -------
    ys : ndarray, shape (len(t_grid), y0.size)
    stats : StepStats

    Raises
    ------
    SingularityEncountered
        When ``f`` keeps failing and the singular time has been localized
        to within 1e-9, or the step size underflows.
    StepLimitExceeded
        After ``cfg.max_steps`` accepted steps.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size < 1:
        raise ValueError("t_grid must be a non-empty 1-d array")
    if np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must be strictly increasing")
    y = np.array(y0, dtype=float).ravel()
    stats = StepStats()
    out = np.empty((t_grid.size, y.size))
    out[0] = y
    t = float(t_grid[0])
    t_end = float(t_grid[-1])
    if t_grid.size == 1:
        return out, stats

    def call(tt, yy):
        stats.n_evals += 1
        val = f(tt, yy)
        if not np.all(np.isfinite(val)):
            raise SingularityError(f"non-finite derivative at t={tt:.17g}")
        return val

    rtol, atol = cfg.rel_tol, cfg.abs_tol
    try:
        k0 = call(t, y)
    except SingularityError as exc:
        raise SingularityEncountered(f"singular initial state: {exc}", t) from exc

    h = min(_initial_step(call, t, y, k0, rtol, atol, t_end - t), cfg.max_step)
    K = np.empty((7, y.size))
    fac_old = 1e-4
    last_rejected = False
    t_bad = math.inf  # earliest time known to hit a singularity
    next_sample = 1

    while next_sample < t_grid.size:
        if stats.n_accepted >= cfg.max_steps:
            raise StepLimitExceeded(f"max_steps={cfg.max_steps} reached at t={t:.17g}")
        if t_bad - t <= SINGULARITY_RESOLUTION:
            raise SingularityEncountered(f"singularity localized at t={t:.12g}", t)
        h = min(h, cfg.max_step, t_end - t)
        if t_bad < math.inf:
            h = min(h, 0.5 * (t_bad - t))
        if h <= 1e-14 * max(1.0, abs(t)):
            raise SingularityEncountered(f"step size underflow at t={t:.12g}", t)

        K[0] = k0
        try:
            for i in range(1, 6):
                K[i] = call(t + _C[i] * h, y + h * (_A[i] @ K[:i]))
            y_new = y + h * (_B[:6] @ K[:6])
            K[6] = call(t + h, y_new)
        except SingularityError:
            t_bad = min(t_bad, t + h)
            stats.n_rejected += 1
            last_rejected = True
            continue

        scale = atol + rtol * np.maximum(np.abs(y), np.abs(y_new))
        err = _rms(h * (_E @ K) / scale)
        fac11 = err**_EXPO
        if err <= 1.0:
            t_new = t + h
            if t_end - t_new <= 1e-13 * max(1.0, abs(t_end)):
                t_new = t_end
            if post_step is not None:
                y_new = post_step(y_new)
            # dense output for samples inside (t, t_new]
            while next_sample < t_grid.size and t_grid[next_sample] <= t_new:
                ts = t_grid[next_sample]
                if ts == t_new:
                    out[next_sample] = y_new
                else:
                    s = (ts - t) / h
                    q = K.T @ (_P @ np.array([s, s * s, s**3, s**4]))
                    out[next_sample] = y + h * q
                    if post_step is not None:
                        out[next_sample] = post_step(out[next_sample])
                next_sample += 1
            stats.n_accepted += 1
            fac = fac11 / fac_old**_BETA
            fac = min(1.0 / _MIN_FACTOR, max(1.0 / _MAX_FACTOR, fac / _SAFETY))
            h_new = h / fac
            if last_rejected:
                h_new = min(h_new, h)
            fac_old = max(err, 1e-4)
            last_rejected = False
            t, y = t_new, y_new
            if post_step is not None:
                # the projected endpoint breaks FSAL: re-evaluate there
                if next_sample < t_grid.size:
                    try:
                        k0 = call(t, y)
                    except SingularityError as exc:
                        raise SingularityEncountered(str(exc), t) from exc
            else:
                k0 = K[6].copy()
            h = h_new
        else:
            stats.n_rejected += 1
            last_rejected = True
            h = h / min(1.0 / _MIN_FACTOR, fac11 / _SAFETY)
    return out, stats


def project_unit_circle(c: CircleState) -> CircleState:
    """Normalize positions and remove the radial part of velocities.

    Raises
    ------
    DegenerateVector
        If some |r_n| <= 0.5.
    """
    r, v = _project_arrays(c.r, c.r_dot)
    return CircleState(r, v)


def _project_arrays(r, v):
    norm = np.linalg.norm(r, axis=1)
    if np.any(norm <= 0.5):
        raise DegenerateVector("cannot project a position with |r| <= 0.5")
    r = r / norm[:, None]
    v = v - np.einsum("ij,ij->i", v, r)[:, None] * r
    return r, v


def _constraint_residual(state):
    if isinstance(state, CircleState):
        return state.constraint_residual()
    return 0.0


def integrate(accel, s0, t_grid, cfg: IntegratorConfig = IntegratorConfig()) -> Trajectory:
    """Integrate a Newtonian system q'' = accel(q, q') from state ``s0``.

    Parameters
    ----------
    accel : callable
        ``accel(q, v) -> a`` on arrays shaped like the state's positions.
    s0 : AngleState, CircleState or LineState
    t_grid : array_like
        Sample times, strictly increasing, starting at 0.
    cfg : IntegratorConfig
        ``projection=renormalize`` only affects circle states.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size == 0 or t_grid[0] != 0.0:
        raise ValueError("t_grid must be non-empty and start at 0")
    q0, v0 = s0.arrays()
    shape = q0.shape
    size = q0.size

    def f(t, y):
        q = y[:size].reshape(shape)
        v = y[size:].reshape(shape)
        return np.concatenate([y[size:], np.ravel(accel(q, v))])

    post = None
    if isinstance(s0, CircleState) and cfg.projection is Projection.RENORMALIZE:

        def post(y):
            r, v = _project_arrays(y[:size].reshape(shape), y[size:].reshape(shape))
            return np.concatenate([r.ravel(), v.ravel()])

    ys, stats = integrate_first_order(f, np.concatenate([q0.ravel(), v0.ravel()]), t_grid, cfg, post)
    cls = type(s0)
    states = [cls.from_arrays(y[:size].reshape(shape), y[size:].reshape(shape)) for y in ys]
    resid = np.array([_constraint_residual(s) for s in states])
    return Trajectory(t_grid.copy(), states, resid, stats)


def _state_distance(a, b, modulus):
    qa, va = a.arrays()
    qb, vb = b.arrays()
    dq = qa - qb
    if isinstance(a, AngleState) and modulus is not None:
        dq = np.mod(dq + 0.5 * modulus, modulus) - 0.5 * modulus
    return max(float(np.abs(dq).max()), float(np.abs(va - vb).max()))


def recurrence_error(traj: Trajectory, period: float, modulus: float | None = 2 * np.pi) -> float:
    """Largest state difference between samples at t and t + period.

    Angles are compared modulo ``modulus`` (2 pi by default; pass pi for
    states of the tan-derived models, which are defined mod pi). Velocities
    and non-angle coordinates are compared directly.

    Raises
    ------
    GridMismatch
        If no sample time t has a partner t + period on the grid.
    """
    times = traj.times
    worst = None
    for i, t in enumerate(times):
        target = t + period
        j = int(np.searchsorted(times, target))
        for jj in (j - 1, j):
            if 0 <= jj < times.size and abs(times[jj] - target) <= 1e-9 * max(1.0, abs(target)):
                d = _state_distance(traj.states[i], traj.states[jj], modulus)
                worst = d if worst is None else max(worst, d)
                break
    if worst is None:
        raise GridMismatch(f"no sample pairs separated by period {period!r}")
    return worst
