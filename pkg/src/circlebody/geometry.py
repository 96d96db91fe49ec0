"""State representations for points on the unit circle and conversions
between them.

Three equivalent descriptions of N particles are used throughout:

* ``AngleState``  -- angles theta_n and angular velocities,
* ``CircleState`` -- planar unit vectors r_n = (cos theta_n, sin theta_n) with
  tangent velocities,
* ``LineState``   -- line coordinates z_n = tan theta_n.

Vectors live in the plane; every wedge product with the out-of-plane unit
vector is reduced to the scalar cross product a_x b_y - a_y b_x.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CollisionSingularity, ConstraintViolation, TangentSingularity

INPUT_CONSTRAINT_TOL = 1e-9
TANGENT_TOL = 1e-9
IDENTITY_GUARD = 1e-6


def _frozen(a, dtype=float):
    out = np.array(a, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


def cross2(a, b):
    """Scalar cross product of planar vectors along the last axis."""
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def perp(a):
    """Rotate planar vectors by +pi/2, i.e. z_hat ^ a."""
    return np.stack([-a[..., 1], a[..., 0]], axis=-1)


def wrap_angle(x):
    """Map angles to (-pi, pi]."""
    y = np.mod(np.asarray(x, dtype=float) + np.pi, 2.0 * np.pi) - np.pi
    return np.where(y == -np.pi, np.pi, y)


@dataclass(frozen=True)
class AngleState:
    theta: np.ndarray
    theta_dot: np.ndarray

    def __post_init__(self):
        theta = _frozen(np.atleast_1d(self.theta))
        theta_dot = _frozen(np.atleast_1d(self.theta_dot))
        if theta.ndim != 1 or theta.shape != theta_dot.shape or theta.size < 1:
            raise ValueError("theta and theta_dot must be 1-d of equal length >= 1")
        if not (np.all(np.isfinite(theta)) and np.all(np.isfinite(theta_dot))):
            raise ValueError("angle state entries must be finite")
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "theta_dot", theta_dot)

    @property
    def n(self) -> int:
        return self.theta.size

    def arrays(self):
        return self.theta, self.theta_dot

    @classmethod
    def from_arrays(cls, q, v):
        return cls(q, v)


@dataclass(frozen=True)
class CircleState:
    """Positions ``r`` and velocities ``r_dot``, both of shape (N, 2).

    Construction does not enforce the unit-circle constraint, since states
    produced by an integrator drift slightly; use :meth:`constraint_residual`
    or :func:`circle_to_angle` for checked access.
    """

    r: np.ndarray
    r_dot: np.ndarray

    def __post_init__(self):
        r = _frozen(np.reshape(self.r, (-1, 2)))
        r_dot = _frozen(np.reshape(self.r_dot, (-1, 2)))
        if r.shape != r_dot.shape or r.shape[0] < 1:
            raise ValueError("r and r_dot must both have shape (N, 2), N >= 1")
        if not (np.all(np.isfinite(r)) and np.all(np.isfinite(r_dot))):
            raise ValueError("circle state entries must be finite")
        object.__setattr__(self, "r", r)
        object.__setattr__(self, "r_dot", r_dot)

    @property
    def n(self) -> int:
        return self.r.shape[0]

    def arrays(self):
        return self.r, self.r_dot

    @classmethod
    def from_arrays(cls, q, v):
        return cls(q, v)

    def constraint_residual(self) -> float:
        """Largest violation of |r_n|^2 = 1 and r_n . r_dot_n = 0."""
        norm = np.abs(np.einsum("ij,ij->i", self.r, self.r) - 1.0)
        tang = np.abs(np.einsum("ij,ij->i", self.r, self.r_dot))
        return float(max(norm.max(), tang.max()))

    def radius_error(self) -> float:
        """max_n | |r_n| - 1 |."""
        return float(np.abs(np.linalg.norm(self.r, axis=1) - 1.0).max())


@dataclass(frozen=True)
class LineState:
    z: np.ndarray
    z_dot: np.ndarray

    def __post_init__(self):
        z = _frozen(np.atleast_1d(self.z))
        z_dot = _frozen(np.atleast_1d(self.z_dot))
        if z.ndim != 1 or z.shape != z_dot.shape or z.size < 1:
            raise ValueError("z and z_dot must be 1-d of equal length >= 1")
        if not (np.all(np.isfinite(z)) and np.all(np.isfinite(z_dot))):
            raise ValueError("line state entries must be finite")
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "z_dot", z_dot)

    @property
    def n(self) -> int:
        return self.z.size

    def arrays(self):
        return self.z, self.z_dot

    @classmethod
    def from_arrays(cls, q, v):
        return cls(q, v)


def angle_to_circle(s: AngleState) -> CircleState:
    c, sn = np.cos(s.theta), np.sin(s.theta)
    r = np.stack([c, sn], axis=1)
    r_dot = s.theta_dot[:, None] * np.stack([-sn, c], axis=1)
    return CircleState(r, r_dot)


def circle_to_angle(c: CircleState) -> AngleState:
    """Recover angles in (-pi, pi] and angular velocities from a circle state.

    Raises
    ------
    ConstraintViolation
        If some |x_n^2 + y_n^2 - 1| exceeds 1e-9.
    """
    norm2 = np.einsum("ij,ij->i", c.r, c.r)
    bad = np.abs(norm2 - 1.0) > INPUT_CONSTRAINT_TOL
    if np.any(bad):
        n = int(np.flatnonzero(bad)[0])
        raise ConstraintViolation(
            f"particle {n + 1} has |r|^2 - 1 = {norm2[n] - 1.0:.3e}"
        )
    theta = wrap_angle(np.arctan2(c.r[:, 1], c.r[:, 0]))
    theta_dot = cross2(c.r, c.r_dot)
    return AngleState(theta, theta_dot)


def _check_tangent(theta, tol=TANGENT_TOL):
    cos = np.cos(theta)
    bad = np.abs(cos) <= tol
    if np.any(bad):
        n = int(np.flatnonzero(bad)[0])
        raise TangentSingularity(
            f"particle {n + 1} at theta={theta[n]!r} is within {tol:g} of pi/2 mod pi"
        )
    return cos


def angle_to_line(s: AngleState) -> LineState:
    cos = _check_tangent(s.theta)
    return LineState(np.tan(s.theta), s.theta_dot / cos**2)


def line_to_angle(l: LineState) -> AngleState:
    """Principal-branch inverse of :func:`angle_to_line`, theta in (-pi/2, pi/2)."""
    theta = np.arctan(l.z)
    return AngleState(theta, l.z_dot * np.cos(theta) ** 2)


def _pairwise_sin(theta):
    return np.sin(theta[:, None] - theta[None, :])


def verify_identities(s: AngleState, theta_ddot=None, include_tan=True):
    """Evaluate both sides of the kinematic identities at a state.

    The left-hand sides are built from 3-vectors with ``numpy.cross`` and from
    the line coordinates via z_dot = theta_dot (1 + z^2); the right-hand sides
    are the closed-form trigonometric expressions. Angular accelerations are
    free inputs since the identities are model independent.

    Parameters
    ----------
    s : AngleState
    theta_ddot : array_like, optional
        Angular accelerations; zeros if omitted.
    include_tan : bool
        Also check the identities involving z_n = tan theta_n.

    Returns
    -------
    dict
        Identity name -> max residual |lhs - rhs| / max(1, |rhs|) over particles
        (or ordered pairs of distinct particles).

    Raises
    ------
    CollisionSingularity, TangentSingularity
        When a pair has |sin(theta_n - theta_m)| <= 1e-6 or (with
        ``include_tan``) some |cos theta_n| <= 1e-6.
    """
    thdd = None if theta_ddot is None else np.asarray(theta_ddot, dtype=float)[None]
    if thdd is not None and thdd.shape[1:] != s.theta.shape:
        raise ValueError("theta_ddot must match theta in shape")
    return identity_residuals(s.theta[None], s.theta_dot[None], thdd, include_tan)


def identity_residuals(theta, theta_dot, theta_ddot=None, include_tan=True):
    """Batched :func:`verify_identities` over states stacked as (B, N) arrays.

    Returns the worst residual of each identity over the whole batch.
    """
    th = np.atleast_2d(np.asarray(theta, dtype=float))
    thd = np.atleast_2d(np.asarray(theta_dot, dtype=float))
    thdd = np.zeros_like(th) if theta_ddot is None else np.atleast_2d(np.asarray(theta_ddot, dtype=float))
    if not th.shape == thd.shape == thdd.shape:
        raise ValueError("theta, theta_dot and theta_ddot must share a shape")
    n = th.shape[1]

    zhat = np.array([0.0, 0.0, 1.0])
    zeros = np.zeros_like(th)
    r = np.stack([np.cos(th), np.sin(th), zeros], axis=-1)
    t_hat = np.cross(zhat, r)
    rd = thd[..., None] * t_hat
    rdd = thdd[..., None] * t_hat - (thd**2)[..., None] * r

    res = {}

    def record(name, lhs, rhs):
        lhs = np.asarray(lhs, dtype=float)
        rhs = np.asarray(rhs, dtype=float)
        scale = np.maximum(1.0, np.abs(rhs))
        val = float(np.max(np.abs(lhs - rhs) / scale)) if lhs.size else 0.0
        res[name] = max(res.get(name, 0.0), val)

    dot = lambda a, b: np.einsum("...k,...k->...", a, b)
    outer = lambda a, b: a[..., :, None] * b[..., None, :]

    # single-particle identities
    record("r.r = 1", dot(r, r), np.ones_like(th))
    record("z^r = (-sin, cos)", t_hat[..., :2], np.stack([-np.sin(th), np.cos(th)], -1))
    record("rdot.r = 0", dot(rd, r), zeros)
    record("rdot.rdot = thdot^2", dot(rd, rd), thd**2)
    record("(r^rdot).z = thdot", dot(np.cross(r, rd), zhat), thd)
    record("rddot.r = -thdot^2", dot(rdd, r), -(thd**2))
    record("rddot.(z^r) = thddot", dot(rdd, t_hat), thdd)
    record("z^rdot = -thdot r", np.cross(zhat, rd), -thd[..., None] * r)
    record(
        "z^rddot = -thddot r - thdot^2 z^r",
        np.cross(zhat, rdd),
        -thdd[..., None] * r - (thd**2)[..., None] * t_hat,
    )

    off = ~np.eye(n, dtype=bool)
    pairs = lambda a: np.asarray(a)[..., off]
    if n >= 2:
        diff = th[..., :, None] - th[..., None, :]
        sin_nm, cos_nm = np.sin(diff), np.cos(diff)
        if np.any(np.abs(pairs(sin_nm)) <= IDENTITY_GUARD):
            raise CollisionSingularity("pair of particles within 1e-6 of collision")
        rn, rm = r[..., :, None, :], r[..., None, :, :]
        rdn, rdm = rd[..., :, None, :], rd[..., None, :, :]
        record("r_n.r_m = cos", pairs(dot(rn, rm)), pairs(cos_nm))
        record(
            "(z^r_m).r_n = (r_m^r_n).z = sin",
            pairs(dot(np.cross(zhat, rm), rn)),
            pairs(sin_nm),
        )
        record(
            "(z^r_m).r_n = (r_m^r_n).z = sin",
            pairs(dot(np.cross(rm, rn), zhat)),
            pairs(sin_nm),
        )
        record("rdot_n.r_m = -thdot_n sin", pairs(dot(rdn, rm)), pairs(-thd[..., :, None] * sin_nm))
        record(
            "rdot_n.rdot_m = thdot_n thdot_m cos",
            pairs(dot(rdn, rdm)),
            pairs(outer(thd, thd) * cos_nm),
        )
        record(
            "(rdot_n^r_m).z = -thdot_n cos",
            pairs(dot(np.cross(rdn, rm), zhat)),
            pairs(-thd[..., :, None] * cos_nm),
        )
        record(
            "(rdot_n^rdot_m).z = -thdot_n thdot_m sin",
            pairs(dot(np.cross(rdn, rdm), zhat)),
            pairs(-outer(thd, thd) * sin_nm),
        )

    if include_tan:
        c = np.cos(th)
        if np.any(np.abs(c) <= IDENTITY_GUARD):
            raise TangentSingularity("particle within 1e-6 of pi/2 mod pi")
        sn = np.sin(th)
        z = np.tan(th)
        zd = thd * (1.0 + z**2)
        zdd = thdd * (1.0 + z**2) + 2.0 * z * zd * thd
        record("zdot = thdot / cos^2", zd, thd / c**2)
        record("zddot = thddot/cos^2 + 2 thdot^2 sin/cos^3", zdd, thdd / c**2 + 2 * thd**2 * sn / c**3)
        record("zddot = (thddot + 2 thdot^2 tan)/cos^2", zdd, (thdd + 2 * thd**2 * np.tan(th)) / c**2)
        if n >= 2:
            cc = outer(c, c)
            dz = pairs(z[..., :, None] - z[..., None, :])
            s_p = pairs(sin_nm)
            cc_p = pairs(cc)
            zd_z = pairs(outer(zd, z))
            zd_zd = pairs(outer(zd, zd))
            record("z_n - z_m = sin/(cos cos)", dz, s_p / cc_p)
            record("1/(z_n - z_m) = cos cos/sin", 1.0 / dz, cc_p / s_p)
            record(
                "zdot_n z_m = thdot_n sin_m/(cos_n^2 cos_m)",
                zd_z,
                pairs(outer(thd / c**2, sn / c)),
            )
            record(
                "zdot_n zdot_m = thdot thdot/(cos^2 cos^2)",
                zd_zd,
                pairs(outer(thd / c**2, thd / c**2)),
            )
            den_t = cc_p * s_p
            record(
                "(zdot_n + zdot_m)/(z_n - z_m)",
                pairs(zd[..., :, None] + zd[..., None, :]) / dz,
                pairs(thd[..., :, None] * (c**2)[..., None, :] + thd[..., None, :] * (c**2)[..., :, None]) / den_t,
            )
            record(
                "(zdot_n z_m + zdot_m z_n)/(z_n - z_m)",
                (zd_z + pairs(outer(z, zd))) / dz,
                pairs(thd[..., :, None] * (sn * c)[..., None, :] + thd[..., None, :] * (sn * c)[..., :, None])
                / den_t,
            )
            record(
                "zdot_n zdot_m/(z_n - z_m)",
                zd_zd / dz,
                pairs(outer(thd, thd)) / den_t,
            )
    return res
