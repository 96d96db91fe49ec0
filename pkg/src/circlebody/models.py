"""Equations of motion for N particles on the unit circle.

Six models are available, each in angle form (``rhs_angle``) and in planar
vector form (``rhs_circle``):

=================  ==========================================================
kind               angle-form acceleration
=================  ==========================================================
many_body          interpolation model with rho_n = mu_n, gamma_n = eta_n
two_body           interpolation model with rho_n = mu_n sigma_n,
                   gamma_n = eta_n sigma_n
sutherland         g^2 sum cos(d)/sin^3(d)
goldfish_circle    g0 + g1 thd_n + sum [2 thd_n thd_l + g2 (thd_n + thd_l) + g3] cot(d)
isochronous_tan    image of z'' = -4 z + g^2 sum (z_n - z_l)^-3 under z = tan(theta)
goldfish_tan       image of z'' = -z + sum (2 z'_n z'_l + 1)/(z_n - z_l)
=================  ==========================================================

with d = theta_n - theta_l. ``general_interp`` accepts arbitrary rho/gamma
callbacks with their Jacobians. The two tan-derived kinds also have a line
form (``rhs_line``) in the original z variables.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import (
    CollisionSingularity,
    ConstraintViolation,
    TangentSingularity,
    WrongKind,
    ZeroMass,
)
from .geometry import INPUT_CONSTRAINT_TOL, TANGENT_TOL, AngleState, CircleState, LineState, cross2, perp
from .interp import COLLISION_TOL, SeedBasis, _diff_matrix, check_collisions, sigmas


class ModelKind(str, enum.Enum):
    MANY_BODY = "many_body"
    TWO_BODY = "two_body"
    SUTHERLAND = "sutherland"
    GOLDFISH_CIRCLE = "goldfish_circle"
    ISOCHRONOUS_TAN = "isochronous_tan"
    GOLDFISH_TAN = "goldfish_tan"
    GENERAL_INTERP = "general_interp"


INTERPOLATION_KINDS = frozenset({ModelKind.MANY_BODY, ModelKind.TWO_BODY, ModelKind.GENERAL_INTERP})
TAN_KINDS = frozenset({ModelKind.ISOCHRONOUS_TAN, ModelKind.GOLDFISH_TAN})
ROTATION_COVARIANT_KINDS = frozenset(
    {ModelKind.MANY_BODY, ModelKind.TWO_BODY, ModelKind.SUTHERLAND, ModelKind.GOLDFISH_CIRCLE}
)


@dataclass(frozen=True)
class GeneralInterp:
    """rho_n(theta), gamma_n(theta) and their Jacobians d rho_n / d theta_m."""

    rho: Callable[[np.ndarray], np.ndarray]
    gamma: Callable[[np.ndarray], np.ndarray]
    drho: Callable[[np.ndarray], np.ndarray]
    dgamma: Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ModelSpec:
    kind: ModelKind
    mu: Optional[np.ndarray] = None
    eta: Optional[np.ndarray] = None
    g: float = 0.0
    g0: float = 0.0
    g1: float = 0.0
    g2: float = 0.0
    g3: float = 0.0
    general: Optional[GeneralInterp] = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "kind", ModelKind(self.kind))
        if self.kind in (ModelKind.MANY_BODY, ModelKind.TWO_BODY):
            if self.mu is None or self.eta is None:
                raise ValueError(f"{self.kind.value} needs mu and eta")
            mu = np.array(np.atleast_1d(self.mu), dtype=float)
            eta = np.array(np.atleast_1d(self.eta), dtype=float)
            if mu.ndim != 1 or mu.shape != eta.shape:
                raise ValueError("mu and eta must be 1-d of equal length")
            zero = np.flatnonzero(mu == 0.0)
            if zero.size:
                raise ZeroMass(f"mu[{zero[0]}] is zero")
            mu.setflags(write=False)
            eta.setflags(write=False)
            object.__setattr__(self, "mu", mu)
            object.__setattr__(self, "eta", eta)
        if self.kind is ModelKind.GENERAL_INTERP and self.general is None:
            raise ValueError("general_interp needs rho/gamma callbacks")

    # convenience constructors
    @classmethod
    def many_body(cls, mu, eta):
        return cls(ModelKind.MANY_BODY, mu=mu, eta=eta)

    @classmethod
    def two_body(cls, mu, eta):
        return cls(ModelKind.TWO_BODY, mu=mu, eta=eta)

    @classmethod
    def sutherland(cls, g):
        return cls(ModelKind.SUTHERLAND, g=float(g))

    @classmethod
    def goldfish_circle(cls, g0, g1, g2, g3):
        return cls(ModelKind.GOLDFISH_CIRCLE, g0=g0, g1=g1, g2=g2, g3=g3)

    @classmethod
    def isochronous_tan(cls, g):
        return cls(ModelKind.ISOCHRONOUS_TAN, g=float(g))

    @classmethod
    def goldfish_tan(cls):
        return cls(ModelKind.GOLDFISH_TAN)

    @classmethod
    def general_interp(cls, rho, gamma, drho, dgamma):
        return cls(ModelKind.GENERAL_INTERP, general=GeneralInterp(rho, gamma, drho, dgamma))

    @property
    def n_particles(self) -> Optional[int]:
        """Particle count fixed by the parameters, or None if any N works."""
        return None if self.mu is None else self.mu.size

    def check_size(self, n: int):
        if self.mu is not None and self.mu.size != n:
            raise ValueError(f"model has {self.mu.size} mass parameters but state has {n} particles")


@dataclass(frozen=True)
class InvariantVector:
    h: np.ndarray

    def conjugation_error(self) -> float:
        """max_m |h_{N+1-m} - conj(h_m)|."""
        return float(np.abs(self.h[::-1] - np.conj(self.h)).max())


def general_from_constants(mu, eta) -> ModelSpec:
    """General-interp model with rho_n = mu_n, gamma_n = eta_n (constant)."""
    mu = np.asarray(mu, dtype=float)
    eta = np.asarray(eta, dtype=float)
    n = mu.size
    return ModelSpec.general_interp(
        rho=lambda th: mu.copy(),
        gamma=lambda th: eta.copy(),
        drho=lambda th: np.zeros((n, n)),
        dgamma=lambda th: np.zeros((n, n)),
    )


def _log_sigma_jacobian(th):
    # d log sigma_n / d theta_m
    s = np.sin(th[:, None] - th[None, :])
    c = np.cos(th[:, None] - th[None, :])
    np.fill_diagonal(s, 1.0)
    cot = c / s
    np.fill_diagonal(cot, 0.0)
    jac = -cot
    jac[np.diag_indices(th.size)] = cot.sum(axis=1)
    return jac


def general_from_sigma(mu, eta) -> ModelSpec:
    """General-interp model with rho_n = mu_n sigma_n, gamma_n = eta_n sigma_n."""
    mu = np.asarray(mu, dtype=float)
    eta = np.asarray(eta, dtype=float)
    return ModelSpec.general_interp(
        rho=lambda th: mu * sigmas(th),
        gamma=lambda th: eta * sigmas(th),
        drho=lambda th: (mu * sigmas(th))[:, None] * _log_sigma_jacobian(th),
        dgamma=lambda th: (eta * sigmas(th))[:, None] * _log_sigma_jacobian(th),
    )


# ---------------------------------------------------------------------------
# angle form


def _pair_trig(th):
    d = th[:, None] - th[None, :]
    s = check_collisions(th, COLLISION_TOL).copy()
    c = np.cos(d)
    np.fill_diagonal(s, 1.0)
    np.fill_diagonal(c, 0.0)
    return s, c


def _tan_cos(th):
    c = np.cos(th)
    bad = np.abs(c) <= TANGENT_TOL
    if np.any(bad):
        n = int(np.flatnonzero(bad)[0])
        raise TangentSingularity(f"particle {n + 1} is at theta = pi/2 mod pi")
    return c


def rho_gamma(model: ModelSpec, th):
    """Values of rho_n and gamma_n at the nodes for interpolation kinds."""
    k = model.kind
    if k is ModelKind.MANY_BODY:
        return model.mu, model.eta
    if k is ModelKind.TWO_BODY:
        sig = sigmas(th)
        return model.mu * sig, model.eta * sig
    if k is ModelKind.GENERAL_INTERP:
        return (
            np.asarray(model.general.rho(th), dtype=float),
            np.asarray(model.general.gamma(th), dtype=float),
        )
    raise WrongKind(f"{k.value} is not an interpolation-generated model")


def angle_accel(model: ModelSpec, th, thd):
    """Angular accelerations for raw arrays; used by the integrator."""
    k = model.kind
    n = th.size
    model.check_size(n)
    s, c = _pair_trig(th)

    if k is ModelKind.MANY_BODY:
        mu, eta = model.mu, model.eta
        f = mu * thd + eta
        cot_sum = (c / s).sum(axis=1)
        sig = s.prod(axis=1)
        ratio = sig[:, None] / sig[None, :]
        np.fill_diagonal(ratio, 0.0)
        return thd * (f * cot_sum + (ratio * f[None, :] / s).sum(axis=1)) / mu

    if k is ModelKind.TWO_BODY:
        mu, eta = model.mu, model.eta
        f = mu * thd + eta
        num = thd[:, None] * f[None, :] + f[:, None] * thd[None, :] * c
        np.fill_diagonal(num, 0.0)
        return (num / s).sum(axis=1) / mu

    if k is ModelKind.SUTHERLAND:
        return model.g**2 * (c / s**3).sum(axis=1)

    if k is ModelKind.GOLDFISH_CIRCLE:
        coup = 2.0 * np.outer(thd, thd) + model.g2 * (thd[:, None] + thd[None, :]) + model.g3
        return model.g0 + model.g1 * thd + (coup * c / s).sum(axis=1)

    if k is ModelKind.ISOCHRONOUS_TAN:
        cs = _tan_cos(th)
        sn = np.sin(th)
        pair = np.outer(cs**5, cs**3) / s**3
        np.fill_diagonal(pair, 0.0)
        return -2.0 * thd**2 * sn / cs - 4.0 * sn * cs + model.g**2 * pair.sum(axis=1)

    if k is ModelKind.GOLDFISH_TAN:
        cs = _tan_cos(th)
        sn = np.sin(th)
        num = 2.0 * np.outer(thd, thd) + np.outer(cs**2, cs**2)
        pair = cs[:, None] * num / (cs[None, :] * s)
        np.fill_diagonal(pair, 0.0)
        return -2.0 * thd**2 * sn / cs - sn * cs + pair.sum(axis=1)

    if k is ModelKind.GENERAL_INTERP:
        gi = model.general
        rho = np.asarray(gi.rho(th), dtype=float)
        gamma = np.asarray(gi.gamma(th), dtype=float)
        if np.any(rho == 0.0):
            raise ZeroMass("rho_n vanishes at this configuration")
        f = rho * thd + gamma
        df = _diff_matrix(th) @ f
        drho = np.asarray(gi.drho(th), dtype=float)
        dgamma = np.asarray(gi.dgamma(th), dtype=float)
        return (thd * df - thd * (drho @ thd) - dgamma @ thd) / rho

    raise WrongKind(f"unknown model kind {k!r}")


def rhs_angle(model: ModelSpec, s: AngleState) -> np.ndarray:
    """Angular accelerations theta_ddot for the given model and state."""
    return angle_accel(model, s.theta, s.theta_dot)


# ---------------------------------------------------------------------------
# vector form


def _check_circle(r, v, tol=INPUT_CONSTRAINT_TOL):
    norm2 = np.einsum("ij,ij->i", r, r)
    if np.any(np.abs(norm2 - 1.0) > tol):
        raise ConstraintViolation("position off the unit circle")
    if np.any(np.abs(np.einsum("ij,ij->i", r, v)) > tol):
        raise ConstraintViolation("velocity not tangent to the unit circle")


def circle_accel(model: ModelSpec, r, v):
    """Planar accelerations for raw (N, 2) arrays; used by the integrator.

    Every kind is written as a centripetal term -(v_n . v_n) r_n plus a
    tangential force along z_hat ^ r_n built from dot and cross products.
    """
    k = model.kind
    n = r.shape[0]
    model.check_size(n)
    t = perp(r)
    speed2 = np.einsum("ij,ij->i", v, v)
    w = cross2(r, v)  # angular velocity
    # S[n, l] = (r_l ^ r_n).z = sin(theta_n - theta_l), C[n, l] = r_n . r_l
    S = r[None, :, 0] * r[:, None, 1] - r[None, :, 1] * r[:, None, 0]
    C = r @ r.T
    if n > 1:
        a = np.abs(S) + 2.0 * np.eye(n)
        if a.min() <= COLLISION_TOL:
            i, j = np.unravel_index(np.argmin(a), a.shape)
            raise CollisionSingularity(f"particles {i + 1} and {j + 1} collide")
    np.fill_diagonal(S, 1.0)
    np.fill_diagonal(C, 0.0)
    centripetal = -speed2[:, None] * r

    if k is ModelKind.MANY_BODY:
        mu, eta = model.mu, model.eta
        sig = S.prod(axis=1)
        ratio = sig[:, None] / sig[None, :]
        np.fill_diagonal(ratio, 0.0)
        tang = (mu * speed2 + eta * w) * (C / S).sum(axis=1) + w * (
            ratio * (mu * w + eta)[None, :] / S
        ).sum(axis=1)
        return centripetal + (tang / mu)[:, None] * t

    if k is ModelKind.TWO_BODY:
        mu, eta = model.mu, model.eta
        # v_l . (z ^ r_n) = thd_l cos(theta_n - theta_l)
        vl_tn = t @ v.T
        num = w[:, None] * (mu * w + eta)[None, :] + (mu * w + eta)[:, None] * vl_tn
        np.fill_diagonal(num, 0.0)
        return centripetal + ((num / S).sum(axis=1) / mu)[:, None] * t

    if k is ModelKind.SUTHERLAND:
        return centripetal + (model.g**2 * (C / S**3).sum(axis=1))[:, None] * t

    if k is ModelKind.GOLDFISH_CIRCLE:
        vv = v @ v.T
        # (r_l ^ v_n).z + (r_n ^ v_l).z = (thd_n + thd_l) cos(theta_n - theta_l)
        rl_vn = (r[None, :, 0] * v[:, None, 1] - r[None, :, 1] * v[:, None, 0])
        rn_vl = (r[:, None, 0] * v[None, :, 1] - r[:, None, 1] * v[None, :, 0])
        num = 2.0 * vv + model.g2 * (rl_vn + rn_vl) + model.g3 * C
        np.fill_diagonal(num, 0.0)
        tang = (num / S).sum(axis=1)
        return centripetal + model.g0 * t + model.g1 * v + tang[:, None] * t

    if k is ModelKind.ISOCHRONOUS_TAN:
        x, y = _circle_xy(r)
        pair = np.outer(x**5, x**3) / S**3
        np.fill_diagonal(pair, 0.0)
        brace = 2.0 * speed2 * y / x + 4.0 * x * y - model.g**2 * pair.sum(axis=1)
        return centripetal - brace[:, None] * t

    if k is ModelKind.GOLDFISH_TAN:
        x, y = _circle_xy(r)
        num = 2.0 * np.outer(w, w) + np.outer(x**2, x**2)
        pair = num / (x[None, :] * S)
        np.fill_diagonal(pair, 0.0)
        brace = 2.0 * speed2 * y / x + x * y - x * pair.sum(axis=1)
        return centripetal - brace[:, None] * t

    if k is ModelKind.GENERAL_INTERP:
        th = np.arctan2(r[:, 1], r[:, 0])
        thdd = angle_accel(model, th, w)
        return centripetal + thdd[:, None] * t

    raise WrongKind(f"unknown model kind {k!r}")


def _circle_xy(r):
    x, y = r[:, 0], r[:, 1]
    bad = np.abs(x) <= TANGENT_TOL
    if np.any(bad):
        n = int(np.flatnonzero(bad)[0])
        raise TangentSingularity(f"particle {n + 1} has x = 0")
    return x, y


def rhs_circle(model: ModelSpec, c: CircleState) -> np.ndarray:
    """Planar accelerations r_ddot, shape (N, 2).

    Raises
    ------
    ConstraintViolation
        If the input is off the unit circle (or velocities are not tangent)
        by more than 1e-9.
    """
    _check_circle(c.r, c.r_dot)
    return circle_accel(model, c.r, c.r_dot)


# ---------------------------------------------------------------------------
# line form (tan-derived kinds only)


def line_accel(model: ModelSpec, z, zd):
    k = model.kind
    n = z.size
    if k not in TAN_KINDS:
        raise WrongKind(f"{k.value} has no line form")
    d = z[:, None] - z[None, :]
    if n > 1:
        a = np.abs(d)
        np.fill_diagonal(a, np.inf)
        if a.min() <= COLLISION_TOL * (1.0 + np.abs(z).max()):
            raise CollisionSingularity("two line coordinates coincide")
    np.fill_diagonal(d, 1.0)
    if k is ModelKind.ISOCHRONOUS_TAN:
        pair = d**-3
        np.fill_diagonal(pair, 0.0)
        return -4.0 * z + model.g**2 * pair.sum(axis=1)
    pair = (2.0 * np.outer(zd, zd) + 1.0) / d
    np.fill_diagonal(pair, 0.0)
    return -z + pair.sum(axis=1)


def rhs_line(model: ModelSpec, l: LineState) -> np.ndarray:
    return line_accel(model, l.z, l.z_dot)


# ---------------------------------------------------------------------------
# conserved quantities


def constants_of_motion(model: ModelSpec, s: AngleState) -> InvariantVector:
    """Coefficients h_m of the time-independent interpolated function.

    Solves sum_m h_m s_m(theta_n) = rho_n theta_dot_n + gamma_n for h.
    """
    if model.kind not in INTERPOLATION_KINDS:
        raise WrongKind(f"{model.kind.value} has no interpolation constants of motion")
    th, thd = s.theta, s.theta_dot
    model.check_size(th.size)
    check_collisions(th, COLLISION_TOL)
    rho, gamma = rho_gamma(model, th)
    f = rho * thd + gamma
    m = SeedBasis(th.size).matrix(th)
    if np.linalg.cond(m) > 1e12:
        raise CollisionSingularity("seed matrix is numerically singular")
    h = np.linalg.solve(m, f.astype(complex))
    resid = np.abs(m @ h - f).max()
    scale = max(np.abs(f).max(), np.finfo(float).tiny)
    if resid > 1e-10 * scale and resid > 1e-14:
        raise CollisionSingularity(f"linear solve residual {resid:.2e} too large")
    return InvariantVector(h)


def momentum_energy_oracle(model: ModelSpec, s: AngleState):
    """Total angular momentum and energy of the Sutherland kind.

    E = 1/2 sum thd_n^2 + (g^2/2) sum_{n<l} 1/sin^2(theta_n - theta_l);
    the pair sum runs over unordered pairs, which is the normalization whose
    gradient reproduces the force g^2 sum cos/sin^3.
    """
    if model.kind is not ModelKind.SUTHERLAND:
        raise WrongKind("momentum/energy oracle is only defined for the sutherland kind")
    th, thd = s.theta, s.theta_dot
    s_mat, _ = _pair_trig(th)
    iu = np.triu_indices(th.size, 1)
    pot = 0.5 * model.g**2 * np.sum(1.0 / s_mat[iu] ** 2)
    return float(thd.sum()), float(0.5 * np.sum(thd**2) + pot)
