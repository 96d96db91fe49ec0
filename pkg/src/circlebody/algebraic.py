"""Closed-form solution of the many-body interpolation model.

For rho_n = mu_n, gamma_n = eta_n the once-integrated equations decouple:

    mu_n theta_n' = -eta_n + sum_m h_m exp(i (2m - N - 1) theta_n),

with h the constants of motion. Writing zeta = exp(i theta) turns each into
the quadrature

    F(zeta) = int_{zeta_0}^{zeta} xi^(N-2) / P(xi) dxi = i t / mu,
    P(xi)   = -eta xi^(N-1) + sum_m h_m xi^(2(m-1)),

which is evaluated in closed form from the roots xi_j of P and the residues
phi_j = h_N / P'(xi_j), then inverted for zeta(t) by Newton continuation in t
with continuously tracked logarithm branches.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import polynomial as npoly

from .errors import (
    ContinuationFailure,
    DegenerateLeadingCoefficient,
    PoleHit,
    RepeatedRoots,
    WrongKind,
)
from .geometry import AngleState
from .integrator import StepStats, Trajectory
from .interp import SeedBasis
from .models import ModelKind, ModelSpec, constants_of_motion

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class FirstOrderData:
    """Constants of motion plus per-particle parameters of the reduced ODEs."""

    h: np.ndarray
    mu: np.ndarray
    eta: np.ndarray
    theta0: np.ndarray

    @property
    def n_particles(self) -> int:
        return self.h.size

    def velocity(self, n: int, theta) -> np.ndarray:
        """theta_dot of particle n (1-based) at angle(s) theta from the reduced ODE."""
        theta = np.asarray(theta, dtype=float)
        f = SeedBasis(self.n_particles).matrix(np.atleast_1d(theta)) @ self.h
        v = (f.real - self.eta[n - 1]) / self.mu[n - 1]
        return v if theta.ndim else float(v[0])


def reduce_to_first_order(model: ModelSpec, s0: AngleState) -> FirstOrderData:
    """Constants of motion and parameters of the decoupled first-order ODEs.

    Only the many-body kind decouples; the two-body kind is integrable but
    its first-order system stays coupled through sigma_n.
    """
    if model.kind is not ModelKind.MANY_BODY:
        raise WrongKind(f"only many_body reduces to uncoupled first-order ODEs, not {model.kind.value}")
    h = constants_of_motion(model, s0).h
    return FirstOrderData(h, model.mu, model.eta, s0.theta)


@dataclass(frozen=True)
class QuadratureData:
    """Roots and residues of P for one particle.

    ``poly_coeffs`` are in ascending powers of xi. ``n_particles`` is N.
    """

    particle: int
    n_particles: int
    poly_coeffs: np.ndarray
    roots: np.ndarray
    residues: np.ndarray
    zeta0: complex
    h_lead: complex

    def poly(self, xi):
        return npoly.polyval(xi, self.poly_coeffs)

    def integrand(self, xi):
        """xi^(N-2) / P(xi)."""
        return xi ** (self.n_particles - 2) / self.poly(xi)

    def partial_fractions(self, xi):
        """h_N^-1 sum_j phi_j / (xi - xi_j); equals 1/P(xi) for simple roots."""
        xi = np.asarray(xi, dtype=complex)
        return np.sum(self.residues / (xi[..., None] - self.roots), axis=-1) / self.h_lead

    def log_increments(self) -> np.ndarray:
        """Jump of F across a branch cut of each logarithm: 2 pi i xi_j^(N-2) phi_j / h_N."""
        return TWO_PI * 1j * self.roots ** (self.n_particles - 2) * self.residues / self.h_lead


def polish_roots(coeffs, roots, iters=4):
    """A few Newton steps on each root, keeping only improvements."""
    d = npoly.polyder(coeffs)
    out = roots.astype(complex).copy()
    for j, x in enumerate(out):
        best, best_val = x, abs(npoly.polyval(x, coeffs))
        for _ in range(iters):
            dp = npoly.polyval(x, d)
            if dp == 0:
                break
            x = x - npoly.polyval(x, coeffs) / dp
            val = abs(npoly.polyval(x, coeffs))
            if val < best_val:
                best, best_val = x, val
        out[j] = best
    return out


def root_separation(coeffs, roots) -> float:
    """Smallest pairwise root distance, resolved below the sqrt(eps) limit.

    A double root comes out of any eigenvalue solver split by ~sqrt(eps).
    For each close pair the critical point c of P between them is refined
    and the pair distance re-estimated as 2 |sqrt(2 P(c) / P''(c))|, which
    is 0 when P(c) is at rounding level.
    """
    if roots.size < 2:
        return np.inf
    sep = np.abs(roots[:, None] - roots[None, :])
    np.fill_diagonal(sep, np.inf)
    d1 = npoly.polyder(coeffs)
    d2 = npoly.polyder(coeffs, 2)
    scale = max(1.0, float(np.abs(roots).max()))
    best = float(sep.min())
    for i, j in zip(*np.nonzero(np.triu(sep < 1e-4 * scale, 1))):
        c = 0.5 * (roots[i] + roots[j])
        for _ in range(8):
            p2 = npoly.polyval(c, d2)
            if p2 == 0:
                break
            c = c - npoly.polyval(c, d1) / p2
        p2 = npoly.polyval(c, d2)
        noise = 16 * np.finfo(float).eps * np.sum(np.abs(coeffs) * abs(c) ** np.arange(coeffs.size))
        pc = npoly.polyval(c, coeffs)
        est = 0.0 if abs(pc) <= noise or p2 == 0 else 2 * abs(cmath.sqrt(2 * pc / p2))
        best = min(best, est)
    return best


def build_quadrature(data: FirstOrderData, n: int) -> QuadratureData:
    """Assemble P, its 2(N-1) roots (companion eigenvalues, Newton polished)
    and residues for particle ``n`` (1-based).

    Raises
    ------
    DegenerateLeadingCoefficient
        If |h_N| < 1e-12 max|h|.
    RepeatedRoots
        If two roots are closer than 1e-8 max|xi_j|.
    """
    N = data.n_particles
    if N < 2:
        raise ValueError("quadrature needs N >= 2; N = 1 is linear motion")
    h = data.h
    if abs(h[-1]) < 1e-12 * np.abs(h).max():
        raise DegenerateLeadingCoefficient(f"|h_N| = {abs(h[-1]):.3e} is negligible")
    coeffs = np.zeros(2 * N - 1, dtype=complex)
    coeffs[0::2] = h
    coeffs[N - 1] -= data.eta[n - 1]
    roots = polish_roots(coeffs, npoly.polyroots(coeffs))
    if roots.size != 2 * (N - 1):
        raise RepeatedRoots("root finder returned the wrong number of roots")
    sep = root_separation(coeffs, roots)
    if sep < 1e-8 * np.abs(roots).max():
        raise RepeatedRoots(f"roots closer than {sep:.3e}; partial fractions need simple poles")
    residues = h[-1] / npoly.polyval(roots, npoly.polyder(coeffs))
    zeta0 = cmath.exp(1j * float(data.theta0[n - 1]))
    return QuadratureData(n, N, coeffs, roots, residues, zeta0, complex(h[-1]))


def _log_terms(q: QuadratureData, zeta, ref=None):
    diff = zeta - q.roots
    if np.any(np.abs(diff) <= 1e-14 * max(1.0, np.abs(q.roots).max())):
        raise PoleHit(f"zeta={zeta!r} coincides with a root of P")
    logs = np.log(diff / (q.zeta0 - q.roots))
    if ref is not None:
        logs = logs + 1j * TWO_PI * np.round((ref.imag - logs.imag) / TWO_PI)
    return logs


def _antiderivative(q: QuadratureData, zeta, logs):
    m = q.n_particles - 2
    xi = q.roots
    total = xi**m * logs
    if m >= 1:
        a = zeta - xi
        a0 = q.zeta0 - xi
        for k in range(1, m + 1):
            total = total + math.comb(m, k) * xi ** (m - k) / k * (a**k - a0**k)
    return complex(np.sum(q.residues * total) / q.h_lead)


def antiderivative(q: QuadratureData, zeta: complex) -> complex:
    """F(zeta) = int_{zeta0}^{zeta} xi^(N-2)/P(xi) dxi with principal logarithms.

    Along a path that winds around roots, use :class:`QuadratureInversion`,
    which keeps the branches continuous.
    """
    return _antiderivative(q, complex(zeta), _log_terms(q, complex(zeta)))


@dataclass
class QuadratureInversion:
    """Newton continuation of F(zeta(t)) = i t / mu from t = 0.

    Each ladder step predicts with the ODE (explicit Euler on zeta) and
    corrects with damped complex Newton, halving the time step when Newton
    stalls or a logarithm would jump branch. ``ladder`` records every
    accepted (t, zeta, F) triple; ``theta`` is the continuously unwrapped
    argument of zeta.
    """

    q: QuadratureData
    mu: float
    theta0: float
    tol: float = 1e-12
    max_arc: float = 0.05
    t: float = 0.0
    zeta: complex = field(init=False)
    theta: float = field(init=False)
    logs: np.ndarray = field(init=False)
    ladder: list = field(init=False)

    def __post_init__(self):
        self.zeta = self.q.zeta0
        self.theta = float(self.theta0)
        self.logs = np.zeros(self.q.roots.size, dtype=complex)
        self.ladder = [(0.0, self.zeta, 0j)]
        self._dt = None

    def _velocity(self, zeta):
        # zeta' = (i / mu) P(zeta) / zeta^(N-2)
        return 1j / self.mu * self.q.poly(zeta) / zeta ** (self.q.n_particles - 2)

    def _newton(self, zeta, target):
        logs = _log_terms(self.q, zeta, self.logs)
        res = _antiderivative(self.q, zeta, logs) - target
        scale = max(1.0, abs(target))
        for _ in range(30):
            if abs(res) <= self.tol * scale:
                return zeta, logs, res
            step = res / self.q.integrand(zeta)
            lam = 1.0
            while lam > 1e-4:
                trial = zeta - lam * step
                tlogs = _log_terms(self.q, trial, self.logs)
                tres = _antiderivative(self.q, trial, tlogs) - target
                if abs(tres) < abs(res):
                    break
                lam *= 0.5
            else:
                break
            zeta, logs, res = trial, tlogs, tres
        if abs(res) <= 1e2 * self.tol * scale:
            return zeta, logs, res
        return None

    def advance(self, t_target: float) -> complex:
        """Continue the solution to ``t_target`` (>= current t) and return zeta."""
        if t_target < self.t:
            raise ValueError("continuation only runs forward in time")
        while self.t < t_target:
            speed = abs(self._velocity(self.zeta))
            dt_cap = self.max_arc / max(speed, 1e-12)
            dt = min(self._dt or dt_cap, dt_cap, t_target - self.t)
            while True:
                if dt < 1e-13 * max(1.0, abs(self.t)):
                    raise ContinuationFailure(f"continuation stalled at t={self.t:.12g}", self.t)
                t_new = self.t + dt
                if t_target - t_new <= 1e-14 * max(1.0, abs(t_target)):
                    t_new = t_target
                guess = self.zeta + (t_new - self.t) * self._velocity(self.zeta)
                try:
                    got = self._newton(guess, 1j * t_new / self.mu)
                except PoleHit:
                    got = None
                if got is not None:
                    zeta, logs, _ = got
                    step_arg = cmath.phase(zeta / self.zeta)
                    if np.all(np.abs(logs - self.logs) < 0.5 * math.pi) and abs(step_arg) < 0.5:
                        break
                dt *= 0.5
            self.theta += step_arg
            self.zeta, self.logs, self.t = zeta, logs, t_new
            self.ladder.append((t_new, zeta, _antiderivative(self.q, zeta, logs)))
            if abs(abs(zeta) - 1.0) > 1e-6:
                raise ContinuationFailure(f"|zeta| drifted to {abs(zeta)!r} at t={t_new:.12g}", t_new)
            self._dt = min(2.0 * dt, dt_cap * 4)
        return self.zeta


def solve_time(q: QuadratureData, mu: float, t: float) -> complex:
    """zeta(t) solving F(zeta) = i t / mu, continued from zeta(0) = zeta0."""
    if t == 0:
        return q.zeta0
    inv = QuadratureInversion(q, mu, cmath.phase(q.zeta0))
    return inv.advance(float(t))


def trajectory_algebraic(model: ModelSpec, s0: AngleState, t_grid) -> Trajectory:
    """Angle trajectory of the many-body model without integrating it.

    Composes the first-order reduction, the per-particle quadrature and its
    inversion; angles are unwrapped continuously from theta_n(0).
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.size == 0 or t_grid[0] != 0.0 or np.any(np.diff(t_grid) <= 0):
        raise ValueError("t_grid must start at 0 and increase strictly")
    data = reduce_to_first_order(model, s0)
    N = data.n_particles
    theta = np.empty((t_grid.size, N))
    theta_dot = np.empty((t_grid.size, N))
    ladder_steps = 0
    for n in range(1, N + 1):
        if N == 1:
            omega = (data.h[0].real - data.eta[0]) / data.mu[0]
            theta[:, 0] = data.theta0[0] + omega * t_grid
            theta_dot[:, 0] = omega
            continue
        q = build_quadrature(data, n)
        inv = QuadratureInversion(q, float(data.mu[n - 1]), float(data.theta0[n - 1]))
        for i, t in enumerate(t_grid):
            inv.advance(t)
            theta[i, n - 1] = inv.theta
        theta_dot[:, n - 1] = data.velocity(n, theta[:, n - 1])
        ladder_steps += len(inv.ladder) - 1
    states = [AngleState(a, b) for a, b in zip(theta, theta_dot)]
    return Trajectory(t_grid.copy(), states, np.zeros(t_grid.size), StepStats(n_accepted=ladder_steps))
