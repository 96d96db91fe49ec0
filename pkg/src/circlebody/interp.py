"""Lagrangian interpolation on the circle with exponential seeds.

The seed space is spanned by s_n(theta) = exp(i (2n - N - 1) theta),
n = 1..N. Interpolation at N nodes is exact on that space, and so is the
differentiation matrix returned by :func:`diff_matrix`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CollisionSingularity

COLLISION_TOL = 1e-10


@dataclass(frozen=True)
class SeedBasis:
    n_seeds: int

    def __post_init__(self):
        if int(self.n_seeds) != self.n_seeds or self.n_seeds < 1:
            raise ValueError("n_seeds must be a positive integer")

    @property
    def exponents(self) -> np.ndarray:
        n = np.arange(1, self.n_seeds + 1)
        return 2 * n - self.n_seeds - 1

    def matrix(self, theta) -> np.ndarray:
        """M[k, m] = s_m(theta_k) for a vector of angles."""
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        return np.exp(1j * np.outer(theta, self.exponents))


@dataclass(frozen=True)
class NodeSet:
    """Interpolation nodes; rejects pairs with |sin(theta_n - theta_m)| <= tol.

    Note that antipodal nodes collide too: the seeds all share one parity,
    so the interpolation problem is singular there.
    """

    nodes: np.ndarray
    collision_tol: float = COLLISION_TOL

    def __post_init__(self):
        nodes = np.array(np.atleast_1d(self.nodes), dtype=float)
        if nodes.ndim != 1 or nodes.size < 1:
            raise ValueError("nodes must be a non-empty 1-d array")
        nodes.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        check_collisions(nodes, self.collision_tol)

    @property
    def n(self) -> int:
        return self.nodes.size


def check_collisions(theta, tol=COLLISION_TOL):
    """Return the pairwise matrix sin(theta_n - theta_m), raising on collisions."""
    s = np.sin(theta[:, None] - theta[None, :])
    n = theta.size
    if n > 1:
        a = np.abs(s) + np.eye(n) * 2.0
        i, j = np.unravel_index(np.argmin(a), a.shape)
        if a[i, j] <= tol:
            raise CollisionSingularity(
                f"particles {i + 1} and {j + 1} collide: "
                f"|sin(theta_{i + 1} - theta_{j + 1})| = {a[i, j]:.3e}"
            )
    return s


def _as_nodes(nodes):
    return nodes if isinstance(nodes, NodeSet) else NodeSet(nodes)


def seed_eval(basis: SeedBasis, n: int, theta: float) -> complex:
    """Value of the n-th seed (1-based) at theta."""
    if not 1 <= n <= basis.n_seeds:
        raise IndexError(f"seed index {n} outside 1..{basis.n_seeds}")
    return complex(np.exp(1j * (2 * n - basis.n_seeds - 1) * theta))


def sigma(nodes, n: int) -> float:
    """Product over l != n of sin(theta_n - theta_l); 1 for a single node."""
    ns = _as_nodes(nodes)
    th = ns.nodes
    out = 1.0
    for l in range(ns.n):
        if l != n - 1:
            out *= np.sin(th[n - 1] - th[l])
    return float(out)


def sigmas(theta) -> np.ndarray:
    """All sigma_n at once, for already-validated nodes."""
    d = np.sin(theta[:, None] - theta[None, :])
    np.fill_diagonal(d, 1.0)
    return d.prod(axis=1)


def interp_q(basis: SeedBasis, nodes, n: int, theta: float) -> complex:
    """Cardinal interpolation function q^(n)(theta | nodes).

    Uses the factored Vandermonde closed form

        s_1(theta - theta_n) prod_{l != n} (e^{2i theta} - e^{2i theta_l})
                                           / (e^{2i theta_n} - e^{2i theta_l})

    which equals 1 at theta_n and vanishes at every other node.
    """
    ns = _as_nodes(nodes)
    if ns.n != basis.n_seeds:
        raise ValueError("node count must match the number of seeds")
    th = ns.nodes
    k = n - 1
    w = np.exp(2j * theta)
    wn = np.exp(2j * th[k])
    out = seed_eval(basis, 1, theta - th[k])
    for l in range(ns.n):
        if l != k:
            wl = np.exp(2j * th[l])
            out *= (w - wl) / (wn - wl)
    return complex(out)


def interpolate(basis: SeedBasis, nodes, values, theta: float) -> complex:
    """sum_n values[n] q^(n)(theta)."""
    ns = _as_nodes(nodes)
    return sum(values[k] * interp_q(basis, ns, k + 1, theta) for k in range(ns.n))


def diff_matrix(nodes) -> np.ndarray:
    """Exact differentiation matrix on the seed space.

    D[n, n] = sum_{l != n} cot(theta_n - theta_l) and
    D[n, m] = sigma_n / (sigma_m sin(theta_n - theta_m)) for n != m.
    """
    ns = _as_nodes(nodes)
    return _diff_matrix(ns.nodes)


def _diff_matrix(th):
    n = th.size
    s = np.sin(th[:, None] - th[None, :])
    c = np.cos(th[:, None] - th[None, :])
    np.fill_diagonal(s, 1.0)
    sig = s.prod(axis=1)
    d = sig[:, None] / (sig[None, :] * s)
    cot = c / s
    np.fill_diagonal(cot, 0.0)
    d[np.diag_indices(n)] = cot.sum(axis=1)
    return d
