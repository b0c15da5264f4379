"""Residual-norm functional for canonical systems and its minimal paths.

For a path ``x(t) = (q(t), p(t))`` the residual norm is the L2 norm of the
Hamilton-equation defect ``r = xdot - J grad H`` with ``J = [[0, I], [-I, 0]]``.
Its Euler-Lagrange equation is

    d/dt r = S J r,        S = Hessian of H,

a second-order system for ``x`` with ``4n`` boundary conditions (both ends
of ``q`` and ``p``).  It is zero exactly on physical trajectories, so its
minimum over paths between two fixed points measures how far the final
point is from the flow-map image of the initial one.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .actions import NotCanonicalError
from .flow import ConvergenceError, integrate


def poisson_matrix(n):
    eye, zero = np.eye(n), np.zeros((n, n))
    return np.block([[zero, eye], [-eye, zero]])


@dataclass(frozen=True, eq=False)
class CanonicalPath:
    times: np.ndarray
    q: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        times = np.asarray(self.times, dtype=float)
        q = np.atleast_2d(np.asarray(self.q, dtype=float).T).T
        p = np.atleast_2d(np.asarray(self.p, dtype=float).T).T
        if q.shape != p.shape or q.shape[0] != len(times):
            raise ValueError("q and p must have shape (len(times), n)")
        dt = np.diff(times)
        if len(times) < 2 or np.any(dt <= 0) or not np.allclose(dt, dt[0], rtol=1e-9, atol=0):
            raise ValueError("canonical paths live on a uniform, increasing time grid")
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "p", p)

    @classmethod
    def from_states(cls, times, x):
        x = np.asarray(x, dtype=float)
        n = x.shape[1] // 2
        return cls(times, x[:, :n], x[:, n:])

    @property
    def n(self):
        return self.q.shape[1]

    @property
    def states(self):
        return np.hstack([self.q, self.p])

    @property
    def step(self):
        return float(self.times[1] - self.times[0])


@dataclass(frozen=True)
class EndpointSpec:
    """Fixed initial and final phase points plus the time span."""

    q0: np.ndarray
    p0: np.ndarray
    qT: np.ndarray
    pT: np.ndarray
    t1: float = 0.0
    t2: float = 1.0
    alpha: Optional[float] = None
    beta: Optional[float] = None

    def __post_init__(self):
        for name in ("q0", "p0", "qT", "pT"):
            val = np.atleast_1d(np.asarray(getattr(self, name), dtype=float))
            if not np.all(np.isfinite(val)):
                raise ValueError(f"{name} must be finite")
            object.__setattr__(self, name, val)
        if not self.t2 > self.t1:
            raise ValueError("t2 must exceed t1")

    @classmethod
    def free_particle(cls, q0, p0, T, alpha=1.0, beta=0.0, t1=0.0):
        """Final point ``(q0 + alpha p0 T, p0 + beta)``; correct iff alpha = 1, beta = 0."""
        q0 = np.atleast_1d(np.asarray(q0, dtype=float))
        p0 = np.atleast_1d(np.asarray(p0, dtype=float))
        return cls(q0, p0, q0 + alpha * p0 * T, p0 + beta, t1, t1 + T, alpha, beta)

    @property
    def T(self):
        return self.t2 - self.t1

    @property
    def start(self):
        return np.concatenate([self.q0, self.p0])

    @property
    def end(self):
        return np.concatenate([self.qT, self.pT])


def _require_canonical(system):
    if not getattr(system, "canonical", False):
        raise NotCanonicalError(f"{system.name} is not in canonical coordinates")


def hamilton_residuals(system, path):
    """Per-node defect ``(qdot - H_p, pdot + H_q)`` with second-order differences."""
    _require_canonical(system)
    if len(path.times) < 3:
        raise ValueError("residual norm needs at least 3 nodes")
    x = path.states
    xdot = np.gradient(x, path.step, axis=0, edge_order=2)
    J = poisson_matrix(path.n)
    return xdot - system.grad_h(x) @ J.T


def residual_norm(system, path):
    """``sqrt(int sum((qdot - H_p)^2 + (pdot + H_q)^2) dt)``, trapezoid in time."""
    r = hamilton_residuals(system, path)
    return float(np.sqrt(np.trapezoid(np.sum(r * r, axis=1), dx=path.step)))


# ---------------------------------------------------------------------------
# Euler-Lagrange collocation

def _el_residual(system, x, h, J):
    """Scaled collocation residual ``h^2 G_k`` at interior nodes."""
    xi = x[1:-1]
    S = system.hess_h(xi)
    g = system.grad_h(xi)
    K = J @ S + S @ J
    central = x[2:] - x[:-2]
    return (x[2:] - 2 * xi + x[:-2]
            - 0.5 * h * np.einsum("kmn,kn->km", K, central)
            - h * h * np.einsum("kmn,kn->km", S, g))


def _el_jacobian(system, x, h, J, fd_step=1e-5):
    """Block-tridiagonal Jacobian of :func:`_el_residual` in the interior unknowns."""
    xi = x[1:-1]
    m, d = xi.shape
    S = system.hess_h(xi)
    g = system.grad_h(xi)
    K = J @ S + S @ J
    central = x[2:] - x[:-2]
    eye = np.eye(d)
    upper = eye - 0.5 * h * K        # d G_k / d x_{k+1}
    lower = eye + 0.5 * h * K        # d G_k / d x_{k-1}
    diag = -2 * eye - h * h * (S @ S)
    # third-derivative terms; central differences of the Hessian vanish for quadratic H
    for c in range(d):
        e = np.zeros(d)
        e[c] = fd_step
        dS = (system.hess_h(xi + e) - system.hess_h(xi - e)) / (2 * fd_step)
        dK = J @ dS + dS @ J
        diag[:, :, c] -= (0.5 * h * np.einsum("kmn,kn->km", dK, central)
                          + h * h * np.einsum("kmn,kn->km", dS, g))
    blocks_i, blocks_j, data = [], [], []
    idx = np.arange(m)
    for off, blk in ((0, diag), (1, upper[:-1]), (-1, lower[1:])):
        rows = idx[max(0, -off):m - max(0, off)]
        cols = rows + off
        r, c = np.meshgrid(np.arange(d), np.arange(d), indexing="ij")
        blocks_i.append((rows[:, None, None] * d + r[None]).ravel())
        blocks_j.append((cols[:, None, None] * d + c[None]).ravel())
        data.append(blk.ravel())
    return sp.csc_matrix((np.concatenate(data), (np.concatenate(blocks_i),
                                                 np.concatenate(blocks_j))), shape=(m * d, m * d))


@dataclass(frozen=True, eq=False)
class MinimalPath:
    path: CanonicalPath
    norm: float
    iterations: int
    converged: bool


def minimal_path(system, ends, N, max_iter=50, tol=1e-12, initial=None):
    """Minimise the residual norm between fixed end points.

    Finite-difference collocation of the Euler-Lagrange system on ``N``
    intervals, solved by Newton's method with step halving.  For quadratic H
    the system is linear and one Newton step solves it.

    Raises :class:`~symplab.flow.ConvergenceError` when Newton stalls.
    """
    _require_canonical(system)
    N = int(N)
    if N < 20:
        raise ValueError("minimal_path needs N >= 20")
    n = system.n
    if ends.q0.shape != (n,) or ends.qT.shape != (n,):
        raise ValueError(f"end points must have {n} components")
    times = np.linspace(ends.t1, ends.t2, N + 1)
    h = times[1] - times[0]
    J = poisson_matrix(n)
    if initial is None:
        s = (times - ends.t1) / ends.T
        x = np.outer(1 - s, ends.start) + np.outer(s, ends.end)
    else:
        x = np.array(initial, dtype=float)
        x[0], x[-1] = ends.start, ends.end
    scale = 1.0 + np.max(np.abs(x))
    res = _el_residual(system, x, h, J)
    iterations = 0
    converged = False
    for _ in range(max_iter + 1):
        jac = _el_jacobian(system, x, h, J)
        try:
            step = spla.spsolve(jac, -res.ravel()).reshape(res.shape)
        except RuntimeError as exc:
            raise ConvergenceError(f"singular collocation matrix: {exc}",
                                   residual=float(np.max(np.abs(res))),
                                   iterations=iterations) from exc
        if not np.all(np.isfinite(step)):
            raise ConvergenceError("singular collocation matrix",
                                   residual=float(np.max(np.abs(res))), iterations=iterations)
        if np.max(np.abs(step)) <= tol * scale:
            converged = True
            break
        if iterations == max_iter:
            break
        lam, norm0 = 1.0, np.max(np.abs(res))
        while True:
            trial = x.copy()
            trial[1:-1] += lam * step
            res_trial = _el_residual(system, trial, h, J)
            if np.max(np.abs(res_trial)) <= norm0 or lam < 1e-6:
                break
            lam *= 0.5
        x, res = trial, res_trial
        iterations += 1
    if not converged:
        raise ConvergenceError(f"Newton did not converge in {max_iter} iterations",
                               residual=float(np.max(np.abs(res))), iterations=iterations)
    path = CanonicalPath.from_states(times, x)
    return MinimalPath(path, residual_norm(system, path), iterations, True)


def euler_lagrange_defect(system, path):
    """Node-wise ``d/dt r - S J r``; ``O(h^2)`` on EL solutions.

    Nodes next to the ends are dropped: differencing ``r`` again across its
    one-sided end values would cost one order there.
    """
    r = hamilton_residuals(system, path)
    rdot = np.gradient(r, path.step, axis=0, edge_order=2)
    S = system.hess_h(path.states)
    J = poisson_matrix(path.n)
    return (rdot - np.einsum("kmn,kn->km", S @ J, r))[2:-2]


# ---------------------------------------------------------------------------
# free particle, H = p^2/2, n = 1

@dataclass(frozen=True, eq=False)
class FreeParticleSolution:
    """Closed-form minimiser ``u = qdot - p = A`` (constant), ``pddot = -A``."""

    A: float
    B: float
    ends: EndpointSpec

    def q(self, t):
        s = np.asarray(t, dtype=float) - self.ends.t1
        return (-self.A * s ** 3 / 6 + self.B * s ** 2 / 2
                + (self.ends.p0[0] + self.A) * s + self.ends.q0[0])

    def p(self, t):
        s = np.asarray(t, dtype=float) - self.ends.t1
        return -self.A * s ** 2 / 2 + self.B * s + self.ends.p0[0]

    @property
    def norm_squared(self):
        T = self.ends.T
        beta = self.ends.pT[0] - self.ends.p0[0]
        return self.A ** 2 * (T + T ** 3 / 12) + beta ** 2 / T

    @property
    def norm(self):
        return float(np.sqrt(self.norm_squared))

    def sample(self, N):
        times = np.linspace(self.ends.t1, self.ends.t2, N + 1)
        return CanonicalPath(times, self.q(times), self.p(times))


def free_particle_closed_form(ends, T=None):
    """Exact minimiser of the free-particle residual norm.

    With ``m = qT - q0 - p0 T`` and ``beta = pT - p0``:

        A = (12 m / T - 6 beta) / (T^2 + 12),   B = beta / T + A T / 2,
        q(t) = -A t^3/6 + B t^2/2 + (p0 + A) t + q0,
        p(t) = -A t^2/2 + B t + p0,
        |dS|^2 = A^2 (T + T^3/12) + beta^2 / T.

    In the ``C_i`` notation (``C1 = -A``, ``C2 = B``, ``C3 = p0``,
    ``C4 = q0``) this gives ``p(t) = C1 t^2/2 + ...`` and
    ``C1 = (6 beta - 12 (alpha - 1) p0) / (T^2 + 12)`` for the final point
    ``(q0 + alpha p0 T, p0 + beta)``, and the cubic coefficient of the norm
    is ``1/12``.  Widely quoted variants with ``C1 t^2/6``, a denominator
    ``T^2 + 6T`` and a coefficient ``7/12`` do not satisfy the boundary
    conditions; the regression tests pin the formulas above against direct
    minimisation of the discretised functional.
    """
    if T is not None and abs(T - ends.T) > 1e-12 * max(1.0, abs(T)):
        raise ValueError("T does not match the end-point time span")
    T = ends.T
    if not T > 0:
        raise ValueError("T must be positive")
    if ends.q0.shape != (1,):
        raise ValueError("the closed form covers n = 1 only")
    m = ends.qT[0] - ends.q0[0] - ends.p0[0] * T
    beta = ends.pT[0] - ends.p0[0]
    A = (12 * m / T - 6 * beta) / (T * T + 12)
    B = beta / T + A * T / 2
    return FreeParticleSolution(A, B, ends)


def richardson(coarse, fine, order=2, ratio=2.0):
    """Eliminate the leading ``h^order`` error term from two grid levels."""
    f = ratio ** order
    return (f * fine - coarse) / (f - 1)


# ---------------------------------------------------------------------------
# end-point landscape

@dataclass(frozen=True, eq=False)
class Landscape:
    qT: np.ndarray
    pT: np.ndarray
    norms: np.ndarray
    converged: np.ndarray
    flow_image: np.ndarray
    argmin: tuple

    @property
    def argmin_point(self):
        i, j = self.argmin
        return np.array([self.qT[i], self.pT[j]])

    @property
    def minimum(self):
        return float(self.norms[self.argmin])

    def cell_size(self):
        dq = np.min(np.diff(self.qT)) if len(self.qT) > 1 else np.inf
        dp = np.min(np.diff(self.pT)) if len(self.pT) > 1 else np.inf
        return np.array([dq, dp])

    @property
    def argmin_matches_flow(self):
        """Argmin within one mesh cell of the flow-map image of the start point."""
        return bool(np.all(np.abs(self.argmin_point - self.flow_image) <= self.cell_size()))

    def rows(self):
        for i, q in enumerate(self.qT):
            for j, p in enumerate(self.pT):
                yield q, p, self.norms[i, j], bool(self.converged[i, j])


def mesh_around(centre, spacing, half_width=10):
    """Symmetric mesh ``centre + spacing * k`` for ``k = -half_width..half_width``."""
    return centre + spacing * np.arange(-half_width, half_width + 1)


def endpoint_landscape(system, start, T, qT, pT, N=100, flow_steps=2000):
    """Minimal residual norm for every candidate final point on a mesh.

    Only for ``n = 1``.  Solver failures are recorded as ``converged=False``
    with ``norm = nan``.
    """
    _require_canonical(system)
    if system.n != 1:
        raise ValueError("endpoint landscapes are built for n = 1")
    q0, p0 = map(float, start)
    qT = np.asarray(qT, dtype=float)
    pT = np.asarray(pT, dtype=float)
    norms = np.full((len(qT), len(pT)), np.nan)
    converged = np.zeros((len(qT), len(pT)), dtype=bool)
    for i, q in enumerate(qT):
        for j, p in enumerate(pT):
            ends = EndpointSpec([q0], [p0], [q], [p], 0.0, T)
            try:
                result = minimal_path(system, ends, N)
            except ConvergenceError:
                continue
            norms[i, j] = result.norm
            converged[i, j] = True
    image = integrate(system, np.array([q0, p0]), 0.0, T, flow_steps).end
    masked = np.where(converged, norms, np.inf)
    argmin = tuple(int(v) for v in np.unravel_index(int(np.argmin(masked)), masked.shape))
    return Landscape(qT, pT, norms, converged, image, argmin)
