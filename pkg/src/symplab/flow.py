"""Fixed-step integration of Hamiltonian flows and trajectory diagnostics."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .systems import ChartError, flow_field

METHODS = ("rk4", "implicit_midpoint")


class ChartExitError(ChartError):
    """Integration left the chart; carries the exit time and the last good point."""

    def __init__(self, message, time, point):
        super().__init__(message, point)
        self.time = time


class ConvergenceError(RuntimeError):
    """An iterative solve did not converge; ``residual`` is the last residual."""

    def __init__(self, message, residual=np.nan, iterations=0):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations


def _check_grid(times):
    times = np.asarray(times, dtype=float)
    if times.ndim != 1 or len(times) < 1:
        raise ValueError("time grid must be a non-empty 1-d array")
    if np.any(np.diff(times) <= 0):
        raise ValueError("time grid must be strictly increasing")
    return times


def _check_continuity(chart, coords, axis):
    """Unwrapped periodic coordinates must not jump by pi or more between nodes."""
    if not chart.has_periodic or coords.shape[axis] < 2:
        return
    jumps = np.abs(np.diff(coords, axis=axis))[..., np.asarray(chart.periodic, bool)]
    if jumps.size and np.max(jumps) >= np.pi:
        raise ValueError("unwrapped periodic coordinate jumps by pi or more between grid nodes")


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Phase-space samples on a time grid.

    ``points`` hold chart values (periodic coordinates in their fundamental
    interval) and ``windings`` count the wraps, so ``unwrapped = points +
    periods * windings`` is continuous along the grid.
    """

    system: object
    times: np.ndarray
    points: np.ndarray
    windings: np.ndarray

    @classmethod
    def from_unwrapped(cls, system, times, coords, check_chart=True):
        times = _check_grid(times)
        coords = np.array(coords, dtype=float)
        if coords.shape != (len(times), system.dim):
            raise ValueError(f"expected coordinates of shape {(len(times), system.dim)}, "
                             f"got {coords.shape}")
        _check_continuity(system.chart, coords, axis=0)
        points, windings = system.chart.wrap(coords)
        if check_chart:
            inside = system.in_chart(points)
            if not np.all(inside):
                k = int(np.argmin(inside))
                raise ChartError(f"trajectory node {k} at t={times[k]:.6g} is outside the chart",
                                 points[k])
        return cls(system, times, points, windings)

    @property
    def unwrapped(self):
        return self.points + self.system.chart.periods * self.windings

    def __len__(self):
        return len(self.times)

    @property
    def start(self):
        return self.points[0]

    @property
    def end(self):
        return self.points[-1]

    @property
    def span(self):
        return float(self.times[-1] - self.times[0])

    def velocities(self):
        """Second-order finite-difference ``xdot`` (one-sided at the ends)."""
        if len(self) < 3:
            raise ValueError("velocities need at least 3 nodes")
        return np.gradient(self.unwrapped, self.times, axis=0, edge_order=2)

    def energies(self):
        return self.system.hamiltonian(self.points)


def _rk4_step(system, x, h):
    k1 = flow_field(system, x)
    k2 = flow_field(system, x + 0.5 * h * k1)
    k3 = flow_field(system, x + 0.5 * h * k2)
    k4 = flow_field(system, x + h * k3)
    return x + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)


def _fd_jacobian(fun, x, step=1e-7):
    cols = []
    for e in np.eye(len(x)):
        cols.append((fun(x + step * e) - fun(x - step * e)) / (2 * step))
    return np.stack(cols, axis=1)


def _midpoint_step(system, x, h, tol=1e-12, maxiter=50):
    """Implicit midpoint: fixed-point iteration, damped Newton as fallback."""
    y = x + h * flow_field(system, x)
    scale = 1.0 + np.max(np.abs(x))
    delta = np.inf
    for _ in range(maxiter):
        y_new = x + h * flow_field(system, 0.5 * (x + y))
        prev, delta = delta, np.max(np.abs(y_new - y))
        y = y_new
        if delta <= tol * scale:
            return y
        if delta > prev:
            break

    def residual(z):
        return z - x - h * flow_field(system, 0.5 * (x + z))

    res = residual(y)
    for it in range(maxiter):
        jac = _fd_jacobian(residual, y)
        step = np.linalg.solve(jac, -res)
        lam = 1.0
        norm0 = np.max(np.abs(res))
        while True:
            trial = y + lam * step
            res_trial = residual(trial)
            if np.max(np.abs(res_trial)) <= norm0 or lam < 1e-4:
                break
            lam *= 0.5
        y, res = trial, res_trial
        if np.max(np.abs(lam * step)) <= tol * scale:
            return y
    raise ConvergenceError("implicit midpoint iteration did not converge",
                           residual=float(np.max(np.abs(res))), iterations=maxiter)


def integrate(system, x0, t1, t2, steps, method="rk4"):
    """Integrate ``xdot = omega^{-1} grad H`` on a uniform grid of ``steps`` intervals.

    Periodic coordinates are integrated unwrapped and normalised at the end.
    Raises :class:`ChartExitError` when a node leaves the chart.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; choose from {METHODS}")
    steps = int(steps)
    if steps < 2:
        raise ValueError("need at least 2 steps")
    x = np.array(x0, dtype=float)
    if x.shape != (system.dim,):
        raise ValueError(f"initial point must have dimension {system.dim}")
    if not bool(system.in_chart(system.chart.wrap(x)[0])):
        raise ChartError(f"initial point {x.tolist()} is outside the chart", x)
    times = np.linspace(t1, t2, steps + 1)
    coords = np.empty((steps + 1, system.dim))
    coords[0] = x
    for k in range(steps):
        h = times[k + 1] - times[k]
        if method == "rk4":
            x = _rk4_step(system, x, h)
        else:
            x = _midpoint_step(system, x, h)
        if not bool(system.in_chart(system.chart.wrap(x)[0])):
            raise ChartExitError(
                f"trajectory left the {system.name} chart at t={times[k + 1]:.6g}",
                time=float(times[k + 1]), point=coords[k])
        coords[k + 1] = x
    return Trajectory.from_unwrapped(system, times, coords)


def energy_drift(traj):
    """``max_k |H(x_k) - H(x_0)|``."""
    if len(traj) == 0:
        raise ValueError("empty trajectory")
    energies = traj.energies()
    return float(np.max(np.abs(energies - energies[0])))


def hamilton_defect(traj):
    """Per-node ``omega_{mu nu} xdot^nu - d_mu H``, shape ``(N+1, dim)``."""
    xdot = traj.velocities()
    w = traj.system.omega(traj.points)
    return np.einsum("kmn,kn->km", w, xdot) - traj.system.grad_h(traj.points)


def stationarity_residual(traj):
    """Discrete L2 norm in time of the Hamilton-equation defect."""
    defect = hamilton_defect(traj)
    return float(np.sqrt(np.trapezoid(np.sum(defect ** 2, axis=1), traj.times)))
