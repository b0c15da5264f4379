"""Two-parameter families of paths and their variations.

A :class:`Surface` samples ``x(eps, t)`` on the tensor grid
``eps_0 = 0 < ... < eps_M = E`` times ``t_1 = tau_0 < ... < tau_N = t_2``.
Its rows at ``eps = 0`` and ``eps = E`` are the boundary trajectories; the
first and last columns are the initial and final curves.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .flow import Trajectory, _check_continuity, _check_grid
from .systems import HALF_PI, TWO_PI, ChartError, flow_field


@dataclass(frozen=True, eq=False)
class Surface:
    system: object
    eps: np.ndarray
    times: np.ndarray
    points: np.ndarray
    windings: np.ndarray

    @classmethod
    def from_unwrapped(cls, system, eps, times, coords, check_chart=True):
        eps = np.atleast_1d(np.asarray(eps, dtype=float))
        if eps[0] != 0.0:
            raise ValueError("eps grid must start at 0")
        if np.any(np.diff(eps) <= 0):
            raise ValueError("degenerate cell: eps grid must be strictly increasing")
        try:
            times = _check_grid(times)
        except ValueError as exc:
            raise ValueError(f"degenerate cell: {exc}") from None
        coords = np.array(coords, dtype=float)
        shape = (len(eps), len(times), system.dim)
        if coords.shape != shape:
            raise ValueError(f"expected coordinates of shape {shape}, got {coords.shape}")
        _check_continuity(system.chart, coords, axis=0)
        _check_continuity(system.chart, coords, axis=1)
        points, windings = system.chart.wrap(coords)
        if check_chart:
            inside = system.in_chart(points)
            if not np.all(inside):
                i, k = np.unravel_index(int(np.argmin(inside)), inside.shape)
                raise ChartError(f"surface node (eps={eps[i]:.6g}, t={times[k]:.6g}) "
                                 f"is outside the chart", points[i, k])
        return cls(system, eps, times, points, windings)

    @classmethod
    def from_function(cls, system, fn, E, t1, t2, n_eps, n_t, check_chart=True):
        """Sample ``fn(eps, t) -> coords`` (broadcasting) on a uniform grid."""
        eps = np.linspace(0.0, E, n_eps + 1) if E > 0 else np.zeros(1)
        times = np.linspace(t1, t2, n_t + 1)
        ee, tt = np.meshgrid(eps, times, indexing="ij")
        coords = np.asarray(fn(ee, tt), dtype=float)
        return cls.from_unwrapped(system, eps, times, coords, check_chart)

    @classmethod
    def from_rows(cls, system, eps, trajectories, check_chart=True):
        times = trajectories[0].times
        for tr in trajectories[1:]:
            if not np.array_equal(tr.times, times):
                raise ValueError("all rows must share one time grid")
        coords = np.stack([tr.unwrapped for tr in trajectories])
        return cls.from_unwrapped(system, eps, times, coords, check_chart)

    @property
    def unwrapped(self):
        return self.points + self.system.chart.periods * self.windings

    @property
    def E(self):
        return float(self.eps[-1])

    @property
    def shape(self):
        return self.points.shape[:2]

    def row(self, i):
        """Row ``i`` (``0`` or ``-1`` for the boundaries) as a :class:`Trajectory`."""
        return Trajectory(self.system, self.times, self.points[i], self.windings[i])

    def with_coords(self, coords, check_chart=True):
        return Surface.from_unwrapped(self.system, self.eps, self.times, coords, check_chart)

    def displaced(self, var, eta, check_chart=True):
        """Node-wise ``x + eta * delta`` in chart coordinates (re-wrapped)."""
        delta = var.delta if isinstance(var, VariationField) else np.asarray(var, float)
        return self.with_coords(self.unwrapped + eta * delta, check_chart)

    def transversality(self, tol=1e-8):
        """Whether the initial and final curves are transverse to the flow.

        Checks that the discrete eps-derivative is nonzero and not parallel
        to the Hamiltonian vector field at every node of both curves.
        """
        if len(self.eps) < 2:
            return False
        for col in (0, -1):
            xs = self.unwrapped[:, col]
            dx = np.gradient(xs, self.eps, axis=0, edge_order=2 if len(self.eps) > 2 else 1)
            field = flow_field(self.system, self.points[:, col])
            nd = np.linalg.norm(dx, axis=1)
            nf = np.linalg.norm(field, axis=1)
            if np.any(nd <= tol):
                return False
            cos = np.abs(np.sum(dx * field, axis=1)) / (nd * np.where(nf > 0, nf, 1.0))
            if np.any((nf > tol) & (1.0 - cos ** 2 <= tol)):
                return False
        return True

    @property
    def transversal(self):
        return self.transversality()


@dataclass(frozen=True, eq=False)
class VariationField:
    """Node-wise displacement that vanishes on the ``t_1`` and ``t_2`` edges."""

    delta: np.ndarray

    def __post_init__(self):
        delta = np.asarray(self.delta, dtype=float)
        if delta.ndim != 3:
            raise ValueError("variation must have shape (M+1, N+1, dim)")
        if np.any(delta[:, 0] != 0.0) or np.any(delta[:, -1] != 0.0):
            raise ValueError("variation must vanish at t1 and t2 (fixed ends)")
        object.__setattr__(self, "delta", delta)

    @classmethod
    def zeros(cls, surf):
        return cls(np.zeros(surf.points.shape))

    @classmethod
    def on_rows(cls, surf, rows, profile, direction):
        """``profile(t) * direction`` on the listed rows, zero elsewhere."""
        delta = np.zeros(surf.points.shape)
        values = np.asarray(profile(surf.times), dtype=float)
        values[0] = values[-1] = 0.0
        for r in rows:
            delta[r] = values[:, None] * np.asarray(direction, float)[None, :]
        return cls(delta)

    def __add__(self, other):
        return VariationField(self.delta + other.delta)

    def scaled(self, c):
        return VariationField(c * self.delta)


def _tensor_sine_modes(rng, n_modes, s):
    """Random combination of ``sin(j pi s)``, ``j = 1..n_modes`` (zero at s = 0, 1)."""
    coeffs = rng.normal(size=n_modes) / np.arange(1, n_modes + 1)
    j = np.arange(1, n_modes + 1)
    return np.sin(np.pi * np.multiply.outer(s, j)) @ coeffs


def random_variation(surf, rng, support="all", n_modes=4):
    """Smooth random admissible variation.

    ``support`` is ``"all"`` (every node off the fixed ends), ``"boundary"``
    (rows ``eps = 0`` and ``eps = E`` only) or ``"interior"`` (zero on the
    whole boundary of the parameter rectangle).
    """
    M1, N1, dim = surf.points.shape
    s_t = (surf.times - surf.times[0]) / (surf.times[-1] - surf.times[0])
    s_e = surf.eps / surf.eps[-1] if surf.eps[-1] > 0 else np.zeros(M1)
    delta = np.zeros((M1, N1, dim))
    for m in range(dim):
        ft = _tensor_sine_modes(rng, n_modes, s_t)
        if support == "interior":
            fe = _tensor_sine_modes(rng, n_modes, s_e)
        else:
            a, b = rng.normal(size=2)
            fe = a * (1 - s_e) + b * s_e
            if support == "all":
                fe = fe + _tensor_sine_modes(rng, n_modes, s_e)
        delta[:, :, m] = np.outer(fe, ft)
    if support == "boundary":
        delta[1:-1] = 0.0
    delta[:, 0] = 0.0
    delta[:, -1] = 0.0
    if support == "interior":
        delta[0] = 0.0
        delta[-1] = 0.0
    return VariationField(delta)


# ---------------------------------------------------------------------------
# builders for the worked examples

def sphere_band_surface(system, E, t1, t2, n_eps, n_t, alpha=1.0):
    """``theta = eps``, ``phi = alpha (t - t1)``: physical iff ``alpha == 1``."""
    def fn(e, t):
        return np.stack([e, alpha * (t - t1)], axis=-1)
    return Surface.from_function(system, fn, E, t1, t2, n_eps, n_t)


def _pole_transition(pole, c_from, c_to, times, rows):
    """Rows sitting at a pole while the loop speed ``c`` in ``phi = c t`` changes.

    Every row is the single pole point, so these cells carry no area; they
    only make the chart coordinates continuous across the pole.
    """
    s = np.linspace(0.0, 1.0, rows + 1)[1:]
    c = c_from + (c_to - c_from) * s
    th = np.full((rows, len(times)), pole)
    ph = c[:, None] * (times - times[0])[None, :]
    return np.stack([th, ph], axis=-1)


def sphere_disk(system, theta0, n_t, rows_per_radian=64, wraps=0, transition_rows=16, t1=0.0,
                t2=TWO_PI):
    """Disk bounded by the loop ``theta = theta0, phi = t`` on ``[t1, t2 = t1 + 2 pi]``.

    The disk first sweeps the northern cap, then ``wraps`` extra times over
    the whole sphere (each sweep adds ``+4 pi`` to the enclosed area), and
    ends collapsed to a pole.  Chart checks are skipped: the disk passes
    through the poles, where the (theta, phi) chart degenerates.
    """
    if abs((t2 - t1) - TWO_PI) > 1e-12:
        raise ValueError("the boundary loop needs a period of 2 pi")
    times = np.linspace(t1, t2, n_t + 1)
    tau = times - t1

    def sweep(th_from, th_to, c):
        n = max(2, int(np.ceil(abs(th_to - th_from) * rows_per_radian)))
        th = np.linspace(th_from, th_to, n + 1)[1:]
        return np.stack([np.repeat(th[:, None], len(times), 1),
                         np.outer(np.full(n, c), tau)], axis=-1), np.abs(np.diff(
                             np.linspace(th_from, th_to, n + 1)))

    blocks = [np.stack([np.full(len(times), theta0), tau], axis=-1)[None]]
    steps = []
    cap, d = sweep(theta0, HALF_PI, 1.0)
    blocks.append(cap)
    steps.append(d)
    pole, c = HALF_PI, 1.0
    trans_step = 1.0 / transition_rows
    for _ in range(wraps):
        blocks.append(_pole_transition(pole, c, -c, times, transition_rows))
        steps.append(np.full(transition_rows, trans_step))
        c = -c
        body, d = sweep(pole, -pole, c)
        blocks.append(body)
        steps.append(d)
        pole = -pole
    blocks.append(_pole_transition(pole, c, 0.0, times, transition_rows))
    steps.append(np.full(transition_rows, trans_step))
    coords = np.concatenate(blocks, axis=0)
    eps = np.concatenate([[0.0], np.cumsum(np.concatenate(steps))])
    return Surface.from_unwrapped(system, eps, times, coords, check_chart=False)


def torus_stripe(system, theta0, theta1, winding, T, n_eps, n_t, wraps=0):
    """Stripe between the loops ``theta = theta0`` and ``theta = theta1`` (mod 2 pi).

    Rows move with ``phi = 2 pi winding t / T``.  ``wraps`` adds extra full
    turns in theta between the two boundary rows, leaving the boundaries
    unchanged on the torus.
    """
    top = theta1 + TWO_PI * wraps
    rows = max(n_eps, int(np.ceil(abs(top - theta0) / (np.pi / 4))))

    def fn(e, t):
        th = theta0 + (top - theta0) * e
        return np.stack([th, TWO_PI * winding * t / T + 0 * e], axis=-1)
    return Surface.from_function(system, fn, 1.0, 0.0, T, rows, n_t, check_chart=False)


def fundamental_cycle(system, n_eps, n_t):
    """Grid tiling the fundamental domain once, oriented by ``d x^0 ^ d x^1``."""
    if system.fundamental_domain is None:
        raise ValueError(f"{system.name} has no compact fundamental domain: "
                         "there is no closed 2-cycle to integrate over")
    if system.dim != 2:
        raise ValueError("fundamental cycles are only built for 2-dimensional manifolds")
    (a0, b0), (a1, b1) = system.fundamental_domain

    def fn(e, t):
        return np.stack([a0 + e, t + 0 * e], axis=-1)
    return Surface.from_function(system, fn, b0 - a0, a1, b1, n_eps, n_t, check_chart=False)
