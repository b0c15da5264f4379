"""Line and surface action functionals and their first variations.

Line actions are trapezoid sums over the piecewise-linear interpolant of a
trajectory: each segment contributes ``1/2 (A(x_k) + A(x_{k+1})) . dx_k -
1/2 (H_k + H_{k+1}) dt_k``.  The surface action integrates the pullback of
``omega - dH ^ dt`` cell by cell with the orientation ``d eps ^ dt > 0``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .flow import hamilton_defect
from .surfaces import VariationField, fundamental_cycle

_PRIMITIVE_TOL = 1e-6


class NotCanonicalError(ValueError):
    """The operation needs canonical coordinates."""


class PrimitiveMismatchError(ValueError):
    """A one-form's exterior derivative does not reproduce omega."""


@dataclass(frozen=True, eq=False)
class OneForm:
    """``gamma = A_mu(x) dx^mu``, optionally shifted by an exact term ``df``.

    ``coefficients`` is vectorised: ``(..., dim) -> (..., dim)``.
    """

    coefficients: Callable[[np.ndarray], np.ndarray]
    name: str = "gamma"
    gauge: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __call__(self, x):
        return np.asarray(self.coefficients(np.asarray(x, dtype=float)), dtype=float)

    def plus_exact(self, f, grad_f, name=None):
        """``gamma + df``; ``f`` is kept so boundary terms can be checked."""
        base = self.coefficients

        def shifted(x):
            return base(x) + grad_f(x)
        return OneForm(shifted, name or f"{self.name}+df", gauge=f)

    def exterior_derivative(self, x, h=1e-6):
        """Central-difference ``d_mu A_nu - d_nu A_mu`` at a batch of points."""
        x = np.asarray(x, dtype=float)
        dim = x.shape[-1]
        jac = np.stack([(self(x + h * e) - self(x - h * e)) / (2 * h) for e in np.eye(dim)],
                       axis=-2)  # [..., mu, nu] = d_mu A_nu
        return jac - np.swapaxes(jac, -1, -2)


def canonical_primitive(n):
    """``p dq`` in coordinates ``(q, p)``."""
    def coeffs(x):
        out = np.zeros_like(x)
        out[..., :n] = x[..., n:]
        return out
    return OneForm(coeffs, "p dq")


def symmetric_primitive(n):
    """``1/2 (p dq - q dp)``."""
    def coeffs(x):
        out = np.empty_like(x)
        out[..., :n] = 0.5 * x[..., n:]
        out[..., n:] = -0.5 * x[..., :n]
        return out
    return OneForm(coeffs, "(p dq - q dp)/2")


def validate_primitive(system, gamma, points, tol=_PRIMITIVE_TOL, max_samples=64):
    """Largest ``|d gamma - omega|`` over (a subsample of) ``points``."""
    pts = np.asarray(points, dtype=float).reshape(-1, system.dim)
    if len(pts) > max_samples:
        pts = pts[np.linspace(0, len(pts) - 1, max_samples).round().astype(int)]
    err = float(np.max(np.abs(gamma.exterior_derivative(pts) - system.omega(pts))))
    if err > tol:
        raise PrimitiveMismatchError(
            f"d({gamma.name}) differs from omega by {err:.3g} (> {tol:g}) on the path")
    return err


def line_integral(gamma, coords):
    """Trapezoid ``int gamma`` along the polygon through ``coords`` (unwrapped)."""
    coords = np.asarray(coords, dtype=float)
    A = gamma(coords)
    dx = np.diff(coords, axis=0)
    return float(np.sum(0.5 * (A[:-1] + A[1:]) * dx))


def _hamiltonian_integral(traj):
    return float(np.trapezoid(traj.energies(), traj.times))


def _require_canonical(system):
    if not getattr(system, "canonical", False):
        raise NotCanonicalError(f"{system.name} is not in canonical coordinates")


def line_action_canonical(traj):
    """``int (p_a qdot^a - H) dt``."""
    _require_canonical(traj.system)
    return line_integral(canonical_primitive(traj.system.n), traj.unwrapped) - \
        _hamiltonian_integral(traj)


def line_action_symmetric(traj):
    """``int (1/2 (p qdot - pdot q) - H) dt``; equals the canonical action minus ``[pq]/2``."""
    _require_canonical(traj.system)
    return line_integral(symmetric_primitive(traj.system.n), traj.unwrapped) - \
        _hamiltonian_integral(traj)


def line_action_exact(traj, gamma, check=True):
    """``int (A_mu xdot^mu - H) dt`` for a primitive ``gamma`` of omega.

    ``A`` is evaluated on unwrapped chart coordinates.
    """
    if check:
        validate_primitive(traj.system, gamma, traj.unwrapped)
    return line_integral(gamma, traj.unwrapped) - _hamiltonian_integral(traj)


def line_action_gradient(traj, gamma, h=1e-6):
    """Gradient of the discrete exact-form action with respect to interior nodes.

    This is the discrete Euler-Lagrange residual; shape ``(N-1, dim)``.
    """
    x = traj.unwrapped
    dim = x.shape[1]
    A = gamma(x)
    jac = np.stack([(gamma(x + h * e) - gamma(x - h * e)) / (2 * h) for e in np.eye(dim)],
                   axis=1)  # [k, mu, nu] = d_mu A_nu
    span = x[2:] - x[:-2]
    dt = np.diff(traj.times)
    weight = 0.5 * (dt[:-1] + dt[1:])
    grad_h = traj.system.grad_h(traj.points[1:-1])
    return (0.5 * np.einsum("kmn,kn->km", jac[1:-1], span)
            - 0.5 * (A[2:] - A[:-2]) - grad_h * weight[:, None])


# ---------------------------------------------------------------------------
# surface actions

def _cells(surf):
    X = surf.unwrapped
    a = 0.5 * ((X[1:, :-1] - X[:-1, :-1]) + (X[1:, 1:] - X[:-1, 1:]))
    b = 0.5 * ((X[:-1, 1:] - X[:-1, :-1]) + (X[1:, 1:] - X[1:, :-1]))
    centre = 0.25 * (X[:-1, :-1] + X[1:, :-1] + X[:-1, 1:] + X[1:, 1:])
    return a, b, centre


def omega_cells(surf):
    """Per-cell midpoint value of ``int omega``, shape ``(M, N)``."""
    if len(surf.eps) < 2 or len(surf.times) < 2:
        return np.zeros((max(len(surf.eps) - 1, 0), max(len(surf.times) - 1, 0)))
    a, b, centre = _cells(surf)
    return np.einsum("ijmn,ijm,ijn->ij", surf.system.omega(centre), a, b)


def dh_dt_cells(surf):
    """Per-cell ``int dH ^ dt = (Delta_eps H) Delta t``."""
    if len(surf.eps) < 2 or len(surf.times) < 2:
        return np.zeros((max(len(surf.eps) - 1, 0), max(len(surf.times) - 1, 0)))
    H = surf.system.hamiltonian(surf.points)
    dH = 0.5 * ((H[1:, :-1] - H[:-1, :-1]) + (H[1:, 1:] - H[:-1, 1:]))
    return dH * np.diff(surf.times)[None, :]


def surface_action(surf):
    """``int_sigma (omega - dH ^ dt)`` by the cell-centre midpoint rule."""
    return float(np.sum(omega_cells(surf) - dh_dt_cells(surf)))


def surface_action_reduced(surf):
    """``int dt (int_0^E omega_{mu nu} xdot^nu x'^mu d eps - (H(E,t) - H(0,t)))``.

    Node-based derivatives, nested trapezoid quadrature.
    """
    if len(surf.eps) < 2:
        return 0.0
    X = surf.unwrapped
    e_order = 2 if len(surf.eps) > 2 else 1
    t_order = 2 if len(surf.times) > 2 else 1
    xp = np.gradient(X, surf.eps, axis=0, edge_order=e_order)
    xd = np.gradient(X, surf.times, axis=1, edge_order=t_order)
    integrand = np.einsum("ikmn,ikm,ikn->ik", surf.system.omega(surf.points), xp, xd)
    inner = np.trapezoid(integrand, surf.eps, axis=0)
    H = surf.system.hamiltonian(surf.points)
    return float(np.trapezoid(inner - (H[-1] - H[0]), surf.times))


def abbreviated_action(surf, level_tol=1e-6):
    """``int_sigma omega`` (the omega-term of :func:`surface_action`).

    Warns when a boundary row is not on a level set of H within ``level_tol``.
    """
    H = surf.system.hamiltonian(surf.points)
    for name, row in (("eps=0", H[0]), ("eps=E", H[-1])):
        drift = float(np.max(row) - np.min(row))
        if drift > level_tol:
            warnings.warn(f"boundary row {name} is off its level set by {drift:.3g}",
                          RuntimeWarning, stacklevel=2)
    return float(np.sum(omega_cells(surf)))


def boundary_variation(surf, var):
    """First variation from the two boundary rows only.

    ``int (omega xdot - dH) . delta x dt |_{eps=E} - (same)|_{eps=0}``,
    trapezoid in t with central-difference velocities.
    """
    if isinstance(var, VariationField):
        delta = var.delta
    else:
        delta = VariationField(var).delta
    if len(surf.eps) < 2:
        return 0.0
    top = hamilton_defect(surf.row(-1))
    bottom = hamilton_defect(surf.row(0))
    return float(np.trapezoid(np.sum(top * delta[-1], axis=1), surf.times)
                 - np.trapezoid(np.sum(bottom * delta[0], axis=1), surf.times))


def boundary_variation_batch(surf, deltas):
    """:func:`boundary_variation` for a stack of variations ``(K, M+1, N+1, dim)``."""
    deltas = np.asarray(deltas, dtype=float)
    return boundary_variation_rows(surf, deltas[:, -1], deltas[:, 0])


def boundary_variation_rows(surf, delta_top, delta_bottom):
    """Batched first variation from row displacements alone.

    ``delta_top`` and ``delta_bottom`` have shape ``(K, N+1, dim)`` and act on
    the ``eps = E`` and ``eps = 0`` rows; interior rows do not enter.
    """
    delta_top = np.asarray(delta_top, dtype=float)
    delta_bottom = np.asarray(delta_bottom, dtype=float)
    for d in (delta_top, delta_bottom):
        if np.any(d[:, 0] != 0.0) or np.any(d[:, -1] != 0.0):
            raise ValueError("variation must vanish at t1 and t2 (fixed ends)")
    top = hamilton_defect(surf.row(-1))
    bottom = hamilton_defect(surf.row(0))
    return (np.trapezoid(np.einsum("kn,jkn->jk", top, delta_top), surf.times, axis=1)
            - np.trapezoid(np.einsum("kn,jkn->jk", bottom, delta_bottom), surf.times, axis=1))


def finite_difference_variation(surf, var, eta=1e-4, action=surface_action):
    """``(S(sigma + eta var) - S(sigma - eta var)) / (2 eta)``."""
    plus = surf.displaced(var, eta)
    minus = surf.displaced(var, -eta)
    return (action(plus) - action(minus)) / (2 * eta)


# ---------------------------------------------------------------------------
# closed loops and period groups

def _loop_closure_error(surf, row):
    diff = surf.system.chart.periodic_difference(surf.points[row, -1], surf.points[row, 0])
    return float(np.max(np.abs(diff)))


def loop_action_hz(disk, period=None, tol=1e-8):
    """``int_D omega - int H dt`` for a disk whose ``eps = 0`` row is a closed loop.

    The last row must be collapsed to a single point.
    """
    if period is not None and abs(disk.times[-1] - disk.times[0] - period) > tol:
        raise ValueError(f"disk time span {disk.times[-1] - disk.times[0]:.12g} "
                         f"does not match the period {period:.12g}")
    err = _loop_closure_error(disk, 0)
    if err > tol:
        raise ValueError(f"boundary loop is not closed (gap {err:.3g})")
    inner = disk.points[-1]
    if len(disk.eps) > 1:
        spread = np.max(np.abs(disk.system.chart.periodic_difference(inner, inner[0])))
        if spread > tol:
            raise ValueError(f"inner row is not collapsed to a point (spread {spread:.3g})")
    area = float(np.sum(omega_cells(disk)))
    return area - _hamiltonian_integral(disk.row(0))


def period_shift(system, cycle=None, n_eps=400, n_t=400, tol=1e-9):
    """``int omega`` over a cycle covering a compact 2-manifold once.

    Without ``cycle`` the fundamental domain is tiled with an
    ``n_eps x n_t`` grid.  A supplied cycle must tile that domain exactly.
    """
    if system.fundamental_domain is None:
        raise ValueError(f"{system.name} is not compact: it has no closed 2-cycle, "
                         "so there is no period group to measure")
    if cycle is None:
        cycle = fundamental_cycle(system, n_eps, n_t)
    else:
        (a0, b0), (a1, b1) = system.fundamental_domain
        X = cycle.unwrapped
        ok = (np.allclose(X[0, :, 0], a0, atol=tol) and np.allclose(X[-1, :, 0], b0, atol=tol)
              and np.allclose(X[:, 0, 1], a1, atol=tol) and np.allclose(X[:, -1, 1], b1, atol=tol))
        if not ok:
            raise ValueError("cycle grid does not tile the fundamental domain")
    return float(np.sum(omega_cells(cycle)))


def stokes_boundary_sum(surf, gamma):
    """Oriented boundary sum of exact-form line actions around a surface.

    ``S4(eps=E row) - S4(eps=0 row) + int_{t1 edge} gamma - int_{t2 edge} gamma``;
    equals :func:`surface_action` when ``gamma`` is a global primitive.
    """
    X = surf.unwrapped
    top = line_action_exact(surf.row(-1), gamma, check=False)
    bottom = line_action_exact(surf.row(0), gamma, check=False)
    return top - bottom + line_integral(gamma, X[:, 0]) - line_integral(gamma, X[:, -1])

