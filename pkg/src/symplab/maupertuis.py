"""Reparametrisation-invariant orbit condition on energy level sets.

Varying ``int_sigma omega`` among surfaces whose boundary rows stay on
level sets of H gives the orbit equation ``omega(xdot, l) = 0`` for every
vector ``l`` tangent to the level set.  It fixes the orbit but not its
time parametrisation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .actions import abbreviated_action
from .surfaces import Surface

__all__ = [
    "CriticalPointError",
    "LevelSetError",
    "LevelSetFrame",
    "abbreviated_action",
    "level_set_tangent_basis",
    "maupertuis_profile",
    "maupertuis_residual",
    "maupertuis_residuals",
    "sphere_plane_family",
]

CRITICAL_TOL = 1e-10
LEVEL_TOL = 1e-6


class CriticalPointError(ValueError):
    """grad H vanishes, so the level set has no well-defined tangent space."""


class LevelSetError(ValueError):
    """A curve expected on one level set of H drifts off it."""


@dataclass(frozen=True, eq=False)
class LevelSetFrame:
    point: np.ndarray
    h0: float
    basis: np.ndarray    # (2n-1, 2n), orthonormal rows

    def tangency_defect(self, grad):
        return float(np.max(np.abs(self.basis @ grad)))

    def min_singular_value(self):
        return float(np.linalg.svd(self.basis, compute_uv=False)[-1])


def _tangent_bases(grads):
    """Orthonormal completions of each gradient, batched; returns ``(..., d-1, d)``.

    Seeds with the coordinate axes in order, dropping the one most aligned
    with the gradient, then runs Gram-Schmidt against the unit gradient.
    """
    grads = np.asarray(grads, dtype=float)
    d = grads.shape[-1]
    flat = grads.reshape(-1, d)
    out = np.empty((len(flat), d - 1, d))
    for k, g in enumerate(flat):
        norm = np.linalg.norm(g)
        if norm < CRITICAL_TOL:
            raise CriticalPointError(f"critical point of H (|grad H| = {norm:.3g})")
        drop = int(np.argmax(np.abs(g)))
        vecs = [g / norm]
        for axis in range(d):
            if axis == drop:
                continue
            v = np.zeros(d)
            v[axis] = 1.0
            for u in vecs:
                v = v - (u @ v) * u
            v /= np.linalg.norm(v)
            vecs.append(v)
        out[k] = np.array(vecs[1:])
    return out.reshape(grads.shape[:-1] + (d - 1, d))


def level_set_tangent_basis(system, x):
    """Orthonormal basis of the tangent space of ``{H = H(x)}`` at ``x``.

    Raises
    ------
    CriticalPointError
        If ``|grad H(x)| < 1e-10``.
    """
    x = np.asarray(x, dtype=float)
    basis = _tangent_bases(system.grad_h(x))
    return LevelSetFrame(x, float(system.hamiltonian(x)), basis)


def _check_level(traj, level_tol):
    H = traj.energies()
    drift = float(np.max(np.abs(H - H[0])))
    if drift > level_tol:
        raise LevelSetError(f"curve leaves the level set H = {H[0]:.6g} by {drift:.3g}")
    return H


def maupertuis_residuals(traj, level_tol=LEVEL_TOL):
    """Per-node ``max_l |omega(xdot, l)| / (|xdot| |l|)`` over the level-set frame."""
    _check_level(traj, level_tol)
    xdot = traj.velocities()
    system = traj.system
    bases = _tangent_bases(system.grad_h(traj.points))
    w = system.omega(traj.points)
    pairing = np.einsum("km,kmn,kjn->kj", xdot, w, bases)
    speed = np.linalg.norm(xdot, axis=1)
    if np.any(speed == 0.0):
        k = int(np.argmin(speed))
        raise ValueError(f"curve is stationary at node {k}; direction undefined")
    return np.max(np.abs(pairing), axis=1) / speed


def maupertuis_residual(traj, level_tol=LEVEL_TOL):
    """Maximum normalised orbit-equation defect over interior nodes.

    Normalising by ``|xdot|`` makes the value independent of the speed
    along the curve, so monotone reparametrisations leave it unchanged up
    to differencing error.
    """
    return float(np.max(maupertuis_residuals(traj, level_tol)[1:-1]))


def maupertuis_profile(traj, level_tol=LEVEL_TOL):
    """Columns ``t, residual, H`` for export."""
    res = maupertuis_residuals(traj, level_tol)
    return np.column_stack([traj.times, res, traj.energies()])


def sphere_plane_family(system, alpha, beta, E, t1, t2, n_eps, n_t):
    """Surface on the sphere x plane with level-set boundary rows.

    ``theta = alpha eps``, ``phi = t - t1``, ``q = beta eps (t - t1)``,
    ``p = beta eps``.  Every row is a physical orbit on its own level set
    ``H = sin(alpha eps) + (beta eps)^2 / 2``.  The abbreviated action is
    ``T sin(alpha E) + beta^2 E^2 T / 2``: the ``dp ^ dq`` part equals
    ``int p dq`` along the top row minus ``int p dq`` along the final edge,
    which carries half of the row contribution back out.
    """
    def fn(e, t):
        s = t - t1
        return np.stack([alpha * e, s, beta * e * s, beta * e + 0 * s], axis=-1)
    return Surface.from_function(system, fn, E, t1, t2, n_eps, n_t)
