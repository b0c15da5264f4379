"""Numerical studies behind the scenarios and the acceptance suite.

Each function returns plain data (dicts, arrays, row lists) so that the CLI
can turn it into reports and the tests can assert on it directly.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import brentq

from .actions import (
    OneForm,
    abbreviated_action,
    boundary_variation_rows,
    canonical_primitive,
    finite_difference_variation,
    line_action_canonical,
    line_action_exact,
    line_action_symmetric,
    loop_action_hz,
    omega_cells,
    period_shift,
    stokes_boundary_sum,
    surface_action,
    surface_action_reduced,
)
from .flow import Trajectory, integrate, stationarity_residual
from .maupertuis import maupertuis_residual, sphere_plane_family
from .residual import (
    EndpointSpec,
    endpoint_landscape,
    free_particle_closed_form,
    mesh_around,
    minimal_path,
    richardson,
)
from .surfaces import Surface, random_variation, sphere_band_surface, sphere_disk, torus_stripe
from .systems import (
    TWO_PI,
    antisymmetry_defect,
    builtin_system,
    check_closedness,
    inverse_defect,
    poisson_bracket,
    polar_canonical_transform,
    sample_chart_points,
)


def observed_orders(h, err):
    """``log(e_i / e_{i+1}) / log(h_i / h_{i+1})`` for consecutive levels."""
    h = np.asarray(h, dtype=float)
    err = np.abs(np.asarray(err, dtype=float))
    return np.log(err[:-1] / err[1:]) / np.log(h[:-1] / h[1:])


# ---------------------------------------------------------------------------
# sphere stationarity

def positive_row_profiles(times, count, rng, n_modes=4):
    """Unit-norm profiles ``sum_j c_j sin^2(j pi s)`` with ``c_j >= 0``.

    The trapezoid rule integrates these trigonometric polynomials exactly
    once the grid has more than ``4 n_modes`` intervals, so the same
    coefficients give grid-independent norms and pairings.
    """
    s = (times - times[0]) / (times[-1] - times[0])
    coeffs = rng.uniform(0.0, 1.0, size=(count, n_modes))
    modes = np.sin(np.pi * np.multiply.outer(np.arange(1, n_modes + 1), s)) ** 2
    prof = coeffs @ modes
    prof[:, 0] = prof[:, -1] = 0.0
    norms = np.sqrt(np.trapezoid(prof ** 2, times, axis=1))
    return prof / norms[:, None]


def row_variation_minimum(surf, count, seed, component=0):
    """Min and max of ``|dS|`` over positive unit variations of the outer row."""
    rng = np.random.default_rng(seed)
    prof = positive_row_profiles(surf.times, count, rng)
    top = np.zeros(prof.shape + (surf.system.dim,))
    top[..., component] = prof
    ds = np.abs(boundary_variation_rows(surf, top, np.zeros_like(top)))
    return float(np.min(ds)), float(np.max(ds))


def stationarity_sweep(alphas=(0.8, 1.0, 1.2), n_eps=40, n_t=400, levels=3, variations=100,
                       seed=0, E=0.5, T=TWO_PI, margin=0.05):
    """Min ``|boundary_variation|`` over seeded variations, with grid doubling.

    Returns rows ``(alpha, grid_N, grid_M, min_abs_dS, max_abs_dS)``.
    """
    system = builtin_system("sphere", margin=margin)
    rows = []
    for alpha in alphas:
        for level in range(levels):
            m, n = n_eps * 2 ** level, n_t * 2 ** level
            surf = sphere_band_surface(system, E, 0.0, T, m, n, alpha=alpha)
            lo, hi = row_variation_minimum(surf, variations, seed)
            rows.append((float(alpha), n, m, lo, hi))
    return rows


def stationarity_diagnostics(alpha, n_eps=40, n_t=400, variations=100, seed=0, E=0.5,
                             T=TWO_PI, eta=1e-4):
    """General random boundary variations and a finite-difference cross-check."""
    system = builtin_system("sphere")
    surf = sphere_band_surface(system, E, 0.0, T, n_eps, n_t, alpha=alpha)
    rng = np.random.default_rng(seed)
    vals = []
    var = None
    for _ in range(variations):
        var = random_variation(surf, rng, support="boundary")
        d = var.delta
        vals.append(boundary_variation_rows(surf, d[None, -1], d[None, 0])[0])
    vals = np.abs(np.array(vals))
    fd = finite_difference_variation(surf, var, eta)
    bv = boundary_variation_rows(surf, var.delta[None, -1], var.delta[None, 0])[0]
    return {"min_abs": float(vals.min()), "max_abs": float(vals.max()),
            "fd": float(fd), "boundary": float(bv), "fd_gap": float(abs(fd - bv))}


# ---------------------------------------------------------------------------
# surface-action values and Stokes invariance

def sphere_surface_values(n_eps=4096, n_t=64, E=0.5, T=TWO_PI):
    system = builtin_system("sphere")
    surf = sphere_band_surface(system, E, 0.0, T, n_eps, n_t)
    s = surface_action(surf)
    r = surface_action_reduced(surf)
    return {"surface_action": s, "reduced": r, "difference": abs(s - r)}


def _stokes_base(e, t, E, T):
    theta = e + 0.1 * np.sin(TWO_PI * t / T) * e * (E - e)
    phi = t + 0.3 * e * np.cos(TWO_PI * t / T)
    return np.stack([theta, phi], axis=-1)


def _stokes_bump(e, t, E, T):
    b = np.sin(np.pi * e / E) * np.sin(np.pi * t / T)
    return np.stack([0.1 * b, 0.4 * b * np.cos(TWO_PI * t / T)], axis=-1)


def stokes_invariance_study(grids=((16, 64), (32, 128), (64, 256), (128, 512)), E=0.5,
                            T=TWO_PI, amplitude=1.0):
    """Change of S under an interior-only deformation, for a sequence of grids.

    The continuum change is exactly zero, so the values are pure
    discretisation error.  Returns rows ``(n_eps, n_t, h, abs_change)``.
    """
    system = builtin_system("sphere")
    rows = []
    for m, n in grids:
        base = Surface.from_function(system, lambda e, t: _stokes_base(e, t, E, T), E, 0.0, T, m, n)
        moved = Surface.from_function(
            system, lambda e, t: _stokes_base(e, t, E, T) + amplitude * _stokes_bump(e, t, E, T),
            E, 0.0, T, m, n)
        np.testing.assert_array_equal(base.points[[0, -1]], moved.points[[0, -1]])
        rows.append((m, n, T / n, abs(surface_action(moved) - surface_action(base))))
    return rows


# ---------------------------------------------------------------------------
# torus periodic orbits

def torus_band_roots(T):
    """Feasible winding numbers and both branches of ``cos(theta) = 2 pi n / T``."""
    nmax = int(np.floor(T / TWO_PI + 1e-12))
    out = []
    for n in range(-nmax, nmax + 1):
        c = TWO_PI * n / T
        if abs(c) > 1.0:
            continue

        def f(th):
            return np.cos(th) - c
        if f(0.0) == 0.0:
            theta = 0.0
        elif f(np.pi) == 0.0:
            theta = np.pi
        else:
            theta = brentq(f, 0.0, np.pi, xtol=1e-15, rtol=4 * np.finfo(float).eps)
        out.append((n, "principal", theta))
        mirror = TWO_PI - theta
        if 0.0 < theta < np.pi:
            out.append((n, "mirror", mirror))
    return out


def torus_bands(T=20.0, steps=2000):
    """Solve and verify every band; rows ``(n, branch, theta, cos_defect, closure)``."""
    system = builtin_system("torus")
    rows = []
    for n, branch, theta in torus_band_roots(T):
        traj = integrate(system, np.array([theta, 0.0]), 0.0, T, steps)
        end = traj.unwrapped[-1]
        closure = max(abs(end[0] - theta), abs(end[1] - TWO_PI * n))
        rows.append((n, branch, theta, abs(np.cos(theta) - TWO_PI * n / T), closure))
    return rows


# ---------------------------------------------------------------------------
# period group

def sphere_wrap_actions(wraps=(0, 1, 2, 3), n_t=256, theta0=0.0):
    system = builtin_system("sphere")
    return [(k, loop_action_hz(sphere_disk(system, theta0, n_t, wraps=k))) for k in wraps]


def torus_wrap_actions(wraps=(0, 1, 2, 3), theta0=0.5, theta1=1.0, n_t=64, T=TWO_PI):
    system = builtin_system("torus")
    return [(k, surface_action(torus_stripe(system, theta0, theta1, 1, T, 8, n_t, wraps=k)))
            for k in wraps]


def period_group_table(wraps=(0, 1, 2, 3)):
    """Rows ``(system, k, action, shift, expected_shift)`` plus the cycle integrals."""
    rows = []
    quanta = {"sphere": 4 * np.pi, "torus": 4 * np.pi ** 2}
    for name, values in (("sphere", sphere_wrap_actions(wraps)),
                         ("torus", torus_wrap_actions(wraps))):
        base = values[0][1]
        for k, s in values:
            rows.append((name, k, s, s - base, k * quanta[name]))
    cycles = {name: period_shift(builtin_system(name)) for name in quanta}
    return rows, cycles


def shift_slope(rows, name):
    ks = np.array([r[1] for r in rows if r[0] == name], dtype=float)
    shifts = np.array([r[3] for r in rows if r[0] == name])
    slope, intercept = np.polyfit(ks, shifts, 1)
    return float(slope), float(np.max(np.abs(shifts - (slope * ks + intercept))))


# ---------------------------------------------------------------------------
# free-particle minimal paths

def free_particle_system():
    return builtin_system("canonical", n=1, hamiltonian="free_particle")


def free_particle_agreement(alphas=(0.9, 1.0, 1.1), betas=(-0.1, 0.0, 0.1), q0=0.0, p0=1.0,
                            T=1.0, levels=(200, 400)):
    """Collocation vs closed form after Richardson extrapolation of the norm squared.

    Rows ``(alpha, beta, N, norm_fine, norm_extrapolated, norm_closed_form, error)``.
    """
    system = free_particle_system()
    rows = []
    for a in alphas:
        for b in betas:
            ends = EndpointSpec.free_particle([q0], [p0], T, a, b)
            sq = [minimal_path(system, ends, N).norm ** 2 for N in levels]
            extrap = np.sqrt(max(richardson(sq[0], sq[1]), 0.0))
            exact = free_particle_closed_form(ends).norm
            rows.append((a, b, levels[-1], float(np.sqrt(sq[-1])), float(extrap), exact,
                         float(abs(extrap - exact))))
    return rows


def beta_slope(T=1.0, betas=np.linspace(-0.2, 0.2, 9), q0=0.0, p0=1.0, levels=(200, 400)):
    """Regress the norm squared on ``beta^2`` at ``alpha = 1``.

    The minimiser has ``qdot - p = A`` constant, and the norm squared splits
    as ``A^2 (T + T^3/12) + beta^2 / T``.  ``A`` is measured from the
    numerical path; removing its part leaves the additive ``beta^2/T`` term,
    whose slope is returned together with the raw slope of the unreduced
    norm squared (``1/T + 3T/(T^2 + 12)``).
    """
    system = free_particle_system()
    reduced, raw = [], []
    for b in betas:
        ends = EndpointSpec.free_particle([q0], [p0], T, 1.0, b)
        sq, As = [], []
        for N in levels:
            res = minimal_path(system, ends, N)
            path = res.path
            u = np.gradient(path.q[:, 0], path.step, edge_order=2) - path.p[:, 0]
            As.append(np.trapezoid(u, dx=path.step) / T)
            sq.append(res.norm ** 2)
        n2, A = richardson(*sq), richardson(*As)
        reduced.append(n2 - A * A * (T + T ** 3 / 12))
        raw.append(n2)
    b2 = np.asarray(betas) ** 2
    return float(np.polyfit(b2, reduced, 1)[0]), float(np.polyfit(b2, raw, 1)[0])


def zero_iff_correct(alphas=(0.9, 1.0, 1.1), betas=(-0.1, 0.0, 0.1), N=200, q0=0.0, p0=1.0,
                     T=1.0):
    system = free_particle_system()
    out = []
    for a in alphas:
        for b in betas:
            ends = EndpointSpec.free_particle([q0], [p0], T, a, b)
            out.append((a, b, minimal_path(system, ends, N).norm))
    return out


def landscape_study(hamiltonian="free_particle", start=(0.0, 1.0), T=1.0, spacing=0.05,
                    half_width=10, N=100):
    system = builtin_system("canonical", n=1, hamiltonian=hamiltonian)
    image = integrate(system, np.array(start, float), 0.0, T, 2000).end
    centre = np.round(image / spacing) * spacing
    qs = mesh_around(centre[0], spacing, half_width)
    ps = mesh_around(centre[1], spacing, half_width)
    return endpoint_landscape(system, start, T, qs, ps, N=N)


def landscape_margins(land):
    """Minimum at the argmin node and the smallest value at every other node."""
    mask = np.ones(land.norms.shape, dtype=bool)
    mask[land.argmin] = False
    others = np.where(land.converged & mask, land.norms, np.inf)
    return land.minimum, float(np.min(others))


# ---------------------------------------------------------------------------
# Maupertuis

def _sphere_plane_orbit(s, theta=0.2, p=0.3):
    s = np.asarray(s, dtype=float)
    return np.stack([np.full_like(s, theta), s, p * s, np.full_like(s, p)], axis=-1)


def maupertuis_study(n_t=400, T=TWO_PI, theta=0.2, p=0.3):
    """Orbit residual, its ``t -> t^3`` reparametrisation and a negative control."""
    system = builtin_system("sphere_times_plane")
    orbit = integrate(system, np.array([theta, 0.0, 0.0, p]), 0.0, T, n_t)
    drift = float(np.max(np.abs(orbit.unwrapped - _sphere_plane_orbit(orbit.times, theta, p))))
    tau = np.linspace(0.0, np.cbrt(T), n_t + 1)
    reparam = Trajectory.from_unwrapped(system, tau, _sphere_plane_orbit(tau ** 3, theta, p))
    t = orbit.times
    h0 = np.sin(theta) + 0.125
    th = theta + 0.05 * np.sin(t)
    control = Trajectory.from_unwrapped(
        system, t, np.stack([th, t, p * t, np.sqrt(2 * (h0 - np.sin(th)))], axis=-1))
    r_orbit = maupertuis_residual(orbit)
    r_reparam = maupertuis_residual(reparam)
    return {"orbit": r_orbit, "reparametrised": r_reparam,
            "reparam_change": abs(r_reparam - r_orbit), "control": maupertuis_residual(control),
            "orbit_vs_exact": drift, "trajectories": (orbit, reparam, control)}


def sphere_plane_gamma():
    """``sin(theta) dphi + p dq``, a primitive of the sphere x plane form on the chart."""
    def coeffs(x):
        x = np.asarray(x, dtype=float)
        z = np.zeros(x.shape[:-1])
        return np.stack([z, np.sin(x[..., 0]), x[..., 3], z], axis=-1)
    return OneForm(coeffs, "sin(theta) dphi + p dq")


def abbreviated_study(alpha=0.5, beta=0.3, E=1.0, T=2.0, n=200):
    system = builtin_system("sphere_times_plane")
    surf = sphere_plane_family(system, alpha, beta, E, 0.0, T, n, n)
    sm = abbreviated_action(surf)
    exact = T * np.sin(alpha * E) + beta ** 2 * E ** 2 * T / 2
    row_split = T * np.sin(alpha * E) + beta ** 2 * E ** 2 * T
    gamma = sphere_plane_gamma()
    H = system.hamiltonian(surf.points)
    full = surface_action(surf)
    relabelled = Surface(system, surf.eps, T * (surf.times / T) ** 2 + 0.0 * surf.times,
                         surf.points, surf.windings)
    return {"abbreviated": sm, "exact": exact, "error": abs(sm - exact),
            "row_only_split": row_split,
            "edge_term": beta ** 2 * E ** 2 * T / 2,
            "stokes_gap": abs(stokes_boundary_sum(surf, gamma) - full),
            "consistency_gap": abs(full - (sm - (H[-1, 0] - H[0, 0]) * T)),
            "relabel_change": abs(abbreviated_action(relabelled) - sm)}


# ---------------------------------------------------------------------------
# action relations

def _canonical_paths(N=2000):
    """Analytic test paths on ``[0, 2]`` for the canonical n = 1 structure."""
    t = np.linspace(0.0, 2.0, N + 1)
    return t, [
        ("harmonic", lambda s: np.stack([np.cos(s), -np.sin(s)], -1)),
        ("free", lambda s: np.stack([0.2 + 0.7 * s, 0.7 + 0 * s], -1)),
        ("spiral", lambda s: np.stack([(1 + 0.3 * s) * np.sin(1.3 * s + 0.4),
                                       (1 + 0.3 * s) * np.cos(1.3 * s + 0.4)], -1)),
    ]


def _five_point(fn, t, h=1e-3):
    return (fn(t - 2 * h) - 8 * fn(t - h) + 8 * fn(t + h) - fn(t + 2 * h)) / (12 * h)


def action_relations(seed=0, points=100):
    """Rows ``(relation, case, measured, expected, error)``."""
    system = builtin_system("canonical", n=1, hamiltonian="harmonic")
    rows = []
    times, paths = _canonical_paths()
    gamma = canonical_primitive(1)
    shifted = gamma.plus_exact(lambda x: x[..., 0] * x[..., 1],
                               lambda x: np.stack([x[..., 1], x[..., 0]], -1))
    for name, fn in paths:
        traj = Trajectory.from_unwrapped(system, times, fn(times))
        x1, x2 = traj.points[0], traj.points[-1]
        s2, s3 = line_action_canonical(traj), line_action_symmetric(traj)
        bracket = 0.5 * (x2[0] * x2[1] - x1[0] * x1[1])
        rows.append(("S3 = S2 - [pq]/2", name, s3, s2 - bracket, abs(s3 - (s2 - bracket))))
        s4, s4g = line_action_exact(traj, gamma), line_action_exact(traj, shifted)
        df = x2[0] * x2[1] - x1[0] * x1[1]
        rows.append(("gauge shift d(qp)", name, s4g - s4, df, abs(s4g - s4 - df)))

        def qp(s, fn=fn):
            return fn(s)
        xs = qp(times)
        dx = _five_point(qp, times)
        lhs = 0.5 * (xs[:, 1] * dx[:, 0] - xs[:, 0] * dx[:, 1])

        def phi_unwrapped(s, fn=fn):
            x = fn(s)
            return np.unwrap(polar_canonical_transform(x[..., 0], x[..., 1])[0])
        _, P = polar_canonical_transform(xs[:, 0], xs[:, 1])
        phidot = _five_point(phi_unwrapped, times)
        err = float(np.max(np.abs(lhs - P * phidot)))
        rows.append(("(p qdot - q pdot)/2 = P phidot", name, err, 0.0, err))

    sys2 = builtin_system("canonical", n=2, hamiltonian="harmonic")
    rng = np.random.default_rng(seed)
    worst = 0.0
    got = 0
    while got < points:
        x = rng.uniform(-2.0, 2.0, size=4)
        r = np.hypot(x[:2], x[2:])
        if np.any(r <= 0.1):
            continue
        got += 1
        for i in range(2):
            for j in range(2):
                def phi_i(y, i=i):
                    return polar_canonical_transform(y[..., i], y[..., 2 + i])[0]

                def P_j(y, j=j):
                    return polar_canonical_transform(y[..., j], y[..., 2 + j])[1]
                val = poisson_bracket(sys2, phi_i, P_j, x)
                worst = max(worst, abs(val - (1.0 if i == j else 0.0)))
    rows.append(("{phi_i, P_j} = delta_ij", f"{points} random points", worst, 0.0, worst))
    return rows


def action_examples():
    """Worked line-action values: rows ``(case, measured, expected)``."""
    out = []
    osc = builtin_system("canonical", n=1, hamiltonian="harmonic")
    t = np.linspace(0.0, TWO_PI, 2001)
    loop = Trajectory.from_unwrapped(osc, t, np.stack([np.cos(t), -np.sin(t)], -1))
    out.append(("S2 oscillator loop", line_action_canonical(loop), 0.0))
    out.append(("S3 oscillator loop", line_action_symmetric(loop), 0.0))
    free = free_particle_system()
    t = np.linspace(0.0, 1.0, 101)
    path = Trajectory.from_unwrapped(free, t, np.stack([t, np.ones_like(t)], -1))
    out.append(("S2 free particle", line_action_canonical(path), 0.5))
    out.append(("S3 free particle", line_action_symmetric(path), 0.0))
    torus = builtin_system("torus")
    t = np.linspace(0.0, TWO_PI, 401)
    orbit = Trajectory.from_unwrapped(torus, t, np.stack([np.full_like(t, np.pi / 3), 0.5 * t], -1))
    gamma = OneForm(lambda x: np.stack([np.zeros(np.shape(x)[:-1]), np.asarray(x)[..., 0]], -1),
                    "theta dphi")
    out.append(("S4 torus theta dphi", line_action_exact(orbit, gamma),
                TWO_PI * (np.pi / 6 - np.sqrt(3) / 2)))
    return out


def canonical_stokes_gap(n=64):
    """Surface action vs the oriented boundary sum of ``p dq`` line actions."""
    system = free_particle_system()

    def fn(e, t):
        return np.stack([e + t + 0.2 * np.sin(2 * t) * e, 1.0 + 0.5 * e * np.cos(t)], -1)
    surf = Surface.from_function(system, fn, 1.0, 0.0, 2.0, n, n)
    return abs(surface_action(surf) - stokes_boundary_sum(surf, canonical_primitive(1)))


# ---------------------------------------------------------------------------
# convergence and validation

def rk4_order_study(steps=(50, 100, 200, 400, 800), T=TWO_PI):
    system = builtin_system("canonical", n=1, hamiltonian="harmonic")
    errs = []
    for n in steps:
        end = integrate(system, np.array([1.0, 0.0]), 0.0, T, n).end
        errs.append(float(np.max(np.abs(end - [np.cos(T), -np.sin(T)]))))
    return [T / n for n in steps], errs


def stationarity_order_study(steps=(50, 100, 200, 400, 800), T=TWO_PI):
    system = builtin_system("canonical", n=1, hamiltonian="harmonic")
    errs = []
    for n in steps:
        t = np.linspace(0.0, T, n + 1)
        traj = Trajectory.from_unwrapped(system, t, np.stack([np.cos(t), -np.sin(t)], -1))
        errs.append(stationarity_residual(traj))
    return [T / n for n in steps], errs


def quadrature_consistency_study(grids=(12, 24, 48, 96, 192)):
    """``|surface_action - surface_action_reduced|`` on a smooth canonical surface."""
    system = builtin_system("canonical", n=1, hamiltonian="harmonic")

    def fn(e, t):
        return np.stack([np.cos(t) + 0.3 * e * np.sin(2 * t + e),
                         -np.sin(t) + 0.5 * e + 0.2 * e * e * np.cos(t)], -1)
    errs = []
    for n in grids:
        surf = Surface.from_function(system, fn, 1.0, 0.0, 2.0, n, n)
        errs.append(abs(surface_action(surf) - surface_action_reduced(surf)))
    return [1.0 / n for n in grids], errs


VALIDATION_SYSTEMS = (
    ("canonical", {"n": 1}),
    ("canonical", {"n": 2}),
    ("sphere", {}),
    ("sphere_xy_chart", {}),
    ("torus", {}),
    ("sphere_times_plane", {}),
    ("nonclosed_demo", {}),
)


def validation_suite(points=1000, seed=0, h=1e-4):
    """Rows ``(system, closedness, antisymmetry, inverse)`` over random chart points."""
    rng = np.random.default_rng(seed)
    rows = []
    for name, params in VALIDATION_SYSTEMS:
        system = builtin_system(name, **params)
        pts = sample_chart_points(system, points, rng, margin=10 * h)
        closed = [check_closedness(system, x, h) for x in pts]
        label = name + "".join(f"({k}={v})" for k, v in params.items())
        rows.append((label, float(np.max(closed)), float(np.min(closed)),
                     antisymmetry_defect(system, pts), inverse_defect(system, pts)))
    return rows


def disk_area_check(n_t=256):
    """Cap above the equator: ``int omega = 2 pi``, ``int H dt = 0``."""
    system = builtin_system("sphere")
    disk = sphere_disk(system, 0.0, n_t)
    return float(np.sum(omega_cells(disk)))
