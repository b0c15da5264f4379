"""Named experiments run from configuration files.

Every scenario turns one :class:`~symplab.config.ScenarioConfig` into a
:class:`~symplab.report.Report` holding (value, tolerance, verdict) checks
and the CSV tables it produced.  Solver failures become failed checks
rather than exceptions.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace
from typing import Callable

import numpy as np

from . import experiments as ex
from .config import ConfigError
from .maupertuis import maupertuis_profile
from .report import Report
from .systems import TWO_PI, builtin_system

RELATIVE_SLACK = 1e-9


@dataclass(frozen=True)
class Scenario:
    name: str
    run: Callable
    summary: str
    defaults: dict
    systems: tuple = ()


def _sphere_stationarity(cfg, rep):
    alphas = cfg.get("alpha")
    n_eps, n_t = cfg.get("n_eps"), cfg.get("n_t")
    levels, K = cfg.get("levels"), cfg.get("variations")
    margin = cfg.system_params.get("margin", 0.05)
    rows = ex.stationarity_sweep(alphas, n_eps, n_t, levels, K, cfg.seed, cfg.get("E"),
                                 cfg.get("T"), margin)
    rep.table("variation_sweep.csv", ["alpha", "min_abs_dS", "grid_N"],
              [(a, lo, n) for a, n, _, lo, _ in rows])
    diag = []
    for alpha in alphas:
        mine = [r for r in rows if r[0] == alpha]
        if abs(alpha - 1.0) < 1e-12:
            rep.expect(f"alpha={alpha:g} min|dS| (grid {n_eps}x{n_t})", mine[0][3], "<=",
                       cfg.tol("stationary", 1e-6))
        else:
            rep.expect(f"alpha={alpha:g} min|dS| over all grids", min(r[3] for r in mine), ">=",
                       cfg.tol("nonstationary", 1e-2))
            steps = [(b[3] - a[3]) / a[3] for a, b in zip(mine, mine[1:])]
            rep.expect(f"alpha={alpha:g} relative change under grid doubling",
                       min(steps) if steps else 0.0, ">=", -RELATIVE_SLACK,
                       note="non-decreasing up to round-off")
        d = ex.stationarity_diagnostics(alpha, n_eps, n_t, K, cfg.seed, cfg.get("E"), cfg.get("T"))
        diag.append((alpha, d["min_abs"], d["max_abs"], d["fd"], d["boundary"], d["fd_gap"]))
    rep.table("variation_diagnostics.csv",
              ["alpha", "min_abs_dS_random", "max_abs_dS_random", "fd_variation",
               "boundary_variation", "fd_gap"], diag)


def _torus_periodic(cfg, rep):
    T = cfg.get("T")
    rows = ex.torus_bands(T, cfg.get("n_t"))
    rep.table("torus_bands.csv", ["n", "branch", "theta", "cos_defect", "closure_error"], rows)
    nmax = int(np.floor(T / TWO_PI))
    found = sorted({r[0] for r in rows})
    rep.expect("feasible bands match |2 pi n / T| <= 1",
               float(found == list(range(-nmax, nmax + 1))), "==", 1.0)
    rep.expect("band count", len(found), "==", 2 * nmax + 1)
    rep.expect("max |cos theta* - 2 pi n / T|", max(r[3] for r in rows), "<=",
               cfg.tol("root", 1e-10))
    rep.expect("max loop closure error", max(r[4] for r in rows), "<=", cfg.tol("closure", 1e-6))


def _free_particle_landscape(cfg, rep):
    T = cfg.get("T")
    half = (cfg.get("mesh") - 1) // 2
    land = ex.landscape_study("free_particle", (0.0, 1.0), T, cfg.get("mesh_spacing"), half,
                              cfg.get("N"))
    rep.table("landscape.csv", ["qT", "pT", "norm", "converged"], land.rows())
    minimum, others = ex.landscape_margins(land)
    rep.expect("landscape nodes converged", float(np.mean(land.converged)), "==", 1.0)
    rep.expect("argmin within one cell of the flow image", float(land.argmin_matches_flow),
               "==", 1.0)
    rep.expect("minimum at argmin", minimum, "<=", cfg.tol("zero", 1e-10))
    rep.expect("smallest norm at other nodes", others, ">=", cfg.tol("gap", 1e-4))

    alphas, betas = cfg.get("alpha"), cfg.get("beta")
    rows = ex.free_particle_agreement(alphas, betas, T=T, levels=(2 * cfg.get("N"),
                                                                  4 * cfg.get("N")))
    rep.table("minimal_paths.csv",
              ["alpha", "beta", "N", "norm", "norm_extrapolated", "norm_closed_form", "abs_error"],
              rows)
    rep.expect("closed form vs extrapolated collocation", max(r[6] for r in rows), "<=",
               cfg.tol("agreement", 1e-8))
    correct = [r[3] for r in rows if r[0] == 1.0 and r[1] == 0.0]
    wrong = [r[3] for r in rows if not (r[0] == 1.0 and r[1] == 0.0)]
    if correct:
        rep.expect("norm at alpha=1, beta=0", correct[0], "<=", cfg.tol("zero", 1e-10))
    if wrong:
        rep.expect("smallest norm at wrong end points", min(wrong), ">=", cfg.tol("wrong", 1e-3))
    slope, raw = ex.beta_slope(T)
    rep.expect("beta^2 slope of the reduced norm squared", slope, "==", 1.0 / T,
               cfg.tol("slope", 1e-6), note=f"raw slope {raw:.10g}")


def _period_group(cfg, rep):
    wraps = cfg.get("wraps")
    rows, cycles = ex.period_group_table(wraps)
    rep.table("period_shifts.csv", ["system", "k", "action", "shift", "expected_shift"], rows)
    rep.expect("sphere cycle integral", cycles["sphere"], "==", 4 * np.pi, cfg.tol("cycle", 1e-4))
    rep.expect("torus cycle integral", cycles["torus"], "==", 4 * np.pi ** 2, cfg.tol("cycle", 1e-4))
    for name in ("sphere", "torus"):
        mine = [r for r in rows if r[0] == name]
        rep.expect(f"{name} max |shift - k quantum|", max(abs(r[3] - r[4]) for r in mine), "<=",
                   cfg.tol("shift", 1e-3))
        if len(mine) > 1:
            slope, resid = ex.shift_slope(rows, name)
            quantum = 4 * np.pi if name == "sphere" else 4 * np.pi ** 2
            rep.expect(f"{name} shift per wrap", slope, "==", quantum, cfg.tol("shift", 1e-3))
            rep.expect(f"{name} deviation from linearity", resid, "<=", cfg.tol("shift", 1e-3))


def _maupertuis_demo(cfg, rep):
    study = ex.maupertuis_study(cfg.get("n_t"))
    orbit, _, control = study["trajectories"]
    rep.table("maupertuis_profile.csv", ["t", "residual", "H"], maupertuis_profile(orbit))
    rep.table("maupertuis_control_profile.csv", ["t", "residual", "H"], maupertuis_profile(control))
    rep.expect("orbit residual", study["orbit"], "<=", cfg.tol("orbit", 1e-6))
    rep.expect("change under t -> t^3", study["reparam_change"], "<=", cfg.tol("orbit", 1e-6))
    rep.expect("negative control residual", study["control"], ">=", cfg.tol("control", 1e-2))
    ab = ex.abbreviated_study(n=cfg.get("n_eps"))
    rep.table("abbreviated_action.csv", ["quantity", "value"],
              [(k, ab[k]) for k in ("abbreviated", "exact", "error", "row_only_split",
                                    "edge_term", "stokes_gap", "consistency_gap",
                                    "relabel_change")])
    rep.expect("abbreviated action vs analytic value", ab["error"], "<=",
               cfg.tol("quadrature", 1e-5))
    rep.expect("abbreviated action vs boundary line integrals", ab["stokes_gap"], "<=",
               cfg.tol("quadrature", 1e-5))
    rep.expect("S = S_M - (h_E - h_0) T", ab["consistency_gap"], "<=", cfg.tol("exact", 1e-8))
    rep.expect("S_M under monotone relabelling of t", ab["relabel_change"], "<=",
               cfg.tol("exact", 1e-8))


def _action_equivalence(cfg, rep):
    rows = ex.action_relations(cfg.seed, cfg.get("variations"))
    examples = ex.action_examples()
    table = [(rel, case, m, e, err) for rel, case, m, e, err in rows]
    table += [("worked value", case, m, e, abs(m - e)) for case, m, e in examples]
    gap = ex.canonical_stokes_gap()
    table.append(("surface = boundary sum of p dq", "canonical", gap, 0.0, gap))
    rep.table("action_relations.csv", ["relation", "case", "measured", "expected", "abs_error"],
              table)
    for rel in dict.fromkeys(r[0] for r in rows):
        rep.expect(rel, max(r[4] for r in rows if r[0] == rel), "<=", cfg.tol("relation", 1e-8))
    for case, m, e in examples:
        rep.expect(case, m, "==", e, cfg.tol("worked", 1e-5))
    rep.expect("surface action = boundary sum of p dq", gap, "<=", cfg.tol("relation", 1e-8))


def _convergence_suite(cfg, rep):
    studies = {
        "rk4 endpoint error": (ex.rk4_order_study(), 3.8),
        "stationarity residual (oscillator)": (ex.stationarity_order_study(), 1.9),
        "surface vs reduced quadrature": (ex.quadrature_consistency_study(), 1.9),
    }
    st = ex.stokes_invariance_study()
    studies["interior deformation of S"] = (([r[2] for r in st], [r[3] for r in st]), 1.9)
    table = []
    for name, ((h, err), need) in studies.items():
        orders = ex.observed_orders(h, err)
        table += [(name, hh, ee, oo) for hh, ee, oo in zip(h, err, [np.nan, *orders])]
        rep.expect(f"{name}: observed order", float(np.min(orders)), ">=",
                   cfg.tol("order", need) if name != "rk4 endpoint error" else need)
    rep.table("convergence.csv", ["study", "h", "error", "observed_order"], table)
    rows = ex.validation_suite(cfg.get("variations"), cfg.seed)
    rep.table("validation.csv",
              ["system", "closedness_max", "closedness_min", "antisymmetry", "inverse"], rows)
    for label, cmax, cmin, anti, inv in rows:
        if label.startswith("nonclosed_demo"):
            rep.expect(f"{label} closedness", cmin, "==", 1.0, cfg.tol("closed", 1e-6),
                       note="negative control")
        else:
            rep.expect(f"{label} closedness", cmax, "<=", cfg.tol("closed", 1e-6))
        rep.expect(f"{label} antisymmetry", anti, "<=", 0.0)
        rep.expect(f"{label} inverse consistency", inv, "<=", cfg.tol("inverse", 1e-10))


SCENARIOS = {s.name: s for s in (
    Scenario("sphere_stationarity", _sphere_stationarity,
             "surface-action stationarity on the sphere: alpha sweep with grid doubling",
             {"alpha": (0.8, 1.0, 1.2), "n_eps": 40, "n_t": 400, "levels": 3,
              "variations": 100, "E": 0.5, "T": TWO_PI}, ("sphere",)),
    Scenario("torus_periodic", _torus_periodic,
             "periodic orbits on the torus: every feasible winding band, verified by integration",
             {"T": 20.0, "n_t": 1000}, ("torus",)),
    Scenario("free_particle_landscape", _free_particle_landscape,
             "residual-norm minimal paths for H = p^2/2 and the end-point landscape",
             {"T": 1.0, "N": 100, "mesh": 21, "mesh_spacing": 0.05,
              "alpha": (0.9, 1.0, 1.1), "beta": (-0.1, 0.0, 0.1)}, ("canonical",)),
    Scenario("period_group", _period_group,
             "action shifts of wrapped surfaces: 4 pi on the sphere, 4 pi^2 on the torus",
             {"wraps": (0, 1, 2, 3)}, ("sphere", "torus")),
    Scenario("maupertuis_demo", _maupertuis_demo,
             "orbit condition and abbreviated action on the sphere x plane",
             {"n_t": 400, "n_eps": 200}, ("sphere_times_plane",)),
    Scenario("action_equivalence", _action_equivalence,
             "line actions, gauge shifts and polar coordinates on canonical systems",
             {"variations": 100}, ("canonical",)),
    Scenario("convergence_suite", _convergence_suite,
             "orders of accuracy and symplectic-form validation of every builtin system",
             {"variations": 1000}, ()),
)}


def prepare(cfg, grid_scale=None, seed=None):
    """Validate, apply defaults, seed and grid-scale overrides."""
    cfg.validate(SCENARIOS)
    scen = SCENARIOS[cfg.scenario]
    if cfg.system is not None:
        if cfg.system not in scen.systems:
            allowed = ", ".join(scen.systems) or "its own catalogue of systems"
            raise ConfigError(f"[{cfg.name}] scenario {cfg.scenario} runs on {allowed}, "
                              f"not {cfg.system}")
        try:
            builtin_system(cfg.system, **cfg.system_params)
        except (ValueError, TypeError) as exc:
            raise ConfigError(f"[{cfg.name}] {exc}") from None
    cfg = cfg.with_defaults(scen.defaults)
    if seed is not None:
        cfg = replace(cfg, seed=int(seed))
    if grid_scale is not None and grid_scale != 1.0:
        cfg = cfg.scaled(grid_scale)
    return cfg.validate(SCENARIOS)


def run_scenario(cfg, grid_scale=None, seed=None):
    """Run one configured scenario and return its report."""
    cfg = prepare(cfg, grid_scale, seed)
    rep = Report(cfg.scenario, cfg.name, cfg.echo(), cfg.seed)
    start = time.perf_counter()
    try:
        SCENARIOS[cfg.scenario].run(cfg, rep)
    except (ArithmeticError, ValueError, RuntimeError, np.linalg.LinAlgError) as exc:
        rep.fail(f"{cfg.scenario} aborted", exc)
    rep.wall_time = time.perf_counter() - start
    return rep
