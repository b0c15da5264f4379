"""Symplectic systems on coordinate charts.

A system is a symplectic form ``omega(x)`` (the antisymmetric matrix
``omega_{mu nu}`` with ``omega = 1/2 omega_{mu nu} dx^mu ^ dx^nu``), a
Hamiltonian ``H(x)`` with its gradient, and the chart on which both are
evaluated.  All builtin callables are vectorised over leading axes, so a
batch of points with shape ``(..., dim)`` gives forms of shape
``(..., dim, dim)``.

Sign convention: the equations of motion read ``omega_{mu nu} xdot^nu =
d_mu H``, so ``xdot = omega^{-1} grad H``.  For canonical coordinates
``x = (q, p)`` the form is ``dp ^ dq`` and the Poisson matrix
``omega^{-1}`` is the standard ``[[0, I], [-I, 0]]``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Mapping, NamedTuple, Optional, Sequence

import numpy as np

TWO_PI = 2.0 * np.pi
HALF_PI = 0.5 * np.pi

# relative snap used when a periodic coordinate lands a hair below its upper end
_WRAP_SNAP = 1e-12

BUILTIN_NAMES = (
    "canonical",
    "sphere",
    "sphere_xy_chart",
    "torus",
    "sphere_times_plane",
    "nonclosed_demo",
)


class ChartError(ValueError):
    """A point lies outside the chart domain."""

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = None if point is None else np.asarray(point, dtype=float)


class SingularFormError(ArithmeticError):
    """The symplectic matrix is (numerically) singular at a point."""

    def __init__(self, message, condition=np.inf):
        super().__init__(message)
        self.condition = condition


class SystemValidationError(ValueError):
    """A system failed one of the symplectic-form axiom checks."""


@dataclass(frozen=True)
class Chart:
    """Box chart with optional periodic coordinates.

    Non-periodic coordinates must lie strictly inside ``(lower, upper)``;
    periodic coordinates are identified modulo ``upper - lower`` and stored
    in ``[lower, upper)``.  ``inside`` is an optional extra predicate for
    non-box domains (vectorised, returns a bool array).
    """

    lower: tuple
    upper: tuple
    periodic: tuple
    inside: Optional[Callable[[np.ndarray], np.ndarray]] = None
    description: str = ""

    @classmethod
    def unbounded(cls, dim):
        return cls((-np.inf,) * dim, (np.inf,) * dim, (False,) * dim,
                   description=f"R^{dim}")

    @property
    def dim(self):
        return len(self.lower)

    @property
    def periods(self):
        lo, hi = np.asarray(self.lower, float), np.asarray(self.upper, float)
        return np.where(self.periodic, hi - lo, 0.0)

    @property
    def has_periodic(self):
        return any(self.periodic)

    def contains(self, x, margin=0.0):
        """Bool (array) telling whether ``x`` is inside the chart."""
        x = np.asarray(x, dtype=float)
        lo = np.asarray(self.lower, float) + margin
        hi = np.asarray(self.upper, float) - margin
        ok = np.isfinite(x)
        bounded = ~np.asarray(self.periodic, bool)
        ok &= ~bounded | ((x > lo) & (x < hi))
        ok = ok.all(axis=-1)
        if self.inside is not None:
            ok &= np.asarray(self.inside(x), dtype=bool)
        return ok

    def wrap(self, coords):
        """Split unwrapped coordinates into stored values and windings.

        Returns ``(stored, windings)`` with ``coords == stored + periods *
        windings`` to within ``1e-12`` of a period.
        """
        u = np.asarray(coords, dtype=float)
        windings = np.zeros(u.shape, dtype=np.int64)
        if not self.has_periodic:
            return u.copy(), windings
        stored = u.copy()
        for i, periodic in enumerate(self.periodic):
            if not periodic:
                continue
            lo, period = self.lower[i], self.upper[i] - self.lower[i]
            shifted = (u[..., i] - lo) / period
            w = np.floor(shifted)
            w = w + ((shifted - w) > 1.0 - _WRAP_SNAP)
            windings[..., i] = w.astype(np.int64)
            # snapped values sit a hair below lo; keep them in [lo, hi)
            stored[..., i] = np.maximum(u[..., i] - w * period, lo)
        return stored, windings

    def periodic_difference(self, a, b):
        """``a - b`` with periodic components reduced to ``[-P/2, P/2)``."""
        d = np.asarray(a, float) - np.asarray(b, float)
        periods = self.periods
        mask = periods > 0
        if mask.any():
            pm = np.where(mask, periods, 1.0)
            reduced = d - pm * np.round(d / pm)
            d = np.where(mask, reduced, d)
        return d


@dataclass(frozen=True, eq=False)
class SymplecticSystem:
    """A symplectic form plus Hamiltonian on a single chart."""

    name: str
    dim: int
    omega_fn: Callable[[np.ndarray], np.ndarray]
    hamiltonian_fn: Callable[[np.ndarray], np.ndarray]
    grad_fn: Callable[[np.ndarray], np.ndarray]
    chart: Chart
    hess_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None
    builtin: bool = False
    closed: bool = True
    canonical: bool = False
    fundamental_domain: Optional[tuple] = None
    coordinate_names: tuple = ()
    params: Mapping = field(default_factory=dict)

    def __post_init__(self):
        if self.dim <= 0 or self.dim % 2:
            raise ValueError(f"dimension must be a positive even integer, got {self.dim}")
        if self.chart.dim != self.dim:
            raise ValueError("chart dimension does not match system dimension")

    @property
    def n(self):
        return self.dim // 2

    def omega(self, x):
        return self.omega_fn(np.asarray(x, dtype=float))

    def hamiltonian(self, x):
        return self.hamiltonian_fn(np.asarray(x, dtype=float))

    def grad_h(self, x):
        return self.grad_fn(np.asarray(x, dtype=float))

    def hess_h(self, x, step=1e-5):
        """Hessian of H; central differences of the gradient when not supplied."""
        x = np.asarray(x, dtype=float)
        if self.hess_fn is not None:
            return self.hess_fn(x)
        eye = np.eye(self.dim)
        cols = [(self.grad_h(x + step * e) - self.grad_h(x - step * e)) / (2 * step) for e in eye]
        hess = np.stack(cols, axis=-1)
        return 0.5 * (hess + np.swapaxes(hess, -1, -2))

    def poisson(self, x):
        """The Poisson matrix ``omega^{mu nu}``, inverse of ``omega_{mu nu}``."""
        return np.linalg.inv(self.omega(x))

    def in_chart(self, x, margin=0.0):
        return self.chart.contains(x, margin)

    @classmethod
    def custom(cls, name, dim, omega, hamiltonian, grad=None, hess=None, chart=None,
               vectorized=False, fd_step=1e-6):
        """Wrap user-supplied callables as a system.

        Non-vectorised callables take a single point.  A missing gradient
        is replaced by central differences with step ``fd_step``.
        """
        if not vectorized:
            omega = _pointwise(omega, (dim, dim))
            hamiltonian = _pointwise(hamiltonian, ())
            grad = None if grad is None else _pointwise(grad, (dim,))
            hess = None if hess is None else _pointwise(hess, (dim, dim))
        if grad is None:
            grad = _fd_gradient(hamiltonian, dim, fd_step)
        return cls(name=name, dim=dim, omega_fn=omega, hamiltonian_fn=hamiltonian,
                   grad_fn=grad, hess_fn=hess, chart=chart or Chart.unbounded(dim),
                   builtin=False)


def _pointwise(fn, out_shape):
    def wrapped(x):
        x = np.asarray(x, dtype=float)
        flat = x.reshape(-1, x.shape[-1])
        out = np.array([np.asarray(fn(pt), dtype=float) for pt in flat])
        return out.reshape(x.shape[:-1] + out_shape)
    return wrapped


def _fd_gradient(hamiltonian, dim, step):
    eye = np.eye(dim)

    def grad(x):
        x = np.asarray(x, dtype=float)
        return np.stack([(hamiltonian(x + step * e) - hamiltonian(x - step * e)) / (2 * step)
                         for e in eye], axis=-1)
    return grad


# ---------------------------------------------------------------------------
# builtin catalogue

def _rot(c):
    """``c * [[0, 1], [-1, 0]]`` broadcast over the shape of ``c``."""
    c = np.asarray(c, dtype=float)
    out = np.zeros(c.shape + (2, 2))
    out[..., 0, 1] = c
    out[..., 1, 0] = -c
    return out


def _canonical_omega(n):
    eye = np.eye(n)
    zero = np.zeros((n, n))
    # dp ^ dq: omega_{q p} = -1
    return np.block([[zero, -eye], [eye, zero]])


CANONICAL_HAMILTONIANS = ("free_particle", "harmonic", "momentum")


def _canonical_hamiltonian(kind, n):
    if kind == "free_particle":
        def h(x):
            return 0.5 * np.sum(x[..., n:] ** 2, axis=-1)

        def g(x):
            out = np.zeros_like(x)
            out[..., n:] = x[..., n:]
            return out
        hess = np.diag(np.r_[np.zeros(n), np.ones(n)])
    elif kind == "harmonic":
        def h(x):
            return 0.5 * np.sum(x ** 2, axis=-1)

        def g(x):
            return np.array(x, dtype=float)
        hess = np.eye(2 * n)
    elif kind == "momentum":
        def h(x):
            return np.sum(x[..., n:], axis=-1)

        def g(x):
            out = np.zeros_like(x)
            out[..., n:] = 1.0
            return out
        hess = np.zeros((2 * n, 2 * n))
    else:
        raise ValueError(f"unknown canonical Hamiltonian {kind!r}; "
                         f"choose one of {CANONICAL_HAMILTONIANS} or pass callables")

    def hs(x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(hess, x.shape[:-1] + hess.shape).copy()
    return h, g, hs


def _canonical(n=1, hamiltonian="free_particle", grad=None, hess=None):
    n = int(n)
    if n < 1:
        raise ValueError("canonical system needs n >= 1")
    dim = 2 * n
    omega_const = _canonical_omega(n)

    def omega(x):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(omega_const, x.shape[:-1] + (dim, dim)).copy()

    if callable(hamiltonian):
        h = hamiltonian
        g = grad if grad is not None else _fd_gradient(h, dim, 1e-6)
        hs = hess
        kind = getattr(hamiltonian, "__name__", "custom")
    else:
        h, g, hs = _canonical_hamiltonian(hamiltonian, n)
        kind = hamiltonian
    names = tuple(f"q{i + 1}" for i in range(n)) + tuple(f"p{i + 1}" for i in range(n))
    return SymplecticSystem(
        name="canonical", dim=dim, omega_fn=omega, hamiltonian_fn=h, grad_fn=g, hess_fn=hs,
        chart=Chart.unbounded(dim), builtin=True, canonical=True, coordinate_names=names,
        params={"n": n, "hamiltonian": kind})


def _sphere(margin=0.05):
    def omega(x):
        return _rot(np.cos(x[..., 0]))

    def h(x):
        return np.sin(x[..., 0])

    def g(x):
        out = np.zeros_like(x)
        out[..., 0] = np.cos(x[..., 0])
        return out

    def hs(x):
        out = np.zeros(x.shape + (2,))
        out[..., 0, 0] = -np.sin(x[..., 0])
        return out

    chart = Chart((-HALF_PI + margin, 0.0), (HALF_PI - margin, TWO_PI), (False, True),
                  description=f"theta in (-pi/2+{margin}, pi/2-{margin}), phi periodic")
    return SymplecticSystem(
        name="sphere", dim=2, omega_fn=omega, hamiltonian_fn=h, grad_fn=g, hess_fn=hs,
        chart=chart, builtin=True, fundamental_domain=((-HALF_PI, HALF_PI), (0.0, TWO_PI)),
        coordinate_names=("theta", "phi"), params={"margin": margin})


def _sphere_xy(margin=0.05):
    def s(x):
        return np.sqrt(1.0 - x[..., 0] ** 2 - x[..., 1] ** 2)

    def omega(x):
        # dy ^ dx / s: omega_{yx} = 1/s
        return _rot(-1.0 / s(x))

    def g(x):
        return -x / s(x)[..., None]

    def hs(x):
        r = s(x)[..., None, None]
        outer = x[..., :, None] * x[..., None, :]
        return -(np.eye(2) / r + outer / r ** 3)

    chart = Chart((-1.0, -1.0), (1.0, 1.0), (False, False),
                  inside=lambda x: x[..., 0] ** 2 + x[..., 1] ** 2 < 1.0 - margin,
                  description=f"x^2 + y^2 < 1 - {margin}")
    return SymplecticSystem(
        name="sphere_xy_chart", dim=2, omega_fn=omega, hamiltonian_fn=s, grad_fn=g,
        hess_fn=hs, chart=chart, builtin=True, coordinate_names=("x", "y"),
        params={"margin": margin})


def _torus():
    def omega(x):
        return _rot(np.ones(x.shape[:-1]))

    def h(x):
        return np.sin(x[..., 0])

    def g(x):
        out = np.zeros_like(x)
        out[..., 0] = np.cos(x[..., 0])
        return out

    def hs(x):
        out = np.zeros(x.shape + (2,))
        out[..., 0, 0] = -np.sin(x[..., 0])
        return out

    chart = Chart((0.0, 0.0), (TWO_PI, TWO_PI), (True, True), description="theta, phi periodic")
    return SymplecticSystem(
        name="torus", dim=2, omega_fn=omega, hamiltonian_fn=h, grad_fn=g, hess_fn=hs,
        chart=chart, builtin=True, fundamental_domain=((0.0, TWO_PI), (0.0, TWO_PI)),
        coordinate_names=("theta", "phi"), params={})


def _sphere_times_plane(margin=0.05):
    # coordinates (theta, phi, q, p)
    def omega(x):
        out = np.zeros(x.shape[:-1] + (4, 4))
        c = np.cos(x[..., 0])
        out[..., 0, 1] = c
        out[..., 1, 0] = -c
        out[..., 3, 2] = 1.0
        out[..., 2, 3] = -1.0
        return out

    def h(x):
        return np.sin(x[..., 0]) + 0.5 * x[..., 3] ** 2

    def g(x):
        out = np.zeros_like(x)
        out[..., 0] = np.cos(x[..., 0])
        out[..., 3] = x[..., 3]
        return out

    def hs(x):
        out = np.zeros(x.shape + (4,))
        out[..., 0, 0] = -np.sin(x[..., 0])
        out[..., 3, 3] = 1.0
        return out

    chart = Chart((-HALF_PI + margin, 0.0, -np.inf, -np.inf),
                  (HALF_PI - margin, TWO_PI, np.inf, np.inf),
                  (False, True, False, False),
                  description="sphere chart x R^2")
    return SymplecticSystem(
        name="sphere_times_plane", dim=4, omega_fn=omega, hamiltonian_fn=h, grad_fn=g,
        hess_fn=hs, chart=chart, builtin=True,
        coordinate_names=("theta", "phi", "q", "p"), params={"margin": margin})


def _nonclosed_demo():
    # coordinates (q1, q2, p1, p2); dq1^dp1 + dq2^dp2 + p1 dq1^dq2 is not closed
    def omega(x):
        out = np.zeros(x.shape[:-1] + (4, 4))
        out[..., 0, 2] = 1.0
        out[..., 2, 0] = -1.0
        out[..., 1, 3] = 1.0
        out[..., 3, 1] = -1.0
        out[..., 0, 1] = x[..., 2]
        out[..., 1, 0] = -x[..., 2]
        return out

    def h(x):
        return 0.5 * np.sum(x ** 2, axis=-1)

    def g(x):
        return np.array(x, dtype=float)

    def hs(x):
        return np.broadcast_to(np.eye(4), x.shape[:-1] + (4, 4)).copy()

    return SymplecticSystem(
        name="nonclosed_demo", dim=4, omega_fn=omega, hamiltonian_fn=h, grad_fn=g,
        hess_fn=hs, chart=Chart.unbounded(4), builtin=True, closed=False,
        coordinate_names=("q1", "q2", "p1", "p2"), params={})


def builtin_system(name, **params):
    """Construct one of the catalogue systems.

    Parameters
    ----------
    name : str
        One of ``canonical``, ``sphere``, ``sphere_xy_chart``, ``torus``,
        ``sphere_times_plane``, ``nonclosed_demo``.
    **params
        ``n`` and ``hamiltonian`` (a name from ``CANONICAL_HAMILTONIANS`` or a
        callable, with optional ``grad``/``hess``) for ``canonical``;
        ``margin`` (radians, or squared radius for the xy chart) for the
        sphere charts.
    """
    margin = params.pop("margin", 0.05)
    if name in ("sphere", "sphere_xy_chart", "sphere_times_plane"):
        margin = float(margin)
        if margin <= 0:
            raise ValueError(f"chart margin must be positive, got {margin}")
    if name == "canonical":
        if "dim" in params:
            dim = int(params.pop("dim"))
            if dim % 2:
                raise ValueError(f"canonical dimension must be even, got {dim}")
            params.setdefault("n", dim // 2)
        allowed = {"n", "hamiltonian", "grad", "hess"}
        _reject_unknown(params, allowed, name)
        return _canonical(**params)
    builders = {
        "sphere": lambda: _sphere(margin),
        "sphere_xy_chart": lambda: _sphere_xy(margin),
        "torus": _torus,
        "sphere_times_plane": lambda: _sphere_times_plane(margin),
        "nonclosed_demo": _nonclosed_demo,
    }
    if name not in builders:
        raise ValueError(f"unknown system {name!r}; known systems: {', '.join(BUILTIN_NAMES)}")
    _reject_unknown(params, set(), name)
    return builders[name]()


def _reject_unknown(params, allowed, name):
    extra = set(params) - allowed
    if extra:
        raise ValueError(f"invalid parameters for {name}: {sorted(extra)}")


# ---------------------------------------------------------------------------
# pointwise geometry

def _require_in_chart(system, x):
    if not bool(system.in_chart(x)):
        raise ChartError(f"point {np.asarray(x).tolist()} is outside the {system.name} chart", x)


def flow_field(system, x):
    """Hamiltonian vector field at a batch of points, no chart checks."""
    x = np.asarray(x, dtype=float)
    return np.linalg.solve(system.omega(x), system.grad_h(x)[..., None])[..., 0]


def hamiltonian_vector_field(system, x, cond_limit=1e12):
    """``xdot^mu = omega^{mu nu}(x) d_nu H(x)`` at a single point.

    Solved as a linear system against ``omega``; raises
    :class:`SingularFormError` when ``omega`` is numerically singular.
    """
    x = np.asarray(x, dtype=float)
    _require_in_chart(system, x)
    w = system.omega(x)
    cond = np.linalg.cond(w)
    if not np.isfinite(cond) or cond > cond_limit:
        raise SingularFormError(f"omega is singular at {x.tolist()} (cond={cond:.3g})", cond)
    return np.linalg.solve(w, system.grad_h(x))


def omega_derivatives(system, x, h):
    """Central-difference ``d_alpha omega_{mu nu}``, indexed ``[alpha, mu, nu]``."""
    x = np.asarray(x, dtype=float)
    shifts = h * np.eye(system.dim)
    return (system.omega(x + shifts) - system.omega(x - shifts)) / (2 * h)


def check_closedness(system, x, h=1e-4):
    """Max |cyclic sum| of the derivatives of ``omega`` at ``x``.

    Zero (up to ``O(h^2)``) iff ``d omega = 0``.
    """
    x = np.asarray(x, dtype=float)
    if not bool(system.in_chart(x, margin=h)):
        raise ChartError(f"closedness check needs a margin of {h} inside the chart", x)
    d = omega_derivatives(system, x, h)
    cyclic = d + np.transpose(d, (2, 0, 1)) + np.transpose(d, (1, 2, 0))
    return float(np.max(np.abs(cyclic)))


class Nondegeneracy(NamedTuple):
    condition: float
    determinant: float


def check_nondegeneracy(system, x):
    """2-norm condition number of ``omega(x)`` (``inf`` when singular)."""
    x = np.asarray(x, dtype=float)
    _require_in_chart(system, x)
    w = system.omega(x)
    det = float(np.linalg.det(w))
    sv = np.linalg.svd(w, compute_uv=False)
    cond = np.inf if sv[-1] == 0.0 else float(sv[0] / sv[-1])
    return Nondegeneracy(cond, det)


def antisymmetry_defect(system, x):
    w = system.omega(x)
    return float(np.max(np.abs(w + np.swapaxes(w, -1, -2))))


def inverse_defect(system, x):
    """max |omega^{mu lambda} omega_{lambda nu} - delta| over the batch."""
    w = system.omega(x)
    inv = np.linalg.inv(w)
    return float(np.max(np.abs(inv @ w - np.eye(system.dim))))


def sample_chart_points(system, count, rng, box=3.0, margin=0.0):
    """Uniform random points inside the chart (unbounded axes clipped to ``[-box, box]``)."""
    lo = np.maximum(np.asarray(system.chart.lower, float) + margin, -box)
    hi = np.minimum(np.asarray(system.chart.upper, float) - margin, box)
    out = np.empty((0, system.dim))
    while len(out) < count:
        cand = rng.uniform(lo, hi, size=(2 * count, system.dim))
        cand = cand[system.in_chart(cand, margin)]
        out = np.vstack([out, cand])
    return out[:count]


def validate_system(system, samples=64, rng=None, h=1e-4, closed_tol=1e-6, force=False):
    """Check the form axioms at random chart points.

    Returns a dict of the worst defects.  Raises
    :class:`SystemValidationError` on failure unless ``force`` is set.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    pts = sample_chart_points(system, samples, rng, margin=max(h, 1e-3))
    antisym = antisymmetry_defect(system, pts)
    inv = inverse_defect(system, pts)
    closed = max(check_closedness(system, x, h) for x in pts)
    report = {"antisymmetry": antisym, "inverse": inv, "closedness": closed}
    limit = 0.0 if system.builtin else 1e-12
    problems = []
    if antisym > limit:
        problems.append(f"omega not antisymmetric (defect {antisym:.3g})")
    if inv > 1e-10:
        problems.append(f"omega not invertible (inverse defect {inv:.3g})")
    if closed > closed_tol:
        problems.append(f"omega not closed (cyclic residual {closed:.3g})")
    if problems and not force:
        raise SystemValidationError(f"{system.name}: " + "; ".join(problems))
    return report


# ---------------------------------------------------------------------------
# polar canonical coordinates

def polar_canonical_transform(q, p):
    """``(q, p) -> (phi, P)`` with ``q = r sin phi``, ``p = r cos phi``, ``P = r^2/2``."""
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    r2 = q * q + p * p
    if np.any(r2 == 0.0):
        raise ValueError("polar transform is undefined at r = 0")
    return np.arctan2(q, p), 0.5 * r2


def inverse_polar_transform(phi, P):
    phi = np.asarray(phi, dtype=float)
    P = np.asarray(P, dtype=float)
    if np.any(P < 0):
        raise ValueError("P = r^2/2 must be non-negative")
    r = np.sqrt(2.0 * P)
    return r * np.sin(phi), r * np.cos(phi)


def poisson_bracket(system, f, g, x, h=1e-6):
    """``{f, g} = omega^{mu nu} d_mu f d_nu g`` with central-difference gradients."""
    x = np.asarray(x, dtype=float)
    shifts = h * np.eye(system.dim)
    df = (np.asarray(f(x + shifts)) - np.asarray(f(x - shifts))) / (2 * h)
    dg = (np.asarray(g(x + shifts)) - np.asarray(g(x - shifts))) / (2 * h)
    return float(df @ system.poisson(x) @ dg)


def sphere_to_xy(theta_phi):
    """Map (theta, phi) on the upper hemisphere to the xy chart."""
    tp = np.asarray(theta_phi, dtype=float)
    c = np.cos(tp[..., 0])
    return np.stack([c * np.cos(tp[..., 1]), c * np.sin(tp[..., 1])], axis=-1)


def sphere_to_xy_jacobian(theta_phi):
    tp = np.asarray(theta_phi, dtype=float)
    th, ph = tp[..., 0], tp[..., 1]
    jac = np.empty(tp.shape[:-1] + (2, 2))
    jac[..., 0, 0] = -np.sin(th) * np.cos(ph)
    jac[..., 0, 1] = -np.cos(th) * np.sin(ph)
    jac[..., 1, 0] = -np.sin(th) * np.sin(ph)
    jac[..., 1, 1] = np.cos(th) * np.cos(ph)
    return jac


def as_point(system, x: Sequence[float]):
    x = np.asarray(x, dtype=float)
    if x.shape != (system.dim,):
        raise ValueError(f"expected a point of dimension {system.dim}, got shape {x.shape}")
    return x
