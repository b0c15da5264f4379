"""Numerical laboratory for invariant variational principles of Hamiltonian mechanics.

Symplectic systems on coordinate charts, their flows, line and surface
action functionals, the residual-norm minimal-path problem and the
Maupertuis orbit condition.
"""

from .actions import (
    NotCanonicalError,
    OneForm,
    PrimitiveMismatchError,
    abbreviated_action,
    boundary_variation,
    canonical_primitive,
    finite_difference_variation,
    line_action_canonical,
    line_action_exact,
    line_action_symmetric,
    loop_action_hz,
    period_shift,
    stokes_boundary_sum,
    surface_action,
    surface_action_reduced,
    symmetric_primitive,
)
from .flow import (
    ChartExitError,
    ConvergenceError,
    Trajectory,
    energy_drift,
    hamilton_defect,
    integrate,
    stationarity_residual,
)
from .maupertuis import (
    CriticalPointError,
    LevelSetError,
    LevelSetFrame,
    level_set_tangent_basis,
    maupertuis_residual,
)
from .residual import (
    CanonicalPath,
    EndpointSpec,
    endpoint_landscape,
    free_particle_closed_form,
    minimal_path,
    residual_norm,
)
from .surfaces import Surface, VariationField, random_variation
from .systems import (
    ChartError,
    SingularFormError,
    SymplecticSystem,
    SystemValidationError,
    builtin_system,
    check_closedness,
    check_nondegeneracy,
    hamiltonian_vector_field,
    poisson_bracket,
    polar_canonical_transform,
    validate_system,
)

__version__ = "0.1.0"
