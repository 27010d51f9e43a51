"""stripfrac: cohesive-crack energies on a strip and their free-boundary
diagnostics.

Solve the trace-reduced minimization of the cohesive fracture energy on
[-L, L]^n x (0, A), then verify the structural predictions numerically:
uniqueness, maximum principle, propagated Lipschitz/semiconvexity bounds,
phase separation, frequency-function monotonicity and the 3/2-homogeneous
blow-up profile at regular crack tips.
"""

from .blowup import (BlowupFit, MuFit, ReferenceMesh, RescaledProfile,
                     ZeroFieldError, analyze_blowup, fit_mu, profile_distance,
                     reference_profile, rescale)
from .boundary import BoundaryData, boundary_from_callable, make_boundary
from .extension import PhaseWindowError, ReflectedField, build_v, flip_sign
from .freeboundary import (CrackGeometry, GraphReport, bound_suite,
                           derivative_strip_bounds, extract, graph_extract,
                           lipschitz_profile, propagated_bounds,
                           semiconvexity_profile)
from .frequency import (Classification, F_of_r, FrequencyProfile, GeometryError,
                        IdentityReport, check_identities, classify_point,
                        default_radii, phi_profile)
from .grid import StripGrid
from .laws import (CohesiveLaw, InvalidLawError, StepTooLargeError,
                   ValidationReport, builtin_laws, exponential_law,
                   law_from_config, prox_many, rational_law, scalar_prox,
                   validate)
from .oracles import (OracleSizeError, SyntheticField, brute_force_minimize,
                      closed_form_fields, dense_schur)
from .reduced import GridDegenerateError, ReducedForm, dirichlet_to_neumann
from .scenarios import RunBundle, Scenario, Verdict, load_scenario, run, sweep
from .solver import (NonConvergenceError, Solution, SolverOptions,
                     dirichlet_extension, kkt_residual, solve,
                     uniqueness_probe)

__version__ = "0.1.0"

__all__ = [
    "BlowupFit", "MuFit", "ReferenceMesh", "RescaledProfile", "ZeroFieldError",
    "analyze_blowup", "fit_mu", "profile_distance", "reference_profile", "rescale",
    "BoundaryData", "boundary_from_callable", "make_boundary",
    "PhaseWindowError", "ReflectedField", "build_v", "flip_sign",
    "CrackGeometry", "GraphReport", "bound_suite", "derivative_strip_bounds",
    "extract", "graph_extract", "lipschitz_profile", "propagated_bounds",
    "semiconvexity_profile",
    "Classification", "F_of_r", "FrequencyProfile", "GeometryError",
    "IdentityReport", "check_identities", "classify_point", "default_radii",
    "phi_profile",
    "StripGrid",
    "CohesiveLaw", "InvalidLawError", "StepTooLargeError", "ValidationReport",
    "builtin_laws", "exponential_law", "law_from_config", "prox_many",
    "rational_law", "scalar_prox", "validate",
    "OracleSizeError", "SyntheticField", "brute_force_minimize",
    "closed_form_fields", "dense_schur",
    "GridDegenerateError", "ReducedForm", "dirichlet_to_neumann",
    "RunBundle", "Scenario", "Verdict", "load_scenario", "run", "sweep",
    "NonConvergenceError", "Solution", "SolverOptions", "dirichlet_extension",
    "kkt_residual", "solve", "uniqueness_probe",
]
