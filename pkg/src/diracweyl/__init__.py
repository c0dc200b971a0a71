"""diracweyl: geometry hidden in 2x2 first-order elliptic operators.

Decode an orthonormal frame, Riemannian metric, topological charge and
teleparallel torsion from a principal symbol on the 3-torus; compute
two-term spectral growth coefficients; decide whether an operator is a
massless Dirac operator; and validate against exact Dirac spectra.
"""

__version__ = "0.1.0"

from .asymptotics import (
    AsymptoticCoefficients,
    a_density,
    b1_density,
    b1_density_fiber,
    b2_density,
    b2_density_fiber_curvature,
    b2_density_fiber_torsion,
    b_density,
    fiber_eigenpair,
    generalized_poisson_check,
    u1_curvature,
)
from .errors import ConsistencyError, DiracweylError, EllipticityError, InputError
from .fields import (
    PeriodicChart,
    TrigInterpolant,
    fiber_ball_quadrature,
    field_from_modes,
    fourier_modes,
    grid_integral,
    spectral_derivative,
)
from .geometry import (
    CoframeField,
    FrameField,
    MetricField,
    PrincipalSymbolField,
    TorsionBundle,
    coframe,
    decode_frame,
    decode_metric,
    hodge_star,
    metric_from_frame,
    orthonormalize_frame,
    parallel_transport,
    symbol_from_frame,
    topological_charge,
    torsion,
)
from .operators import (
    DiracVerdict,
    FirstOrderOperator,
    GaugeField,
    Obstruction,
    apply_operator,
    charge_conjugation,
    check_dirac,
    dirac_operator,
    gauge_transform,
    so3_from_su2,
    su2_lift,
    subprincipal_symbol,
    verify_subprincipal_identity,
)
from .scenarios import (
    build_scenario,
    dirac_plus_scalar,
    dirac_plus_traceless,
    random_band_limited_frame,
    random_gauge_field,
    standard_frame,
    twisted_frame,
)
from .serialize import (
    load_frame,
    load_operator,
    load_symbol,
    save_frame,
    save_operator,
    save_symbol,
)
from .spectra import (
    CountingReport,
    SpectrumTable,
    SpinStructure,
    all_spin_structures,
    asymptotic_comparison,
    counting_bounds,
    counting_function,
    galerkin_spectrum,
    lattice_count,
    mollified_count,
    sphere_exact_spectrum,
    torus_exact_spectrum,
)

__all__ = [
    "__version__",
    "AsymptoticCoefficients",
    "ConsistencyError",
    "CoframeField",
    "CountingReport",
    "DiracVerdict",
    "DiracweylError",
    "EllipticityError",
    "FirstOrderOperator",
    "FrameField",
    "GaugeField",
    "InputError",
    "MetricField",
    "Obstruction",
    "PeriodicChart",
    "PrincipalSymbolField",
    "SpectrumTable",
    "SpinStructure",
    "TorsionBundle",
    "TrigInterpolant",
    "a_density",
    "all_spin_structures",
    "apply_operator",
    "asymptotic_comparison",
    "b1_density",
    "b1_density_fiber",
    "b2_density",
    "b2_density_fiber_curvature",
    "b2_density_fiber_torsion",
    "b_density",
    "build_scenario",
    "charge_conjugation",
    "check_dirac",
    "coframe",
    "counting_bounds",
    "counting_function",
    "decode_frame",
    "decode_metric",
    "dirac_operator",
    "dirac_plus_scalar",
    "dirac_plus_traceless",
    "fiber_ball_quadrature",
    "fiber_eigenpair",
    "field_from_modes",
    "fourier_modes",
    "galerkin_spectrum",
    "gauge_transform",
    "generalized_poisson_check",
    "grid_integral",
    "hodge_star",
    "lattice_count",
    "load_frame",
    "load_operator",
    "load_symbol",
    "metric_from_frame",
    "mollified_count",
    "orthonormalize_frame",
    "parallel_transport",
    "random_band_limited_frame",
    "random_gauge_field",
    "save_frame",
    "save_operator",
    "save_symbol",
    "so3_from_su2",
    "spectral_derivative",
    "sphere_exact_spectrum",
    "standard_frame",
    "su2_lift",
    "subprincipal_symbol",
    "symbol_from_frame",
    "topological_charge",
    "torsion",
    "torus_exact_spectrum",
    "twisted_frame",
    "u1_curvature",
    "verify_subprincipal_identity",
]
