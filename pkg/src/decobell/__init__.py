"""Exact quantum-correlation engine for a doubly decorated Ising-Heisenberg
square lattice.

The model is a square-lattice backbone of classical +-1/2 spins whose bonds
each host a pair of spin-1/2 moments with anisotropic (XXZ) exchange, coupled
to the backbone by Ising terms.  Tracing the bond pairs maps the backbone
exactly onto the square-lattice Ising model, so every thermal correlator of a
bond pair -- and with it the CHSH Bell function and Wootters concurrence --
is available in closed form at any temperature.
"""

from .bond_spectrum import (
    BondCoefficients,
    EffectiveIsing,
    ModelParams,
    PartitionSum,
    bond_eigensystem,
    bond_observable_coeffs,
    coefficients_K,
    conditional_partition,
    effective_coupling,
)
from .corrkit import (
    BellResult,
    XState,
    bell_closed_form,
    bell_horodecki,
    concurrence_closed_form,
    concurrence_wootters,
    correlation_matrix,
    validate_state,
    xstate_from_correlators,
)
from .decorated_model import (
    CorrelatorSet,
    MeasureSet,
    Region,
    correlators,
    critical_temperature,
    measures,
    qpt_boundary,
    zero_temperature_limits,
)
from .errors import (
    DegeneratePointError,
    DomainError,
    NearCriticalWarning,
    NumericalFailure,
    RegimeWarning,
)
from .ising_exact import (
    critical_coupling,
    elliptic_K,
    free_energy_density,
    nn_correlation,
    spontaneous_magnetization,
)
from .phase_analysis import (
    ContourGrid,
    ScanSeries,
    TransitionPoint,
    classify_region,
    contour_grid,
    detect_divergence,
    detect_kink,
    detect_sudden_change,
    iso_lines,
    scan,
)

__version__ = "0.1.0"

__all__ = [
    "BellResult",
    "BondCoefficients",
    "ContourGrid",
    "CorrelatorSet",
    "DegeneratePointError",
    "DomainError",
    "EffectiveIsing",
    "MeasureSet",
    "ModelParams",
    "NearCriticalWarning",
    "NumericalFailure",
    "PartitionSum",
    "Region",
    "RegimeWarning",
    "ScanSeries",
    "TransitionPoint",
    "XState",
    "bell_closed_form",
    "bell_horodecki",
    "bond_eigensystem",
    "bond_observable_coeffs",
    "classify_region",
    "coefficients_K",
    "concurrence_closed_form",
    "concurrence_wootters",
    "conditional_partition",
    "contour_grid",
    "correlation_matrix",
    "correlators",
    "critical_coupling",
    "critical_temperature",
    "detect_divergence",
    "detect_kink",
    "detect_sudden_change",
    "effective_coupling",
    "elliptic_K",
    "free_energy_density",
    "iso_lines",
    "measures",
    "nn_correlation",
    "qpt_boundary",
    "scan",
    "spontaneous_magnetization",
    "validate_state",
    "xstate_from_correlators",
    "zero_temperature_limits",
]
