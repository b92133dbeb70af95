"""Subcritical contact process modulo translations.

Simulation from the graphical construction, three quasi-stationary
estimators (conditioned Monte Carlo, Fleming-Viot particles, exact eigen
solve on a diameter-truncated space), and detectors for the path structures
behind the diameter-factorization limit.
"""

__version__ = "0.1.0"

from .backend import backend_name, compiled_available
from .errors import (
    ContactQsdError,
    DegenerateSampleError,
    InsufficientDataError,
    NumericalError,
    SizeError,
    UsageError,
)
from .events import (
    EventField,
    SpaceTimePoint,
    evolve,
    evolve_snapshots,
    explicit_field,
    freeze_window,
    make_field,
    reaches,
    without_arrow,
)
from .exact import build_generator, qsd_eigen, truncation_sweep
from .fv import fleming_viot_estimate
from .jumpchain import jump_evolve, jump_snapshots, jump_tau
from .lattice import (
    ABSORBED,
    Region,
    as_config,
    canonicalize,
    diameter,
    format_config,
    lex_compare,
    parse_config,
    region_contains,
)
from .qsd import (
    AlphaEstimate,
    QsdEstimate,
    SurvivalCurve,
    conditioned_insensitivity,
    diam_factorization_gap,
    estimate_alpha,
    survival_curve,
    yaglom_estimate,
)
from .structures import (
    CutBreakResult,
    GoodPointQuery,
    find_cut_break,
    is_good_point,
    max_jump_chain,
    region_good,
    scan_cut_breaks,
)
from .trajectory import TrajectoryRecord, simulate

__all__ = [
    "ABSORBED",
    "AlphaEstimate",
    "ContactQsdError",
    "CutBreakResult",
    "DegenerateSampleError",
    "EventField",
    "GoodPointQuery",
    "InsufficientDataError",
    "NumericalError",
    "QsdEstimate",
    "Region",
    "SizeError",
    "SpaceTimePoint",
    "SurvivalCurve",
    "TrajectoryRecord",
    "UsageError",
    "as_config",
    "backend_name",
    "build_generator",
    "canonicalize",
    "compiled_available",
    "conditioned_insensitivity",
    "diam_factorization_gap",
    "diameter",
    "estimate_alpha",
    "evolve",
    "evolve_snapshots",
    "explicit_field",
    "find_cut_break",
    "fleming_viot_estimate",
    "format_config",
    "freeze_window",
    "is_good_point",
    "jump_evolve",
    "jump_snapshots",
    "jump_tau",
    "lex_compare",
    "make_field",
    "max_jump_chain",
    "parse_config",
    "qsd_eigen",
    "reaches",
    "region_contains",
    "region_good",
    "scan_cut_breaks",
    "simulate",
    "survival_curve",
    "truncation_sweep",
    "without_arrow",
    "yaglom_estimate",
]
