"""Asymmetric grid quorum systems for heterogeneous processes.

Processes living on a grid of qualitative attributes each pick the
attribute they believe best predicts failure; the induced per-belief
failure assumptions are compatible by construction.  This package builds
those systems, verifies their resilience and consistency, and compares
them against the one-third threshold baseline.
"""

from .failprone import (
    BudgetExceeded,
    FailproneDescriptor,
    GridParams,
    GridSystem,
    InvalidDescriptor,
    canonical_quorums,
    closure_contains,
    covering_descriptor,
    enumerate_failprone,
    grid_params,
    is_joint_fault,
    materialize,
    max_joint_fault_cardinality,
    maximal_joint_faults,
    sample_failprone,
)
from .resilience import (
    ADVERSARIAL,
    BOUND,
    EXHAUSTIVE,
    SAMPLED,
    BoundBreakdown,
    ResilienceVerdict,
    adversarial_max_union,
    check_b3_availability,
    check_b3_bound,
    check_b3_consistency_direct,
    check_b3_exhaustive,
    check_q3_exhaustive,
    verify_witness,
)
from .scenario import (
    FAULTY,
    NAIVE,
    WISE,
    ProcessVerdict,
    SafetyReport,
    Scenario,
    check_availability,
    check_pairwise_safety,
    classify,
)
from .threshold import (
    InequalityReport,
    ScanRecord,
    sweep_2d,
    sweep_equal,
    threshold_card,
    usefulness,
    verify_usefulness_inequalities,
    write_scan_csv,
)
from .tightness import (
    AlphaSearchResult,
    CoverageCounterexample,
    alpha_tightness_sweep,
    alpha_upper_cap,
    full_failure_counterexample,
    is_alpha_feasible,
    max_alpha,
    write_alpha_csv,
)
from .universe import (
    AttributeSchema,
    CardinalityWarning,
    Predicate,
    ProcessSet,
    Universe,
    UnsupportedCardinality,
    build_universe,
    restrict,
    restricted_cardinality,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
