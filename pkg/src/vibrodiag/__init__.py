"""vibrodiag: vibration-spectrum fault diagnosis through interval-compiled fuzzy rules.

Labeled (fft_v, fft_g) spectra are summarized to per-state RMS intervals,
minimized into a conjunction rule base by interval-inclusion reduction, and
evaluated as a Mamdani controller under triangular, trapezoidal, or gaussian
membership families.
"""

from .diagharness import (
    Grade,
    bench_diagnose,
    build_probes,
    compare_families,
    diagnose_once,
    grade_accuracy,
    run_experiment,
)
from .fuzzcore import (
    FAMILY_KINDS,
    FuzzySet,
    MembershipFamilySpec,
    OutputUniverse,
    build_family,
    build_output_universe,
    decompose_score,
    defuzzify,
    format_decomposition,
    infer,
    membership,
)
from .intervalgebra import (
    FuzzyRule,
    Interval,
    RuleBase,
    build_truth_table,
    compile_rules,
    includes,
    intersects,
    reduce_iic,
)
from .vibdata import (
    MachineState,
    SensorFrame,
    StateIntervalTable,
    class_distribution,
    extract_intervals,
    rms,
    summarize_frame,
)

__version__ = "0.1.0"

__all__ = [
    "FAMILY_KINDS",
    "FuzzyRule",
    "FuzzySet",
    "Grade",
    "Interval",
    "MachineState",
    "MembershipFamilySpec",
    "OutputUniverse",
    "RuleBase",
    "SensorFrame",
    "StateIntervalTable",
    "bench_diagnose",
    "build_family",
    "build_output_universe",
    "build_probes",
    "build_truth_table",
    "class_distribution",
    "compare_families",
    "compile_rules",
    "decompose_score",
    "defuzzify",
    "diagnose_once",
    "extract_intervals",
    "format_decomposition",
    "grade_accuracy",
    "includes",
    "infer",
    "intersects",
    "membership",
    "reduce_iic",
    "rms",
    "run_experiment",
    "summarize_frame",
]
