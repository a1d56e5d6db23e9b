"""Probe-based experiment runner, accuracy grading, family comparison, latency bench.

The protocol probes each state twice, once just inside the interval minima
and once just inside the maxima, diagnoses every probe with each membership
family, grades the result against the expert label, and summarizes
detection quality per family.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from enum import Enum
from typing import Mapping, Sequence

import numpy as np

from .fuzzcore import (
    DEFAULT_ACTIVATION_FLOOR,
    DEFAULT_GRID_POINTS,
    DEFAULT_SHOULDER_FRACTION,
    DEFAULT_SIGMA_DIVISOR,
    FAMILY_KINDS,
    MembershipFamilySpec,
    OutputUniverse,
    build_output_universe,
    build_rulebase_family,
    decompose_score,
    defuzzify,
    format_decomposition,
    infer,
)
from .intervalgebra import RuleBase, compile_rules
from .vibdata import MachineState, StateIntervalTable

REPORT_SCHEMA = "ittflm-report/1"
COMPARISON_SCHEMA = "ittflm-comparison/1"
BENCH_SCHEMA = "ittflm-bench/1"

DEFAULT_PROBE_DELTA = 0.01


class Grade(Enum):
    EXCELLENT = "Exc"
    GOOD = "Good"
    AVERAGE = "Ave"
    POOR = "Poor"
    BAD = "Bad"

    @property
    def label(self) -> str:
        return self.value


@dataclass(frozen=True)
class Probe:
    number: int
    label_v: str
    label_g: str
    x_v: float
    x_g: float
    expected: MachineState


def build_probes(table: StateIntervalTable, delta: float = DEFAULT_PROBE_DELTA) -> tuple[Probe, ...]:
    """Two probes per state: just inside the interval minima and maxima.

    The offset is `delta` of each interval's own width, so every probe lies
    strictly inside its state's extracted intervals.
    """
    if not 0.0 < delta < 0.5:
        raise ValueError("probe delta must be in (0, 0.5)")
    probes = []
    number = 1
    for k, row in enumerate(table.rows, start=1):
        dv = delta * row.iv.width
        dg = delta * row.ig.width
        probes.append(
            Probe(number, f"V{k}-min", f"g{k}-min", row.iv.lo + dv, row.ig.lo + dg, row.state)
        )
        number += 1
        probes.append(
            Probe(number, f"V{k}-max", f"g{k}-max", row.iv.hi - dv, row.ig.hi - dg, row.state)
        )
        number += 1
    return tuple(probes)


def grade_accuracy(expected: MachineState, decomposition: Mapping[MachineState, int]) -> Grade:
    """Grade a diagnosis by the expected state's percentage share.

    Empty decomposition (undefined score) is Bad; otherwise the share alone
    decides: >=90 Excellent, >=50 Good, >=10 Average, below that Poor (a
    present-but-wrong output still beats no output).
    """
    if not decomposition:
        return Grade.BAD
    share = decomposition.get(expected, 0)
    if share >= 90:
        return Grade.EXCELLENT
    if share >= 50:
        return Grade.GOOD
    if share >= 10:
        return Grade.AVERAGE
    return Grade.POOR


@dataclass(frozen=True)
class DiagnosisReport:
    probe: Probe
    score: float | None
    decomposition: dict[MachineState, int]
    grade: Grade
    latency_us: float


@dataclass(frozen=True)
class ExperimentSummary:
    family: str
    n_probes: int
    grade_counts: dict[Grade, int]
    undefined: int
    excellent_rate: float
    detection_rate: float  # Excellent or Good
    usable_rate: float  # Excellent, Good or Average
    defined_rate: float


def diagnose_once(
    x_v: float,
    x_g: float,
    rulebase: RuleBase,
    families: MembershipFamilySpec,
    universe: OutputUniverse,
    *,
    activation_floor: float = DEFAULT_ACTIVATION_FLOOR,
) -> tuple[float | None, dict[MachineState, int], float]:
    """One full infer + defuzzify + decompose cycle; returns (score, mix, latency in us)."""
    t0 = time.perf_counter()
    fset = infer(x_v, x_g, rulebase, families, universe, activation_floor=activation_floor)
    score = defuzzify(fset)
    decomposition = decompose_score(score, universe)
    latency_us = (time.perf_counter() - t0) * 1e6
    return score, decomposition, latency_us


def _summarize(family: str, reports: Sequence[DiagnosisReport]) -> ExperimentSummary:
    counts = {grade: 0 for grade in Grade}
    for report in reports:
        counts[report.grade] += 1
    n = len(reports)
    undefined = sum(1 for r in reports if r.score is None)
    exc = counts[Grade.EXCELLENT]
    det = exc + counts[Grade.GOOD]
    usable = det + counts[Grade.AVERAGE]
    return ExperimentSummary(
        family=family,
        n_probes=n,
        grade_counts=counts,
        undefined=undefined,
        excellent_rate=exc / n,
        detection_rate=det / n,
        usable_rate=usable / n,
        defined_rate=(n - undefined) / n,
    )


def run_experiment(
    table: StateIntervalTable,
    kind: str,
    *,
    delta: float = DEFAULT_PROBE_DELTA,
    sigma_divisor: float = DEFAULT_SIGMA_DIVISOR,
    shoulder_fraction: float = DEFAULT_SHOULDER_FRACTION,
    grid_points: int = DEFAULT_GRID_POINTS,
    activation_floor: float = DEFAULT_ACTIVATION_FLOOR,
) -> tuple[list[DiagnosisReport], ExperimentSummary]:
    """Diagnose the full probe set of `table` under one membership family."""
    rulebase = compile_rules(table)
    families = build_rulebase_family(
        rulebase, kind, sigma_divisor=sigma_divisor, shoulder_fraction=shoulder_fraction
    )
    universe = build_output_universe(table.states, grid_points)
    reports = []
    for probe in build_probes(table, delta):
        score, decomposition, latency_us = diagnose_once(
            probe.x_v, probe.x_g, rulebase, families, universe, activation_floor=activation_floor
        )
        reports.append(
            DiagnosisReport(
                probe=probe,
                score=score,
                decomposition=decomposition,
                grade=grade_accuracy(probe.expected, decomposition),
                latency_us=latency_us,
            )
        )
    return reports, _summarize(kind, reports)


@dataclass(frozen=True)
class FamilyComparison:
    reports: dict[str, list[DiagnosisReport]]
    summaries: dict[str, ExperimentSummary]
    ranking: tuple[str, ...]  # best detection rate first


def compare_families(table: StateIntervalTable, **knobs) -> FamilyComparison:
    """Run the probe experiment under all three families and rank them.

    Ranked by detection rate; ties broken by usable rate, excellent rate,
    defined-output rate, then family name.
    """
    reports: dict[str, list[DiagnosisReport]] = {}
    summaries: dict[str, ExperimentSummary] = {}
    for kind in FAMILY_KINDS:
        reports[kind], summaries[kind] = run_experiment(table, kind, **knobs)
    ranking = tuple(
        sorted(
            FAMILY_KINDS,
            key=lambda k: (
                -summaries[k].detection_rate,
                -summaries[k].usable_rate,
                -summaries[k].excellent_rate,
                -summaries[k].defined_rate,
                k,
            ),
        )
    )
    return FamilyComparison(reports=reports, summaries=summaries, ranking=ranking)


@dataclass(frozen=True)
class LatencyStats:
    iterations: int
    rules: int
    median_us: float
    p99_us: float
    mean_us: float


def bench_diagnose(
    rulebase: RuleBase,
    families: MembershipFamilySpec,
    n_iterations: int = 10_000,
    *,
    warmup: int = 100,
    grid_points: int = DEFAULT_GRID_POINTS,
    activation_floor: float = DEFAULT_ACTIVATION_FLOOR,
    inputs: tuple[float, float] | None = None,
) -> LatencyStats:
    """Wall-time statistics of single diagnosis cycles on a warm rule base.

    Times only infer + defuzzify + decompose; construction and I/O excluded.
    """
    if n_iterations < 1:
        raise ValueError("n_iterations must be positive")
    universe = build_output_universe(
        {rule.consequent for rule in rulebase.rules}, grid_points
    )
    if inputs is None:
        first = rulebase.rules[0]
        inputs = (
            rulebase.term_interval(first.antecedent_v).mid,
            rulebase.term_interval(first.antecedent_g).mid,
        )
    x_v, x_g = inputs
    for _ in range(warmup):
        diagnose_once(x_v, x_g, rulebase, families, universe, activation_floor=activation_floor)
    samples = np.empty(n_iterations)
    for i in range(n_iterations):
        _, _, latency_us = diagnose_once(
            x_v, x_g, rulebase, families, universe, activation_floor=activation_floor
        )
        samples[i] = latency_us
    return LatencyStats(
        iterations=n_iterations,
        rules=len(rulebase.rules),
        median_us=float(np.median(samples)),
        p99_us=float(np.percentile(samples, 99)),
        mean_us=float(samples.mean()),
    )


# --- report rendering --------------------------------------------------------
#
# Per-probe latency is deliberately absent from the persisted artifacts:
# file outputs must be byte-identical across identical runs.


def _score_cell(score: float | None) -> str:
    return "NaN" if score is None else f"{score:.2f}"


def experiment_markdown(reports: Sequence[DiagnosisReport], summary: ExperimentSummary) -> str:
    lines = [
        f"## Probe experiment: {summary.family} membership functions",
        "",
        "| No | fft_v | fft_g | expected | score | state mix | accuracy |",
        "|---:|------:|------:|:--------:|------:|:----------|:--------:|",
    ]
    for r in reports:
        lines.append(
            f"| {r.probe.number} | {r.probe.x_v:.4g} | {r.probe.x_g:.4g} "
            f"| {r.probe.expected.code} | {_score_cell(r.score)} "
            f"| {format_decomposition(r.decomposition)} | {r.grade.label} |"
        )
    lines += [
        "",
        f"- grades: " + ", ".join(f"{g.label} {summary.grade_counts[g]}" for g in Grade),
        f"- detection rate (Exc+Good): {summary.detection_rate:.4f}",
        f"- usable rate (Exc+Good+Ave): {summary.usable_rate:.4f}",
        f"- defined-output rate: {summary.defined_rate:.4f}",
        "",
    ]
    return "\n".join(lines)


def summary_to_dict(summary: ExperimentSummary) -> dict:
    return {
        "family": summary.family,
        "n_probes": summary.n_probes,
        "grades": {g.label: summary.grade_counts[g] for g in Grade},
        "undefined": summary.undefined,
        "excellent_rate": summary.excellent_rate,
        "detection_rate": summary.detection_rate,
        "usable_rate": summary.usable_rate,
        "defined_rate": summary.defined_rate,
    }


def experiment_to_dict(reports: Sequence[DiagnosisReport], summary: ExperimentSummary) -> dict:
    return {
        "schema": REPORT_SCHEMA,
        "family": summary.family,
        "probes": [
            {
                "no": r.probe.number,
                "labels": [r.probe.label_v, r.probe.label_g],
                "fft_v": r.probe.x_v,
                "fft_g": r.probe.x_g,
                "expected": r.probe.expected.code,
                "score": r.score,
                "state_mix": {state.code: pct for state, pct in r.decomposition.items()},
                "accuracy": r.grade.label,
            }
            for r in reports
        ],
        "summary": summary_to_dict(summary),
    }


def comparison_markdown(comparison: FamilyComparison) -> str:
    lines = [
        "# Membership family comparison",
        "",
        "| rank | family | Exc | Good | Ave | Poor | Bad | detection | usable | defined |",
        "|-----:|:-------|----:|----:|----:|----:|----:|----------:|-------:|--------:|",
    ]
    for rank, kind in enumerate(comparison.ranking, start=1):
        s = comparison.summaries[kind]
        c = s.grade_counts
        lines.append(
            f"| {rank} | {kind} | {c[Grade.EXCELLENT]} | {c[Grade.GOOD]} | {c[Grade.AVERAGE]} "
            f"| {c[Grade.POOR]} | {c[Grade.BAD]} | {s.detection_rate:.4f} "
            f"| {s.usable_rate:.4f} | {s.defined_rate:.4f} |"
        )
    lines.append("")
    for kind in comparison.ranking:
        lines.append(experiment_markdown(comparison.reports[kind], comparison.summaries[kind]))
    return "\n".join(lines)


def comparison_to_dict(comparison: FamilyComparison) -> dict:
    return {
        "schema": COMPARISON_SCHEMA,
        "ranking": list(comparison.ranking),
        "families": {
            kind: experiment_to_dict(comparison.reports[kind], comparison.summaries[kind])
            for kind in FAMILY_KINDS
        },
    }


def bench_to_dict(stats: LatencyStats) -> dict:
    return {
        "schema": BENCH_SCHEMA,
        "iterations": stats.iterations,
        "rules": stats.rules,
        "median_us": stats.median_us,
        "p99_us": stats.p99_us,
        "mean_us": stats.mean_us,
    }
