"""Membership families, Mamdani min/max inference, and centroid defuzzification.

Input linguistic terms are derived directly from [lo, hi] RMS intervals; the
output universe places one triangular term per state at its integer severity
level.  Inference is the classic pipeline: min conjunction of the two input
memberships, min implication clipping of the consequent term, max
aggregation over a sampled output grid, centroid defuzzification.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Mapping

import numpy as np

from .intervalgebra import Interval, RuleBase

if TYPE_CHECKING:
    from .vibdata import MachineState

FAMILY_KINDS = ("triangular", "trapezoidal", "gaussian")

DEFAULT_SIGMA_DIVISOR = 6.0
DEFAULT_SHOULDER_FRACTION = 0.25
DEFAULT_GRID_POINTS = 1201
# Firing strengths below the floor count as "no rule fired".  Without it a
# gaussian term never reaches exactly zero anywhere, so an aggregate with
# vanishing but positive mass would still defuzzify instead of reporting an
# undefined score for inputs the term set barely covers.  The default sits
# between the gaussian membership at 1% inside an interval edge (~0.0133
# for sigma = width/6) and the triangular membership at the same offset
# (0.02), so triangular and trapezoidal probes always clear it.
DEFAULT_ACTIVATION_FLOOR = 0.015
# Output domain extends one level beyond the extreme severities so that edge
# terms keep symmetric support and their centroids sit exactly on the level.
LEVEL_PADDING = 1.0

_DEGENERATE_EPS_SCALE = 1e-9


def _effective_bounds(interval: Interval) -> tuple[float, float]:
    # Zero-width terms still need support to fire: widen to +/- eps.
    if interval.width > 0.0:
        return interval.lo, interval.hi
    eps = _DEGENERATE_EPS_SCALE * max(1.0, abs(interval.lo))
    return interval.lo - eps, interval.lo + eps


def term_parameters(
    interval: Interval,
    kind: str,
    *,
    sigma_divisor: float = DEFAULT_SIGMA_DIVISOR,
    shoulder_fraction: float = DEFAULT_SHOULDER_FRACTION,
) -> tuple[float, ...]:
    """Shape parameters of one membership term over an RMS interval.

    triangular  -> (foot, peak at midpoint, foot)
    trapezoidal -> feet at the endpoints, plateau over the central span
    gaussian    -> (mean at midpoint, sigma = width / sigma_divisor)
    """
    lo, hi = _effective_bounds(interval)
    w = hi - lo
    if kind == "triangular":
        return (lo, (lo + hi) / 2.0, hi)
    if kind == "trapezoidal":
        if not 0.0 < shoulder_fraction < 0.5:
            raise ValueError("shoulder_fraction must be in (0, 0.5)")
        return (lo, lo + shoulder_fraction * w, hi - shoulder_fraction * w, hi)
    if kind == "gaussian":
        if sigma_divisor <= 0.0:
            raise ValueError("sigma_divisor must be positive")
        return ((lo + hi) / 2.0, w / sigma_divisor)
    raise ValueError(f"unknown membership family kind {kind!r}")


@dataclass(frozen=True)
class MembershipFamilySpec:
    """One family kind plus per-term shape parameters keyed by term id."""

    kind: str
    params: dict[str, tuple[float, ...]]

    def term_ids(self) -> tuple[str, ...]:
        return tuple(self.params)


def build_family(
    terms: Mapping[str, Interval] | Iterable[tuple[str, Interval]],
    kind: str,
    *,
    sigma_divisor: float = DEFAULT_SIGMA_DIVISOR,
    shoulder_fraction: float = DEFAULT_SHOULDER_FRACTION,
) -> MembershipFamilySpec:
    items = terms.items() if isinstance(terms, Mapping) else terms
    params = {
        label: term_parameters(
            interval, kind, sigma_divisor=sigma_divisor, shoulder_fraction=shoulder_fraction
        )
        for label, interval in items
    }
    if not params:
        raise ValueError("cannot build a membership family over zero terms")
    return MembershipFamilySpec(kind=kind, params=params)


def build_rulebase_family(
    rulebase: RuleBase,
    kind: str,
    *,
    sigma_divisor: float = DEFAULT_SIGMA_DIVISOR,
    shoulder_fraction: float = DEFAULT_SHOULDER_FRACTION,
) -> MembershipFamilySpec:
    """Family covering every surviving antecedent term of a rule base."""
    return build_family(
        rulebase.all_terms(), kind, sigma_divisor=sigma_divisor, shoulder_fraction=shoulder_fraction
    )


def _tri(a: float, m: float, b: float, x: float) -> float:
    if x <= a or x >= b:
        return 0.0
    if x == m:
        return 1.0
    if x < m:
        return (x - a) / (m - a)
    return (b - x) / (b - m)


def _trap(a: float, b: float, c: float, d: float, x: float) -> float:
    if x < a or x > d:
        return 0.0
    if b <= x <= c:
        return 1.0
    if x < b:
        return (x - a) / (b - a) if b > a else 1.0
    return (d - x) / (d - c) if d > c else 1.0


def _gauss(mean: float, sigma: float, x: float) -> float:
    z = (x - mean) / sigma
    return math.exp(-0.5 * z * z)


def membership(spec: MembershipFamilySpec, term_id: str, x: float) -> float:
    """Membership degree of crisp x in one term; always inside [0, 1]."""
    if not math.isfinite(x):
        raise ValueError("membership input must be finite")
    p = spec.params[term_id]
    if spec.kind == "triangular":
        return _tri(p[0], p[1], p[2], x)
    if spec.kind == "trapezoidal":
        return _trap(p[0], p[1], p[2], p[3], x)
    if spec.kind == "gaussian":
        return _gauss(p[0], p[1], x)
    raise ValueError(f"unknown membership family kind {spec.kind!r}")


@dataclass(frozen=True)
class OutputUniverse:
    """Sampled output domain plus one triangular term per state severity level."""

    states: tuple["MachineState", ...]
    levels: tuple[int, ...]
    grid: np.ndarray
    term_matrix: np.ndarray  # shape (n_states, n_grid)

    def state_index(self, state: "MachineState") -> int:
        return self.states.index(state)

    def term_membership(self, state_pos: int, x: float) -> float:
        level = self.levels[state_pos]
        return _tri(level - LEVEL_PADDING, level, level + LEVEL_PADDING, x)


def build_output_universe(
    states: Iterable["MachineState"], grid_points: int = DEFAULT_GRID_POINTS
) -> OutputUniverse:
    ordered = tuple(sorted(states, key=lambda s: s.severity))
    if not ordered:
        raise ValueError("output universe needs at least one state")
    if grid_points < 3:
        raise ValueError("grid_points must be at least 3")
    levels = tuple(s.severity for s in ordered)
    lo = min(levels) - LEVEL_PADDING
    hi = max(levels) + LEVEL_PADDING
    grid = np.linspace(lo, hi, grid_points)
    term_matrix = np.stack(
        [np.interp(grid, [lv - LEVEL_PADDING, lv, lv + LEVEL_PADDING], [0.0, 1.0, 0.0]) for lv in levels]
    )
    return OutputUniverse(states=ordered, levels=levels, grid=grid, term_matrix=term_matrix)


@dataclass(frozen=True)
class FuzzySet:
    """Discretized fuzzy set: membership degrees sampled over a grid."""

    grid: np.ndarray
    degrees: np.ndarray

    def __post_init__(self) -> None:
        if self.grid.shape != self.degrees.shape:
            raise ValueError("grid and degrees must have identical shapes")
        if self.degrees.size and (self.degrees.min() < 0.0 or self.degrees.max() > 1.0):
            raise ValueError("membership degrees must lie in [0, 1]")


def clip_and_aggregate(universe: OutputUniverse, strengths: np.ndarray) -> FuzzySet:
    """Min-implication clip of each output term, then pointwise max aggregation."""
    clipped = np.minimum(universe.term_matrix, strengths[:, None])
    return FuzzySet(grid=universe.grid, degrees=clipped.max(axis=0))


def rule_strengths(
    x_v: float,
    x_g: float,
    rulebase: RuleBase,
    families: MembershipFamilySpec,
    universe: OutputUniverse,
    *,
    activation_floor: float = DEFAULT_ACTIVATION_FLOOR,
) -> np.ndarray:
    """Per-state firing strength: max over that state's rules of min-conjunction."""
    strengths = np.zeros(len(universe.states))
    for rule in rulebase.rules:
        strength = min(
            membership(families, rule.antecedent_v, x_v),
            membership(families, rule.antecedent_g, x_g),
        )
        if strength < activation_floor:
            continue
        idx = universe.state_index(rule.consequent)
        if strength > strengths[idx]:
            strengths[idx] = strength
    return strengths


def infer(
    x_v: float,
    x_g: float,
    rulebase: RuleBase,
    families: MembershipFamilySpec,
    universe: OutputUniverse,
    *,
    activation_floor: float = DEFAULT_ACTIVATION_FLOOR,
) -> FuzzySet:
    """Mamdani inference of one (x_v, x_g) reading into an aggregated output set."""
    strengths = rule_strengths(
        x_v, x_g, rulebase, families, universe, activation_floor=activation_floor
    )
    return clip_and_aggregate(universe, strengths)


def defuzzify(fset: FuzzySet) -> float | None:
    """Centroid of the aggregated set, or None when nothing fired."""
    total = float(fset.degrees.sum())
    if total == 0.0:
        return None
    return float((fset.grid * fset.degrees).sum() / total)


def decompose_score(score: float | None, universe: OutputUniverse) -> dict["MachineState", int]:
    """Read a crisp score back as state percentages.

    Each output term's membership at the score is normalized to percent;
    states below 1% after rounding are dropped.  Ordered by descending
    share, then severity, which is how mixes are rendered.
    """
    if score is None:
        return {}
    if not math.isfinite(score):
        raise ValueError("score must be finite (or None for undefined)")
    degrees = [universe.term_membership(k, score) for k in range(len(universe.states))]
    total = sum(degrees)
    if total == 0.0:
        return {}
    shares = [
        (state, round(100.0 * d / total))
        for state, d in zip(universe.states, degrees)
        if d > 0.0
    ]
    # Rounded shares order the rendering; exact ties fall back to severity.
    shares.sort(key=lambda item: (-item[1], item[0].severity))
    return {state: pct for state, pct in shares if pct >= 1}


def format_decomposition(decomposition: Mapping["MachineState", int]) -> str:
    """Render a state mix like 'St 50% & Mi 50%'; an empty mix renders as NaN."""
    if not decomposition:
        return "NaN"
    return " & ".join(f"{state.code} {pct}%" for state, pct in decomposition.items())


def families_to_dict(spec: MembershipFamilySpec) -> dict:
    return {
        "kind": spec.kind,
        "terms": [{"id": term_id, "params": list(params)} for term_id, params in spec.params.items()],
    }


def families_from_dict(doc: dict) -> MembershipFamilySpec:
    kind = doc["kind"]
    if kind not in FAMILY_KINDS:
        raise ValueError(f"unknown membership family kind {kind!r}")
    params = {entry["id"]: tuple(float(v) for v in entry["params"]) for entry in doc["terms"]}
    return MembershipFamilySpec(kind=kind, params=params)
