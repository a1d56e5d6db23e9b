"""Interval containment algebra and compilation of minimized fuzzy rule bases.

The pipeline here goes: per-state intervals -> truth table of antecedent
pairs under logical conjunction -> inclusion-based reduction of each
antecedent term set -> one conjunction rule per state over the surviving
terms.  States whose own interval was swallowed by a wider one keep firing
through the surviving superset term, so two rules may share identical
antecedents while naming different consequents.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Iterable, Mapping, Sequence

from .jsonio import SchemaError, expect_schema, read_json, write_json

if TYPE_CHECKING:
    from .vibdata import MachineState, StateIntervalTable

RULEBASE_SCHEMA = "ittflm-rulebase/1"


@dataclass(frozen=True)
class Interval:
    """Closed interval [lo, hi] with finite endpoints."""

    lo: float
    hi: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.lo) and math.isfinite(self.hi)):
            raise ValueError(f"interval endpoints must be finite, got [{self.lo}, {self.hi}]")
        if self.lo > self.hi:
            raise ValueError(f"interval lower bound {self.lo} exceeds upper bound {self.hi}")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def mid(self) -> float:
        return (self.lo + self.hi) / 2.0

    def contains_point(self, x: float) -> bool:
        return self.lo <= x <= self.hi


def includes(a: Interval, b: Interval) -> bool:
    """True iff a is wholly inside b (endpoint equality counts as inside)."""
    return a.lo >= b.lo and a.hi <= b.hi


def intersects(a: Interval, b: Interval) -> bool:
    """True iff a and b share at least one point (touching endpoints included)."""
    return max(a.lo, b.lo) <= min(a.hi, b.hi)


LabeledIntervals = Sequence[tuple[str, Interval]]


@dataclass(frozen=True)
class Reduction:
    """Outcome of inclusion-based term reduction.

    survivors keep their input order and labels; remap sends every input
    label (surviving or removed) to the label of its surviving home term.
    """

    survivors: tuple[tuple[str, Interval], ...]
    remap: dict[str, str]
    removed: tuple[tuple[str, Interval], ...]


def reduce_iic(labeled: LabeledIntervals) -> Reduction:
    """Drop every interval that lies inside another distinct interval.

    The removal set is decided against the original collection, so the
    result cannot depend on iteration order.  Exact duplicates would
    otherwise delete each other; the earliest one (input order encodes
    severity priority) is kept.  Removed labels are remapped to their
    smallest-width surviving superset, ties going to the earliest survivor.
    """
    items = list(labeled)
    if not items:
        raise ValueError("reduce_iic requires at least one interval")

    removed_idx: set[int] = set()
    for i, (_, a) in enumerate(items):
        for j, (_, b) in enumerate(items):
            if i == j:
                continue
            if a == b:
                if j < i:
                    removed_idx.add(i)
            elif includes(a, b):
                removed_idx.add(i)

    survivors = tuple(pair for k, pair in enumerate(items) if k not in removed_idx)
    removed = tuple(items[k] for k in sorted(removed_idx))

    remap: dict[str, str] = {}
    for k, (label, interval) in enumerate(items):
        if k not in removed_idx:
            remap[label] = label
            continue
        best: tuple[str, Interval] | None = None
        for slabel, sinterval in survivors:
            if includes(interval, sinterval):
                if best is None or sinterval.width < best[1].width:
                    best = (slabel, sinterval)
        if best is None:  # unreachable: inclusion chains always end in a survivor
            raise AssertionError(f"no surviving superset for removed term {label}")
        remap[label] = best[0]

    return Reduction(survivors=survivors, remap=remap, removed=removed)


@dataclass(frozen=True)
class TruthTableRow:
    iv_index: int
    ig_index: int
    flags: tuple[bool, ...]


@dataclass(frozen=True)
class TruthTable:
    states: tuple["MachineState", ...]
    rows: tuple[TruthTableRow, ...]


def build_truth_table(table: "StateIntervalTable") -> TruthTable:
    """Enumerate antecedent interval pairs against state consequents.

    A candidate row pairs the i-th velocity interval with the j-th
    acceleration interval; its flag for state k is true only when both
    antecedents are the intervals extracted for k.  Rows with no true flag
    are discarded, which leaves exactly one row per state (the diagonal).
    """
    states = table.states
    n = len(states)
    if n == 0:
        raise ValueError("interval table has no states")
    rows = []
    for i in range(n):
        for j in range(n):
            flags = tuple(i == k and j == k for k in range(n))
            if any(flags):
                rows.append(TruthTableRow(iv_index=i, ig_index=j, flags=flags))
    return TruthTable(states=states, rows=tuple(rows))


@dataclass(frozen=True)
class FuzzyRule:
    """Conjunction rule: IF v is antecedent_v AND g is antecedent_g THEN consequent."""

    antecedent_v: str
    antecedent_g: str
    consequent: "MachineState"


@dataclass(frozen=True)
class RuleBase:
    """Minimized rule set plus the surviving labeled antecedent terms."""

    v_terms: tuple[tuple[str, Interval], ...]
    g_terms: tuple[tuple[str, Interval], ...]
    rules: tuple[FuzzyRule, ...]

    @property
    def states(self) -> tuple["MachineState", ...]:
        return tuple(rule.consequent for rule in self.rules)

    def term_interval(self, term_id: str) -> Interval:
        for label, interval in self.v_terms + self.g_terms:
            if label == term_id:
                return interval
        raise KeyError(term_id)

    def all_terms(self) -> tuple[tuple[str, Interval], ...]:
        return self.v_terms + self.g_terms


def v_term_name(position: int) -> str:
    return f"Iv{position + 1}"


def g_term_name(position: int) -> str:
    return f"Ig{position + 1}"


def compile_rules(table: "StateIntervalTable") -> RuleBase:
    """Compile a per-state interval table into a minimized conjunction rule base.

    Velocity and acceleration term sets are reduced independently; each
    truth-table row then has its antecedents rewritten to the surviving
    term labels, producing one rule per state in severity order.
    """
    rows = table.rows
    v_labeled = [(v_term_name(k), row.iv) for k, row in enumerate(rows)]
    g_labeled = [(g_term_name(k), row.ig) for k, row in enumerate(rows)]
    v_red = reduce_iic(v_labeled)
    g_red = reduce_iic(g_labeled)

    truth = build_truth_table(table)
    rules = []
    for tt_row in truth.rows:
        state = truth.states[tt_row.flags.index(True)]
        rules.append(
            FuzzyRule(
                antecedent_v=v_red.remap[v_term_name(tt_row.iv_index)],
                antecedent_g=g_red.remap[g_term_name(tt_row.ig_index)],
                consequent=state,
            )
        )
    return RuleBase(v_terms=v_red.survivors, g_terms=g_red.survivors, rules=tuple(rules))


def _pairwise_relations(labeled: LabeledIntervals) -> tuple[list[str], list[str]]:
    inclusions = []
    overlaps = []
    items = list(labeled)
    for i, (la, a) in enumerate(items):
        for j, (lb, b) in enumerate(items):
            if i == j:
                continue
            if includes(a, b) and (a != b or j < i):
                inclusions.append(f"{la} included in {lb}")
            elif j > i and not includes(b, a) and intersects(a, b):
                overlaps.append(f"{la} intersects {lb}")
    return inclusions, overlaps


def inclusion_report(table: "StateIntervalTable") -> str:
    """Human-readable listing of inclusions and plain intersections per axis.

    Intersections that are not inclusions are reported but never merged;
    only inclusions drive term reduction.
    """
    rows = table.rows
    v_labeled = [(v_term_name(k), row.iv) for k, row in enumerate(rows)]
    g_labeled = [(g_term_name(k), row.ig) for k, row in enumerate(rows)]
    lines = []
    any_inclusion = False
    for axis, labeled in (("fft_v", v_labeled), ("fft_g", g_labeled)):
        inclusions, overlaps = _pairwise_relations(labeled)
        if inclusions:
            any_inclusion = True
            lines.append(f"{axis} inclusions: " + "; ".join(inclusions))
        if overlaps:
            lines.append(f"{axis} intersections: " + "; ".join(overlaps))
    if not any_inclusion:
        lines.insert(0, "no inclusions detected")
    return "\n".join(lines) if lines else "no inclusions detected"


def rulebase_to_dict(rulebase: RuleBase, families: dict | None = None) -> dict:
    doc = {
        "schema": RULEBASE_SCHEMA,
        "v_terms": [{"id": label, "lo": iv.lo, "hi": iv.hi} for label, iv in rulebase.v_terms],
        "g_terms": [{"id": label, "lo": iv.lo, "hi": iv.hi} for label, iv in rulebase.g_terms],
        "rules": [
            {"iv": r.antecedent_v, "ig": r.antecedent_g, "then": r.consequent.code}
            for r in rulebase.rules
        ],
    }
    if families is not None:
        doc["families"] = families
    return doc


def write_rulebase(path, rulebase: RuleBase, families: dict | None = None) -> None:
    write_json(path, rulebase_to_dict(rulebase, families))


def load_rulebase(path) -> tuple[RuleBase, dict | None]:
    """Read a rule-base artifact; returns the rule base and the optional families block."""
    from .vibdata import MachineState  # deferred: vibdata depends on this module

    doc = expect_schema(read_json(path), RULEBASE_SCHEMA, path)
    try:
        v_terms = tuple((t["id"], Interval(float(t["lo"]), float(t["hi"]))) for t in doc["v_terms"])
        g_terms = tuple((t["id"], Interval(float(t["lo"]), float(t["hi"]))) for t in doc["g_terms"])
        rules = tuple(
            FuzzyRule(
                antecedent_v=r["iv"],
                antecedent_g=r["ig"],
                consequent=MachineState.from_code(r["then"]),
            )
            for r in doc["rules"]
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaError(f"{path}: malformed rule base ({exc})") from exc
    known = {label for label, _ in v_terms} | {label for label, _ in g_terms}
    for rule in rules:
        if rule.antecedent_v not in known or rule.antecedent_g not in known:
            raise SchemaError(f"{path}: rule references unknown term")
    return RuleBase(v_terms=v_terms, g_terms=g_terms, rules=rules), doc.get("families")
