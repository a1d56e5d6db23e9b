import random

import pytest
from hypothesis import given, settings, strategies as st

from vibrodiag import fixtures
from vibrodiag.intervalgebra import (
    Interval,
    RuleBase,
    build_truth_table,
    compile_rules,
    inclusion_report,
    includes,
    intersects,
    load_rulebase,
    reduce_iic,
    rulebase_to_dict,
    write_rulebase,
)
from vibrodiag.jsonio import SchemaError, dumps
from vibrodiag.vibdata import MachineState, StateIntervalTable, StateIntervals


def brute_force_survivor_indices(intervals):
    """Independent pairwise computation of the surviving antichain.

    An interval is dropped when it is properly inside another, or when it
    exactly duplicates an earlier one.
    """
    removed = set()
    for i, a in enumerate(intervals):
        for j, b in enumerate(intervals):
            if i == j:
                continue
            if a == b:
                if j < i:
                    removed.add(i)
            elif a.lo >= b.lo and a.hi <= b.hi:
                removed.add(i)
    return [i for i in range(len(intervals)) if i not in removed]


def labeled(intervals):
    return [(f"T{i}", interval) for i, interval in enumerate(intervals)]


class TestInterval:
    def test_orders_and_width(self):
        iv = Interval(1.0, 3.0)
        assert iv.width == 2.0 and iv.mid == 2.0

    def test_rejects_reversed_bounds(self):
        with pytest.raises(ValueError):
            Interval(2.0, 1.0)

    def test_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            Interval(0.0, float("inf"))


class TestIncludes:
    def test_strict_nesting(self):
        assert includes(Interval(2, 3), Interval(1, 4))

    def test_reversed_is_false(self):
        assert not includes(Interval(1, 4), Interval(2, 3))

    def test_equal_intervals_include_each_other(self):
        assert includes(Interval(1, 2), Interval(1, 2))


class TestIntersects:
    def test_overlap(self):
        assert intersects(Interval(0, 2), Interval(1, 3))

    def test_disjoint(self):
        assert not intersects(Interval(0, 1), Interval(2, 3))

    def test_touching_endpoints(self):
        assert intersects(Interval(0, 1), Interval(1, 2))


class TestReduceIic:
    def test_nested_pair_keeps_outer_and_remaps(self):
        red = reduce_iic(labeled([Interval(2, 3), Interval(1, 4)]))
        assert [lab for lab, _ in red.survivors] == ["T1"]
        assert red.remap == {"T0": "T1", "T1": "T1"}

    def test_disjoint_antichain_unchanged(self):
        items = labeled([Interval(0, 1), Interval(2, 3)])
        red = reduce_iic(items)
        assert list(red.survivors) == items
        assert red.removed == ()

    def test_nested_chain_keeps_outermost(self):
        rng = random.Random(11)
        lo, hi = 0.0, 100.0
        chain = []
        for _ in range(7):
            chain.append(Interval(lo, hi))
            shrink = rng.uniform(1.0, 5.0)
            lo, hi = lo + shrink, hi - shrink
        rng.shuffle(chain)
        red = reduce_iic(labeled(chain))
        assert len(red.survivors) == 1
        assert red.survivors[0][1] == max(chain, key=lambda iv: iv.width)
        expected = brute_force_survivor_indices(chain)
        assert [f"T{i}" for i in expected] == [lab for lab, _ in red.survivors]

    def test_exact_duplicates_keep_first(self):
        red = reduce_iic(labeled([Interval(1, 2), Interval(1, 2), Interval(5, 6)]))
        assert [lab for lab, _ in red.survivors] == ["T0", "T2"]
        assert red.remap["T1"] == "T0"

    def test_remap_prefers_smallest_width_superset(self):
        items = [
            ("wide", Interval(0, 10)),
            ("narrow", Interval(3, 6)),
            ("inner", Interval(4, 5)),
        ]
        red = reduce_iic(items)
        assert red.remap["inner"] == "narrow"

    def test_remap_width_tie_goes_to_earliest(self):
        items = [
            ("a", Interval(0, 4)),
            ("b", Interval(1, 5)),
            ("inner", Interval(1.5, 3.5)),
        ]
        red = reduce_iic(items)
        assert red.remap["inner"] == "a"

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            reduce_iic([])

    @staticmethod
    def random_interval_set(rng, n):
        out = []
        for _ in range(n):
            lo = rng.randrange(0, 20) / 2.0
            width = rng.randrange(0, 12) / 2.0
            out.append(Interval(lo, lo + width))
        return out

    def test_matches_brute_force_on_random_sets(self):
        rng = random.Random(2024)
        for _ in range(300):
            intervals = self.random_interval_set(rng, rng.randrange(1, 13))
            red = reduce_iic(labeled(intervals))
            expected = [f"T{i}" for i in brute_force_survivor_indices(intervals)]
            assert [lab for lab, _ in red.survivors] == expected

    def test_idempotent_on_random_sets(self):
        rng = random.Random(99)
        for _ in range(100):
            intervals = self.random_interval_set(rng, rng.randrange(1, 13))
            once = reduce_iic(labeled(intervals))
            twice = reduce_iic(list(once.survivors))
            assert list(twice.survivors) == list(once.survivors)
            assert all(twice.remap[lab] == lab for lab, _ in once.survivors)

    @given(
        st.lists(
            st.tuples(st.integers(0, 30), st.integers(0, 15)),
            min_size=1,
            max_size=12,
        )
    )
    def test_survivors_form_antichain(self, raw):
        intervals = [Interval(lo / 2.0, (lo + w) / 2.0) for lo, w in raw]
        red = reduce_iic(labeled(intervals))
        survivors = [iv for _, iv in red.survivors]
        for i, a in enumerate(survivors):
            for j, b in enumerate(survivors):
                if i != j:
                    assert not includes(a, b)

    @given(
        st.lists(
            st.tuples(st.integers(0, 30), st.integers(0, 15)),
            min_size=1,
            max_size=12,
        ),
        st.floats(0.0, 23.0),
    )
    def test_union_coverage_preserved(self, raw, point):
        intervals = [Interval(lo / 2.0, (lo + w) / 2.0) for lo, w in raw]
        red = reduce_iic(labeled(intervals))
        covered_before = any(iv.contains_point(point) for iv in intervals)
        covered_after = any(iv.contains_point(point) for _, iv in red.survivors)
        assert covered_before == covered_after

    def test_remapped_labels_point_at_supersets(self):
        rng = random.Random(5)
        for _ in range(100):
            intervals = self.random_interval_set(rng, rng.randrange(1, 13))
            red = reduce_iic(labeled(intervals))
            by_label = dict(labeled(intervals))
            survivor_ivs = dict(red.survivors)
            for label, interval in labeled(intervals):
                target = red.remap[label]
                assert includes(interval, survivor_ivs[target])
                # oracle: no surviving superset is strictly narrower
                widths = [
                    siv.width
                    for _, siv in red.survivors
                    if includes(interval, siv)
                ]
                assert survivor_ivs[target].width == min(widths)


def small_table(n):
    states = MachineState.by_severity()[:n]
    rows = tuple(
        StateIntervals(s, Interval(2.0 * k, 2.0 * k + 1), Interval(10.0 + 2 * k, 11.0 + 2 * k))
        for k, s in enumerate(states)
    )
    return StateIntervalTable(rows)


class TestTruthTable:
    def test_seven_state_diagonal(self, paper_table):
        truth = build_truth_table(paper_table)
        assert len(truth.rows) == 7
        for k, row in enumerate(truth.rows):
            assert row.iv_index == row.ig_index == k
            assert sum(row.flags) == 1
            assert row.flags[k]

    def test_single_state(self):
        truth = build_truth_table(small_table(1))
        assert len(truth.rows) == 1

    def test_three_state_matches_exhaustive_enumeration(self):
        table = small_table(3)
        truth = build_truth_table(table)
        n = 3
        expected = [
            (i, j, k)
            for i in range(n)
            for j in range(n)
            for k in range(n)
            if i == k and j == k
        ]
        got = [(row.iv_index, row.ig_index, row.flags.index(True)) for row in truth.rows]
        assert got == expected

    def test_no_duplicate_triples(self, paper_table):
        truth = build_truth_table(paper_table)
        triples = [(r.iv_index, r.ig_index, r.flags.index(True)) for r in truth.rows]
        assert len(set(triples)) == len(triples)


class TestCompileRules:
    def test_paper_shape_counts(self, paper_rulebase):
        assert len(paper_rulebase.rules) == 7
        assert [lab for lab, _ in paper_rulebase.v_terms] == ["Iv1", "Iv2", "Iv4", "Iv5", "Iv7"]
        assert [lab for lab, _ in paper_rulebase.g_terms] == ["Ig1", "Ig5"]

    def test_paper_shape_rule_rows(self, paper_rulebase):
        rows = [
            (r.antecedent_v, r.antecedent_g, r.consequent.code) for r in paper_rulebase.rules
        ]
        assert rows == [
            ("Iv1", "Ig1", "Nr"),
            ("Iv2", "Ig1", "Im"),
            ("Iv4", "Ig1", "St"),
            ("Iv4", "Ig1", "Mi"),
            ("Iv5", "Ig5", "Ml"),
            ("Iv7", "Ig5", "Bl"),
            ("Iv7", "Ig5", "Gf"),
        ]

    def test_shared_antecedents_have_distinct_consequents(self, paper_rulebase):
        triples = {
            (r.antecedent_v, r.antecedent_g, r.consequent) for r in paper_rulebase.rules
        }
        assert len(triples) == 7

    def test_disjoint_table_keeps_all_terms(self):
        rulebase = compile_rules(fixtures.disjoint_interval_table())
        assert len(rulebase.rules) == 7
        assert len(rulebase.v_terms) == 7
        assert len(rulebase.g_terms) == 7

    def test_single_state_table(self):
        rulebase = compile_rules(fixtures.single_state_interval_table())
        assert len(rulebase.rules) == 1

    def test_every_state_appears_once_as_consequent(self, paper_table, paper_rulebase):
        assert [r.consequent for r in paper_rulebase.rules] == list(paper_table.states)

    def test_random_four_state_antecedents_match_remap_oracle(self):
        rng = random.Random(31)
        states = MachineState.by_severity()[:4]
        for _ in range(50):
            ivs = TestReduceIic.random_interval_set(rng, 4)
            igs = TestReduceIic.random_interval_set(rng, 4)
            table = StateIntervalTable(
                tuple(StateIntervals(s, ivs[k], igs[k]) for k, s in enumerate(states))
            )
            rulebase = compile_rules(table)
            v_survive = dict(rulebase.v_terms)
            for k, rule in enumerate(rulebase.rules):
                # oracle: scan all surviving supersets of the state's own interval
                own = ivs[k]
                candidates = [
                    (siv.width, lab)
                    for lab, siv in rulebase.v_terms
                    if includes(own, siv)
                ]
                assert rule.antecedent_v in {lab for _, lab in candidates}
                best_width = min(w for w, _ in candidates)
                assert v_survive[rule.antecedent_v].width == best_width

    def test_compilation_deterministic_bytes(self, paper_table):
        a = dumps(rulebase_to_dict(compile_rules(paper_table)))
        b = dumps(rulebase_to_dict(compile_rules(paper_table)))
        assert a == b


class TestInclusionReport:
    def test_paper_table_lists_inclusions_and_intersections(self, paper_table):
        text = inclusion_report(paper_table)
        assert "Iv3 included in Iv4" in text
        assert "Iv6 included in Iv7" in text
        assert "Ig2 included in Ig1" in text
        assert "intersects" in text

    def test_disjoint_table_reports_none(self):
        assert "no inclusions detected" in inclusion_report(fixtures.disjoint_interval_table())


class TestRuleBaseFile:
    def test_round_trip(self, tmp_path, paper_rulebase):
        path = tmp_path / "rulebase.json"
        write_rulebase(path, paper_rulebase, families={"kind": "triangular", "terms": []})
        loaded, families = load_rulebase(path)
        assert loaded.rules == paper_rulebase.rules
        assert [lab for lab, _ in loaded.v_terms] == [lab for lab, _ in paper_rulebase.v_terms]
        assert families == {"kind": "triangular", "terms": []}

    def test_schema_version_field(self, paper_rulebase):
        assert rulebase_to_dict(paper_rulebase)["schema"] == "ittflm-rulebase/1"

    def test_unknown_term_reference_rejected(self, tmp_path, paper_rulebase):
        doc = rulebase_to_dict(paper_rulebase)
        doc["rules"][0]["iv"] = "Iv99"
        path = tmp_path / "broken.json"
        path.write_text(dumps(doc))
        with pytest.raises(SchemaError):
            load_rulebase(path)

    def test_wrong_schema_rejected(self, tmp_path):
        path = tmp_path / "other.json"
        path.write_text('{"schema": "nope/1"}')
        with pytest.raises(SchemaError):
            load_rulebase(path)
