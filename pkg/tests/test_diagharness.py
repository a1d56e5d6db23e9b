import pytest

from vibrodiag import fixtures
from vibrodiag.diagharness import (
    Grade,
    bench_diagnose,
    bench_to_dict,
    build_probes,
    compare_families,
    comparison_markdown,
    experiment_markdown,
    experiment_to_dict,
    grade_accuracy,
    run_experiment,
)
from vibrodiag.fuzzcore import FAMILY_KINDS, build_rulebase_family
from vibrodiag.intervalgebra import FuzzyRule, Interval, RuleBase, compile_rules
from vibrodiag.vibdata import MachineState

STATES = MachineState.by_severity()


class TestBuildProbes:
    def test_two_probes_per_state_in_severity_order(self, paper_table):
        probes = build_probes(paper_table)
        assert len(probes) == 14
        assert [p.number for p in probes] == list(range(1, 15))
        assert [p.expected for p in probes[::2]] == list(paper_table.states)

    def test_probes_sit_inside_their_intervals(self, paper_table):
        for probe in build_probes(paper_table):
            row = paper_table.row_for(probe.expected)
            assert row.iv.lo < probe.x_v < row.iv.hi
            assert row.ig.lo < probe.x_g < row.ig.hi

    def test_offset_is_one_percent_of_width(self, paper_table):
        probe = build_probes(paper_table)[0]
        row = paper_table.row_for(probe.expected)
        assert probe.x_v == pytest.approx(row.iv.lo + 0.01 * row.iv.width)
        assert probe.x_g == pytest.approx(row.ig.lo + 0.01 * row.ig.width)

    def test_labels_match_convention(self, paper_table):
        probes = build_probes(paper_table)
        assert (probes[0].label_v, probes[0].label_g) == ("V1-min", "g1-min")
        assert (probes[13].label_v, probes[13].label_g) == ("V7-max", "g7-max")


class TestGradeAccuracy:
    def test_dominant_share_is_excellent(self):
        decomp = {MachineState.STRUCTURAL_FAULT: 95, MachineState.MISALIGNMENT: 5}
        assert grade_accuracy(MachineState.STRUCTURAL_FAULT, decomp) is Grade.EXCELLENT

    def test_majority_share_is_good(self):
        decomp = {MachineState.NORMAL: 70, MachineState.IMBALANCE: 30}
        assert grade_accuracy(MachineState.NORMAL, decomp) is Grade.GOOD

    def test_empty_decomposition_is_bad(self):
        assert grade_accuracy(MachineState.BEARING_LUBRICATION, {}) is Grade.BAD

    def test_zero_share_with_output_is_poor(self):
        decomp = {MachineState.STRUCTURAL_FAULT: 100}
        assert grade_accuracy(MachineState.IMBALANCE, decomp) is Grade.POOR

    def test_minor_share_is_average(self):
        decomp = {MachineState.STRUCTURAL_FAULT: 55, MachineState.MISALIGNMENT: 45}
        assert grade_accuracy(MachineState.MISALIGNMENT, decomp) is Grade.AVERAGE

    def test_monotone_in_share(self):
        order = []
        for share in range(0, 101):
            decomp = {MachineState.NORMAL: share, MachineState.IMBALANCE: 100 - share}
            if share == 0:
                decomp.pop(MachineState.NORMAL)
            order.append(grade_accuracy(MachineState.NORMAL, decomp))
        ranks = {Grade.POOR: 0, Grade.AVERAGE: 1, Grade.GOOD: 2, Grade.EXCELLENT: 3}
        numeric = [ranks[g] for g in order]
        assert numeric == sorted(numeric)


class TestRunExperiment:
    def test_triangular_detection_near_half(self, paper_table):
        _, summary = run_experiment(paper_table, "triangular")
        detected = round(summary.detection_rate * summary.n_probes)
        assert abs(detected - 7) <= 1

    def test_gaussian_undefined_and_usable(self, paper_table):
        reports, summary = run_experiment(paper_table, "gaussian")
        assert summary.undefined >= 1
        usable = round(summary.usable_rate * summary.n_probes)
        assert abs(usable - 4) <= 1
        # undefined or confidently-wrong outputs dominate
        wrong_100 = sum(
            1
            for r in reports
            if r.score is not None
            and r.decomposition.get(r.probe.expected, 0) == 0
            and max(r.decomposition.values()) == 100
        )
        assert summary.undefined + wrong_100 >= 4

    def test_trapezoidal_probes_always_fire(self, paper_table):
        for table in (paper_table, fixtures.disjoint_interval_table(),
                      fixtures.single_state_interval_table()):
            reports, summary = run_experiment(table, "trapezoidal")
            assert summary.undefined == 0
            assert all(r.score is not None for r in reports)

    def test_single_state_all_excellent_without_floor(self):
        table = fixtures.single_state_interval_table()
        for kind in FAMILY_KINDS:
            reports, summary = run_experiment(table, kind, activation_floor=0.0)
            assert summary.excellent_rate == 1.0, kind

    def test_single_state_triangular_and_trapezoidal_at_defaults(self):
        table = fixtures.single_state_interval_table()
        for kind in ("triangular", "trapezoidal"):
            _, summary = run_experiment(table, kind)
            assert summary.excellent_rate == 1.0

    def test_disjoint_fixture_all_excellent_for_crisp_supports(self):
        table = fixtures.disjoint_interval_table()
        for kind in ("triangular", "trapezoidal"):
            _, summary = run_experiment(table, kind)
            assert summary.excellent_rate == 1.0

    def test_disjoint_fixture_beats_canonical_triangular_without_floor(self, paper_table):
        _, canonical_tri = run_experiment(paper_table, "triangular")
        table = fixtures.disjoint_interval_table()
        for kind in FAMILY_KINDS:
            _, summary = run_experiment(table, kind, activation_floor=0.0)
            assert summary.detection_rate >= canonical_tri.detection_rate

    def test_summary_counts_consistent(self, paper_table):
        reports, summary = run_experiment(paper_table, "trapezoidal")
        assert summary.n_probes == len(reports) == 14
        assert sum(summary.grade_counts.values()) == 14
        assert summary.detection_rate <= summary.usable_rate <= 1.0


class TestCompareFamilies:
    def test_canonical_ranking_puts_trapezoidal_first(self, paper_table):
        comparison = compare_families(paper_table)
        assert comparison.ranking[0] == "trapezoidal"
        assert comparison.ranking[-1] == "gaussian"

    def test_canonical_ordering_relation(self, paper_table):
        comparison = compare_families(paper_table)
        s = comparison.summaries
        assert s["trapezoidal"].detection_rate >= s["triangular"].detection_rate
        assert s["triangular"].detection_rate > s["gaussian"].detection_rate

    def test_ordering_stable_across_jittered_seeds(self, paper_table):
        holds = 0
        for seed in range(1, 11):
            table = fixtures.paper_interval_table(seed=seed, jitter=0.05)
            s = compare_families(table).summaries
            if (
                s["trapezoidal"].detection_rate >= s["triangular"].detection_rate
                and s["triangular"].detection_rate > s["gaussian"].detection_rate
            ):
                holds += 1
        assert holds >= 9

    def test_single_state_rows_identical_without_floor(self):
        table = fixtures.single_state_interval_table()
        comparison = compare_families(table, activation_floor=0.0)
        rates = {s.excellent_rate for s in comparison.summaries.values()}
        assert rates == {1.0}


class TestBench:
    def test_median_well_under_five_milliseconds(self, paper_rulebase):
        fam = build_rulebase_family(paper_rulebase, "trapezoidal")
        stats = bench_diagnose(paper_rulebase, fam, 1500)
        assert stats.median_us < 5000.0
        assert stats.p99_us < 5000.0
        assert stats.rules == 7

    def test_single_rule_not_slower_than_seven(self, paper_rulebase):
        fam7 = build_rulebase_family(paper_rulebase, "trapezoidal")
        seven = bench_diagnose(paper_rulebase, fam7, 1500)
        one_rb = RuleBase(
            v_terms=paper_rulebase.v_terms[:1],
            g_terms=paper_rulebase.g_terms[:1],
            rules=(FuzzyRule("Iv1", "Ig1", MachineState.NORMAL),),
        )
        fam1 = build_rulebase_family(one_rb, "trapezoidal")
        one = bench_diagnose(one_rb, fam1, 1500)
        assert one.median_us <= seven.median_us

    def test_seven_hundred_rules_scale_sublinearly(self, paper_rulebase):
        fam7 = build_rulebase_family(paper_rulebase, "trapezoidal")
        seven = bench_diagnose(paper_rulebase, fam7, 1000)
        v_terms = tuple((f"Iv{k + 1}", Interval(float(k), float(k + 1))) for k in range(700))
        g_terms = tuple((f"Ig{k + 1}", Interval(3.0 * k, 3.0 * k + 1.0)) for k in range(7))
        rules = tuple(
            FuzzyRule(f"Iv{k + 1}", f"Ig{k % 7 + 1}", STATES[k % 7]) for k in range(700)
        )
        big = RuleBase(v_terms=v_terms, g_terms=g_terms, rules=rules)
        fam = build_rulebase_family(big, "trapezoidal")
        stats = bench_diagnose(big, fam, 300)
        assert stats.median_us <= 100.0 * seven.median_us

    def test_rejects_zero_iterations(self, paper_rulebase):
        fam = build_rulebase_family(paper_rulebase, "trapezoidal")
        with pytest.raises(ValueError):
            bench_diagnose(paper_rulebase, fam, 0)

    def test_bench_dict_fields(self, paper_rulebase):
        fam = build_rulebase_family(paper_rulebase, "trapezoidal")
        doc = bench_to_dict(bench_diagnose(paper_rulebase, fam, 200))
        assert doc["schema"] == "ittflm-bench/1"
        assert set(doc) == {"schema", "iterations", "rules", "median_us", "p99_us", "mean_us"}


class TestRendering:
    def test_markdown_mirrors_expected_columns(self, paper_table):
        reports, summary = run_experiment(paper_table, "triangular")
        md = experiment_markdown(reports, summary)
        assert "| No | fft_v | fft_g | expected | score | state mix | accuracy |" in md
        assert "NaN" not in md.split("\n")[3]  # triangular canonical run has defined scores
        assert md.count("\n| ") >= 14

    def test_gaussian_markdown_shows_nan(self, paper_table):
        reports, summary = run_experiment(paper_table, "gaussian")
        md = experiment_markdown(reports, summary)
        assert "NaN" in md

    def test_json_report_has_no_latency(self, paper_table):
        reports, summary = run_experiment(paper_table, "triangular")
        doc = experiment_to_dict(reports, summary)
        assert doc["schema"] == "ittflm-report/1"
        assert "latency" not in str(doc)

    def test_comparison_markdown_lists_ranking(self, paper_table):
        comparison = compare_families(paper_table)
        md = comparison_markdown(comparison)
        assert "| 1 | trapezoidal" in md
