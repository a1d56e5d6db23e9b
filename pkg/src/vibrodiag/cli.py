"""Command-line frontend: fixture generation, extraction, compilation, diagnosis.

Exit codes: 0 success (including a diagnosis where no rule fired),
1 usage error, 2 data or schema error.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path

from . import diagharness, fixtures, fuzzcore, intervalgebra, vibdata
from .jsonio import SchemaError, write_json


@dataclass(frozen=True)
class PipelineConfig:
    family: str = "trapezoidal"
    sigma_divisor: float = fuzzcore.DEFAULT_SIGMA_DIVISOR
    shoulder_fraction: float = fuzzcore.DEFAULT_SHOULDER_FRACTION
    grid_points: int = fuzzcore.DEFAULT_GRID_POINTS
    probe_delta: float = diagharness.DEFAULT_PROBE_DELTA
    activation_floor: float = fuzzcore.DEFAULT_ACTIVATION_FLOOR

    def validate(self) -> "PipelineConfig":
        if self.family not in fuzzcore.FAMILY_KINDS:
            raise ValueError(f"family must be one of {fuzzcore.FAMILY_KINDS}")
        if self.sigma_divisor <= 0 or self.grid_points < 3 or not 0 < self.probe_delta < 0.5:
            raise ValueError("sigma_divisor, grid_points and probe_delta must be positive and sane")
        if not 0.0 < self.shoulder_fraction < 0.5:
            raise ValueError("shoulder_fraction must be in (0, 0.5)")
        if self.activation_floor < 0:
            raise ValueError("activation_floor must be non-negative")
        return self


_CONFIG_FIELD_TYPES = {f.name: f.type for f in fields(PipelineConfig)}


def load_config_file(path: str | Path) -> dict:
    """Parse a flat key=value config file; '#' starts a comment."""
    values: dict = {}
    for lineno, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SchemaError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _CONFIG_FIELD_TYPES:
            raise SchemaError(f"{path}:{lineno}: unknown config key {key!r}")
        if key == "family":
            values[key] = value
        elif key == "grid_points":
            values[key] = int(value)
        else:
            values[key] = float(value)
    return values


def resolve_config(args: argparse.Namespace) -> PipelineConfig:
    """Defaults, overridden by a config file if given, overridden by flags."""
    values = {}
    if getattr(args, "config", None):
        values.update(load_config_file(args.config))
    for name in _CONFIG_FIELD_TYPES:
        flag_value = getattr(args, name, None)
        if flag_value is not None:
            values[name] = flag_value
    try:
        return PipelineConfig(**values).validate()
    except ValueError as exc:
        raise SchemaError(str(exc)) from exc


# --- commands ----------------------------------------------------------------


def cmd_gen_fixture(args: argparse.Namespace) -> int:
    if args.geometry == "paper":
        table = fixtures.paper_interval_table(seed=args.seed, jitter=args.jitter)
    elif args.geometry == "disjoint":
        table = fixtures.disjoint_interval_table()
    else:
        table = fixtures.single_state_interval_table()
    frames = fixtures.generate_frames(
        table,
        n_frames=args.frames,
        seed=args.seed,
        fft_samples=args.fft_samples,
        waveform_samples=args.waveform_samples,
    )
    if args.format == "csv":
        fixtures.write_frames_csv(args.out, frames)
    else:
        fixtures.write_frames_ndjson(args.out, frames)
    print(f"wrote {len(frames)} frames to {args.out}")
    return 0


def cmd_extract(data_path: str, out_path: str) -> int:
    frames = vibdata.read_frames(data_path)
    table = vibdata.extract_intervals(frames)
    vibdata.write_interval_table(out_path, table)
    for state, fraction in vibdata.class_distribution(frames).items():
        print(f"{state.code}: {100.0 * fraction:.1f}%")
    print(f"wrote interval table ({len(table.rows)} states) to {out_path}")
    return 0


def cmd_compile(table_path: str, kind: str, out_path: str, config: PipelineConfig) -> int:
    table = vibdata.load_interval_table(table_path)
    rulebase = intervalgebra.compile_rules(table)
    families = fuzzcore.build_rulebase_family(
        rulebase,
        kind,
        sigma_divisor=config.sigma_divisor,
        shoulder_fraction=config.shoulder_fraction,
    )
    intervalgebra.write_rulebase(out_path, rulebase, fuzzcore.families_to_dict(families))
    print(
        f"{len(rulebase.rules)} rules, {len(rulebase.v_terms)} v-terms, "
        f"{len(rulebase.g_terms)} g-terms"
    )
    print(intervalgebra.inclusion_report(table))
    print(f"wrote rule base to {out_path}")
    return 0


def cmd_diagnose(rulebase_path: str, x_v: float, x_g: float, config: PipelineConfig) -> int:
    rulebase, families_doc = intervalgebra.load_rulebase(rulebase_path)
    if families_doc is None:
        raise SchemaError(f"{rulebase_path}: rule base carries no membership families")
    families = fuzzcore.families_from_dict(families_doc)
    universe = fuzzcore.build_output_universe(
        {rule.consequent for rule in rulebase.rules}, config.grid_points
    )
    score, decomposition, latency_us = diagharness.diagnose_once(
        x_v, x_g, rulebase, families, universe, activation_floor=config.activation_floor
    )
    if score is None:
        print(f"no rule fired (latency {latency_us:.1f} us)")
    else:
        mix = fuzzcore.format_decomposition(decomposition)
        print(f"score={score:.2f} {mix} (latency {latency_us:.1f} us)")
    return 0


def _write_report_files(out_dir: Path, name: str, md: str, doc: dict, fmt: str) -> list[Path]:
    written = []
    if fmt in ("md", "both"):
        path = out_dir / f"{name}.md"
        path.write_text(md, encoding="utf-8")
        written.append(path)
    if fmt in ("json", "both"):
        path = out_dir / f"{name}.json"
        write_json(path, doc)
        written.append(path)
    return written


def cmd_experiment(table_path: str, out_dir: str, fmt: str, config: PipelineConfig) -> int:
    table = vibdata.load_interval_table(table_path)
    comparison = diagharness.compare_families(
        table,
        delta=config.probe_delta,
        sigma_divisor=config.sigma_divisor,
        shoulder_fraction=config.shoulder_fraction,
        grid_points=config.grid_points,
        activation_floor=config.activation_floor,
    )
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = _write_report_files(
        out,
        "comparison",
        diagharness.comparison_markdown(comparison),
        diagharness.comparison_to_dict(comparison),
        fmt,
    )
    for kind in fuzzcore.FAMILY_KINDS:
        written += _write_report_files(
            out,
            f"experiment_{kind}",
            diagharness.experiment_markdown(comparison.reports[kind], comparison.summaries[kind]),
            diagharness.experiment_to_dict(comparison.reports[kind], comparison.summaries[kind]),
            fmt,
        )
    print("ranking by detection rate:")
    for rank, kind in enumerate(comparison.ranking, start=1):
        summary = comparison.summaries[kind]
        print(f"  {rank}. {kind}: detection {summary.detection_rate:.4f}, usable {summary.usable_rate:.4f}")
    for path in written:
        print(f"wrote {path}")
    return 0


def cmd_bench(rulebase_path: str, iterations: int, out_path: str | None, config: PipelineConfig) -> int:
    rulebase, families_doc = intervalgebra.load_rulebase(rulebase_path)
    if families_doc is None:
        raise SchemaError(f"{rulebase_path}: rule base carries no membership families")
    families = fuzzcore.families_from_dict(families_doc)
    stats = diagharness.bench_diagnose(
        rulebase,
        families,
        iterations,
        grid_points=config.grid_points,
        activation_floor=config.activation_floor,
    )
    doc = diagharness.bench_to_dict(stats)
    print(
        f"median {stats.median_us:.1f} us, p99 {stats.p99_us:.1f} us "
        f"over {stats.iterations} iterations ({stats.rules} rules)"
    )
    if out_path:
        write_json(out_path, doc)
        print(f"wrote {out_path}")
    return 0


# --- argument parsing ---------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    # Usage problems are exit code 1; argparse's default of 2 is reserved
    # for data errors here.
    def error(self, message: str) -> None:  # type: ignore[override]
        self.print_usage(sys.stderr)
        raise SystemExit(self.exit_code_usage(message))

    @staticmethod
    def exit_code_usage(message: str) -> int:
        print(f"error: {message}", file=sys.stderr)
        return 1


def _add_config_flags(parser: argparse.ArgumentParser, with_family: bool = False) -> None:
    parser.add_argument("--config", help="key=value config file; flags override it")
    if with_family:
        parser.add_argument("--family", choices=fuzzcore.FAMILY_KINDS, default=None)
    parser.add_argument("--sigma-divisor", dest="sigma_divisor", type=float, default=None)
    parser.add_argument("--shoulder-fraction", dest="shoulder_fraction", type=float, default=None)
    parser.add_argument("--grid-points", dest="grid_points", type=int, default=None)
    parser.add_argument("--probe-delta", dest="probe_delta", type=float, default=None)
    parser.add_argument("--activation-floor", dest="activation_floor", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="vibrodiag", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen-fixture", help="emit a synthetic labeled dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--frames", type=int, default=1000)
    p.add_argument("--jitter", type=float, default=0.0)
    p.add_argument("--geometry", choices=("paper", "disjoint", "single"), default="paper")
    p.add_argument("--format", choices=("ndjson", "csv"), default="ndjson")
    p.add_argument("--fft-samples", dest="fft_samples", type=int, default=48)
    p.add_argument("--waveform-samples", dest="waveform_samples", type=int, default=64)

    p = sub.add_parser("extract", help="frames -> per-state interval table")
    p.add_argument("data")
    p.add_argument("--out", required=True)

    p = sub.add_parser("compile", help="interval table -> minimized rule base")
    p.add_argument("table")
    p.add_argument("--out", required=True)
    _add_config_flags(p, with_family=True)

    p = sub.add_parser("diagnose", help="classify one (fft_v, fft_g) reading")
    p.add_argument("rulebase")
    p.add_argument("--v", dest="x_v", type=float, required=True)
    p.add_argument("--g", dest="x_g", type=float, required=True)
    _add_config_flags(p)

    p = sub.add_parser("experiment", help="probe protocol for all three families")
    p.add_argument("table")
    p.add_argument("--out-dir", dest="out_dir", required=True)
    p.add_argument("--format", choices=("md", "json", "both"), default="both")
    _add_config_flags(p)

    p = sub.add_parser("bench", help="single-diagnosis latency statistics")
    p.add_argument("rulebase")
    p.add_argument("--iterations", type=int, default=10_000)
    p.add_argument("--out", default=None)
    _add_config_flags(p)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "gen-fixture":
            return cmd_gen_fixture(args)
        if args.command == "extract":
            return cmd_extract(args.data, args.out)
        if args.command == "compile":
            config = resolve_config(args)
            return cmd_compile(args.table, config.family, args.out, config)
        if args.command == "diagnose":
            config = resolve_config(args)
            return cmd_diagnose(args.rulebase, args.x_v, args.x_g, config)
        if args.command == "experiment":
            config = resolve_config(args)
            return cmd_experiment(args.table, args.out_dir, args.format, config)
        if args.command == "bench":
            config = resolve_config(args)
            return cmd_bench(args.rulebase, args.iterations, args.out, config)
        raise AssertionError(f"unhandled command {args.command}")
    except (vibdata.FrameValidationError, SchemaError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
