"""Labeled vibration-spectrum ingestion and per-state RMS interval extraction."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from enum import Enum, unique
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .intervalgebra import Interval
from .jsonio import SchemaError, expect_schema, read_json, write_json

INTERVALS_SCHEMA = "ittflm-intervals/1"


@unique
class MachineState(Enum):
    """The seven diagnosable machine health states, ordered by severity."""

    NORMAL = ("Nr", 0, "Normal")
    IMBALANCE = ("Im", 1, "Rotor")
    STRUCTURAL_FAULT = ("St", 2, "Frame")
    MISALIGNMENT = ("Mi", 3, "Link")
    MECHANICAL_LOOSENESS = ("Ml", 4, "Looseness")
    BEARING_LUBRICATION = ("Bl", 5, "Lubrication fault")
    GEAR_FAULT = ("Gf", 6, "Gear")

    def __init__(self, code: str, severity: int, cause: str) -> None:
        self.code = code
        self.severity = severity
        self.cause = cause

    @classmethod
    def from_code(cls, code: str) -> "MachineState":
        try:
            return _STATES_BY_CODE[code]
        except KeyError:
            raise ValueError(f"unknown machine state code {code!r}") from None

    @classmethod
    def by_severity(cls) -> tuple["MachineState", ...]:
        return tuple(sorted(cls, key=lambda s: s.severity))

    def __repr__(self) -> str:  # short form reads better in test output
        return f"<{self.code}>"


_STATES_BY_CODE = {state.code: state for state in MachineState}


class FrameValidationError(ValueError):
    """Raised when a sensor frame (or an input row producing one) is invalid."""


def _as_finite_array(values: Sequence[float], name: str, nonnegative: bool = False) -> np.ndarray:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise FrameValidationError(f"{name} must be a non-empty 1-D sequence")
    if not np.all(np.isfinite(arr)):
        raise FrameValidationError(f"{name} contains NaN or infinite samples")
    if nonnegative and np.any(arr < 0.0):
        raise FrameValidationError(f"{name} contains negative spectral magnitudes")
    return arr


@dataclass(frozen=True)
class SensorFrame:
    """One polling-window record: raw waveform, both spectra, and the expert label."""

    position: str
    window_start: str
    g: np.ndarray
    fft_v: np.ndarray
    fft_g: np.ndarray
    state: MachineState

    def __post_init__(self) -> None:
        if not self.position:
            raise FrameValidationError("position must be a non-empty identifier")
        if not self.window_start:
            raise FrameValidationError("window_start must be a non-empty timestamp")
        object.__setattr__(self, "g", _as_finite_array(self.g, "g"))
        object.__setattr__(self, "fft_v", _as_finite_array(self.fft_v, "fft_v", nonnegative=True))
        object.__setattr__(self, "fft_g", _as_finite_array(self.fft_g, "fft_g", nonnegative=True))
        if not isinstance(self.state, MachineState):
            raise FrameValidationError(f"state must be a MachineState, got {self.state!r}")


def rms(samples: Sequence[float]) -> float:
    """Root mean square: sqrt of the mean of squared samples."""
    arr = np.asarray(samples, dtype=float)
    if arr.size == 0:
        raise ValueError("rms of an empty sequence is undefined")
    if not np.all(np.isfinite(arr)):
        raise ValueError("rms requires finite samples")
    return float(np.sqrt(np.mean(np.square(arr))))


def summarize_frame(frame: SensorFrame) -> tuple[float, float]:
    """Collapse a frame's spectra to their scalar (v_rms, g_rms) summary."""
    return rms(frame.fft_v), rms(frame.fft_g)


@dataclass(frozen=True)
class StateIntervals:
    state: MachineState
    iv: Interval
    ig: Interval


@dataclass(frozen=True)
class StateIntervalTable:
    """Per-state [min, max] RMS intervals for both spectra, in severity order."""

    rows: tuple[StateIntervals, ...]

    def __post_init__(self) -> None:
        states = [row.state for row in self.rows]
        if len(set(states)) != len(states):
            raise ValueError("duplicate state in interval table")
        object.__setattr__(
            self, "rows", tuple(sorted(self.rows, key=lambda r: r.state.severity))
        )

    @property
    def states(self) -> tuple[MachineState, ...]:
        return tuple(row.state for row in self.rows)

    def row_for(self, state: MachineState) -> StateIntervals:
        for row in self.rows:
            if row.state is state:
                return row
        raise KeyError(state)

    @classmethod
    def from_mapping(cls, rows: Mapping[MachineState, tuple[Interval, Interval]]) -> "StateIntervalTable":
        return cls(tuple(StateIntervals(s, iv, ig) for s, (iv, ig) in rows.items()))


def extract_intervals(frames: Iterable[SensorFrame]) -> StateIntervalTable:
    """Group frames by state and keep the min/max RMS of each spectrum.

    Runs in constant memory per state: frames can be arbitrarily large, so
    only the running extrema are held, never per-state summary lists.
    """
    extrema: dict[MachineState, list[float]] = {}
    count = 0
    for frame in frames:
        count += 1
        v, g = summarize_frame(frame)
        found = extrema.get(frame.state)
        if found is None:
            extrema[frame.state] = [v, v, g, g]
        else:
            if v < found[0]:
                found[0] = v
            if v > found[1]:
                found[1] = v
            if g < found[2]:
                found[2] = g
            if g > found[3]:
                found[3] = g
    if count == 0:
        raise ValueError("cannot extract intervals from an empty frame sequence")
    rows = tuple(
        StateIntervals(state, Interval(vals[0], vals[1]), Interval(vals[2], vals[3]))
        for state, vals in extrema.items()
    )
    return StateIntervalTable(rows)


def extract_intervals_by_position(frames: Sequence[SensorFrame]) -> dict[str, StateIntervalTable]:
    """Interval tables keyed by sensor position instead of the default pooled table."""
    by_pos: dict[str, list[SensorFrame]] = {}
    for frame in frames:
        by_pos.setdefault(frame.position, []).append(frame)
    return {pos: extract_intervals(group) for pos, group in sorted(by_pos.items())}


def class_distribution(frames: Sequence[SensorFrame]) -> dict[MachineState, float]:
    """Fraction of frames per state, ordered by severity; fractions sum to 1."""
    if not frames:
        raise ValueError("cannot compute a class distribution of zero frames")
    counts: dict[MachineState, int] = {}
    for frame in frames:
        counts[frame.state] = counts.get(frame.state, 0) + 1
    total = len(frames)
    ordered = sorted(counts.items(), key=lambda item: item[0].severity)
    return {state: n / total for state, n in ordered}


# --- frame file formats -----------------------------------------------------
#
# NDJSON: one frame object per line.
# CSV: same fields, sample lists packed into semicolon-separated strings.

_FRAME_FIELDS = ("position", "window_start", "g", "fft_v", "fft_g", "state")


def _frame_from_record(record: dict, where: str) -> SensorFrame:
    missing = [k for k in _FRAME_FIELDS if k not in record]
    if missing:
        raise FrameValidationError(f"{where}: missing fields {missing}")
    try:
        state = MachineState.from_code(str(record["state"]))
    except ValueError as exc:
        raise FrameValidationError(f"{where}: {exc}") from exc
    try:
        return SensorFrame(
            position=str(record["position"]),
            window_start=str(record["window_start"]),
            g=record["g"],
            fft_v=record["fft_v"],
            fft_g=record["fft_g"],
            state=state,
        )
    except FrameValidationError as exc:
        raise FrameValidationError(f"{where}: {exc}") from exc


def read_frames_ndjson(path: str | Path) -> list[SensorFrame]:
    frames = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise FrameValidationError(f"{path}:{lineno}: invalid JSON ({exc})") from exc
            frames.append(_frame_from_record(record, f"{path}:{lineno}"))
    if not frames:
        raise FrameValidationError(f"{path}: no frames found")
    return frames


def _unpack_samples(packed: str, where: str, field: str) -> list[float]:
    try:
        return [float(tok) for tok in packed.split(";") if tok != ""]
    except ValueError as exc:
        raise FrameValidationError(f"{where}: bad sample in {field} ({exc})") from exc


def read_frames_csv(path: str | Path) -> list[SensorFrame]:
    frames = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not set(_FRAME_FIELDS) <= set(reader.fieldnames):
            raise FrameValidationError(f"{path}: CSV header must contain {list(_FRAME_FIELDS)}")
        for rownum, record in enumerate(reader, start=2):  # row 1 is the header
            where = f"{path}:row {rownum}"
            for field in ("g", "fft_v", "fft_g"):
                record[field] = _unpack_samples(record[field], where, field)
            frames.append(_frame_from_record(record, where))
    if not frames:
        raise FrameValidationError(f"{path}: no frames found")
    return frames


def read_frames(path: str | Path) -> list[SensorFrame]:
    """Dispatch on extension: .csv is CSV, anything else is NDJSON."""
    if str(path).lower().endswith(".csv"):
        return read_frames_csv(path)
    return read_frames_ndjson(path)


def interval_table_to_dict(table: StateIntervalTable) -> dict:
    return {
        "schema": INTERVALS_SCHEMA,
        "states": [
            {"state": row.state.code, "iv": [row.iv.lo, row.iv.hi], "ig": [row.ig.lo, row.ig.hi]}
            for row in table.rows
        ],
    }


def write_interval_table(path: str | Path, table: StateIntervalTable) -> None:
    write_json(path, interval_table_to_dict(table))


def load_interval_table(path: str | Path) -> StateIntervalTable:
    doc = expect_schema(read_json(path), INTERVALS_SCHEMA, path)
    try:
        rows = tuple(
            StateIntervals(
                state=MachineState.from_code(entry["state"]),
                iv=Interval(float(entry["iv"][0]), float(entry["iv"][1])),
                ig=Interval(float(entry["ig"][0]), float(entry["ig"][1])),
            )
            for entry in doc["states"]
        )
    except (KeyError, IndexError, TypeError, ValueError) as exc:
        raise SchemaError(f"{path}: malformed interval table ({exc})") from exc
    if not rows:
        raise SchemaError(f"{path}: interval table has no states")
    return StateIntervalTable(rows)
