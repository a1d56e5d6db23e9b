"""Synthetic labeled-frame fixtures with a controlled interval geometry.

The plant data behind the reference interval shapes is proprietary, so the
generator fabricates frames whose per-state RMS extrema reproduce a chosen
geometry exactly.  The default geometry mirrors the reference reduction
signature: velocity terms collapse 7 -> 5 (St inside Mi, Bl inside Gf) and
acceleration terms collapse 7 -> 2 (Im/St/Mi inside Nr, Bl/Gf inside Ml),
with plain overlaps between neighboring survivors on the velocity axis.
"""

from __future__ import annotations

from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Sequence

import json

import numpy as np

from .intervalgebra import Interval, compile_rules
from .jsonio import round_floats
from .vibdata import MachineState, SensorFrame, StateIntervalTable, StateIntervals, rms

NR_FRACTION = 0.6374

# Canonical per-state (lo, hi) RMS intervals.  Margins are wide enough that
# endpoint jitter up to 5% of a width cannot change the inclusion signature.
PAPER_V_INTERVALS: dict[MachineState, tuple[float, float]] = {
    MachineState.NORMAL: (0.5, 1.5),
    MachineState.IMBALANCE: (1.2, 2.6),
    MachineState.STRUCTURAL_FAULT: (2.4, 3.4),
    MachineState.MISALIGNMENT: (2.2, 3.8),
    MachineState.MECHANICAL_LOOSENESS: (3.6, 5.2),
    MachineState.BEARING_LUBRICATION: (5.0, 6.4),
    MachineState.GEAR_FAULT: (4.8, 7.2),
}
PAPER_G_INTERVALS: dict[MachineState, tuple[float, float]] = {
    MachineState.NORMAL: (0.2, 2.2),
    MachineState.IMBALANCE: (0.5, 1.2),
    MachineState.STRUCTURAL_FAULT: (0.9, 1.7),
    MachineState.MISALIGNMENT: (1.1, 1.9),
    MachineState.MECHANICAL_LOOSENESS: (2.1, 4.3),
    MachineState.BEARING_LUBRICATION: (2.5, 3.5),
    MachineState.GEAR_FAULT: (2.9, 4.0),
}

PAPER_V_SURVIVORS = ("Iv1", "Iv2", "Iv4", "Iv5", "Iv7")
PAPER_G_SURVIVORS = ("Ig1", "Ig5")


def _jittered(lo: float, hi: float, jitter: float, rng: np.random.Generator) -> tuple[float, float]:
    w = hi - lo
    u_lo, u_hi = rng.uniform(-1.0, 1.0, size=2)
    return lo + u_lo * jitter * w, hi + u_hi * jitter * w


def paper_interval_table(seed: int = 0, jitter: float = 0.0) -> StateIntervalTable:
    """The reference-shaped interval table; jitter > 0 perturbs endpoints.

    Jitter is bounded-uniform per endpoint (fraction of the interval width).
    The reduction signature is re-verified after perturbation, so a jitter
    too large to preserve it fails loudly instead of silently changing the
    compiled shape.
    """
    if jitter < 0.0:
        raise ValueError("jitter must be non-negative")
    rng = np.random.default_rng(seed)
    rows = []
    for state in MachineState.by_severity():
        v_lo, v_hi = PAPER_V_INTERVALS[state]
        g_lo, g_hi = PAPER_G_INTERVALS[state]
        if jitter > 0.0:
            v_lo, v_hi = _jittered(v_lo, v_hi, jitter, rng)
            g_lo, g_hi = _jittered(g_lo, g_hi, jitter, rng)
        rows.append(StateIntervals(state, Interval(v_lo, v_hi), Interval(g_lo, g_hi)))
    table = StateIntervalTable(tuple(rows))
    _check_paper_signature(table)
    return table


def _check_paper_signature(table: StateIntervalTable) -> None:
    rulebase = compile_rules(table)
    v_ids = tuple(label for label, _ in rulebase.v_terms)
    g_ids = tuple(label for label, _ in rulebase.g_terms)
    if v_ids != PAPER_V_SURVIVORS or g_ids != PAPER_G_SURVIVORS:
        raise ValueError(
            f"jitter broke the reference reduction signature: v={v_ids}, g={g_ids}"
        )


def disjoint_interval_table() -> StateIntervalTable:
    """Seven states with pairwise disjoint intervals on both axes (no reduction)."""
    rows = []
    for k, state in enumerate(MachineState.by_severity()):
        rows.append(
            StateIntervals(
                state,
                Interval(2.0 * k + 0.5, 2.0 * k + 1.5),
                Interval(3.0 * k + 0.5, 3.0 * k + 1.3),
            )
        )
    return StateIntervalTable(tuple(rows))


def single_state_interval_table(state: MachineState = MachineState.NORMAL) -> StateIntervalTable:
    return StateIntervalTable((StateIntervals(state, Interval(1.0, 2.0), Interval(3.0, 4.0)),))


def _round6(x: float) -> float:
    return float(f"{x:.6g}")


def _allocate_counts(states: Sequence[MachineState], n_frames: int, nr_fraction: float) -> dict[MachineState, int]:
    n_states = len(states)
    counts: dict[MachineState, int] = {}
    if MachineState.NORMAL in states and n_states > 1:
        n_nr = round(n_frames * nr_fraction)
        rest = n_frames - n_nr
        others = [s for s in states if s is not MachineState.NORMAL]
        base, extra = divmod(rest, len(others))
        counts[MachineState.NORMAL] = n_nr
        for k, state in enumerate(others):
            counts[state] = base + (1 if k < extra else 0)
    else:
        base, extra = divmod(n_frames, n_states)
        for k, state in enumerate(states):
            counts[state] = base + (1 if k < extra else 0)
    short = [s.code for s, c in counts.items() if c < 2]
    if short:
        raise ValueError(f"n_frames={n_frames} leaves fewer than 2 frames for {short}")
    return counts


def _spectrum_with_rms(target: float, n: int, rng: np.random.Generator) -> np.ndarray:
    if target == 0.0:
        return np.zeros(n)
    raw = rng.uniform(0.2, 1.0, size=n)
    return raw * (target / rms(raw))


def generate_frames(
    table: StateIntervalTable,
    n_frames: int = 1000,
    seed: int = 0,
    *,
    nr_fraction: float = NR_FRACTION,
    fft_samples: int = 48,
    waveform_samples: int = 64,
) -> list[SensorFrame]:
    """Fabricate labeled frames whose extracted intervals reproduce `table`.

    The first two frames of every state carry constant spectra pinned at the
    interval endpoints; the rest target RMS values strictly inside, so the
    min/max extraction recovers the designed geometry (endpoints rounded to
    the 6-significant-digit artifact precision).
    """
    if n_frames < 2 * len(table.rows):
        raise ValueError("need at least two frames per state")
    rng = np.random.default_rng(seed)
    counts = _allocate_counts(table.states, n_frames, nr_fraction)

    # (state, v_rms target, g_rms target, pinned endpoint?)
    specs: list[tuple[MachineState, float, float, bool]] = []
    for row in table.rows:
        v_lo, v_hi = _round6(row.iv.lo), _round6(row.iv.hi)
        g_lo, g_hi = _round6(row.ig.lo), _round6(row.ig.hi)
        specs.append((row.state, v_lo, g_lo, True))
        specs.append((row.state, v_hi, g_hi, True))
        v_margin = 0.01 * (v_hi - v_lo)
        g_margin = 0.01 * (g_hi - g_lo)
        for _ in range(counts[row.state] - 2):
            v = rng.uniform(v_lo + v_margin, v_hi - v_margin) if v_hi > v_lo else v_lo
            g = rng.uniform(g_lo + g_margin, g_hi - g_margin) if g_hi > g_lo else g_lo
            specs.append((row.state, v, g, False))

    order = rng.permutation(len(specs))
    t0 = datetime(2024, 1, 1, tzinfo=timezone.utc)
    frames = []
    for slot, idx in enumerate(order):
        state, v_target, g_target, pinned = specs[idx]
        if pinned:
            # Constant spectra: their RMS is exactly the endpoint value.
            fft_v = np.full(fft_samples, v_target)
            fft_g = np.full(fft_samples, g_target)
        else:
            fft_v = _spectrum_with_rms(v_target, fft_samples, rng)
            fft_g = _spectrum_with_rms(g_target, fft_samples, rng)
        waveform = rng.standard_normal(waveform_samples) * max(g_target, 1e-3)
        frames.append(
            SensorFrame(
                position=f"P{slot % 4 + 1}",
                window_start=(t0 + timedelta(hours=4 * slot)).isoformat(),
                g=waveform,
                fft_v=fft_v,
                fft_g=fft_g,
                state=state,
            )
        )
    return frames


def frame_to_record(frame: SensorFrame) -> dict:
    return {
        "position": frame.position,
        "window_start": frame.window_start,
        "g": list(frame.g),
        "fft_v": list(frame.fft_v),
        "fft_g": list(frame.fft_g),
        "state": frame.state.code,
    }


def write_frames_ndjson(path: str | Path, frames: Sequence[SensorFrame]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for frame in frames:
            fh.write(json.dumps(round_floats(frame_to_record(frame))) + "\n")


def write_frames_csv(path: str | Path, frames: Sequence[SensorFrame]) -> None:
    import csv

    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["position", "window_start", "g", "fft_v", "fft_g", "state"])
        for frame in frames:
            rec = round_floats(frame_to_record(frame))
            writer.writerow(
                [
                    rec["position"],
                    rec["window_start"],
                    ";".join(repr(x) for x in rec["g"]),
                    ";".join(repr(x) for x in rec["fft_v"]),
                    ";".join(repr(x) for x in rec["fft_g"]),
                    rec["state"],
                ]
            )
