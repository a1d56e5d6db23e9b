"""Deterministic JSON serialization shared by all artifact writers.

File artifacts must be byte-identical across runs for the same inputs, so
every float is rounded to 6 significant digits before dumping and key order
is the construction order (never re-sorted at write time).
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any


class SchemaError(ValueError):
    """An artifact file exists but does not match its expected schema."""


def round_floats(obj: Any, sig: int = 6) -> Any:
    """Recursively round every float in a JSON-ish structure to `sig` significant digits."""
    if isinstance(obj, bool):
        return obj
    if isinstance(obj, float):
        return float(f"{obj:.{sig}g}")
    if isinstance(obj, dict):
        return {k: round_floats(v, sig) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [round_floats(v, sig) for v in obj]
    return obj


def dumps(obj: Any) -> str:
    return json.dumps(round_floats(obj), indent=2) + "\n"


def write_json(path: str | Path, obj: Any) -> None:
    Path(path).write_text(dumps(obj), encoding="utf-8")


def read_json(path: str | Path) -> Any:
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: not valid JSON ({exc})") from exc


def expect_schema(doc: Any, schema: str, path: str | Path) -> dict:
    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: expected a JSON object")
    found = doc.get("schema")
    if found != schema:
        raise SchemaError(f"{path}: schema {found!r} does not match expected {schema!r}")
    return doc
