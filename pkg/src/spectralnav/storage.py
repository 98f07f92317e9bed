"""Versioned document I/O.

Environments, episode sets, configs, and result streams are JSON documents
with explicit ``schema``/``schema_version`` fields. Serialization must be
byte-reproducible, and floats are written with 17 significant digits (enough
to round-trip IEEE doubles), so documents are emitted by a small writer
instead of ``json.dumps`` (which formats floats via ``repr``).
"""

from __future__ import annotations

import json
import math
from typing import Any, IO

from .errors import SchemaVersionError

SCHEMA_VERSION = 1


def format_float(x: float) -> str:
    """17-significant-digit decimal form, valid as a JSON number."""
    if not math.isfinite(x):
        raise ValueError(f"non-finite float not serializable: {x!r}")
    return f"{x:.17g}"


def dumps(obj: Any, indent: int | None = 2) -> str:
    """Deterministic JSON text: sorted keys, floats via :func:`format_float`."""
    out: list[str] = []
    _write(obj, out, indent, 0)
    return "".join(out)


def _write(obj: Any, out: list[str], indent: int | None, level: int) -> None:
    nl = "" if indent is None else "\n" + " " * (indent * (level + 1))
    close_nl = "" if indent is None else "\n" + " " * (indent * level)
    if obj is None or isinstance(obj, bool):
        out.append(json.dumps(obj))
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(format_float(obj))
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{")
        for i, key in enumerate(sorted(obj)):
            if not isinstance(key, str):
                raise TypeError(f"document keys must be strings, got {key!r}")
            out.append(("," if i else "") + nl + json.dumps(key) + ": ")
            _write(obj[key], out, indent, level + 1)
        out.append(close_nl + "}")
    elif isinstance(obj, (list, tuple)):
        if not obj:
            out.append("[]")
            return
        out.append("[")
        for i, item in enumerate(obj):
            out.append(("," if i else "") + nl)
            _write(item, out, indent, level + 1)
        out.append(close_nl + "]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def write_document(path: str, doc: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(doc))
        fh.write("\n")


def read_document(path: str, expected_schema: str) -> dict:
    """Load a document and refuse mismatched schema names or versions."""
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    check_schema(doc, expected_schema)
    return doc


def check_schema(doc: dict, expected_schema: str) -> None:
    schema = doc.get("schema")
    version = doc.get("schema_version")
    if schema != expected_schema:
        raise SchemaVersionError(
            f"expected schema {expected_schema!r}, found {schema!r}"
        )
    if version != SCHEMA_VERSION:
        raise SchemaVersionError(
            f"schema {expected_schema!r} version {version!r} is not supported; "
            f"this build reads version {SCHEMA_VERSION}"
        )


def write_records(fh: IO[str], records: list[dict]) -> None:
    """Append-only line-delimited records; each self-describes its schema."""
    for rec in records:
        fh.write(dumps(rec, indent=None))
        fh.write("\n")


def read_records(path: str, expected_schema: str) -> list[dict]:
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            check_schema(rec, expected_schema)
            records.append(rec)
    return records
