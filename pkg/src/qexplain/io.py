"""Loading schemas and relations from JSON and CSV files."""

from __future__ import annotations

import csv
import json
from pathlib import Path
from typing import Iterable

from .errors import ValidationError
from .model import Database, Predicate, Schema, validate_database


def load_schema(path) -> Schema:
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return schema_from_json(doc)


def schema_from_json(doc: dict) -> Schema:
    preds = []
    for p in doc.get("predicates", []):
        attrs = tuple(p.get("attrs", ()))
        arity = int(p.get("arity", len(attrs)))
        preds.append(Predicate(p["name"], arity, attrs))
    return Schema(preds)


def schema_to_json(schema: Schema) -> dict:
    return {"predicates": [{"name": p.name, "arity": p.arity, "attrs": list(p.attrs)} for p in schema]}


def read_csv_relation(path) -> tuple[str, list[str], list[tuple]]:
    """Rows of one CSV file named after its predicate.

    The header names the attributes; a leading ``tid`` column is optional.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ValidationError(f"{path} has no header row") from None
        has_tid = bool(header) and header[0].lower() == "tid"
        attrs = header[1:] if has_tid else header
        rows = []
        for rec in reader:
            if not rec or all(not c.strip() for c in rec):
                continue
            rec = [c.strip() for c in rec]
            if has_tid:
                rows.append((path.stem, tuple(rec[1:]), rec[0] or None))
            else:
                rows.append((path.stem, tuple(rec)))
    return path.stem, attrs, rows


def read_json_data(path) -> list[tuple]:
    """Rows from ``{predicate: [[v, ...] | {"tid": ..., "values": [...]}, ...]}``."""
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    rows = []
    for pred, items in doc.items():
        for item in items:
            if isinstance(item, dict):
                rows.append((pred, tuple(item["values"]), item.get("tid")))
            else:
                rows.append((pred, tuple(item)))
    return rows


def _infer_schema(rows: Iterable[tuple], attrs: dict[str, list[str]]) -> Schema:
    arities: dict[str, int] = {}
    for row in rows:
        arities.setdefault(row[0], len(row[1]))
    for pred, names in attrs.items():
        arities.setdefault(pred, len(names))
    return Schema(Predicate(p, a, tuple(attrs.get(p, ())) if len(attrs.get(p, ())) == a else ()) for p, a in arities.items())


def load_database(data_paths: Iterable, schema: Schema | None = None) -> Database:
    """Load CSV and/or JSON data files; CSV files are read in the given order."""
    rows: list[tuple] = []
    attrs: dict[str, list[str]] = {}
    for path in data_paths:
        path = Path(path)
        if path.suffix.lower() == ".json":
            rows.extend(read_json_data(path))
        else:
            pred, names, got = read_csv_relation(path)
            attrs[pred] = names
            rows.extend(got)
    if schema is None:
        schema = _infer_schema(rows, attrs)
    return validate_database(schema, rows)


def fixture_paths(directory) -> dict:
    """Conventional file layout of a fixture directory."""
    d = Path(directory)
    out = {
        "schema": d / "schema.json" if (d / "schema.json").exists() else None,
        "query": d / "query.dl" if (d / "query.dl").exists() else None,
        "constraints": d / "constraints.dl" if (d / "constraints.dl").exists() else None,
    }
    data = [d / "data.json"] if (d / "data.json").exists() else []
    if not data and out["schema"] is not None:
        # schema order fixes tid assignment order
        schema = load_schema(out["schema"])
        data = [d / f"{p.name}.csv" for p in schema if (d / f"{p.name}.csv").exists()]
    elif not data:
        data = sorted(d.glob("*.csv"))
    out["data"] = data
    return out
