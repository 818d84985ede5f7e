"""Instance files and run reports.

Instance files are TOML with a versioned ``schema`` key::

    schema = "homog-instance/1"
    n = 10

    [params]          # optional construction parameters
    eps = 0.1
    seed = 7
    tries = 100

    [economy]         # optional: bidders per label
    D1 = 1
    D2 = 9

    [[distribution]]
    label = "D1"
    type = "constant"
    value = 1.0

Distribution types and their fields: ``atoms`` (``values``, ``probs``),
``constant`` (``value``), ``two_point`` (``low``, ``high``, ``p_high``) and
``equal_revenue`` (``h``, ``grid``). Unknown keys are errors.
"""

from __future__ import annotations

import csv
import io
import json
import math
import re
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import tomli_w

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .dist import ValueDistribution, constant, equal_revenue, two_point
from .revenue import Economy
from .search import DistributionPool

SCHEMA = "homog-instance/1"

TYPE_FIELDS = {
    "atoms": ("values", "probs"),
    "constant": ("value",),
    "two_point": ("low", "high", "p_high"),
    "equal_revenue": ("h", "grid"),
}
PARAM_FIELDS = {"eps": float, "seed": int, "tries": int, "samples": int, "alpha": float}
TOP_FIELDS = {"schema", "n", "params", "economy", "distribution", "family"}


class InstanceError(ValueError):
    """Malformed instance file; the message names the offending line or field."""

    def __init__(self, message: str, key: str | None = None):
        super().__init__(message)
        self.key = key


def _leaf(where: str) -> str:
    return re.sub(r"\[\d+\]$", "", where.rsplit(".", 1)[-1])


@dataclass
class Instance:
    pool: DistributionPool
    params: dict = field(default_factory=dict)
    economy_counts: dict[str, int] | None = None
    family: dict | None = None
    specs: list[dict] = field(default_factory=list)

    def economy(self, counts: dict[str, int] | None = None) -> Economy:
        counts = counts if counts is not None else self.economy_counts
        if counts is None:
            if len(self.pool.members) == 1:
                return Economy.homogeneous(self.pool.members[0], self.pool.n)
            raise InstanceError("no economy given: pass --economy or add an [economy] table")
        labels = self.pool.labels
        unknown = set(counts) - set(labels)
        if unknown:
            raise InstanceError(f"economy: unknown labels {sorted(unknown)}")
        return Economy.from_counts(self.pool.members, [int(counts.get(lab, 0)) for lab in labels])


def _number(where: str, x, kind=float):
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise InstanceError(f"{where}: expected a number, got {x!r}", _leaf(where))
    if kind is int:
        if isinstance(x, float) and not x.is_integer():
            raise InstanceError(f"{where}: expected an integer, got {x!r}", _leaf(where))
        return int(x)
    if not math.isfinite(x):
        raise InstanceError(f"{where}: must be finite", _leaf(where))
    return float(x)


def parse_distribution(spec: dict, where: str) -> ValueDistribution:
    if not isinstance(spec, dict):
        raise InstanceError(f"{where}: expected a table")
    kind = spec.get("type")
    if kind not in TYPE_FIELDS:
        raise InstanceError(f"{where}.type: expected one of {sorted(TYPE_FIELDS)}, got {kind!r}", "type")
    label = spec.get("label")
    if not isinstance(label, str) or not label:
        raise InstanceError(f"{where}.label: expected a non-empty string")
    allowed = {"label", "type", *TYPE_FIELDS[kind]}
    extra = set(spec) - allowed
    if extra:
        raise InstanceError(f"{where}: unknown field(s) {sorted(extra)} for type {kind!r}", sorted(extra)[0])
    missing = [f for f in TYPE_FIELDS[kind] if f not in spec]
    if missing:
        raise InstanceError(f"{where}: missing field(s) {missing}")
    try:
        if kind == "atoms":
            vals, probs = spec["values"], spec["probs"]
            if not isinstance(vals, list) or not isinstance(probs, list) or len(vals) != len(probs):
                raise InstanceError(f"{where}: values and probs must be arrays of equal length")
            vals = [_number(f"{where}.values[{k}]", v) for k, v in enumerate(vals)]
            probs = [_number(f"{where}.probs[{k}]", p) for k, p in enumerate(probs)]
            return ValueDistribution.from_atoms(vals, probs, label)
        if kind == "constant":
            return constant(_number(f"{where}.value", spec["value"]), label)
        if kind == "two_point":
            return two_point(
                _number(f"{where}.low", spec["low"]),
                _number(f"{where}.high", spec["high"]),
                _number(f"{where}.p_high", spec["p_high"]),
                label,
            )
        return equal_revenue(
            _number(f"{where}.h", spec["h"]), _number(f"{where}.grid", spec["grid"], int), label
        )
    except InstanceError:
        raise
    except ValueError as exc:
        raise InstanceError(f"{where}: {exc}") from exc


def parse_instance(data: dict) -> Instance:
    extra = set(data) - TOP_FIELDS
    if extra:
        raise InstanceError(f"unknown top-level field(s) {sorted(extra)}", sorted(extra)[0])
    if data.get("schema") != SCHEMA:
        raise InstanceError(f"schema: expected {SCHEMA!r}, got {data.get('schema')!r}")
    if "n" not in data:
        raise InstanceError("n: missing bidder count")
    n = _number("n", data["n"], int)
    if n < 2:
        raise InstanceError("n: must be >= 2")
    specs = data.get("distribution")
    if not isinstance(specs, list) or not specs:
        raise InstanceError("distribution: need at least one [[distribution]] table")
    members = [parse_distribution(s, f"distribution[{k}]") for k, s in enumerate(specs)]
    labels = [d.label for d in members]
    if len(set(labels)) != len(labels):
        raise InstanceError("distribution: labels must be unique")
    params = {}
    for key, val in (data.get("params") or {}).items():
        if key not in PARAM_FIELDS:
            raise InstanceError(f"params.{key}: unknown parameter", key)
        params[key] = _number(f"params.{key}", val, PARAM_FIELDS[key])
    counts = None
    if "economy" in data:
        counts = {}
        for lab, c in data["economy"].items():
            if lab not in labels:
                raise InstanceError(f"economy.{lab}: unknown distribution label", lab)
            counts[lab] = _number(f"economy.{lab}", c, int)
            if counts[lab] < 0:
                raise InstanceError(f"economy.{lab}: count must be >= 0")
        if sum(counts.values()) < 1:
            raise InstanceError("economy: needs at least one bidder")
    return Instance(DistributionPool(tuple(members), n), params, counts, data.get("family"), specs)


def load_instance(path: str | Path) -> Instance:
    text = Path(path).read_text()
    try:
        data = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise InstanceError(f"{path}: {exc}") from exc
    try:
        return parse_instance(data)
    except InstanceError as exc:
        line = _find_line(text, exc.key, str(exc))
        if line is None:
            raise InstanceError(f"{path}: {exc}", exc.key) from exc
        raise InstanceError(f"{path}:{line}: {exc}", exc.key) from exc


def _find_line(text: str, key: str | None, message: str = "") -> int | None:
    """Line of ``key`` inside the table the message points at (first match otherwise)."""
    if not key:
        return None
    lines = text.splitlines()
    start = 0
    m = re.match(r"distribution\[(\d+)\]", message)
    if m:
        headers = [k for k, line in enumerate(lines) if line.strip() == "[[distribution]]"]
        if int(m.group(1)) < len(headers):
            start = headers[int(m.group(1))]
    else:
        m = re.match(r"(params|economy)\.", message)
        if m:
            start = next((k for k, line in enumerate(lines) if line.strip() == f"[{m.group(1)}]"), 0)
    pat = re.compile(rf"^\s*\"?{re.escape(key)}\"?\s*=")
    for k in range(start, len(lines)):
        if pat.search(lines[k]):
            return k + 1
    return None


def distribution_spec(d: ValueDistribution) -> dict:
    return {"label": d.label, "type": "atoms", "values": list(d.support), "probs": list(d.probs)}


def instance_document(
    pool: DistributionPool,
    specs: list[dict] | None = None,
    params: dict | None = None,
    economy: dict[str, int] | None = None,
    family: dict | None = None,
) -> dict:
    doc: dict = {"schema": SCHEMA, "n": pool.n}
    if family:
        doc["family"] = family
    if params:
        doc["params"] = params
    if economy:
        doc["economy"] = economy
    doc["distribution"] = specs if specs is not None else [distribution_spec(d) for d in pool.members]
    return doc


def dump_instance(doc: dict) -> str:
    return tomli_w.dumps(doc)


# -- reports -------------------------------------------------------------------


def _plain(x):
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, float) and not math.isfinite(x):
        return str(x)
    return x


def report_json(report: dict) -> str:
    return json.dumps(_plain(report), indent=2, sort_keys=True) + "\n"


def report_csv(rows: list[dict], columns: list[str]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: _csv_cell(row.get(k, "")) for k in columns})
    return buf.getvalue()


def _csv_cell(v):
    if isinstance(v, float):
        return repr(v)
    return v
