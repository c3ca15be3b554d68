"""Text formats: LHV model files, experiment config files, run reports.

Model file: one instruction set per line,

    <a0> <a1> <b0> <b1> <weight>

with cells in {S+, S-, L+, L-} and the weight a decimal or a fraction such
as ``1/64``.  ``#`` starts a comment; blank lines are ignored.  Weights must
sum to 1.

Config file: INI syntax, one section per concern.  ``[geometry]`` holds the
fields of :class:`~etbell.config_validator.GeometryConfig`; ``[simulate]``
may hold defaults for the ``simulate`` command (scheme, source, phases, p,
model_file, trials, seed, threads).
"""
from __future__ import annotations

import configparser
import csv
import io
import json
from dataclasses import asdict, dataclass
from fractions import Fraction
from pathlib import Path as FsPath
from typing import Any

from .config_validator import GeometryConfig
from .lhv import InstructionSet, LhvModel

SCHEMA_VERSION = 1


def parse_model(text: str) -> LhvModel:
    weights: dict[InstructionSet, float] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 5:
            raise ValueError(f"line {lineno}: expected 4 cells and a weight, got {raw!r}")
        try:
            s = InstructionSet.parse(parts[:4])
            w = float(Fraction(parts[4]))
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
        weights[s] = weights.get(s, 0.0) + w
    if not weights:
        raise ValueError("model file contains no instruction sets")
    return LhvModel(weights)


def load_model(path) -> LhvModel:
    return parse_model(FsPath(path).read_text())


def format_model(model: LhvModel) -> str:
    return "".join(f"{s} {w!r}\n" for s, w in model.support())


def read_config(path) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(inline_comment_prefixes=("#", ";"))
    parser.optionxform = str.lower
    with open(path) as fh:
        parser.read_file(fh)
    return parser


GEOMETRY_KEYS = ("scheme", "delta_l", "coherence_time", "coincidence_window",
                 "dead_time", "source_distance", "switch_frequency", "pair_rate")


def geometry_from_config(parser: configparser.ConfigParser) -> GeometryConfig:
    if not parser.has_section("geometry"):
        raise ValueError("config has no [geometry] section")
    section = parser["geometry"]
    unknown = set(section) - set(GEOMETRY_KEYS)
    if unknown:
        raise ValueError(f"unknown [geometry] keys: {', '.join(sorted(unknown))}")
    missing = [k for k in GEOMETRY_KEYS if k not in section]
    if missing:
        raise ValueError(f"missing [geometry] keys: {', '.join(missing)}")
    values: dict[str, Any] = {"scheme": section["scheme"].strip().lower()}
    for key in GEOMETRY_KEYS[1:]:
        try:
            values[key] = float(section[key])
        except ValueError:
            raise ValueError(f"[geometry] {key} is not a number: {section[key]!r}") from None
    return GeometryConfig(**values)


@dataclass
class RunReport:
    """Everything a ``simulate`` run produces, in JSON-ready form.

    ``runtime`` (timestamp, wall time, threads, kernel) is the only part that
    may differ between repeated runs; it is None when suppressed.
    """

    config: dict
    tallies: dict
    estimate: dict
    split_fractions: dict
    keep_fractions: list
    exact: dict | None
    runtime: dict | None = None
    schema_version: int = SCHEMA_VERSION
    command: str = "simulate"

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "RunReport":
        if data.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {data.get('schema_version')!r}")
        return cls(**data)

    def to_json(self) -> str:
        return dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        return cls.from_dict(json.loads(text))

    def to_csv(self) -> str:
        return to_csv(self.to_dict())


def dumps(data: dict) -> str:
    return json.dumps(data, indent=2, sort_keys=True, allow_nan=False) + "\n"


def flatten(data, prefix: str = "") -> list[tuple[str, Any]]:
    if isinstance(data, dict):
        rows = []
        for k in sorted(data):
            rows += flatten(data[k], f"{prefix}.{k}" if prefix else str(k))
        return rows
    if isinstance(data, (list, tuple)):
        rows = []
        for k, v in enumerate(data):
            rows += flatten(v, f"{prefix}[{k}]")
        return rows
    return [(prefix, data)]


def _csv_value(v) -> str:
    if isinstance(v, bool) or v is None:
        return "" if v is None else str(v).lower()
    if isinstance(v, float):
        return f"{v:.15g}"
    return str(v)


def to_csv(data: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["key", "value"])
    for key, value in flatten(data):
        writer.writerow([key, _csv_value(value)])
    return buf.getvalue()
