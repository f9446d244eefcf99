"""Report containers and serialization for the experiment harness.

Reports are JSON documents with a stable schema plus a long-format CSV
emitter for plotting.  The config hash covers every run-affecting field;
the timestamp is carried in the metadata but excluded from the hash so
identical runs produce identical hashes.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
from dataclasses import dataclass

from .errors import ParameterError

SCHEMA_VERSION = 1
VERSION = "0.1.0"


def config_hash(config_dict: dict) -> str:
    """sha256 of the canonical JSON form, volatile fields dropped."""
    d = {k: v for k, v in config_dict.items()
         if k not in ("timestamp", "out")}
    blob = json.dumps(d, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class RatioRow:
    """One (function, weight) cell of a norm-ratio experiment."""

    function: str
    weight: str
    p: float
    rho: float | None
    numerator: float
    denominator: float
    ratio: float | None
    in_class: bool
    skipped: bool = False
    note: str = ""


@dataclass(frozen=True)
class RatioReport:
    experiment: str
    kind: str
    rows: tuple
    suite_max: float | None
    refinement: dict | None
    metadata: dict

    def to_dict(self) -> dict:
        return {
            "schema": SCHEMA_VERSION,
            "experiment": self.experiment,
            "kind": self.kind,
            "rows": [dataclasses.asdict(r) for r in self.rows],
            "suite_max": self.suite_max,
            "refinement": self.refinement,
            "metadata": self.metadata,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "RatioReport":
        rows = tuple(RatioRow(**r) for r in d["rows"])
        return cls(d["experiment"], d["kind"], rows, d["suite_max"],
                   d.get("refinement"), d["metadata"])


def _as_dict(report) -> dict:
    if isinstance(report, RatioReport):
        return report.to_dict()
    if isinstance(report, dict):
        return report
    raise ParameterError(f"cannot serialize {type(report).__name__}")


def emit_report(report, path, fmt: str = "json") -> None:
    """Write a report as JSON (round-trippable) or long-format CSV."""
    d = _as_dict(report)
    if fmt == "json":
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(d, fh, sort_keys=True, indent=1)
            fh.write("\n")
        return
    if fmt == "csv":
        rows = d.get("rows", [])
        fields = []
        for r in rows:
            for key in r:
                if key not in fields:
                    fields.append(key)
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=fields or ["empty"])
            writer.writeheader()
            for r in rows:
                writer.writerow(r)
        return
    raise ParameterError(f"unknown report format {fmt!r}")


def load_report(path):
    """Read a JSON report back; ratio reports come back typed."""
    with open(path, "r", encoding="utf-8") as fh:
        d = json.load(fh)
    if d.get("kind") in ("jump", "variation") and "rows" in d:
        return RatioReport.from_dict(d)
    return d
