"""Scenario reports: named checks with verdicts, data tables and file output."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .csvio import write_table

RELATIONS = ("<=", ">=", "==")


@dataclass(frozen=True)
class Check:
    """``value <relation> target`` (``==`` means ``|value - target| <= tolerance``)."""

    name: str
    value: float
    relation: str
    target: float
    tolerance: float = 0.0
    note: str = ""

    @property
    def passed(self):
        v = self.value
        if v is None or (isinstance(v, float) and math.isnan(v)):
            return False
        if self.relation == "<=":
            return v <= self.target
        if self.relation == ">=":
            return v >= self.target
        return abs(v - self.target) <= self.tolerance

    @property
    def verdict(self):
        return "pass" if self.passed else "fail"

    def describe(self):
        if self.relation == "==":
            rule = f"|value - {self.target:.6g}| <= {self.tolerance:.3g}"
        else:
            rule = f"value {self.relation} {self.target:.3g}"
        return f"{self.verdict.upper():4s} {self.name}: {self.value:.6g} ({rule})"

    def as_dict(self):
        d = {"name": self.name, "value": _jsonable(self.value), "relation": self.relation,
             "target": _jsonable(self.target), "verdict": self.verdict}
        if self.relation == "==":
            d["tolerance"] = self.tolerance
        if self.note:
            d["note"] = self.note
        return d


def _jsonable(v):
    if isinstance(v, (np.floating, float)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


@dataclass
class Report:
    scenario: str
    name: str
    inputs: dict
    seed: int
    checks: list = field(default_factory=list)
    tables: dict = field(default_factory=dict)
    errors: list = field(default_factory=list)
    files: list = field(default_factory=list)
    wall_time: float = 0.0

    def expect(self, name, value, relation, target, tolerance=0.0, note=""):
        if relation not in RELATIONS:
            raise ValueError(f"relation must be one of {RELATIONS}")
        check = Check(name, float(value), relation, float(target), float(tolerance), note)
        self.checks.append(check)
        return check

    def table(self, filename, header, rows):
        self.tables[filename] = (list(header), [list(r) for r in rows])

    def fail(self, name, exc):
        """Record a solver failure as a failed verdict."""
        self.errors.append(f"{name}: {type(exc).__name__}: {exc}")
        self.checks.append(Check(name, float("nan"), "==", 0.0, 0.0, note=str(exc)))

    @property
    def passed(self):
        return bool(self.checks) and all(c.passed for c in self.checks)

    def summary_lines(self):
        lines = [f"[{self.name}] scenario={self.scenario} seed={self.seed} "
                 f"{'PASS' if self.passed else 'FAIL'} ({self.wall_time:.2f} s)"]
        lines += ["  " + c.describe() for c in self.checks]
        lines += ["  error " + e for e in self.errors]
        return lines

    def as_dict(self):
        return {
            "scenario": self.scenario,
            "name": self.name,
            "seed": self.seed,
            "inputs": {k: _jsonable(v) for k, v in self.inputs.items()},
            "passed": self.passed,
            "checks": [c.as_dict() for c in self.checks],
            "errors": list(self.errors),
            "files": list(self.files),
            "wall_time": round(self.wall_time, 3),
        }


def emit_report(report, out_dir, formats=("csv", "json")):
    """Write the report's tables (``csv``) and ``report.json`` (``json``) into ``out_dir``.

    Returns the written paths.  CSV contents depend only on the computed
    values, so repeated runs with the same config and seed are byte-identical.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    if "csv" in formats:
        for filename, (header, rows) in sorted(report.tables.items()):
            written.append(write_table(out_dir / filename, header, rows))
    report.files = [p.name for p in written] + report.files
    if "json" in formats:
        path = out_dir / "report.json"
        report.files.append(path.name)
        with open(path, "w", newline="\n") as fh:
            json.dump(report.as_dict(), fh, indent=2, default=str)
            fh.write("\n")
        written.append(path)
    return written
