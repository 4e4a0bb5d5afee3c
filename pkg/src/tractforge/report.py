"""Check records and byte-stable report serialisation."""

from __future__ import annotations

import csv
import io
import json
import math
import os
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from .errors import IoError
from .tower import TowerScalar


@dataclass
class CertLine:
    """One checked inequality with both of its sides."""

    claim: str
    passed: bool
    lhs: Any = None
    rhs: Any = None
    relation: str = ""
    tolerance: float | None = None
    detail: str = ""
    measured: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"claim": self.claim, "passed": bool(self.passed), "lhs": self.lhs, "rhs": self.rhs,
                "relation": self.relation, "tolerance": self.tolerance, "detail": self.detail,
                "measured": self.measured}

    def text(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        sides = ""
        if self.relation:
            sides = f"  {_fmt_text(self.lhs)} {self.relation} {_fmt_text(self.rhs)}"
        tail = f"  [{self.detail}]" if self.detail else ""
        return f"{mark} {self.claim}{sides}{tail}"


@dataclass
class CertReport:
    title: str
    lines: list[CertLine] = field(default_factory=list)
    constants: dict = field(default_factory=dict)

    def add(self, line: CertLine) -> CertLine:
        self.lines.append(line)
        return line

    @property
    def passed(self) -> bool:
        return all(line.passed for line in self.lines)

    @property
    def failed_claims(self) -> list[str]:
        return [line.claim for line in self.lines if not line.passed]

    def to_json(self) -> dict:
        return {"title": self.title, "passed": self.passed, "constants": self.constants,
                "lines": [line.to_json() for line in self.lines]}

    def to_text(self) -> str:
        head = f"{self.title}: {'PASS' if self.passed else 'FAIL'}"
        body = [line.text() for line in self.lines]
        consts = [f"  {k} = {_fmt_text(v)}" for k, v in sorted(self.constants.items())]
        return "\n".join([head] + body + consts) + "\n"

    CSV_HEADER = ("claim", "passed", "lhs", "relation", "rhs", "tolerance", "detail")

    def to_csv(self) -> str:
        buf = io.StringIO()
        out = csv.writer(buf, lineterminator="\n")
        out.writerow(self.CSV_HEADER)
        for line in self.lines:
            out.writerow([line.claim, int(line.passed), _scalar(line.lhs), line.relation,
                          _scalar(line.rhs), _scalar(line.tolerance), line.detail])
        return buf.getvalue()


# ------------------------------------------------------------ canonical form
def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return '"nan"'
    if math.isinf(x):
        return '"inf"' if x > 0 else '"-inf"'
    if x == int(x) and abs(x) < 1e16:
        return f"{x:.1f}"
    return format(x, ".17g")


def _fmt_text(v) -> str:
    if isinstance(v, float):
        return format(v, ".17g")
    if isinstance(v, TowerScalar):
        return str(v)
    return str(v)


def _scalar(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    if isinstance(v, TowerScalar):
        return str(v)
    return str(v)


def _plain(obj):
    if hasattr(obj, "to_json") and not isinstance(obj, dict):
        return obj.to_json()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


def canonical_json(obj) -> str:
    """JSON with sorted keys and floats written to 17 significant digits."""
    obj = _plain(obj)
    if obj is None or isinstance(obj, bool):
        return json.dumps(obj)
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _fmt_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        items = sorted((str(k), v) for k, v in obj.items())
        return "{" + ",".join(f"{json.dumps(k)}:{canonical_json(v)}" for k, v in items) + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(canonical_json(v) for v in obj) + "]"
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def render(report, fmt: str) -> str:
    if fmt == "json":
        return canonical_json(report) + "\n"
    if fmt == "csv":
        if not hasattr(report, "to_csv"):
            raise ValueError("report has no CSV form")
        return report.to_csv()
    if fmt == "text":
        if hasattr(report, "to_text"):
            return report.to_text()
        return canonical_json(report) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def export_report(report, fmt: str, path: str | os.PathLike | None) -> str:
    """Serialise ``report`` and write it to ``path`` (``None`` or ``-`` returns the text only)."""
    text = render(report, fmt)
    if path is None or str(path) == "-":
        return text
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
    return text
