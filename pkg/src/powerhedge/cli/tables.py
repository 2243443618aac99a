"""Deterministic CSV tables: fixed header, LF endings, shortest round-trip floats."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


def format_value(v, precision: str = "repr") -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        f = float(v)
        if precision == "repr" or not math.isfinite(f):
            return repr(f)
        return format(f, f".{int(precision)}g")
    s = str(v)
    if any(c in s for c in ",\n\r"):
        raise ValueError(f"string field {s!r} contains a separator")
    return s


def parse_value(s: str):
    try:
        return int(s)
    except ValueError:
        pass
    try:
        return float(s)
    except ValueError:
        return s


@dataclass
class ResultTable:
    columns: list[str]
    rows: list[list] = field(default_factory=list)

    def add(self, *values) -> None:
        if len(values) != len(self.columns):
            raise ValueError(f"row has {len(values)} fields, table has {len(self.columns)} columns")
        self.rows.append(list(values))

    def column(self, name: str) -> list:
        j = self.columns.index(name)
        return [row[j] for row in self.rows]

    def to_csv(self, precision: str = "repr") -> str:
        lines = [",".join(self.columns)]
        lines.extend(",".join(format_value(v, precision) for v in row) for row in self.rows)
        return "\n".join(lines) + "\n"

    def write(self, path: str | Path, precision: str = "repr") -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_csv(precision))
        return path

    @classmethod
    def read(cls, path: str | Path) -> "ResultTable":
        with open(path, encoding="utf-8", newline="") as fh:
            lines = fh.read().split("\n")
        if lines and lines[-1] == "":
            lines.pop()
        if not lines:
            raise ValueError(f"{path}: empty table")
        table = cls(lines[0].split(","))
        for line in lines[1:]:
            table.add(*(parse_value(s) for s in line.split(",")))
        return table
