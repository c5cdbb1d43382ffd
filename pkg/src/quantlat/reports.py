"""Stable CSV and JSON emission for experiment results.

One row per (experiment, parameter point).  Identical inputs produce
byte-identical files: floats are written with repr (shortest round trip),
JSON keys are sorted, and row order follows insertion order.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

CSV_FIELDS = ["experiment", "parameter", "statistic", "target", "gap", "passed", "seed", "fragment"]


@dataclass
class ResultRow:
    experiment: str
    parameter: str
    statistic: float
    target: float
    gap: float
    passed: bool
    seed: int
    fragment: str

    def formatted(self) -> list[str]:
        return [
            self.experiment,
            self.parameter,
            repr(float(self.statistic)),
            repr(float(self.target)),
            repr(float(self.gap)),
            "true" if self.passed else "false",
            str(self.seed),
            self.fragment,
        ]


def fragment_label(frag) -> str:
    if frag is None:
        return "-"
    return "corner=" + ",".join(str(v) for v in frag.a) + ";edges=" + ",".join(
        str(v) for v in frag.ell
    )


def rows_to_csv(rows: list[ResultRow]) -> str:
    out = [",".join(CSV_FIELDS)]
    for row in rows:
        out.append(",".join(row.formatted()))
    return "\n".join(out) + "\n"


def write_csv(rows: list[ResultRow], path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(rows_to_csv(rows))


def rows_to_json(rows: list[ResultRow], meta: dict) -> str:
    payload = {"meta": meta, "rows": [asdict(r) for r in rows]}
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def write_json(rows: list[ResultRow], meta: dict, path: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(rows_to_json(rows, meta))
