import json

import quantlat as ql
from quantlat.reports import ResultRow, fragment_label, rows_to_csv, rows_to_json


def make_row():
    return ResultRow(
        "demo", "alpha=1", 0.1353352832366127, 0.1353352832366127, 0.0, True, 42,
        fragment_label(ql.Fragment((-50, -50), (101, 101))),
    )


def test_fragment_label_format():
    assert fragment_label(ql.Fragment((-50, -50), (101, 101))) == "corner=-50,-50;edges=101,101"
    assert fragment_label(None) == "-"


def test_csv_layout_and_float_round_trip():
    csv = rows_to_csv([make_row()])
    header, row = csv.strip().split("\n")
    assert header == "experiment,parameter,statistic,target,gap,passed,seed,fragment"
    fields = row.split(",")
    assert fields[0] == "demo"
    assert float(fields[2]) == 0.1353352832366127  # repr round-trips exactly
    assert fields[5] == "true"


def test_json_is_deterministic_and_sorted():
    rows = [make_row()]
    a = rows_to_json(rows, {"seed": 42, "experiment": "demo"})
    b = rows_to_json(rows, {"experiment": "demo", "seed": 42})
    assert a == b  # key order in the meta dict does not matter
    payload = json.loads(a)
    assert payload["rows"][0]["passed"] is True
    assert set(payload["rows"][0]) == {
        "experiment", "parameter", "statistic", "target", "gap", "passed", "seed", "fragment",
    }
