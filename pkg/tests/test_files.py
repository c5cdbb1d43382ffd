import numpy as np
import pytest

import quantlat as ql
from quantlat.files import (
    FormatError,
    format_cell,
    format_qpset,
    format_system,
    load_system,
    parse_cell,
    parse_qpset,
    parse_system,
)
from quantlat.geometry import Box, JordanSet
from quantlat.numutil import rng_from_seed
from quantlat.quasiperiodic import QuasiperiodicSet, irrational_matrix_2x2


def test_cell_round_trip():
    cell = ql.cross_cell()
    parsed = parse_cell(format_cell(cell))
    rng = rng_from_seed(61)
    u = rng.uniform(-3, 3, (2000, 2))
    q1 = ql.Quantizer.from_cell(cell)
    q2 = ql.Quantizer.from_cell(parsed)
    np.testing.assert_array_equal(q1.quantize_many(u), q2.quantize_many(u))


def test_system_round_trip():
    text = format_system(ql.rotation_matrix(1.0))
    sys_ = parse_system(text)
    np.testing.assert_array_equal(sys_.L, ql.rotation_matrix(1.0))
    assert sys_.quantizer.cube_offset == (-0.5, -0.5)


def test_system_with_cell_file(tmp_path):
    (tmp_path / "cross.cell").write_text(format_cell(ql.cross_cell()))
    (tmp_path / "rot.system").write_text(
        "system\ndim 2\nmatrix "
        + " ".join(repr(v) for v in ql.rotation_matrix(1.0).reshape(-1).tolist())
        + "\nquantizer cell cross.cell\n"
    )
    sys_ = load_system(str(tmp_path / "rot.system"))
    assert sys_.quantizer.cube_offset is None
    assert np.linalg.norm(sys_.mu) > 0.1  # the cross cell has a nonzero mean


def test_qpset_round_trip():
    q = QuasiperiodicSet(irrational_matrix_2x2(), JordanSet(2, (Box((0.0, 0.0), (0.5, 0.7)),)))
    parsed = parse_qpset(format_qpset(q))
    rng = rng_from_seed(62)
    pts = rng.integers(-200, 200, (500, 2))
    np.testing.assert_array_equal(parsed.contains_many(pts), q.contains_many(pts))


def test_comments_and_blank_lines_ignored():
    text = "# header comment\n\nsystem\ndim 2  # inline\nmatrix 1 0 0 1\nquantizer roundoff\n"
    sys_ = parse_system(text)
    np.testing.assert_array_equal(sys_.L, np.eye(2))


def test_missing_header_rejected():
    with pytest.raises(FormatError, match="header"):
        parse_cell("dim 2\n")


def test_unknown_key_rejected():
    with pytest.raises(FormatError, match="unknown key"):
        parse_system("system\ndim 2\nmatrice 1 0 0 1\nquantizer roundoff\n")


def test_box_before_piece_rejected():
    with pytest.raises(FormatError, match="before any piece"):
        parse_cell("cell\ndim 1\nbox 0 1\n")


def test_wrong_matrix_arity_rejected():
    with pytest.raises(FormatError, match="entries"):
        parse_system("system\ndim 2\nmatrix 1 0 0\nquantizer roundoff\n")


def test_invalid_cell_content_rejected():
    text = "cell\ndim 1\npiece 0\nbox 0 0.5\n"
    with pytest.raises(ql.CellError):
        parse_cell(text)
