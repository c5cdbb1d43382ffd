import json
import os

import numpy as np
import pytest

import quantlat as ql
from quantlat.cli import main
from quantlat.files import format_system
from quantlat.imaging import PixelImage, pgm_bytes, render_fragment


def write_rotation_setup(tmp_path, theta=np.pi / 6):
    (tmp_path / "rot.system").write_text(format_system(ql.rotation_matrix(theta)))
    (tmp_path / "run.cfg").write_text(
        "[reach]\n"
        "experiment = rotation-reach\n"
        "system = rot.system\n"
        "fragment = -50 -50 101 101\n"
        "\n"
        "[badfrag]\n"
        "experiment = rotation-reach\n"
        "system = rot.system\n"
        "fragment = -50 -50 0 101\n"
        "\n"
        "[badkey]\n"
        "experiment = rotation-reach\n"
        "system = rot.system\n"
        "fragment = -50 -50 11 11\n"
        "bogus = 1\n"
        "\n"
        "[holes]\n"
        "experiment = hole-frequency\n"
        "thetas = 1.0\n"
        "samples = 50000\n"
        "seed = 5\n"
    )
    return tmp_path / "run.cfg"


def test_list_experiments(capsys):
    assert main(["--list"]) == 0
    out = capsys.readouterr().out
    assert "rotation-reach" in out and "mixing" in out


def test_rotation_reach_run(tmp_path, capsys):
    cfg = write_rotation_setup(tmp_path)
    out = tmp_path / "out"
    code = main(["--config", str(cfg), "--experiment", "reach", "--out", str(out)])
    assert code == 0
    csv = (out / "results.csv").read_text()
    assert "0.8658955004411332" in csv  # measured fraction on the 101^2 fragment
    summary = json.loads((out / "summary.json").read_text())
    assert summary["rows"][0]["passed"] is True
    pgm = (out / "rotation-reach.pgm").read_bytes()
    assert pgm.startswith(b"P2\n101 101\n255\n")
    grey = pgm.count(b"170")
    assert grey == 8833  # reachable points drawn grey


def test_malformed_fragment_is_validation_error(tmp_path, capsys):
    cfg = write_rotation_setup(tmp_path)
    code = main(["--config", str(cfg), "--experiment", "badfrag", "--out", str(tmp_path / "o")])
    assert code == 3
    assert "fragment" in capsys.readouterr().err


def test_unknown_key_is_validation_error(tmp_path, capsys):
    cfg = write_rotation_setup(tmp_path)
    code = main(["--config", str(cfg), "--experiment", "badkey", "--out", str(tmp_path / "o")])
    assert code == 3
    assert "bogus" in capsys.readouterr().err


def test_missing_section_is_parse_error(tmp_path, capsys):
    cfg = write_rotation_setup(tmp_path)
    code = main(["--config", str(cfg), "--experiment", "nope", "--out", str(tmp_path / "o")])
    assert code == 2


def test_threaded_scan_matches_serial(tmp_path):
    from quantlat.files import format_qpset
    from quantlat.geometry import Box, JordanSet
    from quantlat.quasiperiodic import QuasiperiodicSet, irrational_matrix_2x2

    q = QuasiperiodicSet(irrational_matrix_2x2(), JordanSet(2, (Box((0.0, 0.0), (0.5, 0.7)),)))
    (tmp_path / "win.qpset").write_text(format_qpset(q))
    (tmp_path / "qp.cfg").write_text(
        "[qp]\nexperiment = qp-frequency\nqpset = win.qpset\nfragment = -300 -300 600 600\n"
    )
    stats = []
    for threads, out in (("1", "t1"), ("3", "t3")):
        code = main(["--config", str(tmp_path / "qp.cfg"), "--experiment", "qp",
                     "--out", str(tmp_path / out), "--threads", threads])
        assert code == 0
        stats.append(json.loads((tmp_path / out / "summary.json").read_text())["rows"][0]["statistic"])
    assert stats[0] == stats[1]


def test_clt_experiment_through_cli(tmp_path):
    (tmp_path / "rot.system").write_text(format_system(ql.rotation_matrix(1.0)))
    (tmp_path / "clt.cfg").write_text(
        "[clt]\nexperiment = clt\nsystem = rot.system\n"
        "fragment = 100000 77777 100 100\nhorizon = 128\nalphas = 0 1\n"
    )
    out = tmp_path / "out"
    code = main(["--config", str(tmp_path / "clt.cfg"), "--experiment", "clt",
                 "--out", str(out)])
    assert code == 0
    rows = json.loads((out / "summary.json").read_text())["rows"]
    assert rows[0]["parameter"] == "alpha=0" and rows[0]["statistic"] == 1.0


def test_seeded_runs_are_byte_identical(tmp_path):
    cfg = write_rotation_setup(tmp_path)
    out1, out2 = tmp_path / "a", tmp_path / "b"
    for out in (out1, out2):
        assert main(["--config", str(cfg), "--experiment", "holes", "--out", str(out),
                     "--seed", "5"]) == 0
    assert (out1 / "results.csv").read_bytes() == (out2 / "results.csv").read_bytes()
    assert (out1 / "summary.json").read_bytes() == (out2 / "summary.json").read_bytes()


def test_render_fragment_all_grey_and_white():
    frag = ql.Fragment((0, 0), (4, 3))
    grey = render_fragment(lambda pts: np.ones(len(pts), dtype=bool), frag, batch=True)
    white = render_fragment(lambda pts: np.zeros(len(pts), dtype=bool), frag, batch=True)
    assert np.all(grey.pixels == 170) and grey.width == 4 and grey.height == 3
    assert np.all(white.pixels == 255)


def test_render_fragment_orientation():
    # only the point with maximal second coordinate is set: top row, col 0
    frag = ql.Fragment((7, -2), (2, 3))
    img = render_fragment(lambda x: tuple(x) == (7, 0), frag)
    assert img.pixels[0, 0] == 170
    assert img.pixels.sum() == 170 + 255 * (img.width * img.height - 1)


def test_render_requires_planar_fragment():
    with pytest.raises(ValueError):
        render_fragment(lambda x: True, ql.Fragment((0,), (4,)))


def test_pgm_golden_bytes():
    img = PixelImage(2, 2, np.array([[170, 255], [255, 170]], dtype=np.uint8))
    assert pgm_bytes(img) == b"P2\n2 2\n255\n170 255\n255 170\n"
