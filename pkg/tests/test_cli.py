import json

import numpy as np
import pytest

from conftest import fib_sphere
from ohc import io
from ohc.cloud import PointCloud
from ohc.cli import build_parser, main

TOY = "0 0 0\n1 0 0\n10 0 0\n11 0 0\n5 8 0\n6 8 0\n"


@pytest.fixture
def toy(tmp_path):
    p = tmp_path / "toy.xyz"
    p.write_text(TOY)
    return p


def test_segment_toy(toy, tmp_path, capsys):
    assert main(["segment", str(toy), "--ply", str(tmp_path / "t.ply"),
                 "--dendrogram", str(tmp_path / "t.json")]) == 0
    labels = io.read_labels(tmp_path / "toy.labels", expected=6)
    assert len(set(labels.tolist())) == 3
    assert labels.min() >= 1
    assert json.loads((tmp_path / "t.json").read_text())["format"] == "ohc-dendrogram"
    assert len(io.read_ply(tmp_path / "t.ply")) == 6
    assert "3 clusters" in capsys.readouterr().out


def test_defaults():
    args = build_parser().parse_args(["segment", "x.xyz"])
    assert (args.k, args.lam, args.sm, args.gamma) == (40, 4.0, 0.4, 5.0)
    args = build_parser().parse_args(["pipeline", "x.xyz"])
    assert (args.fraction, args.cell, args.height_tol) == (0.1, 1.0, 0.2)


def test_evaluate_self(toy, tmp_path, capsys):
    lab = tmp_path / "a.labels"
    io.write_labels(lab, [1, 1, 2, 2, 3, 3])
    assert main(["evaluate", str(lab), str(lab)]) == 0
    out = capsys.readouterr().out.split()
    assert out == ["n_com", "1.0000", "n_cor", "1.0000", "n_acc", "1.0000", "n_F1", "1.0000"]


def test_evaluate_ignore(tmp_path, capsys):
    io.write_labels(tmp_path / "r", [0, 1, 1, 2])
    io.write_labels(tmp_path / "t", [5, 1, 1, 2])
    assert main(["evaluate", str(tmp_path / "r"), str(tmp_path / "t"), "--ignore", "0", "--ignore", "5"]) == 0
    assert "n_acc 1.0000" in capsys.readouterr().out


def test_evaluate_length_mismatch(tmp_path):
    io.write_labels(tmp_path / "r", [1, 2])
    io.write_labels(tmp_path / "t", [1, 2, 3])
    assert main(["evaluate", str(tmp_path / "r"), str(tmp_path / "t")]) == 2


def test_missing_input(tmp_path):
    assert main(["segment", str(tmp_path / "missing.xyz")]) == 2


def test_bad_input(tmp_path):
    p = tmp_path / "bad.xyz"
    p.write_text("1 2\n")
    assert main(["segment", str(p)]) == 2


@pytest.mark.parametrize("argv", [["segment", "x.xyz", "--bogus"], [], ["frobnicate"],
                                  ["segment", "x.xyz", "--lambda", "1"], ["pipeline", "x.xyz", "--fraction", "0"]])
def test_usage_errors(argv, capsys):
    assert main(argv) == 1
    assert capsys.readouterr().err


def test_classify_boundary(tmp_path, capsys):
    g = np.arange(6.0)
    pts = np.stack(np.meshgrid(g, g, g, indexing="ij"), -1).reshape(-1, 3)
    src = tmp_path / "cube.xyz"
    io.write_xyz(src, PointCloud(pts))
    assert main(["classify-boundary", str(src), "--out", str(tmp_path / "c.ply"), "--k", "26"]) == 0
    rows = (tmp_path / "c.ply").read_text().strip().splitlines()[-len(pts):]
    colors = {tuple(map(int, r.split()[3:6])) for r in rows}
    assert io.EXTERIOR_COLOR in colors and io.INTERIOR_COLOR in colors


def test_pipeline_command(tmp_path, capsys):
    g = np.arange(0, 6, 0.25)
    x, y = np.meshgrid(g, g, indexing="ij")
    plane = np.c_[x.ravel(), y.ravel(), np.zeros(x.size)]
    pts = np.vstack([plane, fib_sphere(300, 0.8, (3, 3, 2))])
    src = tmp_path / "scene.ply"
    io.write_ply(src, PointCloud(pts), binary=True)
    out = tmp_path / "scene.labels"
    assert main(["pipeline", str(src), "--fraction", "1", "--ply", str(tmp_path / "o.ply")]) == 0
    labels = io.read_labels(out, expected=len(pts))
    assert np.all(labels[:len(plane)] == 0)
    assert len(set(labels[len(plane):].tolist())) == 1
    assert "1 objects" in capsys.readouterr().out
