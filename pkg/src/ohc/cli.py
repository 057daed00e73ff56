"""Command-line interface.

Exit status: 0 on success, 1 on a usage error, 2 when input data cannot be
read or processed.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import io
from .cloud import Region, build_index
from .engine import run
from .errors import OHCError
from .hull import classify_points
from .metrics import Partition, score
from .pipeline import LabeledCloud, segment_large_scale
from .proximity import OhcParams

EXIT_USAGE = 1
EXIT_DATA = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _add_params(p):
    p.add_argument("--k", type=int, default=40, help="neighbours for normals (default 40)")
    p.add_argument("--hull-k", type=int, default=None, help="neighbours for the hull test (default: --k)")
    p.add_argument("--lambda", dest="lam", type=float, default=4.0, help="distance/direction weight (default 4)")
    p.add_argument("--sm", type=float, default=0.4, help="cost of leaving a cluster unmerged (default 0.4)")
    p.add_argument("--gamma", type=float, default=5.0, help="adjacency bound on normalised gap (default 5)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ohc", description="Optimal hierarchical clustering of point clouds.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    p = sub.add_parser("segment", help="cluster a whole cloud")
    p.add_argument("input")
    _add_params(p)
    p.add_argument("--out", help="label file (default: <input>.labels)")
    p.add_argument("--ply", help="coloured PLY output")
    p.add_argument("--dendrogram", help="dendrogram JSON output")

    p = sub.add_parser("pipeline", help="ground filter + downsample + cluster + propagate")
    p.add_argument("input")
    _add_params(p)
    p.add_argument("--fraction", type=float, default=0.1)
    p.add_argument("--cell", type=float, default=1.0, help="ground grid cell size (m)")
    p.add_argument("--height-tol", type=float, default=0.2, help="ground height tolerance (m)")
    p.add_argument("--no-ground", action="store_true", help="skip ground removal")
    p.add_argument("--out", help="label file (default: <input>.labels)")
    p.add_argument("--ply", help="coloured PLY output")

    p = sub.add_parser("classify-boundary", help="write interior (blue) / exterior (red) points")
    p.add_argument("input")
    p.add_argument("--out", required=True)
    p.add_argument("--k", type=int, default=40)

    p = sub.add_parser("evaluate", help="score a label file against ground truth")
    p.add_argument("result")
    p.add_argument("truth")
    p.add_argument("--ignore", type=int, action="append", default=[],
                   help="label to leave out of scoring (repeatable)")
    return parser


def _params(args) -> OhcParams:
    try:
        return OhcParams(k=args.k, lam=args.lam, sm=args.sm, gamma=args.gamma, hull_k=args.hull_k)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _default_out(path) -> Path:
    return Path(path).with_suffix(".labels")


def cmd_segment(args):
    params = _params(args)
    cloud = io.read_cloud(args.input)
    clusters, dendro = run(cloud, params)
    labels = clusters.labels + 1
    io.write_labels(args.out or _default_out(args.input), labels)
    if args.ply:
        io.write_labeled_ply(args.ply, LabeledCloud(cloud, labels))
    if args.dendrogram:
        io.write_dendrogram(args.dendrogram, dendro)
    print(f"{len(cloud)} points -> {clusters.n_clusters} clusters in {len(dendro)} levels")


def cmd_pipeline(args):
    params = _params(args)
    if not 0 < args.fraction <= 1 or args.cell <= 0:
        raise UsageError("--fraction must be in (0, 1] and --cell > 0")
    cloud = io.read_cloud(args.input)
    out = segment_large_scale(cloud, params, args.fraction, args.cell, args.height_tol,
                              remove_ground=not args.no_ground)
    io.write_labels(args.out or _default_out(args.input), out.labels)
    if args.ply:
        io.write_labeled_ply(args.ply, out)
    n_obj = len(np.unique(out.labels[out.labels > 0]))
    print(f"{len(cloud)} points: {int(out.ground.sum())} ground, {n_obj} objects")


def cmd_classify(args):
    if args.k < 4:
        raise UsageError("--k must be >= 4")
    cloud = io.read_cloud(args.input)
    labeled = classify_points(cloud, build_index(cloud), args.k)
    io.write_region_ply(args.out, labeled)
    n_in = int((labeled.region == Region.INTERIOR).sum())
    print(f"{n_in} interior, {len(cloud) - n_in} exterior")


def cmd_evaluate(args):
    result = io.read_labels(args.result)
    truth = io.read_labels(args.truth, expected=len(result))
    rep = score(Partition.from_labels(result, args.ignore), Partition.from_labels(truth, args.ignore))
    print(f"n_com {rep.n_com:.4f}")
    print(f"n_cor {rep.n_cor:.4f}")
    print(f"n_acc {rep.n_acc:.4f}")
    print(f"n_F1 {rep.n_f1:.4f}")


COMMANDS = {"segment": cmd_segment, "pipeline": cmd_pipeline,
            "classify-boundary": cmd_classify, "evaluate": cmd_evaluate}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError(parser.format_usage().strip())
        logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                            format="%(levelname)s %(name)s: %(message)s")
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_USAGE
    except (OHCError, OSError, ValueError) as exc:
        print(f"ohc: {exc}", file=sys.stderr)
        return EXIT_DATA
    return 0


if __name__ == "__main__":
    sys.exit(main())
