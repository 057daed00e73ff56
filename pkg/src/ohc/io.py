"""Readers and writers: XYZ text, PLY, label files and dendrogram documents."""

from __future__ import annotations

import colorsys
import json
from pathlib import Path

import numpy as np

from .cloud import PointCloud, Region
from .engine import Dendrogram
from .errors import EmptyInput, FormatError, ParseError

PLY_TYPES = {
    "char": "i1", "int8": "i1", "uchar": "u1", "uint8": "u1",
    "short": "i2", "int16": "i2", "ushort": "u2", "uint16": "u2",
    "int": "i4", "int32": "i4", "uint": "u4", "uint32": "u4",
    "float": "f4", "float32": "f4", "double": "f8", "float64": "f8",
}

GROUND_COLOR = (128, 128, 128)
EXTERIOR_COLOR = (255, 0, 0)
INTERIOR_COLOR = (0, 0, 255)


def _make_palette(n=32):
    out = []
    for i in range(n):
        h = (i * 0.618033988749895) % 1.0
        s = 0.65 + 0.35 * (i % 2)
        v = 0.95 - 0.25 * ((i // 2) % 2)
        out.append(tuple(int(round(255 * x)) for x in colorsys.hsv_to_rgb(h, s, v)))
    return np.array(out, dtype=np.uint8)


PALETTE = _make_palette()


def label_colors(labels) -> np.ndarray:
    labels = np.asarray(labels, dtype=np.int64)
    colors = PALETTE[labels % len(PALETTE)]
    colors[labels == 0] = GROUND_COLOR
    return colors


# -- XYZ ----------------------------------------------------------------------

def read_xyz(path) -> PointCloud:
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            tok = s.replace(",", " ").split()
            if len(tok) < 3:
                raise ParseError(f"expected at least 3 columns, got {len(tok)}", lineno)
            try:
                xyz = [float(t) for t in tok[:3]]
            except ValueError as exc:
                raise ParseError(str(exc), lineno) from None
            if not all(np.isfinite(xyz)):
                raise ParseError("non-finite coordinate", lineno)
            rows.append(xyz)
    if not rows:
        raise EmptyInput(f"{path}: no points")
    return PointCloud(np.array(rows))


def write_xyz(path, cloud: PointCloud):
    np.savetxt(path, cloud.points, fmt="%.9g")


# -- PLY ----------------------------------------------------------------------

def _parse_ply_header(fh):
    first = fh.readline()
    if first.strip() != b"ply":
        raise FormatError("not a PLY file")
    fmt = None
    elements = []  # [name, count, [(prop, dtype | ("list", count_t, item_t))]]
    while True:
        line = fh.readline()
        if not line:
            raise FormatError("unterminated PLY header")
        tok = line.decode("ascii", "replace").split()
        if not tok or tok[0] in ("comment", "obj_info"):
            continue
        if tok[0] == "end_header":
            break
        if tok[0] == "format":
            fmt = tok[1]
        elif tok[0] == "element":
            elements.append([tok[1], int(tok[2]), []])
        elif tok[0] == "property":
            if not elements:
                raise FormatError("property before element")
            if tok[1] == "list":
                elements[-1][2].append((tok[4], ("list", tok[2], tok[3])))
            else:
                if tok[1] not in PLY_TYPES:
                    raise FormatError(f"unknown property type {tok[1]}")
                elements[-1][2].append((tok[2], PLY_TYPES[tok[1]]))
    if fmt not in ("ascii", "binary_little_endian"):
        raise FormatError(f"unsupported PLY encoding {fmt!r}")
    return fmt, elements


def read_ply(path) -> PointCloud:
    """Vertex coordinates of a text or binary little-endian PLY file."""
    with open(path, "rb") as fh:
        fmt, elements = _parse_ply_header(fh)
        names = [e[0] for e in elements]
        if "vertex" not in names:
            raise FormatError("PLY has no vertex element")
        vi = names.index("vertex")
        props = elements[vi][2]
        pnames = [p[0] for p in props]
        for axis in "xyz":
            if axis not in pnames:
                raise FormatError(f"vertex element lacks property {axis}")
        count = elements[vi][1]
        if fmt == "ascii":
            skip = sum(e[1] for e in elements[:vi])
            lines = fh.read().decode("ascii").splitlines()
            body = [ln for ln in lines if ln.strip()][skip:skip + count]
            if len(body) < count:
                raise FormatError("PLY body ends early")
            cols = [pnames.index(a) for a in "xyz"]
            try:
                pts = np.array([[float(ln.split()[c]) for c in cols] for ln in body]).reshape(-1, 3)
            except (ValueError, IndexError) as exc:
                raise FormatError(f"bad vertex line: {exc}") from None
        else:
            if any(isinstance(p[1], tuple) for e in elements[:vi + 1] for p in e[2]):
                raise FormatError("list properties before or in the vertex element are not supported")
            for e in elements[:vi]:
                fh.seek(e[1] * np.dtype([(p[0], "<" + p[1]) for p in e[2]]).itemsize, 1)
            dt = np.dtype([(p[0], "<" + p[1]) for p in props])
            raw = fh.read(count * dt.itemsize)
            if len(raw) < count * dt.itemsize:
                raise FormatError("PLY body ends early")
            arr = np.frombuffer(raw, dtype=dt, count=count)
            pts = np.stack([arr[a].astype(np.float64) for a in "xyz"], axis=1)
    if len(pts) == 0:
        raise EmptyInput(f"{path}: no vertices")
    return PointCloud(pts)


def write_ply(path, cloud: PointCloud, colors=None, labels=None, binary: bool = False):
    """Write vertices (float64 when binary, 9 significant digits as text)."""
    pts = cloud.points
    n = len(pts)
    fields = [("x", "<f8", "double"), ("y", "<f8", "double"), ("z", "<f8", "double")]
    if colors is not None:
        colors = np.asarray(colors, dtype=np.uint8).reshape(n, 3)
        fields += [("red", "u1", "uchar"), ("green", "u1", "uchar"), ("blue", "u1", "uchar")]
    if labels is not None:
        labels = np.asarray(labels, dtype=np.int32).reshape(n)
        fields.append(("label", "<i4", "int"))
    header = ["ply", f"format {'binary_little_endian' if binary else 'ascii'} 1.0",
              f"element vertex {n}"] + [f"property {f[2]} {f[0]}" for f in fields] + ["end_header"]
    with open(path, "wb") as fh:
        fh.write(("\n".join(header) + "\n").encode("ascii"))
        if binary:
            arr = np.empty(n, dtype=[(f[0], f[1]) for f in fields])
            for a, name in enumerate("xyz"):
                arr[name] = pts[:, a]
            if colors is not None:
                arr["red"], arr["green"], arr["blue"] = colors.T
            if labels is not None:
                arr["label"] = labels
            fh.write(arr.tobytes())
        else:
            lines = []
            for i in range(n):
                row = [f"{v:.9g}" for v in pts[i]]
                if colors is not None:
                    row += [str(int(c)) for c in colors[i]]
                if labels is not None:
                    row.append(str(int(labels[i])))
                lines.append(" ".join(row))
            fh.write(("\n".join(lines) + ("\n" if lines else "")).encode("ascii"))


def write_labeled_ply(path, labeled):
    """Text PLY coloured by label; label 0 (ground) is grey."""
    if len(labeled.labels) == 0:
        raise ValueError("nothing to write: label array is empty")
    if np.any(labeled.labels < 0):
        raise ValueError("labels are incomplete")
    write_ply(path, labeled.cloud, colors=label_colors(labeled.labels), labels=labeled.labels)


def write_region_ply(path, cloud: PointCloud):
    """Text PLY with exterior points red and interior points blue."""
    if cloud.region is None:
        raise ValueError("cloud has no region flags")
    colors = np.where((cloud.region == Region.INTERIOR)[:, None], INTERIOR_COLOR, EXTERIOR_COLOR)
    write_ply(path, cloud, colors=colors)


def read_cloud(path) -> PointCloud:
    p = Path(path)
    if p.suffix.lower() == ".ply":
        return read_ply(p)
    return read_xyz(p)


# -- label files and dendrograms ---------------------------------------------

def write_labels(path, labels):
    labels = np.asarray(labels, dtype=np.int64)
    if np.any(labels < 0):
        raise ValueError("labels must be non-negative")
    Path(path).write_text("".join(f"{int(v)}\n" for v in labels))


def read_labels(path, expected: int | None = None) -> np.ndarray:
    out = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s:
                continue
            try:
                v = int(s)
            except ValueError:
                raise ParseError(f"not an integer label: {s!r}", lineno) from None
            if v < 0:
                raise ParseError("labels must be non-negative", lineno)
            out.append(v)
    if expected is not None and len(out) != expected:
        raise ParseError(f"{path}: {len(out)} labels for {expected} points")
    return np.array(out, dtype=np.int64)


def dumps_dendrogram(dendro: Dendrogram) -> str:
    return json.dumps({"format": "ohc-dendrogram", "version": 1, **dendro.to_dict()}, indent=1)


def loads_dendrogram(text: str) -> Dendrogram:
    doc = json.loads(text)
    if doc.get("format") != "ohc-dendrogram":
        raise FormatError("not a dendrogram document")
    return Dendrogram.from_dict(doc)


def write_dendrogram(path, dendro: Dendrogram):
    Path(path).write_text(dumps_dendrogram(dendro) + "\n")


def read_dendrogram(path) -> Dendrogram:
    return loads_dendrogram(Path(path).read_text())
