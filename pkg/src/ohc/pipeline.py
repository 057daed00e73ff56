"""Large-scene framework: ground removal, downsampling, clustering, label propagation.

Ground removal here is a grid minimum-height filter, a deliberately simple
stand-in for a full cloth-simulation ground filter. It misclassifies points on
slopes that rise more than ``height_tol`` within a cell.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .cloud import PointCloud
from .engine import run
from .proximity import OhcParams

GROUND_LABEL = 0
UNLABELED = -1


@dataclass
class LabeledCloud:
    """A cloud with one label per point; ``-1`` marks a point not yet labelled."""

    cloud: PointCloud
    labels: np.ndarray
    ground: np.ndarray | None = None

    def __post_init__(self):
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.labels.shape != (len(self.cloud),):
            raise ValueError("labels must align one-to-one with points")
        if self.ground is None:
            self.ground = np.zeros(len(self.cloud), dtype=bool)
        self.ground = np.asarray(self.ground, dtype=bool)

    def __len__(self):
        return len(self.cloud)


def filter_ground(cloud: PointCloud, cell_size: float = 1.0, height_tol: float = 0.2):
    """Split point ids into (ground, off_ground).

    A point is ground when its height above the lowest point of its XY grid
    cell is at most ``height_tol``.
    """
    if len(cloud) == 0:
        raise ValueError("cloud is empty")
    if cell_size <= 0:
        raise ValueError("cell_size must be > 0")
    pts = cloud.points
    cells = np.floor((pts[:, :2] - pts[:, :2].min(axis=0)) / cell_size).astype(np.int64)
    _, inv = np.unique(cells, axis=0, return_inverse=True)
    inv = inv.ravel()
    zmin = np.full(inv.max() + 1, np.inf)
    np.minimum.at(zmin, inv, pts[:, 2])
    is_ground = pts[:, 2] - zmin[inv] <= height_tol
    return np.flatnonzero(is_ground), np.flatnonzero(~is_ground)


def _voxel_keep(pts: np.ndarray, size: float) -> np.ndarray:
    vox = np.floor((pts - pts.min(axis=0)) / size).astype(np.int64)
    _, inv = np.unique(vox, axis=0, return_inverse=True)
    inv = inv.ravel()
    nv = inv.max() + 1
    counts = np.bincount(inv, minlength=nv)
    centroid = np.stack([np.bincount(inv, pts[:, a], minlength=nv) for a in range(3)], axis=1) / counts[:, None]
    d = np.linalg.norm(pts - centroid[inv], axis=1)
    order = np.lexsort((np.arange(len(pts)), d, inv))
    _, first = np.unique(inv[order], return_index=True)
    return np.sort(order[first])


def downsample(cloud: PointCloud, fraction: float, rel_tol: float = 0.05, max_iter: int = 60):
    """Voxel-grid downsampling to about ``fraction * n`` points.

    The voxel edge is found by bisection so the number of occupied voxels
    lands within ``rel_tol`` of the target when possible. Each voxel keeps
    the point nearest to the centroid of its points. Returns the sampled
    cloud and the array mapping sampled ids to original ids.
    """
    if not 0 < fraction <= 1:
        raise ValueError("fraction must be in (0, 1]")
    n = len(cloud)
    if fraction == 1 or n <= 1:
        ids = np.arange(n)
        return cloud.subset(ids), ids
    target = max(1, int(round(fraction * n)))
    pts = cloud.points
    extent = float(np.max(pts.max(axis=0) - pts.min(axis=0)))
    if extent == 0:
        ids = np.array([0])
        return cloud.subset(ids), ids
    lo, hi = np.log(extent * 1e-9), np.log(extent * 2)
    best = None
    for _ in range(max_iter):
        mid = 0.5 * (lo + hi)
        keep = _voxel_keep(pts, float(np.exp(mid)))
        err = abs(len(keep) - target)
        if best is None or err < best[0]:
            best = (err, keep)
        if err <= rel_tol * target:
            break
        if len(keep) > target:
            lo = mid
        else:
            hi = mid
    ids = best[1]
    return cloud.subset(ids), ids


def propagate_labels(full, labeled_subset: LabeledCloud, id_map) -> LabeledCloud:
    """Give every unlabelled off-ground point the label of its nearest labelled point.

    ``full`` is a PointCloud or a LabeledCloud whose existing labels are kept.
    ``id_map[i]`` is the id in ``full`` of subset point ``i``. Equidistant
    candidates resolve to the lowest label.
    """
    if len(labeled_subset) == 0:
        raise ValueError("labeled subset is empty")
    if isinstance(full, LabeledCloud):
        cloud, labels, ground = full.cloud, full.labels.copy(), full.ground.copy()
    else:
        cloud, labels, ground = full, np.full(len(full), UNLABELED, dtype=np.int64), np.zeros(len(full), bool)
    id_map = np.asarray(id_map, dtype=np.intp)
    src_pts = labeled_subset.cloud.points
    src_lab = labeled_subset.labels
    fill = labels[id_map] == UNLABELED
    labels[id_map[fill]] = src_lab[fill]

    todo = np.flatnonzero((labels == UNLABELED) & ~ground)
    if len(todo):
        tree = cKDTree(src_pts)
        k = min(4, len(src_pts))
        d, nb = tree.query(cloud.points[todo], k=k)
        d, nb = d.reshape(len(todo), k), nb.reshape(len(todo), k)
        tied = d == d[:, :1]
        lab = np.where(tied, src_lab[nb], np.iinfo(np.int64).max)
        labels[todo] = lab.min(axis=1)
        # more ties than neighbours fetched: resolve with a radius query
        for row in np.flatnonzero(tied.all(axis=1) & (k < len(src_pts))):
            q = cloud.points[todo[row]]
            cand = np.asarray(tree.query_ball_point(q, r=d[row, 0] * (1 + 1e-12)), dtype=np.intp)
            dist = np.linalg.norm(src_pts[cand] - q, axis=1)
            labels[todo[row]] = src_lab[cand[dist == dist.min()]].min()
    return LabeledCloud(cloud, labels, ground)


def segment_large_scale(cloud: PointCloud, params: OhcParams | None = None, fraction: float = 0.1,
                        cell_size: float = 1.0, height_tol: float = 0.2,
                        remove_ground: bool = True) -> LabeledCloud:
    """Ground filter, downsample the rest, cluster the sample, spread labels back.

    Ground points get label 0 and objects 1, 2, ... . With
    ``remove_ground=False`` every point is treated as off-ground.
    """
    if len(cloud) == 0:
        raise ValueError("cloud is empty")
    params = params or OhcParams()
    n = len(cloud)
    if remove_ground:
        ground_ids, off_ids = filter_ground(cloud, cell_size, height_tol)
    else:
        ground_ids, off_ids = np.empty(0, dtype=np.intp), np.arange(n)
    labels = np.full(n, UNLABELED, dtype=np.int64)
    ground = np.zeros(n, dtype=bool)
    labels[ground_ids] = GROUND_LABEL
    ground[ground_ids] = True
    if len(off_ids) == 0:
        return LabeledCloud(cloud, labels, ground)

    off = PointCloud(cloud.points[off_ids])
    sample, sample_ids = downsample(off, fraction)
    clusters, _ = run(sample, params)
    sub = LabeledCloud(sample, clusters.labels + 1)
    spread = propagate_labels(off, sub, sample_ids)
    labels[off_ids] = spread.labels
    return LabeledCloud(cloud, labels, ground)
