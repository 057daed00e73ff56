"""Point clouds, nearest-neighbour indexing and PCA normals.

Normals are unoriented: the sign of every estimated normal is arbitrary, so
only ``abs(dot(n_i, n_j))`` style comparisons are meaningful. A point whose
neighbourhood has rank < 2 (all neighbours collinear or coincident) gets a
normal of NaNs, see :attr:`PointCloud.normal_defined`.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from enum import IntEnum

import numpy as np
from scipy.spatial import cKDTree

from .errors import EmptyInput, NormalsUndefined, Undefined

# eigenvalue ratio lambda_mid / lambda_max below which a neighbourhood is rank < 2
RANK_TOL = 1e-10


class Region(IntEnum):
    EXTERIOR = 0
    INTERIOR = 1


@dataclass(frozen=True)
class PointCloud:
    """Ordered 3D points with optional unit normals and region flags.

    ``points`` is an ``(n, 3)`` float array. ``normals`` is ``(n, 3)`` with
    rows of NaN where the normal is undefined. ``region`` holds
    :class:`Region` values as ``int8``.
    """

    points: np.ndarray
    normals: np.ndarray | None = None
    region: np.ndarray | None = None

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim == 1 and pts.size == 0:
            pts = pts.reshape(0, 3)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ValueError(f"points must have shape (n, 3), got {pts.shape}")
        if not np.all(np.isfinite(pts)):
            raise ValueError("point coordinates must be finite")
        object.__setattr__(self, "points", pts)
        if self.normals is not None:
            nrm = np.asarray(self.normals, dtype=np.float64)
            if nrm.shape != pts.shape:
                raise ValueError("normals must align one-to-one with points")
            object.__setattr__(self, "normals", nrm)
        if self.region is not None:
            reg = np.asarray(self.region, dtype=np.int8)
            if reg.shape != (len(pts),):
                raise ValueError("region must align one-to-one with points")
            object.__setattr__(self, "region", reg)

    def __len__(self):
        return len(self.points)

    @property
    def normal_defined(self) -> np.ndarray:
        if self.normals is None:
            return np.zeros(len(self), dtype=bool)
        return np.all(np.isfinite(self.normals), axis=1)

    def with_normals(self, normals) -> "PointCloud":
        return replace(self, normals=normals)

    def with_region(self, region) -> "PointCloud":
        return replace(self, region=region)

    def subset(self, ids) -> "PointCloud":
        ids = np.asarray(ids, dtype=np.intp)
        return PointCloud(
            self.points[ids],
            None if self.normals is None else self.normals[ids],
            None if self.region is None else self.region[ids],
        )


class SpatialIndex:
    """Immutable k-d tree over a cloud's points.

    Distance ties are broken by ascending point id in every query, so results
    do not depend on the tree's internal layout.
    """

    def __init__(self, points: np.ndarray):
        self.points = np.asarray(points, dtype=np.float64)
        if len(self.points) == 0:
            raise EmptyInput("cannot index an empty cloud")
        self.tree = cKDTree(self.points)

    def __len__(self):
        return len(self.points)

    def k_nearest(self, query, k: int) -> np.ndarray:
        if k < 1:
            raise ValueError("k must be >= 1")
        q = np.asarray(query, dtype=np.float64)
        k = min(k, len(self))
        d, _ = self.tree.query(q, k=k)
        radius = float(np.atleast_1d(d)[-1])
        cand = np.asarray(self.tree.query_ball_point(q, r=radius * (1 + 1e-9) + 1e-300), dtype=np.intp)
        dist = np.linalg.norm(self.points[cand] - q, axis=1)
        order = np.lexsort((cand, dist))
        return cand[order[:k]]

    def knn_all(self, k: int, slack: int = 4) -> np.ndarray:
        """k nearest neighbours (self included) of every indexed point, shape (n, k)."""
        n = len(self)
        k = min(k, n)
        kq = min(k + slack, n)
        d, idx = self.tree.query(self.points, k=kq)
        d = d.reshape(n, kq)
        idx = idx.reshape(n, kq)
        # lexsort per row: primary distance, secondary id
        order = np.lexsort((idx, d), axis=1)
        return np.take_along_axis(idx, order, axis=1)[:, :k]

    def nn_distances(self) -> np.ndarray:
        """Distance from every point to its nearest *other* point."""
        if len(self) < 2:
            raise Undefined("nearest-neighbour distance needs at least 2 points")
        d, _ = self.tree.query(self.points, k=2)
        return d[:, 1]

    def nn_distance(self, point_id: int) -> float:
        if len(self) < 2:
            raise Undefined("nearest-neighbour distance needs at least 2 points")
        d, _ = self.tree.query(self.points[point_id], k=2)
        return float(d[1])


def build_index(cloud: PointCloud | np.ndarray) -> SpatialIndex:
    pts = cloud.points if isinstance(cloud, PointCloud) else cloud
    return SpatialIndex(pts)


def k_nearest(index: SpatialIndex, query, k: int) -> np.ndarray:
    """Ids of the ``k`` points closest to ``query``, nearest first."""
    return index.k_nearest(query, k)


def nn_distance(index: SpatialIndex, point_id: int) -> float:
    return index.nn_distance(point_id)


def _pca_normals(points: np.ndarray, neighbors: np.ndarray) -> np.ndarray:
    nb = points[neighbors]
    centered = nb - nb.mean(axis=1, keepdims=True)
    cov = np.einsum("nki,nkj->nij", centered, centered) / neighbors.shape[1]
    w, v = np.linalg.eigh(cov)
    normals = v[:, :, 0].copy()
    degenerate = (w[:, 2] <= 0) | (w[:, 1] <= RANK_TOL * w[:, 2])
    normals[degenerate] = np.nan
    return normals


def estimate_normals(cloud: PointCloud, k: int = 40, index: SpatialIndex | None = None,
                     chunk: int = 20000) -> PointCloud:
    """Return a copy of ``cloud`` whose normals come from PCA on k-neighbourhoods.

    The neighbourhood of a point contains the point itself. Each normal is
    the eigenvector of the smallest covariance eigenvalue; neighbourhoods
    of rank < 2 give NaN normals.
    """
    n = len(cloud)
    if n < 3:
        raise NormalsUndefined(f"normal estimation needs at least 3 points, got {n}")
    if k < 3:
        raise ValueError("k must be >= 3")
    index = index or build_index(cloud)
    nbrs = index.knn_all(k)
    normals = np.empty((n, 3))
    for start in range(0, n, chunk):
        sl = slice(start, start + chunk)
        normals[sl] = _pca_normals(cloud.points, nbrs[sl])
    return cloud.with_normals(normals)
