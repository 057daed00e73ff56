"""Cluster dissimilarity and the sparse proximity graph.

The dissimilarity of two clusters is evaluated at their closest pair of
points ``(p_i, p_j)``. It blends a distance term ``alpha`` (the gap
normalised by the clusters' median point spacing) with a direction term
``beta`` (one minus the absolute cosine between the two point normals).
The blend weights depend on whether the two points are interior or
exterior, controlled by ``lam``.

Only clusters whose normalised gap ``alpha`` is at most ``gamma`` are
connected; every cluster is connected to itself at cost ``sm``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .cloud import PointCloud, Region, SpatialIndex
from .errors import Undefined, ZeroSpacing


@dataclass(frozen=True)
class OhcParams:
    """Clustering parameters.

    ``k`` is the neighbourhood size for normals and, unless ``hull_k`` is
    given, for the interior/exterior hull test. ``gamma`` bounds the
    normalised gap between clusters that may merge.
    """

    k: int = 40
    lam: float = 4.0
    sm: float = 0.4
    gamma: float = 5.0
    hull_k: int | None = None

    def __post_init__(self):
        if self.k < 3:
            raise ValueError("k must be >= 3")
        if self.lam < 2:
            raise ValueError("lam must be >= 2")
        if self.sm <= 0:
            raise ValueError("sm must be > 0")
        if self.gamma <= 1:
            raise ValueError("gamma must be > 1")
        if self.hull_k is not None and self.hull_k < 4:
            raise ValueError("hull_k must be >= 4")

    @property
    def hull_neighbors(self) -> int:
        return self.hull_k if self.hull_k is not None else self.k


@dataclass(frozen=True)
class Cluster:
    id: int
    members: np.ndarray
    spacing: float | None = None

    def __len__(self):
        return len(self.members)


@dataclass
class ClusterSet:
    """A partition of point ids.

    ``labels[p]`` is the cluster id of point ``p``. Cluster ids run from 0 to
    ``n_clusters - 1`` in ascending order of each cluster's smallest point id.
    ``spacing[c]`` caches the median within-cluster nearest-neighbour distance.
    """

    labels: np.ndarray
    spacing: np.ndarray
    _members: list | None = field(default=None, repr=False)

    @property
    def n_clusters(self) -> int:
        return len(self.spacing)

    @property
    def n_points(self) -> int:
        return len(self.labels)

    def members(self, c: int) -> np.ndarray:
        if self._members is None:
            order = np.argsort(self.labels, kind="stable")
            bounds = np.searchsorted(self.labels[order], np.arange(self.n_clusters + 1))
            self._members = [order[bounds[i]:bounds[i + 1]] for i in range(self.n_clusters)]
        return self._members[c]

    @property
    def clusters(self) -> list[Cluster]:
        return [Cluster(c, self.members(c), float(self.spacing[c])) for c in range(self.n_clusters)]

    def groups(self) -> list[set]:
        return [set(self.members(c).tolist()) for c in range(self.n_clusters)]

    @classmethod
    def singletons(cls, index: SpatialIndex) -> "ClusterSet":
        n = len(index)
        spacing = index.nn_distances() if n > 1 else np.full(1, np.nan)
        return cls(np.arange(n), spacing)

    @classmethod
    def from_labels(cls, labels, index: SpatialIndex) -> "ClusterSet":
        """Build a cluster set from arbitrary labels, renumbering canonically."""
        labels = np.asarray(labels)
        _, first = np.unique(labels, return_index=True)
        # rank each label by its smallest point id
        uniq_sorted = labels[np.sort(first)]
        remap = {int(u): i for i, u in enumerate(uniq_sorted)}
        canon = np.array([remap[int(x)] for x in labels], dtype=np.intp)
        cs = cls(canon, np.zeros(len(uniq_sorted)))
        cs.spacing = np.array([spacing_for(cs.members(c), index) for c in range(cs.n_clusters)])
        return cs


@dataclass
class ProximityGraph:
    """Sparse symmetric dissimilarities between adjacent clusters.

    Off-diagonal entries are stored once per unordered pair with
    ``rows < cols``; ``pi``/``pj`` are the closest points (``pi`` in the
    ``rows`` cluster) and ``dist`` their distance. The diagonal is ``sm``.
    """

    n: int
    sm: float
    rows: np.ndarray
    cols: np.ndarray
    values: np.ndarray
    pi: np.ndarray
    pj: np.ndarray
    dist: np.ndarray
    _lookup: dict | None = field(default=None, repr=False)

    @property
    def n_edges(self) -> int:
        return len(self.values)

    def entry(self, i: int, j: int) -> float | None:
        """Dissimilarity of clusters i and j, or None when they are not adjacent."""
        if i == j:
            return self.sm
        if self._lookup is None:
            self._lookup = {(int(a), int(b)): float(v) for a, b, v in zip(self.rows, self.cols, self.values)}
        return self._lookup.get((min(i, j), max(i, j)))

    def closest(self, i: int, j: int):
        for a, b, p, q, d in zip(self.rows, self.cols, self.pi, self.pj, self.dist):
            if (a, b) == (min(i, j), max(i, j)):
                return (int(p), int(q), float(d)) if i < j else (int(q), int(p), float(d))
        return None

    def pairs(self) -> set:
        return set(zip(self.rows.tolist(), self.cols.tolist()))

    def to_dense(self, fill: float = np.inf) -> np.ndarray:
        m = np.full((self.n, self.n), fill)
        m[self.rows, self.cols] = self.values
        m[self.cols, self.rows] = self.values
        np.fill_diagonal(m, self.sm)
        return m

    def cost_view(self):
        from .matching import BipartiteCostView

        return BipartiteCostView.from_proximity(self)


# -- scalar terms -------------------------------------------------------------

def closest_pair(a, b, index: SpatialIndex):
    """Closest pair ``(p_i, p_j, d)`` with ``p_i`` in ``a`` and ``p_j`` in ``b``.

    Ties go to the lowest ``(p_i, p_j)`` after ordering the two clusters by
    their smallest member, so swapping the arguments swaps the result.
    """
    ma = np.sort(np.asarray(getattr(a, "members", a), dtype=np.intp))
    mb = np.sort(np.asarray(getattr(b, "members", b), dtype=np.intp))
    if len(ma) == 0 or len(mb) == 0:
        raise ValueError("clusters must be non-empty")
    swap = mb[0] < ma[0]
    if swap:
        ma, mb = mb, ma
    pts = index.points
    chunk = max(1, 1_000_000 // len(mb))
    best = (np.inf, -1, -1)
    for s in range(0, len(ma), chunk):
        block = ma[s:s + chunk]
        d = np.linalg.norm(pts[block][:, None, :] - pts[mb][None, :, :], axis=2)
        r, c = np.unravel_index(np.argmin(d), d.shape)  # row-major: lowest (p_i, p_j) among ties
        if d[r, c] < best[0]:
            best = (float(d[r, c]), int(block[r]), int(mb[c]))
    d, p, q = best
    return (q, p, d) if swap else (p, q, d)


def cluster_spacing(c, index: SpatialIndex) -> float:
    """Median over the cluster's points of the distance to the nearest other member.

    A singleton uses its nearest-neighbour distance in the whole cloud.
    """
    members = np.asarray(getattr(c, "members", c), dtype=np.intp)
    if len(members) == 0:
        raise ValueError("cluster must be non-empty")
    if len(members) == 1:
        return index.nn_distance(int(members[0]))
    pts = index.points[members]
    d, _ = cKDTree(pts).query(pts, k=2)
    return float(np.median(d[:, 1]))


def alpha(d: float, m_a: float, m_b: float) -> float:
    if d < 0 or m_a < 0 or m_b < 0:
        raise ValueError("distances and spacings must be non-negative")
    m = max(m_a, m_b)
    if m == 0:
        if d == 0:
            return 0.0
        raise ZeroSpacing(f"zero spacing with gap {d}")
    return d / m


def beta(n_i, n_j) -> float:
    if n_i is None or n_j is None:
        return 0.5
    n_i = np.asarray(n_i, dtype=float)
    n_j = np.asarray(n_j, dtype=float)
    if not (np.all(np.isfinite(n_i)) and np.all(np.isfinite(n_j))):
        return 0.5
    return float(1.0 - min(1.0, abs(float(n_i @ n_j))))


def delta(region_i, region_j) -> float:
    a, b = Region(region_i), Region(region_j)
    if a == b == Region.INTERIOR:
        return 1.0
    if a == b == Region.EXTERIOR:
        return 0.0
    return 0.5


def blend(alpha_, beta_, delta_, lam: float):
    """Weighted combination of the distance and direction terms.

    Works elementwise on arrays. ``delta`` must be one of 1, 0 or 0.5.
    """
    a = np.asarray(alpha_, dtype=float)
    b = np.asarray(beta_, dtype=float)
    dl = np.asarray(delta_, dtype=float)
    hi, lo = (lam - 1) / lam, 1 / lam
    out = np.where(dl == 1, hi * a + lo * b, np.where(dl == 0, lo * a + hi * b, 0.5 * a + 0.5 * b))
    return float(out) if out.ndim == 0 else out


def _spacing_of(c, index):
    sp = getattr(c, "spacing", None)
    return cluster_spacing(c, index) if sp is None or np.isnan(sp) else sp


def dissimilarity(a, b, params: OhcParams, cloud: PointCloud, index: SpatialIndex) -> float:
    if cloud.region is None:
        raise ValueError("cloud has no region flags; run classify_points first")
    p, q, d = closest_pair(a, b, index)
    al = alpha(d, _spacing_of(a, index), _spacing_of(b, index))
    nrm = cloud.normals
    be = beta(None if nrm is None else nrm[p], None if nrm is None else nrm[q])
    de = delta(cloud.region[p], cloud.region[q])
    return blend(al, be, de, params.lam)


# -- vectorised graph construction -------------------------------------------

def _closest_adjacent(clusters: ClusterSet, gamma: float, index: SpatialIndex):
    """Closest pairs of every adjacent cluster pair, as arrays (a, b, pi, pj, d, alpha)."""
    labels = clusters.labels
    spacing = np.nan_to_num(clusters.spacing, nan=0.0)
    radius = gamma * spacing[labels] * (1 + 1e-9)
    empty = tuple(np.empty(0, dtype=t) for t in (np.intp, np.intp, np.intp, np.intp, float, float))
    if clusters.n_clusters < 2:
        return empty
    # group points into radius bands so each band is one fixed-radius query
    pos = radius > 0
    band = np.full(len(radius), -1, dtype=np.intp)
    band[pos] = np.floor(np.log2(radius[pos])).astype(np.intp)
    chunks = []
    for b in np.unique(band):
        idx = np.flatnonzero(band == b)
        rmax = float(radius[idx].max())
        res = cKDTree(index.points[idx]).sparse_distance_matrix(index.tree, rmax, output_type="ndarray")
        pi = idx[res["i"]]
        pj = res["j"].astype(np.intp)
        d = res["v"]
        keep = (labels[pi] != labels[pj]) & (d <= radius[pi])
        chunks.append((pi[keep], pj[keep], d[keep]))
    pi = np.concatenate([c[0] for c in chunks])
    pj = np.concatenate([c[1] for c in chunks])
    d = np.concatenate([c[2] for c in chunks])
    if len(d) == 0:
        return empty
    ca, cb = labels[pi], labels[pj]
    flip = ca > cb
    ca, cb = np.where(flip, cb, ca), np.where(flip, ca, cb)
    pi, pj = np.where(flip, pj, pi), np.where(flip, pi, pj)
    key = ca.astype(np.int64) * clusters.n_clusters + cb
    order = np.lexsort((pj, pi, d, key))
    _, first = np.unique(key[order], return_index=True)
    sel = order[first]
    ca, cb, pi, pj, d = ca[sel], cb[sel], pi[sel], pj[sel], d[sel]
    m = np.maximum(spacing[ca], spacing[cb])
    with np.errstate(divide="ignore", invalid="ignore"):
        al = np.where(m > 0, d / np.where(m > 0, m, 1.0), np.where(d == 0, 0.0, np.inf))
    adj = al <= gamma
    return ca[adj], cb[adj], pi[adj], pj[adj], d[adj], al[adj]


def adjacency(clusters: ClusterSet, params: OhcParams, index: SpatialIndex) -> set:
    """Unordered cluster pairs ``(i, j)``, ``i < j``, whose normalised gap is at most gamma."""
    ca, cb, *_ = _closest_adjacent(clusters, params.gamma, index)
    return set(zip(ca.tolist(), cb.tolist()))


def build_proximity(clusters: ClusterSet, params: OhcParams, cloud: PointCloud,
                    index: SpatialIndex) -> ProximityGraph:
    if cloud.region is None:
        raise ValueError("cloud has no region flags; run classify_points first")
    ca, cb, pi, pj, d, al = _closest_adjacent(clusters, params.gamma, index)
    if cloud.normals is None:
        be = np.full(len(pi), 0.5)
    else:
        ni, nj = cloud.normals[pi], cloud.normals[pj]
        dot = np.abs(np.einsum("ij,ij->i", ni, nj))
        be = np.where(np.isfinite(dot), 1.0 - np.minimum(dot, 1.0), 0.5)
    ri, rj = cloud.region[pi], cloud.region[pj]
    de = np.where((ri == Region.INTERIOR) & (rj == Region.INTERIOR), 1.0,
                  np.where((ri == Region.EXTERIOR) & (rj == Region.EXTERIOR), 0.0, 0.5))
    values = np.atleast_1d(blend(al, be, de, params.lam)) if len(al) else np.empty(0)
    return ProximityGraph(clusters.n_clusters, params.sm, ca, cb, values, pi, pj, d)


def spacing_for(members: np.ndarray, index: SpatialIndex) -> float:
    try:
        return cluster_spacing(members, index)
    except Undefined:
        return float("nan")
