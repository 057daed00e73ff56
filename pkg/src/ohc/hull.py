"""Interior/exterior labelling with local tetrahedral hulls.

Each test vertex ``v0`` gets a tetrahedron ``v1..v4`` picked from its
neighbourhood; ``v0 - v1`` is expressed in the basis of the three edges
leaving ``v1`` and the coefficients decide containment.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .cloud import PointCloud, Region, SpatialIndex, build_index
from .errors import DegenerateTetrahedron

EPS = 1e-9
SING_TOL = 1e-9


@dataclass(frozen=True)
class HullVertices:
    v0: np.ndarray
    v1: np.ndarray
    v2: np.ndarray
    v3: np.ndarray
    v4: np.ndarray
    ids: tuple | None = None  # ids of v1..v4 when selected from a cloud

    @property
    def basis(self) -> np.ndarray:
        """Columns g1, g2, g3."""
        return np.column_stack([self.v2 - self.v1, self.v3 - self.v1, self.v4 - self.v1])

    @property
    def scale(self) -> float:
        verts = np.array([self.v1, self.v2, self.v3, self.v4])
        diff = verts[:, None, :] - verts[None, :, :]
        return float(np.sqrt((diff ** 2).sum(-1)).max())


@dataclass(frozen=True)
class BarycentricCoeffs:
    u: float
    v: float
    w: float

    def __iter__(self):
        return iter((self.u, self.v, self.w))


def _check_basis(h: HullVertices) -> np.ndarray:
    g = h.basis
    scale = h.scale
    if scale == 0 or abs(np.linalg.det(g)) <= SING_TOL * scale ** 3:
        raise DegenerateTetrahedron("tetrahedron basis is singular")
    return g


def barycentric_coeffs(h: HullVertices) -> BarycentricCoeffs:
    """Solve ``v0 - v1 = u*g1 + v*g2 + w*g3``."""
    g = _check_basis(h)
    u, v, w = np.linalg.solve(g, np.asarray(h.v0, dtype=float) - h.v1)
    return BarycentricCoeffs(float(u), float(v), float(w))


def is_inside(coeffs, eps: float = EPS) -> bool:
    u, v, w = coeffs
    return bool(u >= -eps and v >= -eps and w >= -eps and u + v + w < 1 - eps)


def _strictly_inside(coeffs: np.ndarray, eps: float = EPS) -> np.ndarray:
    # face points (any coefficient within eps of a face) are excluded
    return np.all(coeffs > eps, axis=-1) & (coeffs.sum(axis=-1) < 1 - eps)


def _argmax_lowest_id(score: np.ndarray, ids: np.ndarray) -> int:
    best = np.flatnonzero(score == score.max())
    return int(best[np.argmin(ids[best])])


def select_hull_vertices(v0, neighbors, ids=None) -> HullVertices:
    """Pick the tetrahedron used to test ``v0``.

    v1 is the neighbour furthest from v0, v2 has the largest projection of
    ``v2 - v1`` onto the ``v0 - v1`` direction, v3 is furthest from line
    (v1, v2) and v4 furthest from plane (v1, v2, v3). Ties go to the lowest id.
    """
    v0 = np.asarray(v0, dtype=float)
    pts = np.asarray(neighbors, dtype=float).reshape(-1, 3)
    ids = np.arange(len(pts)) if ids is None else np.asarray(ids)
    if len(pts) < 4:
        raise DegenerateTetrahedron("need at least 4 neighbours")

    avail = np.ones(len(pts), dtype=bool)

    def pick(score):
        s = np.where(avail, score, -np.inf)
        j = _argmax_lowest_id(s, ids)
        avail[j] = False
        return j

    i1 = pick(np.linalg.norm(pts - v0, axis=1))
    v1 = pts[i1]
    g0 = v0 - v1
    g0n = np.linalg.norm(g0)
    if g0n == 0:
        raise DegenerateTetrahedron("all neighbours coincide with the test vertex")
    i2 = pick((pts - v1) @ (g0 / g0n))
    v2 = pts[i2]
    e = v2 - v1
    en = np.linalg.norm(e)
    if en == 0:
        raise DegenerateTetrahedron("v1 and v2 coincide")
    line_dist = np.linalg.norm(np.cross(pts - v1, e / en), axis=1)
    i3 = pick(line_dist)
    if line_dist[i3] == 0:
        raise DegenerateTetrahedron("neighbourhood is collinear")
    v3 = pts[i3]
    nrm = np.cross(e, v3 - v1)
    nrm /= np.linalg.norm(nrm)
    plane_dist = np.abs((pts - v1) @ nrm)
    i4 = pick(plane_dist)
    if plane_dist[i4] == 0:
        raise DegenerateTetrahedron("neighbourhood is coplanar")
    h = HullVertices(v0, v1, v2, v3, pts[i4],
                     ids=tuple(int(ids[j]) for j in (i1, i2, i3, i4)))
    _check_basis(h)
    return h


def classify_points(cloud: PointCloud, index: SpatialIndex | None = None, k: int = 40) -> PointCloud:
    """Label every point interior or exterior.

    Points are visited in ascending id. A point not yet interior becomes the
    test vertex of a hull built from its ``k`` nearest neighbours, and every
    point of that neighbourhood (itself included) lying strictly inside the
    hull is marked interior. Points never marked end up exterior. Degenerate
    neighbourhoods mark nothing.
    """
    n = len(cloud)
    if k < 4:
        raise ValueError("k must be >= 4")
    region = np.full(n, Region.EXTERIOR, dtype=np.int8)
    if n < 5:
        return cloud.with_region(region)
    index = index or build_index(cloud)
    pts = cloud.points
    nbrs = index.knn_all(k + 1)
    interior = np.zeros(n, dtype=bool)
    for i in range(n):
        if interior[i]:
            continue
        row = nbrs[i]
        row = row[row != i][:k]
        try:
            h = select_hull_vertices(pts[i], pts[row], ids=row)
        except DegenerateTetrahedron:
            continue
        cand = np.concatenate(([i], row))
        coeffs = np.linalg.solve(h.basis, (pts[cand] - h.v1).T).T
        interior[cand[_strictly_inside(coeffs)]] = True
    region[interior] = Region.INTERIOR
    return cloud.with_region(region)
