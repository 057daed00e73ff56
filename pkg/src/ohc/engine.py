"""Optimal hierarchical clustering driver.

Every level builds the proximity graph of the current clusters, solves the
minimum-cost perfect matching over it and merges each cycle of the
resulting permutation into one cluster. Clustering stops at the first level
whose matching is the identity.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .cloud import PointCloud, SpatialIndex, build_index, estimate_normals
from .errors import EmptyInput, NormalsUndefined
from .hull import classify_points
from .matching import MatchingResult, extract_merge_groups, matching_cost, solve_min_cost_perfect_matching
from .proximity import ClusterSet, OhcParams, ProximityGraph, build_proximity, spacing_for

log = logging.getLogger(__name__)


@dataclass
class DendrogramLevel:
    level: int
    groups: list  # merged groups of cluster ids, ids valid before this level's merge
    heights: list
    n_clusters: int  # after the merge

    def to_dict(self) -> dict:
        return {"level": self.level, "groups": [list(map(int, g)) for g in self.groups],
                "heights": [float(h) for h in self.heights], "n_clusters": int(self.n_clusters)}

    @classmethod
    def from_dict(cls, d) -> "DendrogramLevel":
        return cls(int(d["level"]), [list(map(int, g)) for g in d["groups"]],
                   [float(h) for h in d["heights"]], int(d["n_clusters"]))


@dataclass
class Dendrogram:
    n_points: int
    levels: list = field(default_factory=list)

    def __len__(self):
        return len(self.levels)

    def to_dict(self) -> dict:
        return {"n_points": int(self.n_points), "levels": [lv.to_dict() for lv in self.levels]}

    @classmethod
    def from_dict(cls, d) -> "Dendrogram":
        return cls(int(d["n_points"]), [DendrogramLevel.from_dict(lv) for lv in d["levels"]])

    def __eq__(self, other):
        return isinstance(other, Dendrogram) and self.to_dict() == other.to_dict()


@dataclass
class OhcState:
    cloud: PointCloud
    index: SpatialIndex
    clusters: ClusterSet
    params: OhcParams
    level: int = 0
    graph: ProximityGraph | None = None  # graph evaluated by the level that produced this state


def prepare_cloud(cloud: PointCloud, params: OhcParams, index: SpatialIndex | None = None) -> PointCloud:
    """Fill in normals and region flags when the cloud lacks them."""
    index = index or build_index(cloud)
    if cloud.normals is None:
        try:
            cloud = estimate_normals(cloud, params.k, index=index)
        except NormalsUndefined:
            cloud = cloud.with_normals(np.full((len(cloud), 3), np.nan))
    if cloud.region is None:
        cloud = classify_points(cloud, index, params.hull_neighbors)
    return cloud


def initialize(cloud: PointCloud, params: OhcParams | None = None,
               index: SpatialIndex | None = None) -> OhcState:
    """One singleton cluster per point."""
    if len(cloud) == 0:
        raise EmptyInput("cannot cluster an empty cloud")
    params = params or OhcParams()
    index = index or build_index(cloud)
    cloud = prepare_cloud(cloud, params, index)
    return OhcState(cloud, index, ClusterSet.singletons(index), params)


def merge_groups(clusters: ClusterSet, groups: list, index: SpatialIndex) -> ClusterSet:
    """Replace each group of cluster ids by one cluster.

    ``groups`` must partition the cluster ids and be ordered by smallest
    element, which keeps the new ids ordered by smallest point id.
    """
    group_of = np.empty(clusters.n_clusters, dtype=np.intp)
    spacing = np.empty(len(groups))
    for g, members in enumerate(groups):
        group_of[members] = g
        spacing[g] = clusters.spacing[members[0]] if len(members) == 1 else np.nan
    labels = group_of[clusters.labels]
    merged = ClusterSet(labels, spacing)
    for g, members in enumerate(groups):
        if len(members) > 1:
            spacing[g] = spacing_for(merged.members(g), index)
    return merged


def _level_record(level, result: MatchingResult, graph: ProximityGraph, n_after) -> DendrogramLevel:
    groups, heights = [], []
    sigma = result.permutation
    for g in result.merge_groups:
        if len(g) > 1:
            groups.append(list(g))
            heights.append(max(graph.entry(i, int(sigma[i])) for i in g))
    return DendrogramLevel(level, groups, heights, n_after)


def run_level(state: OhcState) -> tuple[OhcState, MatchingResult]:
    graph = build_proximity(state.clusters, state.params, state.cloud, state.index)
    result = solve_min_cost_perfect_matching(graph.cost_view())
    clusters = state.clusters
    if not result.is_identity:
        clusters = merge_groups(clusters, result.merge_groups, state.index)
    return OhcState(state.cloud, state.index, clusters, state.params, state.level + 1, graph), result


def run(cloud: PointCloud, params: OhcParams | None = None,
        index: SpatialIndex | None = None) -> tuple[ClusterSet, Dendrogram]:
    """Cluster ``cloud`` until a level performs no merge."""
    state = initialize(cloud, params, index)
    dendro = Dendrogram(len(cloud))
    while True:
        before = state.clusters.n_clusters
        state, result = run_level(state)
        dendro.levels.append(_level_record(state.level, result, state.graph, state.clusters.n_clusters))
        log.debug("level %d: %d -> %d clusters", state.level, before, state.clusters.n_clusters)
        if result.is_identity:
            return state.clusters, dendro


# -- greedy reference ---------------------------------------------------------

def greedy_pairing(graph: ProximityGraph) -> np.ndarray:
    """Permutation pairing clusters greedily by ascending dissimilarity.

    Only pairs cheaper than ``sm`` are taken; unpaired clusters map to
    themselves.
    """
    sigma = np.arange(graph.n)
    taken = np.zeros(graph.n, dtype=bool)
    for e in np.lexsort((graph.cols, graph.rows, graph.values)):
        if graph.values[e] >= graph.sm:
            break
        i, j = int(graph.rows[e]), int(graph.cols[e])
        if not taken[i] and not taken[j]:
            taken[i] = taken[j] = True
            sigma[i], sigma[j] = j, i
    return sigma


def greedy_baseline(cloud: PointCloud, params: OhcParams | None = None,
                    index: SpatialIndex | None = None) -> tuple[ClusterSet, Dendrogram]:
    """Classic agglomeration: merge the single cheapest adjacent pair per step."""
    state = initialize(cloud, params, index)
    dendro = Dendrogram(len(cloud))
    clusters = state.clusters
    level = 0
    while True:
        level += 1
        graph = build_proximity(clusters, state.params, state.cloud, state.index)
        cand = np.flatnonzero(graph.values < graph.sm)
        if len(cand) == 0:
            dendro.levels.append(DendrogramLevel(level, [], [], clusters.n_clusters))
            return clusters, dendro
        e = cand[np.lexsort((graph.cols[cand], graph.rows[cand], graph.values[cand]))[0]]
        i, j = int(graph.rows[e]), int(graph.cols[e])
        sigma = np.arange(graph.n)
        sigma[i], sigma[j] = j, i
        clusters = merge_groups(clusters, extract_merge_groups(sigma), state.index)
        dendro.levels.append(DendrogramLevel(level, [[i, j]], [float(graph.values[e])], clusters.n_clusters))


def level_costs(graph: ProximityGraph, sigma) -> float:
    return matching_cost(sigma, graph.cost_view())
