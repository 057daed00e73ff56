"""Acceptance suite: one test per headline criterion.

Each test reports PASS/FAIL in the "acceptance criteria" section printed at
the end of the pytest run.
"""

import itertools
import time

import numpy as np

from conftest import brute_force_assignment, fib_sphere, partition_sets, random_rotation
from ohc.cloud import PointCloud, build_index
from ohc.engine import greedy_pairing, initialize, level_costs, run, run_level
from ohc.hull import HullVertices, barycentric_coeffs, is_inside
from ohc.matching import BipartiteCostView, extract_merge_groups, solve_min_cost_perfect_matching
from ohc.metrics import Partition, score
from ohc.pipeline import LabeledCloud, propagate_labels, segment_large_scale
from ohc.proximity import OhcParams, cluster_spacing


def jittered_scene(rng, n=300):
    """A few spheres and planar patches at random poses with slight noise."""
    k = int(rng.integers(2, 5))
    sizes = np.full(k, n // k)
    sizes[: n - sizes.sum()] += 1
    parts = []
    for s in sizes:
        c = rng.uniform(-6, 6, 3)
        if rng.random() < 0.5:
            p = fib_sphere(s, rng.uniform(0.8, 1.5), c)
        else:
            side = int(np.ceil(np.sqrt(s)))
            g = np.stack(np.meshgrid(np.arange(side), np.arange(side), indexing="ij"), -1).reshape(-1, 2)[:s]
            p = np.c_[g * 0.3, np.zeros(s)] @ random_rotation(rng).T + c
        parts.append(p + rng.normal(scale=0.01, size=p.shape))
    return np.vstack(parts)


def test_matching_optimality(criterion):
    rng = np.random.default_rng(2024)
    solve_time, checked = 0.0, 0
    for _ in range(200):
        n = int(rng.integers(3, 9))
        # costs in tenths, held as integers so every comparison is exact
        m = np.full((n, n), np.inf)
        for i, j in itertools.combinations(range(n), 2):
            if rng.random() < 0.7:
                m[i, j] = m[j, i] = float(rng.integers(0, 11))
        np.fill_diagonal(m, 4.0)  # SM = 0.4
        best, _ = brute_force_assignment(m)
        t = time.perf_counter()
        res = solve_min_cost_perfect_matching(BipartiteCostView.from_dense(m))
        real = solve_min_cost_perfect_matching(BipartiteCostView.from_dense(m / 10))
        solve_time += time.perf_counter() - t
        assert res.total_cost == best
        assert abs(real.total_cost - best / 10) <= 1e-12
        checked += 1
    assert solve_time < 5.0
    criterion(f"{checked} instances, solver {solve_time:.2f} s")


def test_cycle_semantics(criterion):
    # clusters c1..c6 are ids 0..5
    assert extract_merge_groups([0, 2, 3, 1, 5, 4]) == [[0], [1, 2, 3], [4, 5]]
    assert extract_merge_groups([1, 0, 3, 2, 5, 4]) == [[0, 1], [2, 3], [4, 5]]
    assert extract_merge_groups([0, 1, 2, 3, 4, 5]) == [[0], [1], [2], [3], [4], [5]]
    criterion()


def _face_oracle(tet, p):
    """Barycentric weights from signed volumes of the four sub-tetrahedra."""
    def vol(a, b, c, d):
        return np.dot(np.cross(b - a, c - a), d - a)

    total = vol(*tet)
    w = [vol(p, tet[1], tet[2], tet[3]), vol(tet[0], p, tet[2], tet[3]),
         vol(tet[0], tet[1], p, tet[3]), vol(tet[0], tet[1], tet[2], p)]
    return np.array(w) / total


def test_hull_oracle(criterion):
    rng = np.random.default_rng(77)
    agree = banded = degenerate = 0
    for _ in range(10_000):
        tet = rng.normal(size=(4, 3))
        if rng.random() < 0.5:
            p = rng.dirichlet(np.ones(4) * 0.7) @ tet + rng.normal(scale=0.05, size=3)
        else:
            p = rng.uniform(-2, 2, 3)
        try:
            coeffs = barycentric_coeffs(HullVertices(p, *tet))
        except ValueError:
            degenerate += 1
            continue
        w = _face_oracle(tet, p)
        if np.min(np.abs(w)) <= 1e-9:
            banded += 1
            continue
        agree += is_inside(coeffs) == bool(np.all(w > 0))
    scored = 10_000 - banded - degenerate
    assert agree == scored
    criterion(f"{agree}/{scored} agree, {banded} in band, {degenerate} degenerate")


def test_median_spacing_example(criterion):
    idx = build_index(np.array([[0, 0, 0], [1, 0, 0], [3, 0, 0]], float))
    assert cluster_spacing([0, 1, 2], idx) == 1.0
    criterion()


def test_toy_convergence(criterion):
    toy = np.array([[0, 0, 0], [1, 0, 0], [10, 0, 0], [11, 0, 0], [5, 8, 0], [6, 8, 0]], float)
    clusters, dendro = run(PointCloud(toy))
    assert clusters.n_clusters == 3
    assert partition_sets(clusters.labels) == {frozenset({0, 1}), frozenset({2, 3}), frozenset({4, 5})}
    assert len(dendro) <= 3
    criterion(f"{len(dendro)} levels")


def test_two_object_scene(criterion):
    a = fib_sphere(500)
    m = cluster_spacing(np.arange(500), build_index(a))
    b = fib_sphere(500, center=(2.0 + 5 * m, 0, 0))  # surface gap = 5 m
    pts = np.vstack([a, b])
    clusters, _ = run(PointCloud(pts), OhcParams(lam=4, sm=0.4, gamma=5))
    truth = np.repeat([0, 1], 500)
    rep = score(Partition.from_labels(clusters.labels), Partition.from_labels(truth))
    assert clusters.n_clusters == 2
    assert rep.n_acc == 1.0
    criterion(f"m = {m:.4f}")


def test_metric_guards(criterion):
    split = Partition((range(60), range(60, 100)), 100)
    whole = Partition((range(100),), 100)
    assert score(split, whole).n_com == 1.0
    rep = score(whole, split)
    assert rep.n_cor == 1.0
    assert abs(rep.n_acc - 0.6) <= 1e-12
    assert abs(rep.n_f1 - 0.75) <= 1e-12
    criterion()


def test_similarity_invariance(criterion):
    for seed in range(10):
        rng = np.random.default_rng(seed)
        pts = jittered_scene(rng)
        rot = random_rotation(rng)
        a, _ = run(PointCloud(pts))
        b, _ = run(PointCloud(1000.0 * pts @ rot.T))
        assert partition_sets(a.labels) == partition_sets(b.labels), f"scene {seed}"
    criterion("10 scenes")


def test_level_optimality_vs_greedy(criterion):
    levels = 0
    for seed in range(20):
        rng = np.random.default_rng(100 + seed)
        pts = jittered_scene(rng, 200) if seed % 2 else rng.random((200, 3)) * [8, 8, 1]
        state = initialize(PointCloud(pts))
        while True:
            state, res = run_level(state)
            g = state.graph
            assert res.total_cost <= level_costs(g, greedy_pairing(g)) + 1e-12
            levels += 1
            if res.is_identity:
                break
    criterion(f"{levels} levels over 20 scenes")


def test_pipeline_degeneracy(criterion):
    rng = np.random.default_rng(5)
    pts = jittered_scene(rng, 300)
    out = segment_large_scale(PointCloud(pts), fraction=1.0, remove_ground=False)
    clusters, _ = run(PointCloud(pts))
    assert not out.ground.any()
    assert np.array_equal(out.labels, clusters.labels + 1)

    src = rng.random((300, 3))
    lab = rng.integers(1, 12, 300)
    queries = rng.random((500, 3))
    full = PointCloud(np.vstack([src, queries]))
    got = propagate_labels(full, LabeledCloud(PointCloud(src), lab), np.arange(300)).labels[300:]
    d = np.linalg.norm(queries[:, None] - src[None], axis=2)
    expect = np.array([lab[d[i] == d[i].min()].min() for i in range(500)])
    assert np.array_equal(got, expect)
    criterion()


def test_desk_scale_runtime(criterion):
    rng = np.random.default_rng(9)
    spheres = [fib_sphere(1000, 1.0, c) for c in ((0, 0, 1.2), (3, 0, 1.2), (0, 3, 1.2))]
    g = np.arange(0, 6, 0.12)[:45]
    x, y = np.meshgrid(g, g, indexing="ij")
    plane = np.c_[x.ravel(), y.ravel(), rng.normal(scale=0.005, size=x.size)][:2000]
    pts = np.vstack(spheres + [plane])
    assert len(pts) == 5000
    t = time.perf_counter()
    clusters, dendro = run(PointCloud(pts))
    elapsed = time.perf_counter() - t
    assert elapsed < 60
    criterion(f"{elapsed:.1f} s, {clusters.n_clusters} clusters, {len(dendro)} levels")
