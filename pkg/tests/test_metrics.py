import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ohc.errors import Undefined
from ohc.metrics import Partition, completeness, correctness, score


def P(*sets, universe=None):
    return Partition(tuple(sets), universe or sum(len(s) for s in sets))


def split(n_a, n_b):
    return P(range(n_a), range(n_a, n_a + n_b))


def test_identical():
    t = split(60, 40)
    rep = score(t, t)
    assert (rep.n_com, rep.n_cor, rep.n_acc, rep.n_f1) == (1, 1, 1, 1)


def test_single_truth_cluster():
    truth = P(range(100))
    assert completeness(split(30, 70), truth) == 1.0


def test_single_result_cluster():
    assert correctness(P(range(100)), split(60, 40)) == 1.0


def test_one_vs_sixty_forty():
    rep = score(P(range(100)), split(60, 40))
    assert rep.n_com == pytest.approx(0.6, abs=1e-12)
    assert rep.n_cor == 1.0
    assert rep.n_acc == pytest.approx(0.6, abs=1e-12)
    assert rep.n_f1 == pytest.approx(0.75, abs=1e-12)


def test_one_point_swapped():
    truth = split(60, 40)
    a = set(range(60)) - {0} | {60}
    b = set(range(60, 100)) - {60} | {0}
    assert correctness(P(a, b), truth) == pytest.approx((59 / 60 + 39 / 40) / 2, abs=1e-15)


def test_relabel_invariance():
    rng = np.random.default_rng(0)
    truth = rng.integers(0, 5, 200)
    res = rng.integers(0, 7, 200)
    perm = rng.permutation(7) + 100
    a = score(Partition.from_labels(res), Partition.from_labels(truth))
    b = score(Partition.from_labels(perm[res]), Partition.from_labels(truth))
    assert a == b


def test_partial_labels_dropped():
    res = Partition.from_labels([1, 1, 2, 2, 3])
    truth = Partition.from_labels([5, 5, 6, 6, -1])
    rep = score(res, truth)
    assert rep.dropped == 1
    assert rep.n_acc == 1.0


def test_ignore_label():
    p = Partition.from_labels([0, 0, 1, 2], ignore=[0])
    assert p.clusters == (frozenset({2}), frozenset({3}))


def test_empty_guards():
    with pytest.raises(Undefined):
        completeness(Partition((), 3), P(range(3)))
    with pytest.raises(Undefined):
        correctness(P(range(3)), Partition((), 3))


def test_partition_validation():
    with pytest.raises(ValueError):
        P({0, 1}, {1, 2})
    with pytest.raises(ValueError):
        Partition(({0, 5},), 3)


labels = st.lists(st.integers(0, 5), min_size=1, max_size=60)


@settings(max_examples=100)
@given(labels, st.data())
def test_score_ranges(res, data):
    truth = data.draw(st.lists(st.integers(0, 5), min_size=len(res), max_size=len(res)))
    rep = score(Partition.from_labels(res), Partition.from_labels(truth))
    for v in (rep.n_com, rep.n_cor, rep.n_acc, rep.n_f1):
        assert 0 < v <= 1
    assert rep.n_acc == min(rep.n_com, rep.n_cor)
    assert rep.n_f1 == pytest.approx(2 * rep.n_com * rep.n_cor / (rep.n_com + rep.n_cor))


@settings(max_examples=100)
@given(labels, st.data())
def test_refinement_raises_completeness(res, data):
    n = len(res)
    truth = data.draw(st.lists(st.integers(0, 5), min_size=n, max_size=n))
    extra = data.draw(st.lists(st.integers(0, 3), min_size=n, max_size=n))
    finer = np.array(res) * 10 + np.array(extra)
    pt = Partition.from_labels(truth)
    assert completeness(Partition.from_labels(finer), pt) >= completeness(Partition.from_labels(res), pt) - 1e-12


@settings(max_examples=60)
@given(labels)
def test_contained_iff_one(res):
    """n_com = 1 exactly when each result cluster lies inside one truth cluster."""
    res = np.array(res)
    truth = res // 2
    assert completeness(Partition.from_labels(res), Partition.from_labels(truth)) == 1.0
