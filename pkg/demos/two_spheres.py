"""
Clustering two objects
======================

Two sphere surfaces separated by five times their point spacing. The run
starts with one cluster per point and stops at the first level where no
merge lowers the total matching cost.
"""

import numpy as np

from ohc import Partition, PointCloud, build_index, run, score
from ohc.proximity import cluster_spacing


def fib_sphere(n, radius=1.0, center=(0.0, 0.0, 0.0)):
    i = np.arange(n) + 0.5
    phi = np.arccos(1 - 2 * i / n)
    theta = np.pi * (1 + 5 ** 0.5) * i
    unit = np.c_[np.cos(theta) * np.sin(phi), np.sin(theta) * np.sin(phi), np.cos(phi)]
    return unit * radius + np.asarray(center)


a = fib_sphere(500)
m = cluster_spacing(np.arange(500), build_index(a))
b = fib_sphere(500, center=(2 + 5 * m, 0, 0))
pts = np.vstack([a, b])
print(f"median spacing {m:.3f}, gap {5 * m:.3f}")

clusters, dendro = run(PointCloud(pts))
for lv in dendro.levels:
    sizes = [len(g) for g in lv.groups]
    top = max(lv.heights) if lv.heights else float("nan")
    print(f"level {lv.level:2d}: {len(sizes):4d} merges, largest cycle {max(sizes, default=0)}, "
          f"max height {top:.3f} -> {lv.n_clusters} clusters")

truth = np.repeat([0, 1], 500)
print(score(Partition.from_labels(clusters.labels), Partition.from_labels(truth)))
