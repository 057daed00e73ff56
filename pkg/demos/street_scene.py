"""
A large scene, end to end
=========================

Ground removal with a grid min-height filter, voxel downsampling,
clustering of the sample and nearest-neighbour label propagation back to
every point. Ground is label 0.
"""

import tempfile
import time
from pathlib import Path

import numpy as np

from ohc import PointCloud, segment_large_scale
from ohc import io

rng = np.random.default_rng(3)

# road surface
g = np.arange(0, 20, 0.1)
x, y = np.meshgrid(g, np.arange(0, 8, 0.1), indexing="ij")
road = np.c_[x.ravel(), y.ravel(), rng.normal(scale=0.01, size=x.size)]

# poles: jittered vertical lines of rings
poles = []
for px in (3.0, 9.0, 15.0):
    z = np.arange(0.3, 4.0, 0.05)
    t = np.linspace(0, 2 * np.pi, 12, endpoint=False)
    zz, tt = np.meshgrid(z, t, indexing="ij")
    poles.append(np.c_[px + 0.08 * np.cos(tt.ravel()), 6.5 + 0.08 * np.sin(tt.ravel()), zz.ravel()])

# a box-shaped car body
u = np.arange(0, 1, 0.05)
face = np.stack(np.meshgrid(u, u, indexing="ij"), -1).reshape(-1, 2)
box = [np.c_[face[:, 0] * 4, face[:, 1] * 1.8, np.full(len(face), 1.6)]]
box += [np.c_[face[:, 0] * 4, np.full(len(face), s), 0.4 + face[:, 1] * 1.2] for s in (0.0, 1.8)]
car = np.vstack(box) + [8.0, 2.0, 0.0]

pts = np.vstack([road, *poles, car])
print(f"{len(pts)} points")

# full resolution first, then a 20% sample; the voxel sample is less regular
# than the scan lattice, so surfaces break into more pieces
for fraction in (1.0, 0.2):
    t = time.perf_counter()
    out = segment_large_scale(PointCloud(pts), fraction=fraction, cell_size=1.0, height_tol=0.2)
    labels = out.labels
    objects, counts = np.unique(labels[labels > 0], return_counts=True)
    print(f"fraction {fraction}: {time.perf_counter() - t:.1f} s, {out.ground.sum()} ground points, "
          f"{len(objects)} objects, largest {sorted(counts.tolist())[::-1][:5]}")

path = Path(tempfile.mkdtemp()) / "street.ply"
io.write_labeled_ply(path, out)
print("wrote", path)
