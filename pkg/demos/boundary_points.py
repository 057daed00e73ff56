"""
Interior and exterior points
============================

Every point gets a flag from a local tetrahedron test: a point that falls
strictly inside the tetrahedron spanned by the neighbourhood of some other
point is interior, everything else is exterior. Exterior points sit on
object boundaries and push the dissimilarity toward the normal term.
"""

import tempfile
from pathlib import Path

import numpy as np

from ohc import PointCloud, Region, build_index, classify_points
from ohc import io

rng = np.random.default_rng(0)

# a solid ball: uniform in volume
p = rng.normal(size=(3000, 3))
p *= (rng.random(3000) ** (1 / 3) / np.linalg.norm(p, axis=1))[:, None]
cloud = classify_points(PointCloud(p), build_index(p), k=40)

r = np.linalg.norm(p, axis=1)
interior = cloud.region == Region.INTERIOR
print(f"interior: {interior.sum()} of {len(p)} points")

# the fraction of interior points drops toward the surface
edges = np.linspace(0, 1, 6)
for lo, hi in zip(edges[:-1], edges[1:]):
    shell = (r >= lo) & (r < hi)
    print(f"  radius {lo:.1f}-{hi:.1f}: {interior[shell].mean():5.1%} interior")

# red = exterior, blue = interior; open in any PLY viewer
out = Path(tempfile.mkdtemp()) / "ball_regions.ply"
io.write_region_ply(out, cloud)
print("wrote", out)
