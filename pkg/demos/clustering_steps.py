"""
HDBSCAN one step at a time
==========================

Core distances, mutual reachability, the minimum spanning tree, the
condensed tree and excess-of-mass selection, on two small blobs and a
few scattered points.
"""

import numpy as np

from stacktopics.cluster import (
    compute_stability,
    condense,
    core_distances,
    extract,
    mst,
    mutual_reachability,
)

rng = np.random.default_rng(1)
points = np.vstack([
    rng.normal([0, 0], 0.3, size=(12, 2)),
    rng.normal([5, 1], 0.3, size=(12, 2)),
    rng.uniform(-2, 7, size=(4, 2)),
])

###############################################################################
# Distance to the 5th nearest neighbour: small inside the blobs, large for
# the scattered points at the end.

core = core_distances(points, 5)
print(np.round(core, 2))

###############################################################################
# Mutual reachability pushes sparse points away from everything else.

d = mutual_reachability(points, core)
print("plain distance 0-1:", round(float(np.linalg.norm(points[0] - points[1])), 3),
      " reachability:", round(d(0, 1), 3))

edges = mst(d)
print(len(edges), "MST edges, heaviest:", max(edges, key=lambda e: e[2]))

###############################################################################
# Condensing with min_cluster_size 5: a row is (parent, child, lambda, size).
# Children numbered >= 28 are clusters; the rest are points falling out.

tree = condense(edges, 5, len(points))
for row in tree:
    if row[1] >= len(points):
        print("cluster row", row)

stability = compute_stability(tree)
print({c: round(s, 2) for c, s in stability.items()})

clustering = extract(tree, len(points))
print("selected clusters:", clustering.selected)
print("labels:", clustering.labels)
