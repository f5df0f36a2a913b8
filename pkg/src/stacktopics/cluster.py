"""HDBSCAN-style density clustering.

The pipeline is: core distances -> mutual reachability -> minimum spanning
tree (Prim) -> single-linkage hierarchy -> condensed tree -> excess-of-mass
cluster selection. Neighbour search is exact and works row by row, so
memory stays linear in the number of points.
"""
from __future__ import annotations

import logging
from collections import deque
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial.distance import cdist

logger = logging.getLogger(__name__)

LAMBDA_CAP = 1e12
_BLOCK = 1024


@dataclass
class ClusterParams:
    min_cluster_size: int = 15
    min_samples: int | None = None
    metric: str = "euclidean"

    def __post_init__(self):
        if self.min_samples is None:
            self.min_samples = self.min_cluster_size
        if self.min_cluster_size < 2:
            raise ValueError("min_cluster_size must be >= 2")
        if not 1 <= self.min_samples <= self.min_cluster_size:
            raise ValueError("min_samples must be in [1, min_cluster_size]")
        if self.metric != "euclidean":
            raise ValueError("only the euclidean metric is supported")


@dataclass
class Clustering:
    """Flat clustering plus the hierarchy it was extracted from.

    ``labels`` are dense, ordered by descending cluster size, with -1 for
    outliers. ``condensed_tree`` rows are ``(parent, child, lambda, size)``;
    cluster nodes are numbered from ``n`` (the root) upwards and children
    below ``n`` are points. ``stabilities`` is keyed by tree cluster node
    and ``selected[label]`` is the tree node behind flat label ``label``.
    """

    labels: np.ndarray
    condensed_tree: list[tuple[int, int, float, int]] = field(default_factory=list)
    stabilities: dict[int, float] = field(default_factory=dict)
    selected: list[int] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)

    @property
    def n_clusters(self) -> int:
        return int(self.labels.max()) + 1 if len(self.labels) else 0

    @property
    def n_outliers(self) -> int:
        return int(np.sum(self.labels == -1))

    def to_json(self, params: ClusterParams | None = None) -> dict:
        out = {"labels": [int(x) for x in self.labels]}
        if params is not None:
            out["params"] = {
                "min_cluster_size": params.min_cluster_size,
                "min_samples": params.min_samples,
                "metric": params.metric,
            }
        out["condensed_tree"] = [[int(p), int(c), float(lam), int(s)] for p, c, lam, s in self.condensed_tree]
        out["stabilities"] = {str(k): float(v) for k, v in sorted(self.stabilities.items())}
        out["selected"] = [int(c) for c in self.selected]
        out["warnings"] = list(self.warnings)
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "Clustering":
        return cls(
            labels=np.asarray(obj["labels"], dtype=np.int64),
            condensed_tree=[(int(p), int(c), float(lam), int(s)) for p, c, lam, s in obj["condensed_tree"]],
            stabilities={int(k): float(v) for k, v in obj["stabilities"].items()},
            selected=list(obj.get("selected", [])),
            warnings=list(obj.get("warnings", [])),
        )


# ------------------------------------------------------------ distances


def core_distances(points, k: int) -> np.ndarray:
    """Distance from each point to its ``k``-th nearest other point."""
    points = np.asarray(points, dtype=np.float64)
    n = len(points)
    if not 1 <= k <= n - 1:
        raise ValueError(f"k={k} needs 1 <= k <= n-1 (n={n})")
    core = np.empty(n)
    for start in range(0, n, _BLOCK):
        block = cdist(points[start:start + _BLOCK], points)
        rows = np.arange(len(block))
        block[rows, start + rows] = np.inf
        core[start:start + len(block)] = np.partition(block, k - 1, axis=1)[:, k - 1]
    return core


class MutualReachability:
    """``d(i, j) = max(core[i], core[j], |x_i - x_j|)`` computed on demand."""

    def __init__(self, points, core):
        self.points = np.asarray(points, dtype=np.float64)
        self.core = np.asarray(core, dtype=np.float64)
        if len(self.core) != len(self.points):
            raise ValueError("core distances must align with points")

    def __len__(self):
        return len(self.points)

    def __call__(self, i: int, j: int) -> float:
        d = float(np.linalg.norm(self.points[i] - self.points[j]))
        return max(self.core[i], self.core[j], d)

    def row(self, i: int) -> np.ndarray:
        d = cdist(self.points[i:i + 1], self.points)[0]
        return np.maximum(np.maximum(d, self.core), self.core[i])

    def matrix(self) -> np.ndarray:
        return np.stack([self.row(i) for i in range(len(self))])


def mutual_reachability(points, core) -> MutualReachability:
    return MutualReachability(points, core)


def mst(d_mreach) -> list[tuple[int, int, float]]:
    """Prim's minimum spanning tree over the complete graph.

    ``d_mreach`` is a :class:`MutualReachability` or a square distance
    matrix. Edges come back as ``(i, j, weight)`` with ``i < j`` in the order
    they join the tree. Equal weights are resolved towards the
    lexicographically smaller ``(i, j)`` pair.
    """
    if isinstance(d_mreach, MutualReachability):
        n, row = len(d_mreach), d_mreach.row
    else:
        matrix = np.asarray(d_mreach, dtype=np.float64)
        n, row = len(matrix), matrix.__getitem__
    if n < 2:
        raise ValueError("mst needs at least two points")

    idx = np.arange(n)
    in_tree = np.zeros(n, dtype=bool)
    in_tree[0] = True
    best = np.array(row(0), dtype=np.float64)
    best[0] = np.inf
    src = np.zeros(n, dtype=np.int64)
    edges = []
    for _ in range(n - 1):
        open_best = np.where(in_tree, np.inf, best)
        w = open_best.min()
        ties = np.flatnonzero(open_best == w)
        if len(ties) > 1:
            lo = np.minimum(src[ties], ties)
            hi = np.maximum(src[ties], ties)
            v = ties[np.lexsort((hi, lo))[0]]
        else:
            v = ties[0]
        edges.append((int(min(src[v], v)), int(max(src[v], v)), float(w)))
        in_tree[v] = True

        new = np.asarray(row(v), dtype=np.float64)
        lo_new, hi_new = np.minimum(idx, v), np.maximum(idx, v)
        lo_old, hi_old = np.minimum(idx, src), np.maximum(idx, src)
        smaller_pair = (lo_new < lo_old) | ((lo_new == lo_old) & (hi_new < hi_old))
        update = ~in_tree & ((new < best) | ((new == best) & smaller_pair))
        best[update] = new[update]
        src[update] = v
    return edges


# ------------------------------------------------------------ hierarchy


def single_linkage(edges, n: int) -> list[tuple[list[int], float, int]]:
    """Merge MST edges by ascending weight into a merge tree.

    Edges of equal weight are merged together, so a node may have more than
    two children. Node ``n + r`` is entry ``r`` of the result and holds
    ``(children, weight, size)``. Because every MST of a graph yields the
    same components at each weight threshold, the tree does not depend on
    point order or on which tied MST was found.
    """
    parent = list(range(n))
    size = [1] * n
    nodes: list[tuple[list[int], float, int]] = []

    def find(x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    ordered = sorted(edges, key=lambda e: (e[2], e[0], e[1]))
    start = 0
    while start < len(ordered):
        w = ordered[start][2]
        stop = start
        while stop < len(ordered) and ordered[stop][2] == w:
            stop += 1
        # group the current roots touched at this weight into merge sets
        group = {}

        def gfind(x):
            while group.setdefault(x, x) != x:
                x = group[x]
            return x

        for i, j, _ in ordered[start:stop]:
            a, b = gfind(find(i)), gfind(find(j))
            if a != b:
                group[max(a, b)] = min(a, b)
        members = {}
        for r in list(group):
            members.setdefault(gfind(r), []).append(r)
        for _, children in sorted(members.items()):
            node = n + len(nodes)
            parent.append(node)
            total = sum(size[c] for c in children)
            size.append(total)
            for c in children:
                parent[c] = node
            nodes.append((sorted(children), w, total))
        start = stop
    return nodes


def _lambda(weight: float) -> float:
    return LAMBDA_CAP if weight <= 0 else min(1.0 / weight, LAMBDA_CAP)


def condense(edges, min_cluster_size: int, n: int | None = None) -> list[tuple[int, int, float, int]]:
    """Condensed cluster tree of an MST.

    Walking the merge tree from the top, a split where at least two parts
    hold ``min_cluster_size`` points creates one child cluster per large
    part; points in the small parts fall out of the current cluster at
    ``lambda = 1 / weight``.
    """
    if n is None:
        n = len(edges) + 1
    if n == 1:
        return []
    nodes = single_linkage(edges, n)
    if not nodes:
        return []
    root = n + len(nodes) - 1

    # smallest point index under each node; children precede their parents
    first = list(range(n)) + [0] * len(nodes)
    for r, (children, _, _) in enumerate(nodes):
        first[n + r] = min(first[c] for c in children)

    def count(node):
        return 1 if node < n else nodes[node - n][2]

    def points_under(node):
        out, queue = [], deque([node])
        while queue:
            x = queue.popleft()
            if x < n:
                out.append(x)
            else:
                queue.extend(nodes[x - n][0])
        return sorted(out)

    relabel = {root: n}
    next_label = n + 1
    tree = []
    queue = deque([root])
    while queue:
        node = queue.popleft()
        if node < n:
            continue
        children, weight, _ = nodes[node - n]
        lam = _lambda(weight)
        parent = relabel[node]
        big = [c for c in children if count(c) >= min_cluster_size]
        small = [c for c in children if count(c) < min_cluster_size]
        fallen = sorted(p for c in small for p in points_under(c))
        if len(big) >= 2:
            for child in sorted(big, key=lambda c: first[c]):
                relabel[child] = next_label
                tree.append((parent, next_label, lam, count(child)))
                next_label += 1
                queue.append(child)
        elif big:
            relabel[big[0]] = parent
            queue.append(big[0])
        tree.extend((parent, p, lam, 1) for p in fallen)
    return tree


def compute_stability(tree) -> dict[int, float]:
    """``stability(c) = sum over rows leaving c of (lambda - birth(c)) * size``."""
    if not tree:
        return {}
    root = min(p for p, _, _, _ in tree)
    birth = {root: 0.0}
    for p, c, lam, size in tree:
        if c >= root:
            birth[c] = lam
    stability = {c: 0.0 for c in birth}
    for p, c, lam, size in tree:
        stability[p] += (lam - birth[p]) * size
    return stability


def _cluster_children(tree):
    children = {}
    for p, c, _, _ in tree:
        children.setdefault(p, [])
    root = min(children) if children else None
    for p, c, _, _ in tree:
        if root is not None and c >= root:
            children[p].append(c)
            children.setdefault(c, [])
    return children


def select_clusters(tree, stability: dict[int, float]) -> list[int]:
    """Excess-of-mass selection, bottom-up.

    A cluster is kept when its own stability is at least the summed best
    stability of its sub-clusters. The root is only a candidate when it has
    no sub-clusters at all.
    """
    children = _cluster_children(tree)
    if not children:
        return []
    root = min(children)
    if not children[root]:
        return [root]
    best = dict(stability)
    keep = {}
    # Child clusters always carry larger node ids than their parents.
    for node in sorted(children, reverse=True):
        if node == root:
            continue
        sub = sum(best[c] for c in children[node])
        if sub > best[node]:
            keep[node] = False
            best[node] = sub
        else:
            keep[node] = True
            stack = list(children[node])
            while stack:
                d = stack.pop()
                keep[d] = False
                stack.extend(children[d])
    return sorted(c for c, k in keep.items() if k)


def label_points(tree, selected: Sequence[int], n: int) -> np.ndarray:
    """Assign each point to its nearest selected ancestor cluster, else -1."""
    cluster_parent = {}
    point_parent = {}
    for p, c, _, _ in tree:
        if c >= n:
            cluster_parent[c] = p
        else:
            point_parent[c] = p
    chosen = set(selected)
    raw = np.full(n, -1, dtype=np.int64)
    for point, cluster in point_parent.items():
        node = cluster
        while node is not None and node not in chosen:
            node = cluster_parent.get(node)
        if node is not None:
            raw[point] = node
    return raw


def _dense_by_size(raw: np.ndarray) -> tuple[np.ndarray, list[int]]:
    nodes = [c for c in np.unique(raw) if c >= 0]
    nodes.sort(key=lambda c: (-int(np.sum(raw == c)), int(np.flatnonzero(raw == c)[0])))
    labels = np.full(len(raw), -1, dtype=np.int64)
    for new, node in enumerate(nodes):
        labels[raw == node] = new
    return labels, [int(c) for c in nodes]


def extract(condensed_tree, n: int | None = None) -> Clustering:
    """Flat clustering from a condensed tree by excess of mass."""
    tree = [(int(p), int(c), float(lam), int(s)) for p, c, lam, s in condensed_tree]
    if n is None:
        n = min(p for p, _, _, _ in tree) if tree else 0
    stability = compute_stability(tree)
    selected = select_clusters(tree, stability)
    labels, order = _dense_by_size(label_points(tree, selected, n))
    return Clustering(labels=labels, condensed_tree=tree, stabilities=stability, selected=order)


def cluster_points(points, params: ClusterParams) -> Clustering:
    """Run the full HDBSCAN chain on a point matrix."""
    points = np.asarray(points, dtype=np.float64)
    n = len(points)
    if n < params.min_cluster_size:
        msg = f"only {n} points for min_cluster_size {params.min_cluster_size}; all labelled outliers"
        logger.warning(msg)
        return Clustering(labels=np.full(n, -1, dtype=np.int64), warnings=[msg])
    k = min(params.min_samples, n - 1)
    core = core_distances(points, k)
    edges = mst(mutual_reachability(points, core))
    return extract(condense(edges, params.min_cluster_size, n), n)


def cluster_documents(vectors, params: ClusterParams) -> Clustering:
    """Cluster document vectors, preferring their reduced representation.

    Documents whose full vector is all zeros carry no content and are
    labelled -1 before clustering.
    """
    vectors = list(vectors)
    keep = [i for i, v in enumerate(vectors) if np.any(v.full)]
    points = np.stack([v.reduced if v.reduced is not None else v.full for v in vectors]) if vectors else np.zeros((0, 1))
    inner = cluster_points(points[keep], params)
    labels = np.full(len(vectors), -1, dtype=np.int64)
    labels[keep] = inner.labels
    inner.labels = labels
    return inner
