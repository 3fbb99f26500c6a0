"""Exploration over a solved embedding: exact k-nearest / k-farthest queries
(median-split tree with an exhaustive-scan reference), k-means clustering for
visualization, and pixel-diff redundancy pruning.

The tree is a performance layer only: every query answer is required to be
identical to the exhaustive scan, including the (distance, id) tie rule, so
both paths compute distances through the same vectorized routine.
"""

from __future__ import annotations

from bisect import insort
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import kernels
from .errors import DataError
from .plans import Dataset, Raster, rasterize
from .solver import Embedding


def euclidean_distances(points: np.ndarray, query: np.ndarray) -> np.ndarray:
    """Distances from every row of `points` to `query`.

    Single shared code path for the scan and the tree so candidate
    distances are bit-identical on both sides.
    """
    diffs = points - query
    return np.sqrt(np.einsum("nd,nd->n", diffs, diffs))


class _Node:
    __slots__ = ("index", "left", "right", "lo", "hi")

    def __init__(self, index, left, right, lo, hi):
        self.index = index
        self.left = left
        self.right = right
        self.lo = lo
        self.hi = hi


class SpatialIndex:
    """Balanced median-split space-partitioning tree over (coordinate, id)."""

    def __init__(self, ids, points: np.ndarray):
        order = np.argsort(np.asarray(ids, dtype=object), kind="stable")
        self.ids = tuple(np.asarray(ids, dtype=object)[order])
        points = np.asarray(points, dtype=float)
        if points.ndim != 2 or points.shape[0] != len(self.ids):
            raise DataError("points must be (len(ids), d)")
        self.points = points[order].copy()
        self.points.flags.writeable = False
        self.dim = self.points.shape[1]
        self._root = self._build(list(range(len(self.ids))), 0)

    def __len__(self) -> int:
        return len(self.ids)

    def _build(self, indices: list[int], depth: int):
        if not indices:
            return None
        axis = depth % self.dim
        indices.sort(key=lambda t: (self.points[t, axis], self.ids[t]))
        mid = len(indices) // 2
        left = self._build(indices[:mid], depth + 1)
        right = self._build(indices[mid + 1:], depth + 1)
        own = self.points[indices[mid]]
        lo = own.copy()
        hi = own.copy()
        for child in (left, right):
            if child is not None:
                np.minimum(lo, child.lo, out=lo)
                np.maximum(hi, child.hi, out=hi)
        return _Node(indices[mid], left, right, lo, hi)

    def _box_near(self, node: _Node, query: np.ndarray) -> float:
        clamped = np.maximum(0.0, np.maximum(node.lo - query, query - node.hi))
        return float(euclidean_distances(clamped[None, :], np.zeros(self.dim))[0])

    def _box_far(self, node: _Node, query: np.ndarray) -> float:
        spread = np.maximum(np.abs(query - node.lo), np.abs(node.hi - query))
        return float(euclidean_distances(spread[None, :], np.zeros(self.dim))[0])

    def _query(self, query: np.ndarray, k: int, exclude: str | None, farthest: bool):
        if k < 1:
            raise DataError("k must be >= 1")
        query = np.asarray(query, dtype=float)
        if query.shape != (self.dim,):
            raise DataError(f"query dimension {query.shape} does not match index dim {self.dim}")
        # Sort keys: (dist, id) ascending for nearest, (-dist, id) for farthest.
        best: list[tuple[float, str]] = []

        def consider(index: int):
            pid = self.ids[index]
            if pid == exclude:
                return
            dist = float(euclidean_distances(self.points[index:index + 1], query)[0])
            key = (-dist, pid) if farthest else (dist, pid)
            if len(best) < k:
                insort(best, key)
            elif key < best[-1]:
                insort(best, key)
                best.pop()

        def visit(node):
            if node is None:
                return
            if len(best) == k:
                # Equality descends: an equal-distance candidate can still
                # win its tie on id.
                if farthest:
                    if self._box_far(node, query) < -best[-1][0]:
                        return
                elif self._box_near(node, query) > best[-1][0]:
                    return
            consider(node.index)
            if node.left is not None and node.right is not None:
                if farthest:
                    first, second = node.left, node.right
                    if self._box_far(node.right, query) > self._box_far(node.left, query):
                        first, second = node.right, node.left
                else:
                    first, second = node.left, node.right
                    if self._box_near(node.right, query) < self._box_near(node.left, query):
                        first, second = node.right, node.left
                visit(first)
                visit(second)
            else:
                visit(node.left)
                visit(node.right)

        visit(self._root)
        if farthest:
            return [(pid, -negdist) for negdist, pid in best]
        return [(pid, dist) for dist, pid in best]


def build_index(embedding: Embedding) -> SpatialIndex:
    if len(embedding) == 0:
        raise DataError("cannot index an empty embedding")
    return SpatialIndex(embedding.ids, embedding.matrix())


def knn(index: SpatialIndex, query, k: int, exclude: str | None = None):
    """k ids nearest to `query`, ascending by (distance, id)."""
    return index._query(query, k, exclude, farthest=False)


def kfarthest(index: SpatialIndex, query, k: int, exclude: str | None = None):
    """k ids farthest from `query`, descending distance, ties by id."""
    return index._query(query, k, exclude, farthest=True)


def exhaustive_knn(ids, points: np.ndarray, query, k: int,
                   exclude: str | None = None, farthest: bool = False):
    """Reference linear scan; the tree must match it exactly."""
    if k < 1:
        raise DataError("k must be >= 1")
    ids = list(ids)
    points = np.asarray(points, dtype=float)
    query = np.asarray(query, dtype=float)
    if query.shape != (points.shape[1],):
        raise DataError("query dimension mismatch")
    order = np.argsort(np.asarray(ids, dtype=object), kind="stable")
    ids_sorted = [ids[i] for i in order]
    dists = euclidean_distances(points[order], query)
    ranking = np.argsort(-dists if farthest else dists, kind="stable")
    out = []
    for pos in ranking:
        pid = ids_sorted[pos]
        if pid == exclude:
            continue
        out.append((pid, float(dists[pos])))
        if len(out) == k:
            break
    return out


@dataclass(frozen=True)
class ClusterAssignment:
    k: int
    labels: dict[str, int]
    centroids: np.ndarray


def kmeans(embedding: Embedding, k: int, seed: int = 0,
           max_iters: int = 100) -> ClusterAssignment:
    """Lloyd iteration with greedy farthest-point seeding.

    The first centroid is drawn uniformly with the seeded generator; each
    further centroid is the point farthest from its nearest centroid so
    far. Empty clusters are re-seeded with the point farthest from its own
    centroid. Stops at a label fixpoint or max_iters; centroids are
    recomputed from the final labels so each equals its members' mean.
    """
    n = len(embedding)
    if not (1 <= k <= n):
        raise DataError(f"k must be in [1, {n}], got {k}")
    ids = tuple(sorted(embedding.ids))
    points = embedding.matrix(ids)
    rng = np.random.default_rng(seed)

    chosen = [int(rng.integers(n))]
    nearest_sq = np.sum((points - points[chosen[0]]) ** 2, axis=1)
    while len(chosen) < k:
        nxt = int(np.argmax(nearest_sq))
        chosen.append(nxt)
        nearest_sq = np.minimum(nearest_sq, np.sum((points - points[nxt]) ** 2, axis=1))
    centroids = points[chosen].astype(float)

    labels = np.full(n, -1, dtype=int)
    for _ in range(max_iters):
        sq = np.sum((points[:, None, :] - centroids[None, :, :]) ** 2, axis=2)
        new_labels = np.argmin(sq, axis=1)
        for cluster in range(k):
            if np.any(new_labels == cluster):
                continue
            # Re-seed with the point farthest from its centroid, stealing
            # only from clusters that keep at least one member.
            own_sq = sq[np.arange(n), new_labels]
            counts = np.bincount(new_labels, minlength=k)
            candidates = np.where(counts[new_labels] >= 2, own_sq, -np.inf)
            new_labels[int(np.argmax(candidates))] = cluster
        if np.array_equal(new_labels, labels):
            break
        labels = new_labels
        for cluster in range(k):
            centroids[cluster] = points[labels == cluster].mean(axis=0)
    for cluster in range(k):
        centroids[cluster] = points[labels == cluster].mean(axis=0)
    return ClusterAssignment(k, {pid: int(labels[i]) for i, pid in enumerate(ids)}, centroids)


def within_cluster_ss(assignment: ClusterAssignment, embedding: Embedding) -> float:
    total = 0.0
    for pid, label in assignment.labels.items():
        diff = embedding[pid] - assignment.centroids[label]
        total += float(diff @ diff)
    return total


def pixel_diff(a: Raster, b: Raster) -> int:
    """Count of cells whose category labels differ."""
    if a.resolution != b.resolution:
        raise DataError(f"raster resolution mismatch: {a.resolution} vs {b.resolution}")
    return int(kernels.pixel_diff(a.cells, b.cells))


@dataclass(frozen=True)
class RedundancyGroup:
    representative: str
    members: tuple[str, ...]          # join order; representative first
    rep_diffs: tuple[int, ...]        # pixel diff of each member to the representative
    max_pairwise_diff: int


def prune_redundant(dataset: Dataset, threshold: int = 50,
                    resolution: int = 256) -> list[RedundancyGroup]:
    """Greedy single-pass grouping in dataset order.

    Each plan joins the first existing group whose representative is within
    `threshold` differing cells, else founds its own group. Only groups
    with two or more members are returned.
    """
    if threshold < 0:
        raise DataError("threshold must be >= 0")
    groups: list[dict] = []
    for plan in dataset:
        raster = rasterize(plan, resolution)
        for group in groups:
            diff = int(kernels.pixel_diff(raster.cells, group["rep_cells"]))
            if diff <= threshold:
                group["members"].append(plan.id)
                group["diffs"].append(diff)
                group["cells"].append(raster.cells)
                break
        else:
            groups.append({
                "rep": plan.id,
                "rep_cells": raster.cells,
                "members": [plan.id],
                "diffs": [0],
                "cells": [raster.cells],
            })
    out = []
    for group in groups:
        if len(group["members"]) < 2:
            continue
        cells = group["cells"]
        max_pairwise = 0
        for a in range(len(cells)):
            for b in range(a + 1, len(cells)):
                max_pairwise = max(max_pairwise, int(kernels.pixel_diff(cells[a], cells[b])))
        out.append(RedundancyGroup(
            representative=group["rep"],
            members=tuple(group["members"]),
            rep_diffs=tuple(group["diffs"]),
            max_pairwise_diff=max_pairwise,
        ))
    return out


def redundant_count(groups: list[RedundancyGroup]) -> int:
    return sum(len(g.members) - 1 for g in groups)


def write_clusters(assignment: ClusterAssignment, path) -> None:
    """clusters.tsv: id TAB label, sorted by id."""
    with open(Path(path), "w", encoding="utf-8", newline="\n") as fh:
        for pid in sorted(assignment.labels):
            fh.write(f"{pid}\t{assignment.labels[pid]}\n")


def write_redundant(groups: list[RedundancyGroup], path) -> None:
    """redundant.tsv: representative_id TAB member_id TAB pixel_diff."""
    with open(Path(path), "w", encoding="utf-8", newline="\n") as fh:
        for group in groups:
            for member, diff in zip(group.members, group.rep_diffs):
                if member == group.representative:
                    continue
                fh.write(f"{group.representative}\t{member}\t{diff}\n")
