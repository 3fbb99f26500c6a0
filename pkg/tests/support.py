"""Shared builders for tests: plans, corpora, tables."""

from __future__ import annotations

import numpy as np

from planspace.distances import DistanceTable
from planspace.plans import Dataset, FloorPlan, Room


def plan(pid: str, *rooms: tuple[str, int, int, int, int]) -> FloorPlan:
    return FloorPlan(pid, tuple(Room(c, x0, y0, x1, y1) for c, x0, y0, x1, y1 in rooms))


def square_plan(pid: str, category: str = "living", size: int = 256) -> FloorPlan:
    return plan(pid, (category, 0, 0, size, size))


def euclidean_table(points: np.ndarray, ids=None, keep=None) -> DistanceTable:
    """Complete (or filtered) table of true Euclidean distances."""
    n = len(points)
    if ids is None:
        ids = [f"p{i:04d}" for i in range(n)]
    entries = {}
    for a in range(n):
        for b in range(a + 1, n):
            if keep is not None and not keep(a, b):
                continue
            entries[(ids[a], ids[b])] = float(np.linalg.norm(points[a] - points[b]))
    return DistanceTable(entries, ids)


def pruning_corpus() -> Dataset:
    """100 base plans pairwise >= 200 cells apart plus 20 near-copies.

    Base i is a full-width living strip of height 10 + i (any two bases
    differ by >= 256 cells). Copy i adds a small storage room of area
    i + 1 <= 50 far from the strip, so it differs from its base by at most
    50 cells and from every other plan by >= 150.
    """
    members = []
    for i in range(100):
        members.append(plan(f"base{i:03d}", ("living", 0, 0, 256, 10 + i)))
    for i in range(20):
        members.append(plan(
            f"copy{i:02d}",
            ("living", 0, 0, 256, 10 + i),
            ("storage", 0, 200, i + 1, 201),
        ))
    return Dataset(members)
