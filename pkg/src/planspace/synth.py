"""Deterministic synthetic floor plans for demos, tests and benchmarks.

Plans are produced by recursive guillotine splits of the 256 canvas snapped
to an 8-pixel grid, so every generated plan satisfies the non-overlap and
bounds invariants by construction.
"""

from __future__ import annotations

import argparse

import numpy as np

from .plans import CANVAS, CATEGORIES, Dataset, FloorPlan, Room, save_dataset

_GRID = 8
_MIN_SIDE = 24


def _split(rng, x0, y0, x1, y1, depth, out):
    width = x1 - x0
    height = y1 - y0
    can_split_x = width >= 2 * _MIN_SIDE
    can_split_y = height >= 2 * _MIN_SIDE
    if depth <= 0 or (not can_split_x and not can_split_y):
        out.append((x0, y0, x1, y1))
        return
    if can_split_x and (not can_split_y or rng.random() < 0.5):
        cut = x0 + _MIN_SIDE + int(rng.integers((width - 2 * _MIN_SIDE) // _GRID + 1)) * _GRID
        _split(rng, x0, y0, cut, y1, depth - 1, out)
        _split(rng, cut, y0, x1, y1, depth - 1, out)
    else:
        cut = y0 + _MIN_SIDE + int(rng.integers((height - 2 * _MIN_SIDE) // _GRID + 1)) * _GRID
        _split(rng, x0, y0, x1, cut, depth - 1, out)
        _split(rng, x0, cut, x1, y1, depth - 1, out)


def synth_plan(plan_id: str, rng: np.random.Generator) -> FloorPlan:
    boxes: list[tuple[int, int, int, int]] = []
    depth = int(rng.integers(2, 4))
    _split(rng, 0, 0, CANVAS, CANVAS, depth, boxes)
    rooms = []
    for box in boxes:
        # Occasionally leave a cell empty so layouts differ in coverage too.
        if len(boxes) > 2 and rng.random() < 0.15:
            continue
        category = CATEGORIES[int(rng.integers(len(CATEGORIES)))]
        rooms.append(Room(category, *box))
    if not rooms:
        rooms.append(Room("living", *boxes[0]))
    return FloorPlan(plan_id, tuple(rooms))


def synth_dataset(n: int, seed: int = 0, prefix: str = "p") -> Dataset:
    rng = np.random.default_rng(seed)
    width = len(str(max(n - 1, 0)))
    return Dataset([synth_plan(f"{prefix}{i:0{width}d}", rng) for i in range(n)])


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="planspace-synth", description="generate a synthetic plans.json"
    )
    parser.add_argument("--n", type=int, default=100)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--out", default="plans.json")
    args = parser.parse_args(argv)
    dataset = synth_dataset(args.n, args.seed)
    save_dataset(dataset, args.out)
    print(f"wrote {len(dataset)} plans to {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
