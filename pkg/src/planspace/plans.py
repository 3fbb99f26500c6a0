"""Floor-plan data model: rooms, plans, datasets, validation and rasterization.

Plans live on a fixed 256x256 canvas. Rooms are axis-aligned half-open
integer boxes [x0, x1) x [y0, y1); adjacent rooms tile without sharing
pixels. Rasters are category-label grids, label 0 meaning empty.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError

CANVAS = 256

CATEGORIES = (
    "living",
    "bedroom",
    "kitchen",
    "bathroom",
    "balcony",
    "storage",
    "corridor",
    "other",
)

# Raster label codes: 0 = empty, categories take 1..8 in CATEGORIES order.
CATEGORY_CODES = {name: i + 1 for i, name in enumerate(CATEGORIES)}
CODE_CATEGORIES = {code: name for name, code in CATEGORY_CODES.items()}


@dataclass(frozen=True)
class Room:
    """An axis-aligned categorized box on the canvas (pixel units)."""

    category: str
    x0: int
    y0: int
    x1: int
    y1: int

    @property
    def box(self) -> tuple[int, int, int, int]:
        return (self.x0, self.y0, self.x1, self.y1)

    def area(self) -> int:
        return max(0, self.x1 - self.x0) * max(0, self.y1 - self.y0)


@dataclass(frozen=True)
class FloorPlan:
    id: str
    rooms: tuple[Room, ...]

    def __post_init__(self):
        # Normalize so list inputs compare equal after a round trip.
        object.__setattr__(self, "rooms", tuple(self.rooms))


@dataclass(frozen=True, eq=False)
class Raster:
    """A resolution x resolution grid of category codes, row-major [y, x]."""

    resolution: int
    cells: np.ndarray

    def __post_init__(self):
        cells = np.asarray(self.cells, dtype=np.uint8)
        if cells.shape != (self.resolution, self.resolution):
            raise DataError(
                f"raster cells shape {cells.shape} does not match resolution {self.resolution}"
            )
        if cells.size and cells.max() > len(CATEGORIES):
            raise DataError("raster contains labels outside the category set")
        cells.flags.writeable = False
        object.__setattr__(self, "cells", cells)

    def same_cells(self, other: "Raster") -> bool:
        return self.resolution == other.resolution and np.array_equal(self.cells, other.cells)


class Dataset:
    """Ordered collection of validated floor plans with unique ids."""

    def __init__(self, plans):
        self.plans: tuple[FloorPlan, ...] = tuple(plans)
        self._by_id = {p.id: p for p in self.plans}
        if len(self._by_id) != len(self.plans):
            seen = set()
            for p in self.plans:
                if p.id in seen:
                    raise DataError(f"duplicate plan id {p.id!r}")
                seen.add(p.id)

    def __len__(self) -> int:
        return len(self.plans)

    def __iter__(self):
        return iter(self.plans)

    def __contains__(self, plan_id: str) -> bool:
        return plan_id in self._by_id

    def __getitem__(self, plan_id: str) -> FloorPlan:
        try:
            return self._by_id[plan_id]
        except KeyError:
            raise DataError(f"unknown plan id {plan_id!r}") from None

    def __eq__(self, other) -> bool:
        return isinstance(other, Dataset) and self.plans == other.plans

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(p.id for p in self.plans)


def box_intersection_area(a: Room, b: Room) -> int:
    w = min(a.x1, b.x1) - max(a.x0, b.x0)
    h = min(a.y1, b.y1) - max(a.y0, b.y0)
    return max(0, w) * max(0, h)


def validate_plan(plan: FloorPlan) -> list[str]:
    """Check every Room/FloorPlan invariant; returns violation messages, [] if ok.

    Violations are data, not exceptions: invalid plans are constructible so
    they can be inspected and reported.
    """
    violations: list[str] = []
    if not plan.id:
        violations.append("empty id")
    if not plan.rooms:
        violations.append("empty plan")
    well_formed = []
    for idx, room in enumerate(plan.rooms):
        if room.category not in CATEGORY_CODES:
            violations.append(f"unknown category {room.category!r} at room {idx}")
        if not all(isinstance(v, int) and not isinstance(v, bool) for v in room.box):
            violations.append(f"non-integer box at room {idx}")
            continue
        if room.x0 >= room.x1 or room.y0 >= room.y1:
            violations.append(f"degenerate box at room {idx}")
            continue
        if room.x0 < 0 or room.y0 < 0 or room.x1 > CANVAS or room.y1 > CANVAS:
            violations.append(f"room {idx} outside the {CANVAS}x{CANVAS} canvas")
            continue
        well_formed.append((idx, room))
    for a in range(len(well_formed)):
        ia, ra = well_formed[a]
        for b in range(a + 1, len(well_formed)):
            ib, rb = well_formed[b]
            area = box_intersection_area(ra, rb)
            if area > 0:
                violations.append(f"rooms {ia} and {ib} overlap (area {area})")
    return violations


def rasterize(plan: FloorPlan, resolution: int = CANVAS) -> Raster:
    """Paint each room's category code into a resolution^2 grid.

    Room coordinates are expressed on the 256 canvas; for other resolutions
    both endpoints are scaled by resolution/256 with floor rounding, which
    keeps half-open boxes disjoint.
    """
    if resolution < 1:
        raise DataError("resolution must be >= 1")
    cells = np.zeros((resolution, resolution), dtype=np.uint8)
    for room in plan.rooms:
        if resolution == CANVAS:
            x0, y0, x1, y1 = room.box
        else:
            x0 = (room.x0 * resolution) // CANVAS
            y0 = (room.y0 * resolution) // CANVAS
            x1 = (room.x1 * resolution) // CANVAS
            y1 = (room.y1 * resolution) // CANVAS
        cells[y0:y1, x0:x1] = CATEGORY_CODES[room.category]
    return Raster(resolution, cells)


def plan_to_document(plan: FloorPlan) -> dict:
    return {
        "id": plan.id,
        "rooms": [{"category": r.category, "box": list(r.box)} for r in plan.rooms],
    }


def plan_from_document(doc, default_id: str | None = None) -> FloorPlan:
    """Parse one plan object from the interchange format (no validation)."""
    if not isinstance(doc, dict):
        raise DataError("plan document must be an object")
    plan_id = doc.get("id", default_id)
    if not isinstance(plan_id, str):
        raise DataError("plan id must be a string")
    rooms_doc = doc.get("rooms")
    if not isinstance(rooms_doc, list):
        raise DataError(f"plan {plan_id!r}: rooms must be an array")
    rooms = []
    for i, rd in enumerate(rooms_doc):
        if not isinstance(rd, dict) or "category" not in rd or "box" not in rd:
            raise DataError(f"plan {plan_id!r}: room {i} must have category and box")
        box = rd["box"]
        if not (isinstance(box, list) and len(box) == 4):
            raise DataError(f"plan {plan_id!r}: room {i} box must be [x0, y0, x1, y1]")
        for v in box:
            if not isinstance(v, int) or isinstance(v, bool):
                raise DataError(f"plan {plan_id!r}: room {i} box coordinates must be integers")
        rooms.append(Room(rd["category"], box[0], box[1], box[2], box[3]))
    return FloorPlan(plan_id, tuple(rooms))


def load_dataset(path) -> Dataset:
    """Read and validate a plans.json file; plan order is preserved."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"{path.name} not found")
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise DataError(f"{path}: malformed JSON ({exc})") from exc
    if not isinstance(raw, list):
        raise DataError(f"{path}: top level must be an array of plans")
    plans = []
    seen = set()
    for entry in raw:
        plan = plan_from_document(entry)
        if plan.id in seen:
            raise DataError(f"duplicate plan id {plan.id!r}")
        seen.add(plan.id)
        violations = validate_plan(plan)
        if violations:
            raise DataError(f"plan {plan.id!r}: " + "; ".join(violations))
        plans.append(plan)
    return Dataset(plans)


def save_dataset(dataset: Dataset, path) -> None:
    """Write the interchange format; load_dataset(save_dataset(D)) == D."""
    path = Path(path)
    payload = [plan_to_document(p) for p in dataset]
    tmp = path.with_name(path.name + ".tmp")
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=1)
        fh.write("\n")
    os.replace(tmp, path)
