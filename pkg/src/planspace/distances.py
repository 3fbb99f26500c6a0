"""Target-distance production: cosine encoding of feature vectors, the IoU
raster oracle, anchor/positive/negative triple selection, and the sparse
distance-table container with its TSV format.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Mapping

import numpy as np

from . import kernels
from .errors import DataError, OracleError
from .plans import Dataset, Raster, rasterize

FEATURE_LENGTH = 1024


def cosine_distance(u, v) -> float:
    """Cosine-encoded distance in [0, 2]: cos(u, v) * -1 + 1.

    Identical directions give 0, orthogonal 1, antipodal 2. The raw value is
    clamped into [0, 2] to absorb last-bit rounding excursions.
    """
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise DataError(f"feature length mismatch: {u.shape} vs {v.shape}")
    nu = float(np.sqrt(np.dot(u, u)))
    nv = float(np.sqrt(np.dot(v, v)))
    if nu == 0.0 or nv == 0.0:
        raise DataError("zero-norm feature vector (corrupt feature file?)")
    value = float(np.dot(u, v)) / (nu * nv) * -1.0 + 1.0
    return min(2.0, max(0.0, value))


def iou(a: Raster, b: Raster, occupancy: bool = False) -> float:
    """Intersection-over-union of two rasters, in [0, 1].

    Category-aware by default (cells must carry the same non-zero label to
    intersect); occupancy=True collapses all non-zero labels first. Two
    entirely empty rasters are identical, so their IoU is 1.0.
    """
    if a.resolution != b.resolution:
        raise DataError(f"raster resolution mismatch: {a.resolution} vs {b.resolution}")
    inter, union = kernels.iou_counts(a.cells, b.cells, occupancy)
    if union == 0:
        return 1.0
    return inter / union


def iou_distance(a: Raster, b: Raster, occupancy: bool = False) -> float:
    """1 - iou(a, b); the desk-scale stand-in for the learned similarity oracle."""
    return 1.0 - iou(a, b, occupancy)


@dataclass(frozen=True)
class Triple:
    """Anchor/positive/negative ids with IoU(anchor, positive) >= IoU(anchor, negative)."""

    anchor: str
    positive: str
    negative: str


def select_triples(dataset: Dataset, per_anchor: int = 1, seed: int = 0,
                   resolution: int = 256) -> list[Triple]:
    """Draw per_anchor candidate pairs for every plan as anchor.

    Candidates are drawn uniformly (without replacement) with the seeded
    generator; the member with higher IoU to the anchor becomes the
    positive, ties broken by lexicographically smaller id. Deterministic
    given the seed.
    """
    if len(dataset) < 3:
        raise DataError("triple selection needs at least 3 plans")
    if per_anchor < 1:
        raise DataError("per_anchor must be >= 1")
    rng = np.random.default_rng(seed)
    rasters = {p.id: rasterize(p, resolution) for p in dataset}
    ids = dataset.ids
    triples: list[Triple] = []
    for anchor in ids:
        others = [pid for pid in ids if pid != anchor]
        for _ in range(per_anchor):
            pick = rng.choice(len(others), size=2, replace=False)
            cand_a, cand_b = others[int(pick[0])], others[int(pick[1])]
            iou_a = iou(rasters[anchor], rasters[cand_a])
            iou_b = iou(rasters[anchor], rasters[cand_b])
            if iou_a > iou_b or (iou_a == iou_b and cand_a < cand_b):
                positive, negative = cand_a, cand_b
            else:
                positive, negative = cand_b, cand_a
            triples.append(Triple(anchor, positive, negative))
    return triples


def triple_pairs(triples: Iterable[Triple]) -> list[tuple[str, str]]:
    """All unordered id pairs covered by the triples (pair scores are
    triple-independent, so every in-triple pair enters the table)."""
    pairs = []
    for t in triples:
        pairs.append((t.anchor, t.positive))
        pairs.append((t.anchor, t.negative))
        pairs.append((t.positive, t.negative))
    return pairs


class DistanceTable:
    """Sparse symmetric target distances: one entry per unordered id pair.

    Keys are (i, j) with i < j lexicographically; `ids` is the id universe,
    which may include ids with no incident entries.
    """

    def __init__(self, entries: Mapping[tuple[str, str], float], ids: Iterable[str]):
        self.ids: tuple[str, ...] = tuple(sorted(set(ids)))
        id_set = set(self.ids)
        normalized: dict[tuple[str, str], float] = {}
        for (i, j), dist in entries.items():
            if i == j:
                raise DataError(f"self-pair ({i!r}, {j!r}) in distance table")
            if i > j:
                i, j = j, i
            if i not in id_set or j not in id_set:
                raise DataError(f"pair ({i!r}, {j!r}) references an id outside the universe")
            dist = float(dist)
            if not np.isfinite(dist) or dist < 0.0:
                raise DataError(f"pair ({i!r}, {j!r}) has invalid distance {dist!r}")
            if (i, j) in normalized and normalized[(i, j)] != dist:
                raise DataError(f"conflicting distances for pair ({i!r}, {j!r})")
            normalized[(i, j)] = dist
        self.entries: dict[tuple[str, str], float] = normalized

    def __len__(self) -> int:
        return len(self.entries)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, DistanceTable)
            and self.ids == other.ids
            and self.entries == other.entries
        )

    def sorted_entries(self) -> list[tuple[str, str, float]]:
        return [(i, j, self.entries[(i, j)]) for i, j in sorted(self.entries)]

    def get(self, i: str, j: str) -> float | None:
        if i > j:
            i, j = j, i
        return self.entries.get((i, j))


def build_distance_table(pairs: Iterable[tuple[str, str]],
                         oracle: Callable[[str, str], float],
                         ids: Iterable[str]) -> DistanceTable:
    """Evaluate `oracle` once per distinct unordered pair.

    Duplicate input pairs collapse; the result is independent of pair order.
    Oracle failures propagate as OracleError with the offending pair.
    """
    universe = set(ids)
    distinct: set[tuple[str, str]] = set()
    for i, j in pairs:
        if i == j:
            raise DataError(f"self-pair ({i!r}, {j!r}) requested")
        if i not in universe:
            raise DataError(f"unknown id {i!r} in pair list")
        if j not in universe:
            raise DataError(f"unknown id {j!r} in pair list")
        distinct.add((i, j) if i < j else (j, i))
    entries: dict[tuple[str, str], float] = {}
    for i, j in sorted(distinct):
        try:
            entries[(i, j)] = float(oracle(i, j))
        except Exception as exc:
            raise OracleError(f"oracle failed on pair ({i!r}, {j!r}): {exc}", (i, j)) from exc
    return DistanceTable(entries, universe)


def all_pairs(ids: Iterable[str]) -> list[tuple[str, str]]:
    ordered = sorted(ids)
    return [(ordered[a], ordered[b])
            for a in range(len(ordered)) for b in range(a + 1, len(ordered))]


def load_features(path) -> dict[str, np.ndarray]:
    """Read features.tsv: one line per plan, id TAB 1024 floats.

    Rejects wrong arity, non-finite values, zero-norm vectors and duplicate ids.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"{path.name} not found")
    features: dict[str, np.ndarray] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != FEATURE_LENGTH + 1:
                raise DataError(
                    f"{path.name}:{lineno}: expected id + {FEATURE_LENGTH} values, got {len(parts) - 1}"
                )
            pid = parts[0]
            if pid in features:
                raise DataError(f"{path.name}:{lineno}: duplicate id {pid!r}")
            try:
                values = np.array([float(x) for x in parts[1:]])
            except ValueError as exc:
                raise DataError(f"{path.name}:{lineno}: {exc}") from exc
            if not np.all(np.isfinite(values)):
                raise DataError(f"{path.name}:{lineno}: non-finite feature value")
            if not np.any(values):
                raise DataError(f"{path.name}:{lineno}: zero feature vector for {pid!r}")
            features[pid] = values
    return features


def write_table(table: DistanceTable, path) -> None:
    """distances.tsv: i TAB j TAB dist, sorted by (i, j), 17 significant digits."""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for i, j, dist in table.sorted_entries():
            fh.write(f"{i}\t{j}\t{dist:.17g}\n")


def read_table(path) -> DistanceTable:
    """Inverse of write_table; read(write(T)) == T for tables whose universe
    equals the ids appearing in entries."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"{path.name} not found")
    entries: dict[tuple[str, str], float] = {}
    ids: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise DataError(f"{path.name}:{lineno}: expected 'i<TAB>j<TAB>dist'")
            i, j, raw = parts
            if i == j:
                raise DataError(f"{path.name}:{lineno}: self-pair {i!r}")
            try:
                dist = float(raw)
            except ValueError:
                raise DataError(f"{path.name}:{lineno}: bad distance {raw!r}") from None
            if not np.isfinite(dist) or not (0.0 <= dist <= 2.0):
                raise DataError(f"{path.name}:{lineno}: distance {raw} outside [0, 2]")
            key = (i, j) if i < j else (j, i)
            if key in entries:
                raise DataError(f"{path.name}:{lineno}: duplicate pair {key}")
            entries[key] = dist
            ids.add(i)
            ids.add(j)
    return DistanceTable(entries, ids)


def iou_oracle(dataset: Dataset, resolution: int = 256,
               occupancy: bool = False) -> Callable[[str, str], float]:
    """Pairwise iou_distance over rasterized plans, rasters cached per id."""
    rasters = {p.id: rasterize(p, resolution) for p in dataset}

    def oracle(i: str, j: str) -> float:
        return iou_distance(rasters[i], rasters[j], occupancy)

    return oracle


def cosine_oracle(features: Mapping[str, np.ndarray]) -> Callable[[str, str], float]:
    """Pairwise cosine_distance over loaded feature vectors."""

    def oracle(i: str, j: str) -> float:
        return cosine_distance(features[i], features[j])

    return oracle
