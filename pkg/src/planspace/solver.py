"""Least-squares embedding solver.

Finds coordinates X_1..X_N whose pairwise Euclidean distances best match a
sparse target table, by minimizing the stress

    sum over table pairs (i, j) of (||X_i - X_j|| - d_ij)^2

with a damped Gauss-Newton (Levenberg-Marquardt) iteration: a step is
accepted only if it strictly reduces stress. Full solves free every point;
anchored solves (insert_point) fix all existing coordinates and move only
the new point. Solutions are unique up to rigid motion, so comparisons go
through Procrustes alignment.
"""

from __future__ import annotations

import hashlib
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator, Mapping

import numpy as np

from . import kernels
from .distances import DistanceTable
from .errors import DataError

_LAMBDA_INIT = 1e-3
_LAMBDA_MIN = 1e-14
_LAMBDA_MAX = 1e15


@dataclass(frozen=True)
class SolverConfig:
    max_iterations: int = 500
    rtol: float = 1e-9          # stop when the relative stress decrease per iteration falls below
    gtol: float = 1e-12         # stop when the stress gradient inf-norm falls below
    restarts: int = 1           # independent seeds; lowest final stress wins
    eps: float = 1e-12          # guard for the unit direction at near-coincident points
    init_scale: float | None = None  # init box half-width; None = mean target distance
    seed: int = 0

    def __post_init__(self):
        if self.max_iterations < 1:
            raise DataError("max_iterations must be >= 1")
        if self.restarts < 1:
            raise DataError("restarts must be >= 1")
        if min(self.rtol, self.gtol, self.eps) <= 0.0:
            raise DataError("tolerances must be > 0")

    def digest(self) -> str:
        text = (
            f"max_iterations={self.max_iterations} rtol={self.rtol!r} gtol={self.gtol!r} "
            f"restarts={self.restarts} eps={self.eps!r} init_scale={self.init_scale!r} "
            f"seed={self.seed}"
        )
        return hashlib.sha256(text.encode()).hexdigest()[:12]


@dataclass(frozen=True)
class SolveReport:
    initial_stress: float
    final_stress: float
    iterations: int
    termination: str            # "tolerance" | "gradient" | "max-iterations"
    wall_time: float
    restart_index: int = 0
    isolated_ids: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {
            "initial_stress": self.initial_stress,
            "final_stress": self.final_stress,
            "iterations": self.iterations,
            "termination": self.termination,
            "wall_time": self.wall_time,
            "restart_index": self.restart_index,
            "isolated_ids": list(self.isolated_ids),
        }


class Embedding:
    """Immutable id -> d-dimensional coordinate map with solve provenance."""

    def __init__(self, ids, coords: np.ndarray, seed: int = 0, config_digest: str = ""):
        self.ids: tuple[str, ...] = tuple(ids)
        coords = np.array(coords, dtype=float)
        if coords.ndim != 2 or coords.shape[0] != len(self.ids):
            raise DataError("coordinate matrix must be (len(ids), d)")
        if coords.shape[1] < 1:
            raise DataError("embedding dimension must be >= 1")
        if not np.all(np.isfinite(coords)):
            raise DataError("non-finite coordinate in embedding")
        if len(set(self.ids)) != len(self.ids):
            raise DataError("duplicate ids in embedding")
        coords.flags.writeable = False
        self._coords = coords
        self._index = {pid: k for k, pid in enumerate(self.ids)}
        self.seed = seed
        self.config_digest = config_digest

    @property
    def dim(self) -> int:
        return self._coords.shape[1]

    def __len__(self) -> int:
        return len(self.ids)

    def __contains__(self, plan_id: str) -> bool:
        return plan_id in self._index

    def __getitem__(self, plan_id: str) -> np.ndarray:
        try:
            return self._coords[self._index[plan_id]]
        except KeyError:
            raise DataError(f"id {plan_id!r} missing from embedding") from None

    def items(self) -> Iterator[tuple[str, np.ndarray]]:
        for pid in self.ids:
            yield pid, self._coords[self._index[pid]]

    def matrix(self, ids=None) -> np.ndarray:
        """Coordinate rows for `ids` (default: embedding order); read-only."""
        if ids is None:
            return self._coords
        rows = np.array([self[pid] for pid in ids])
        rows.flags.writeable = False
        return rows

    def with_point(self, plan_id: str, coord: np.ndarray) -> "Embedding":
        """New embedding with one extra point; existing rows are untouched."""
        if plan_id in self._index:
            raise DataError(f"id {plan_id!r} already embedded")
        coord = np.asarray(coord, dtype=float).reshape(-1)
        if coord.shape[0] != self.dim:
            raise DataError("coordinate dimension mismatch")
        stacked = np.vstack([self._coords, coord[None, :]])
        return Embedding(self.ids + (plan_id,), stacked, self.seed, self.config_digest)


def _pair_arrays(embedding_ids, table: DistanceTable):
    """Index arrays (ii, jj, targets) over the table's sorted entries."""
    index = {pid: k for k, pid in enumerate(embedding_ids)}
    entries = table.sorted_entries()
    ii = np.empty(len(entries), dtype=np.int32)
    jj = np.empty(len(entries), dtype=np.int32)
    targets = np.empty(len(entries))
    for p, (i, j, dist) in enumerate(entries):
        if i not in index:
            raise DataError(f"id {i!r} missing from embedding")
        if j not in index:
            raise DataError(f"id {j!r} missing from embedding")
        ii[p] = index[i]
        jj[p] = index[j]
        targets[p] = dist
    return ii, jj, targets


def stress(embedding: Embedding, table: DistanceTable) -> float:
    """Sum of squared differences between embedded and target distances."""
    ii, jj, targets = _pair_arrays(embedding.ids, table)
    coords = np.ascontiguousarray(embedding.matrix())
    res, _, _ = kernels.pair_residuals(coords, ii, jj, targets, 1e-12)
    return float(res @ res)


class PairJacobian:
    """Sparse Jacobian of the stress residuals: row p has at most 2d
    non-zeros, +u_p in point i's columns and -u_p in point j's."""

    def __init__(self, ii, jj, units, n_points: int):
        self.ii = ii
        self.jj = jj
        self.units = units
        self.n_points = int(n_points)

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.ii), self.n_points * self.units.shape[1])

    def toarray(self) -> np.ndarray:
        m, d = self.units.shape
        dense = np.zeros((m, self.n_points * d))
        rows = np.arange(m)
        for k in range(d):
            dense[rows, self.ii * d + k] += self.units[:, k]
            dense[rows, self.jj * d + k] -= self.units[:, k]
        return dense


def residuals_and_jacobian(embedding: Embedding, table: DistanceTable,
                           eps: float = 1e-12) -> tuple[np.ndarray, PairJacobian]:
    """Residual vector (table order, sorted by pair) and its sparse Jacobian.

    residual p = ||X_i - X_j|| - d_p; the derivative direction is
    (X_i - X_j) / max(||X_i - X_j||, eps), replaced by the first-axis unit
    vector at exactly coincident points.
    """
    ii, jj, targets = _pair_arrays(embedding.ids, table)
    coords = np.ascontiguousarray(embedding.matrix())
    res, units, _ = kernels.pair_residuals(coords, ii, jj, targets, eps)
    return res, PairJacobian(ii, jj, units, len(embedding))


def _lm_minimize(x0: np.ndarray, ii, jj, targets, cfg: SolverConfig):
    """Levenberg-Marquardt with strict-decrease acceptance on the stress.

    Damping follows the gain-ratio schedule (actual vs model decrease):
    good steps shrink the damping smoothly, overshoots grow it
    geometrically, which avoids stalling in tiny damped steps near flat
    regions. Returns (coords, info) with initial/final stress, the
    accepted-iteration count and the termination reason.
    """
    x = x0.copy()
    res, _, _ = kernels.pair_residuals(x, ii, jj, targets, cfg.eps)
    current = float(res @ res)
    initial = current
    lam = _LAMBDA_INIT
    nu = 2.0
    iterations = 0
    termination = "max-iterations"
    for _ in range(cfg.max_iterations):
        A, g, res = kernels.normal_equations(x, ii, jj, targets, cfg.eps)
        # Stress gradient is 2 J^T r.
        if 2.0 * float(np.max(np.abs(g), initial=0.0)) <= cfg.gtol:
            termination = "gradient"
            break
        diag = np.diag(A).copy()
        diag[diag <= 0.0] = 1.0
        accepted = False
        while lam <= _LAMBDA_MAX:
            try:
                step = np.linalg.solve(A + np.diag(lam * diag), -g)
            except np.linalg.LinAlgError:
                lam *= nu
                nu *= 2.0
                continue
            candidate = x + step.reshape(x.shape)
            res_new, _, _ = kernels.pair_residuals(candidate, ii, jj, targets, cfg.eps)
            new = float(res_new @ res_new)
            if np.isfinite(new) and new < current:
                accepted = True
                break
            lam *= nu
            nu *= 2.0
        if not accepted:
            # No strictly decreasing step exists at any damping: the
            # relative decrease is 0, below any positive rtol.
            termination = "tolerance"
            break
        predicted = float(step @ (lam * diag * step - g))
        gain = (current - new) / predicted if predicted > 0.0 else 1.0
        lam = max(lam * max(1.0 / 3.0, 1.0 - (2.0 * gain - 1.0) ** 3), _LAMBDA_MIN)
        nu = 2.0
        x = candidate
        previous, current = current, new
        iterations += 1
        if previous - current <= cfg.rtol * max(previous, 1e-300):
            termination = "tolerance"
            break
    return x, {
        "initial": initial,
        "final": current,
        "iterations": iterations,
        "termination": termination,
    }


def solve_embedding(table: DistanceTable, d: int = 3,
                    config: SolverConfig | None = None) -> tuple[Embedding, SolveReport]:
    """Solve for coordinates matching the table, best of `restarts` seeds.

    Coordinates start uniformly at random in a centered box of half-width
    init_scale (default: mean target distance) drawn from seed, seed+1, ...
    Ids present in the universe but in no entry keep their random initial
    coordinates and are reported as isolated.
    """
    cfg = config or SolverConfig()
    if d < 1:
        raise DataError("dimension must be >= 1")
    if not table.entries:
        raise DataError("empty distance table")
    ids = table.ids
    ii, jj, targets = _pair_arrays(ids, table)
    if not np.all(np.isfinite(targets)):
        raise DataError("non-finite distance in table")
    connected = np.zeros(len(ids), dtype=bool)
    connected[ii] = True
    connected[jj] = True
    isolated = tuple(pid for k, pid in enumerate(ids) if not connected[k])
    scale = cfg.init_scale if cfg.init_scale is not None else float(np.mean(targets))
    if scale <= 0.0:
        scale = 1.0

    start = time.perf_counter()
    best = None
    for r in range(cfg.restarts):
        rng = np.random.default_rng(cfg.seed + r)
        x0 = rng.uniform(-scale, scale, size=(len(ids), d))
        x, info = _lm_minimize(x0, ii, jj, targets, cfg)
        if best is None or info["final"] < best[1]["final"]:
            best = (x, info, r)
    wall = time.perf_counter() - start

    x, info, restart_index = best
    report = SolveReport(
        initial_stress=info["initial"],
        final_stress=info["final"],
        iterations=info["iterations"],
        termination=info["termination"],
        wall_time=wall,
        restart_index=restart_index,
        isolated_ids=isolated,
    )
    embedding = Embedding(ids, x, seed=cfg.seed, config_digest=cfg.digest())
    return embedding, report


def _point_residuals(x: np.ndarray, anchors: np.ndarray, targets: np.ndarray, eps: float):
    diff = x[None, :] - anchors
    norms = np.sqrt(np.einsum("md,md->m", diff, diff))
    res = norms - targets
    units = diff / np.maximum(norms, eps)[:, None]
    coincident = norms == 0.0
    if np.any(coincident):
        units[coincident] = 0.0
        units[coincident, 0] = 1.0
    return res, units


def _lm_point(x0: np.ndarray, anchors: np.ndarray, targets: np.ndarray, cfg: SolverConfig):
    """LM over a single free point against fixed anchors (gain-ratio damping)."""
    x = x0.copy()
    res, _ = _point_residuals(x, anchors, targets, cfg.eps)
    current = float(res @ res)
    initial = current
    lam = _LAMBDA_INIT
    nu = 2.0
    iterations = 0
    termination = "max-iterations"
    for _ in range(cfg.max_iterations):
        res, units = _point_residuals(x, anchors, targets, cfg.eps)
        g = units.T @ res
        if 2.0 * float(np.max(np.abs(g), initial=0.0)) <= cfg.gtol:
            termination = "gradient"
            break
        A = units.T @ units
        diag = np.diag(A).copy()
        diag[diag <= 0.0] = 1.0
        accepted = False
        while lam <= _LAMBDA_MAX:
            try:
                step = np.linalg.solve(A + np.diag(lam * diag), -g)
            except np.linalg.LinAlgError:
                lam *= nu
                nu *= 2.0
                continue
            candidate = x + step
            res_new, _ = _point_residuals(candidate, anchors, targets, cfg.eps)
            new = float(res_new @ res_new)
            if np.isfinite(new) and new < current:
                accepted = True
                break
            lam *= nu
            nu *= 2.0
        if not accepted:
            termination = "tolerance"
            break
        predicted = float(step @ (lam * diag * step - g))
        gain = (current - new) / predicted if predicted > 0.0 else 1.0
        lam = max(lam * max(1.0 / 3.0, 1.0 - (2.0 * gain - 1.0) ** 3), _LAMBDA_MIN)
        nu = 2.0
        x = candidate
        previous, current = current, new
        iterations += 1
        if previous - current <= cfg.rtol * max(previous, 1e-300):
            termination = "tolerance"
            break
    return x, {
        "initial": initial,
        "final": current,
        "iterations": iterations,
        "termination": termination,
    }


def insert_point(embedding: Embedding, new_distances: Mapping[str, float],
                 config: SolverConfig | None = None) -> tuple[np.ndarray, SolveReport]:
    """Anchored solve: place one new point against fixed existing coordinates.

    Starts at the centroid of the referenced anchors plus `restarts` random
    starts inside the anchor bounding box; the lowest-stress result wins
    (the centroid start on ties). Existing coordinates are never modified.
    """
    if not new_distances:
        raise DataError("empty distance map for insertion")
    anchor_ids = sorted(new_distances)
    anchors = np.array([embedding[pid] for pid in anchor_ids])
    targets = np.array([float(new_distances[pid]) for pid in anchor_ids])
    if not np.all(np.isfinite(targets)) or np.any(targets < 0.0):
        raise DataError("invalid target distance for insertion")
    cfg = config or SolverConfig()

    lo = anchors.min(axis=0)
    hi = anchors.max(axis=0)
    rng = np.random.default_rng(cfg.seed)
    starts = [anchors.mean(axis=0)]
    for _ in range(cfg.restarts):
        starts.append(rng.uniform(lo, hi))

    t0 = time.perf_counter()
    best = None
    for idx, x0 in enumerate(starts):
        x, info = _lm_point(np.asarray(x0, dtype=float), anchors, targets, cfg)
        if best is None or info["final"] < best[1]["final"]:
            best = (x, info, idx)
    wall = time.perf_counter() - t0

    x, info, start_index = best
    report = SolveReport(
        initial_stress=info["initial"],
        final_stress=info["final"],
        iterations=info["iterations"],
        termination=info["termination"],
        wall_time=wall,
        restart_index=start_index,
    )
    return x, report


def procrustes(reference: np.ndarray, moving: np.ndarray) -> tuple[np.ndarray, float]:
    """Rigid alignment (rotation/reflection + translation) of `moving` onto
    `reference`; returns (aligned points, RMSE). Standard orthogonal
    solution on centered coordinates via SVD."""
    reference = np.asarray(reference, dtype=float)
    moving = np.asarray(moving, dtype=float)
    if reference.shape != moving.shape:
        raise DataError("point sets must share shape for alignment")
    mu_ref = reference.mean(axis=0)
    mu_mov = moving.mean(axis=0)
    ref_c = reference - mu_ref
    mov_c = moving - mu_mov
    u, _, vt = np.linalg.svd(ref_c.T @ mov_c)
    rotation = u @ vt
    aligned = mov_c @ rotation.T + mu_ref
    rmse = float(np.sqrt(np.mean(np.sum((reference - aligned) ** 2, axis=1))))
    return aligned, rmse


def procrustes_align(reference: Embedding, moving: Embedding) -> tuple[Embedding, float]:
    """Embedding-level Procrustes: same id set and dimension required."""
    if set(reference.ids) != set(moving.ids):
        raise DataError("embeddings have different id sets")
    if reference.dim != moving.dim:
        raise DataError("embeddings have different dimensions")
    order = reference.ids
    aligned, rmse = procrustes(reference.matrix(), moving.matrix(order))
    return Embedding(order, aligned, moving.seed, moving.config_digest), rmse


def write_embedding(embedding: Embedding, path) -> None:
    """embedding.tsv: '# dim=<d> seed=<seed>' header, then id TAB d floats."""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# dim={embedding.dim} seed={embedding.seed}\n")
        for pid, coord in embedding.items():
            values = "\t".join(f"{v:.17g}" for v in coord)
            fh.write(f"{pid}\t{values}\n")


def append_embedding_row(path, plan_id: str, coord) -> None:
    with open(path, "a", encoding="utf-8", newline="\n") as fh:
        values = "\t".join(f"{float(v):.17g}" for v in coord)
        fh.write(f"{plan_id}\t{values}\n")


def read_embedding(path) -> Embedding:
    path = Path(path)
    if not path.exists():
        raise DataError(f"{path.name} not found")
    ids: list[str] = []
    rows: list[list[float]] = []
    dim = None
    seed = 0
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            if line.startswith("#"):
                for token in line[1:].split():
                    if token.startswith("dim="):
                        dim = int(token[4:])
                    elif token.startswith("seed="):
                        seed = int(token[5:])
                continue
            parts = line.split("\t")
            if dim is not None and len(parts) != dim + 1:
                raise DataError(f"{path.name}:{lineno}: expected id + {dim} coordinates")
            try:
                rows.append([float(v) for v in parts[1:]])
            except ValueError:
                raise DataError(f"{path.name}:{lineno}: bad coordinate") from None
            ids.append(parts[0])
    if not ids:
        raise DataError(f"{path.name}: no coordinates")
    if dim is None:
        dim = len(rows[0])
    matrix = np.array(rows)
    if matrix.shape[1] != dim:
        raise DataError(f"{path.name}: coordinate rows do not match dim={dim}")
    return Embedding(ids, matrix, seed=seed)
