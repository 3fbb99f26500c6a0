"""HTTP service exposing the embedding: browse plans, similarity queries,
clustering, rasters, and live insertion of new designs.

Snapshot isolation: every request reads one immutable Snapshot (dataset +
embedding + index + version). Inserts are serialized behind a lock, build
the next snapshot copy-on-write, persist it (plans.json rewrite,
embedding.tsv append) and publish it atomically, so readers never block
and versions form a gapless increasing sequence.
"""

from __future__ import annotations

import json
import mimetypes
import re
import threading
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, urlparse

import numpy as np

from . import distances as dist_mod
from . import explore, plans, solver
from .errors import DataError

RASTER_CACHE_LIMIT = 2000  # above this, inserts rasterize on the fly

# Inserts solve a d-dimensional problem; converge hard so duplicate plans
# land on their originals.
INSERT_CONFIG = solver.SolverConfig(max_iterations=500, rtol=1e-15, gtol=1e-14, restarts=3)


@dataclass(frozen=True)
class Snapshot:
    version: int
    dataset: plans.Dataset
    embedding: solver.Embedding
    index: explore.SpatialIndex | None


class ServiceError(Exception):
    def __init__(self, status: int, message: str, extra: dict | None = None):
        super().__init__(message)
        self.status = status
        self.payload = {"error": message, **(extra or {})}


class PlanService:
    """Application state behind the HTTP handler."""

    def __init__(self, workspace: Path, ui_dir: Path | None = None):
        self.workspace = Path(workspace)
        self.ui_dir = Path(ui_dir) if ui_dir else None
        dataset = plans.load_dataset(self.workspace / "plans.json")
        embedding_path = self.workspace / "embedding.tsv"
        if embedding_path.exists():
            embedding = solver.read_embedding(embedding_path)
        elif len(dataset) == 0:
            embedding = solver.Embedding((), np.zeros((0, 3)))
        else:
            raise DataError("embedding.tsv not found")
        for plan in dataset:
            if len(embedding) and plan.id not in embedding:
                raise DataError(f"plan {plan.id!r} has no embedded coordinate")
        index = explore.build_index(embedding) if len(embedding) else None
        self._snapshot = Snapshot(1, dataset, embedding, index)
        self._write_lock = threading.Lock()
        self._raster_cache: dict[str, np.ndarray] = {}
        self._cluster_cache: dict[tuple[int, int, int], explore.ClusterAssignment] = {}
        self._cluster_lock = threading.Lock()
        self._user_counter = self._scan_user_counter(dataset)

    @staticmethod
    def _scan_user_counter(dataset: plans.Dataset) -> int:
        highest = 0
        for pid in dataset.ids:
            match = re.fullmatch(r"u-(\d+)", pid)
            if match:
                highest = max(highest, int(match.group(1)))
        return highest

    @property
    def snapshot(self) -> Snapshot:
        return self._snapshot

    def _raster_cells(self, plan: plans.FloorPlan, snapshot_size: int) -> np.ndarray:
        if snapshot_size <= RASTER_CACHE_LIMIT:
            cells = self._raster_cache.get(plan.id)
            if cells is None:
                cells = plans.rasterize(plan).cells
                self._raster_cache[plan.id] = cells
            return cells
        return plans.rasterize(plan).cells

    def distance_profile(self, new_plan: plans.FloorPlan, snapshot: Snapshot) -> dict[str, float]:
        """Category-IoU distances from the new plan to every existing plan."""
        new_raster = plans.rasterize(new_plan)
        n = len(snapshot.dataset)
        profile: dict[str, float] = {}
        for plan in snapshot.dataset:
            other = plans.Raster(256, self._raster_cells(plan, n))
            profile[plan.id] = dist_mod.iou_distance(new_raster, other)
        return profile

    def insert(self, doc: dict) -> dict:
        """Validate, solve anchored, publish snapshot version + 1."""
        if not isinstance(doc, dict):
            raise ServiceError(422, "plan document must be a JSON object")
        with self._write_lock:
            snapshot = self._snapshot
            if len(snapshot.dataset) == 0:
                raise ServiceError(409, "dataset is empty: no anchors to solve against")
            pid = f"u-{self._user_counter + 1}"
            try:
                plan = plans.plan_from_document({**doc, "id": pid})
            except DataError as exc:
                raise ServiceError(422, str(exc)) from exc
            violations = plans.validate_plan(plan)
            if violations:
                raise ServiceError(422, "plan violates invariants", {"violations": violations})
            try:
                profile = self.distance_profile(plan, snapshot)
                coord, report = solver.insert_point(snapshot.embedding, profile, INSERT_CONFIG)
            except ServiceError:
                raise
            except Exception as exc:
                raise ServiceError(500, f"distance oracle failed: {exc}") from exc
            new_dataset = plans.Dataset(snapshot.dataset.plans + (plan,))
            new_embedding = snapshot.embedding.with_point(pid, coord)
            new_snapshot = Snapshot(
                snapshot.version + 1, new_dataset, new_embedding,
                explore.build_index(new_embedding),
            )
            plans.save_dataset(new_dataset, self.workspace / "plans.json")
            solver.append_embedding_row(self.workspace / "embedding.tsv", pid, coord)
            self._user_counter += 1
            with self._cluster_lock:
                self._cluster_cache.clear()
            self._snapshot = new_snapshot
        return {
            "id": pid,
            "coordinate": [float(v) for v in coord],
            "stress": report.final_stress,
            "version": new_snapshot.version,
        }

    def clusters(self, k: int, seed: int) -> tuple[explore.ClusterAssignment, int]:
        snapshot = self._snapshot
        if not (1 <= k <= len(snapshot.embedding)):
            raise ServiceError(400, f"k must be in [1, {len(snapshot.embedding)}]")
        key = (k, seed, snapshot.version)
        with self._cluster_lock:
            cached = self._cluster_cache.get(key)
        if cached is None:
            cached = explore.kmeans(snapshot.embedding, k, seed=seed)
            with self._cluster_lock:
                self._cluster_cache[key] = cached
        return cached, snapshot.version

    def latest_clusters_for(self, version: int) -> explore.ClusterAssignment | None:
        with self._cluster_lock:
            for (k, seed, v), assignment in reversed(list(self._cluster_cache.items())):
                if v == version:
                    return assignment
        return None


def _int_param(params: dict, name: str, default: int | None) -> int:
    raw = params.get(name, [None])[0]
    if raw is None:
        if default is None:
            raise ServiceError(400, f"missing parameter {name!r}")
        return default
    try:
        return int(raw)
    except ValueError:
        raise ServiceError(400, f"parameter {name!r} must be an integer") from None


def raster_document(plan: plans.FloorPlan) -> dict:
    raster = plans.rasterize(plan)
    return {
        "id": plan.id,
        "resolution": raster.resolution,
        "legend": {str(code): name for code, name in plans.CODE_CATEGORIES.items()},
        "cells": raster.cells.tolist(),
    }


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server_version = "planspace"

    # ------------------------------------------------------------- plumbing
    @property
    def app(self) -> PlanService:
        return self.server.app  # type: ignore[attr-defined]

    def log_message(self, fmt, *args):
        if getattr(self.server, "verbose", False):
            super().log_message(fmt, *args)

    def _send_json(self, status: int, payload) -> None:
        body = json.dumps(payload).encode()
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _send_error_json(self, err: ServiceError) -> None:
        self._send_json(err.status, err.payload)

    # --------------------------------------------------------------- routes
    def do_GET(self):
        try:
            url = urlparse(self.path)
            params = parse_qs(url.query)
            path = url.path
            snapshot = self.app.snapshot
            if path == "/api/health":
                self._send_json(200, {
                    "version": snapshot.version,
                    "plans": len(snapshot.dataset),
                    "dim": snapshot.embedding.dim if len(snapshot.embedding) else None,
                })
            elif path == "/api/plans":
                self._handle_list(snapshot, params)
            elif path == "/api/embedding":
                self._handle_embedding(snapshot)
            elif path == "/api/clusters":
                k = _int_param(params, "k", None)
                seed = _int_param(params, "seed", 0)
                assignment, version = self.app.clusters(k, seed)
                self._send_json(200, {
                    "k": assignment.k,
                    "seed": seed,
                    "version": version,
                    "labels": {pid: assignment.labels[pid] for pid in sorted(assignment.labels)},
                    "centroids": assignment.centroids.tolist(),
                })
            elif match := re.fullmatch(r"/api/plans/([^/]+)/similar", path):
                self._handle_similar(snapshot, match.group(1), params)
            elif match := re.fullmatch(r"/api/plans/([^/]+)/raster", path):
                plan = self._plan_or_404(snapshot, match.group(1))
                self._send_json(200, raster_document(plan))
            elif match := re.fullmatch(r"/api/plans/([^/]+)", path):
                self._handle_plan(snapshot, match.group(1))
            elif path.startswith("/api/"):
                raise ServiceError(404, f"no such route: {path}")
            else:
                self._serve_static(path)
        except ServiceError as err:
            self._send_error_json(err)
        except BrokenPipeError:
            pass
        except Exception as exc:  # pragma: no cover - defensive 500
            self._send_json(500, {"error": f"internal error: {exc}"})

    def do_POST(self):
        try:
            url = urlparse(self.path)
            if url.path != "/api/plans":
                raise ServiceError(404, f"no such route: {url.path}")
            length = int(self.headers.get("Content-Length", "0"))
            raw = self.rfile.read(length) if length else b""
            try:
                doc = json.loads(raw.decode("utf-8")) if raw else {}
            except (json.JSONDecodeError, UnicodeDecodeError) as exc:
                raise ServiceError(400, f"request body is not valid JSON: {exc}") from exc
            self._send_json(200, self.app.insert(doc))
        except ServiceError as err:
            self._send_error_json(err)
        except BrokenPipeError:
            pass
        except Exception as exc:  # pragma: no cover - defensive 500
            self._send_json(500, {"error": f"internal error: {exc}"})

    # -------------------------------------------------------------- helpers
    def _plan_or_404(self, snapshot: Snapshot, pid: str) -> plans.FloorPlan:
        if pid not in snapshot.dataset:
            raise ServiceError(404, f"unknown plan id {pid!r}")
        return snapshot.dataset[pid]

    def _handle_list(self, snapshot: Snapshot, params) -> None:
        page = _int_param(params, "page", 1)
        page_size = _int_param(params, "page_size", 50)
        if page < 1 or page_size < 1:
            raise ServiceError(400, "page and page_size must be >= 1")
        ids = snapshot.dataset.ids
        start = (page - 1) * page_size
        self._send_json(200, {
            "ids": list(ids[start:start + page_size]),
            "page": page,
            "page_size": page_size,
            "total": len(ids),
            "version": snapshot.version,
        })

    def _handle_plan(self, snapshot: Snapshot, pid: str) -> None:
        plan = self._plan_or_404(snapshot, pid)
        coord = snapshot.embedding[pid] if pid in snapshot.embedding else None
        clusters = self.app.latest_clusters_for(snapshot.version)
        label = clusters.labels.get(pid) if clusters else None
        self._send_json(200, {
            **plans.plan_to_document(plan),
            "coordinate": None if coord is None else [float(v) for v in coord],
            "cluster": label,
            "version": snapshot.version,
        })

    def _handle_similar(self, snapshot: Snapshot, pid: str, params) -> None:
        self._plan_or_404(snapshot, pid)
        k = _int_param(params, "k", 5)
        if k < 1:
            raise ServiceError(400, "k must be >= 1")
        order = params.get("order", ["nearest"])[0]
        if order not in ("nearest", "farthest"):
            raise ServiceError(400, f"order must be nearest or farthest, got {order!r}")
        if snapshot.index is None or pid not in snapshot.embedding:
            raise ServiceError(404, f"plan {pid!r} is not embedded")
        query = snapshot.embedding[pid]
        if order == "nearest":
            ranked = explore.knn(snapshot.index, query, k, exclude=pid)
        else:
            ranked = explore.kfarthest(snapshot.index, query, k, exclude=pid)
        self._send_json(200, {
            "query": pid,
            "order": order,
            "k": k,
            "version": snapshot.version,
            "results": [
                {"id": rid, "distance": dist, "raster": f"/api/plans/{rid}/raster"}
                for rid, dist in ranked
            ],
        })

    def _handle_embedding(self, snapshot: Snapshot) -> None:
        emb = snapshot.embedding
        self._send_json(200, {
            "dim": emb.dim if len(emb) else None,
            "n": len(emb),
            "version": snapshot.version,
            "ids": list(emb.ids),
            "coordinates": [[float(v) for v in coord] for _, coord in emb.items()],
        })

    def _serve_static(self, path: str) -> None:
        ui_dir = self.app.ui_dir
        if ui_dir is None:
            if path == "/":
                self._send_json(200, {
                    "service": "planspace",
                    "routes": [
                        "/api/health", "/api/plans", "/api/plans/{id}",
                        "/api/plans/{id}/similar", "/api/plans/{id}/raster",
                        "/api/embedding", "/api/clusters", "POST /api/plans",
                    ],
                })
                return
            raise ServiceError(404, "no static UI configured")
        rel = path.lstrip("/") or "index.html"
        target = (ui_dir / rel).resolve()
        if not str(target).startswith(str(ui_dir.resolve())) or not target.is_file():
            raise ServiceError(404, f"not found: {path}")
        ctype = mimetypes.guess_type(str(target))[0] or "application/octet-stream"
        body = target.read_bytes()
        self.send_response(200)
        self.send_header("Content-Type", ctype)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)


def make_server(workspace, host: str = "127.0.0.1", port: int = 8080,
                ui_dir=None, verbose: bool = False) -> ThreadingHTTPServer:
    app = PlanService(Path(workspace), ui_dir=ui_dir)
    httpd = ThreadingHTTPServer((host, port), _Handler)
    httpd.app = app  # type: ignore[attr-defined]
    httpd.verbose = verbose  # type: ignore[attr-defined]
    return httpd


def run_server(workspace, host: str = "127.0.0.1", port: int = 8080, ui_dir=None) -> None:
    httpd = make_server(workspace, host, port, ui_dir, verbose=True)
    actual_port = httpd.server_address[1]
    # announce readiness unbuffered so supervising processes can wait on it
    print(json.dumps({"command": "serve", "host": host, "port": actual_port,
                      "workspace": str(workspace)}), flush=True)
    try:
        httpd.serve_forever()
    finally:
        httpd.server_close()
