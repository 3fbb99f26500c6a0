"""Command-line pipeline: encode distances, solve, insert, query, cluster,
prune, stats and serve.

Every successful invocation prints exactly one JSON summary line on stdout;
human-readable diagnostics go to stderr. Exit codes: 0 success, 1 usage
error, 2 data error, 3 convergence failure (every restart hit max-iterations).
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import distances as dist_mod
from . import explore, kernels, plans, solver
from .errors import DataError

ALL_PAIRS_CONFIRM_LIMIT = 5000


class _Parser(argparse.ArgumentParser):
    """argparse with usage errors mapped to exit code 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def workspace_dir() -> Path:
    return Path(os.environ.get("PLANSPACE_WORKSPACE", "."))


def _emit(summary: dict) -> None:
    sys.stdout.write(json.dumps(summary) + "\n")


def _load_dataset(ws: Path) -> plans.Dataset:
    return plans.load_dataset(ws / "plans.json")


def _solver_config(args) -> solver.SolverConfig:
    return solver.SolverConfig(
        max_iterations=args.max_iters,
        rtol=args.tol,
        restarts=args.restarts,
        seed=args.seed,
    )


def cmd_encode(args) -> int:
    ws = workspace_dir()
    dataset = _load_dataset(ws)
    ids = dataset.ids
    if args.oracle == "iou":
        oracle = dist_mod.iou_oracle(dataset, occupancy=args.iou_mode == "occupancy")
    else:
        features = dist_mod.load_features(ws / "features.tsv")
        oracle = dist_mod.cosine_oracle(features)
    if args.pairs == "all":
        if len(dataset) > ALL_PAIRS_CONFIRM_LIMIT and not args.yes:
            raise DataError(
                f"--pairs all over {len(dataset)} plans is quadratic "
                f"({len(dataset) * (len(dataset) - 1) // 2} oracle calls); pass --yes to confirm"
            )
        pairs = dist_mod.all_pairs(ids)
        triple_count = 0
    else:
        triples = dist_mod.select_triples(dataset, per_anchor=args.per_anchor, seed=args.seed)
        pairs = dist_mod.triple_pairs(triples)
        triple_count = len(triples)
    table = dist_mod.build_distance_table(pairs, oracle, ids)
    out = ws / "distances.tsv"
    dist_mod.write_table(table, out)
    _emit({
        "command": "encode",
        "oracle": args.oracle,
        "pairs": args.pairs,
        "triples": triple_count,
        "entries": len(table),
        "plans": len(dataset),
        "path": str(out),
    })
    return 0


def cmd_solve(args) -> int:
    ws = workspace_dir()
    table = dist_mod.read_table(ws / "distances.tsv")
    cfg = _solver_config(args)
    embedding, report = solver.solve_embedding(table, d=args.dim, config=cfg)
    out = ws / "embedding.tsv"
    solver.write_embedding(embedding, out)
    _emit({
        "command": "solve",
        "n": len(embedding),
        "entries": len(table),
        "dim": args.dim,
        "seed": args.seed,
        "restarts": args.restarts,
        "path": str(out),
        **report.to_dict(),
    })
    return 3 if report.termination == "max-iterations" else 0


def _insert_distances(args, ws: Path, embedding: solver.Embedding) -> dict[str, float]:
    if args.plan:
        dataset = _load_dataset(ws)
        with open(args.plan, encoding="utf-8") as fh:
            doc = json.load(fh)
        plan = plans.plan_from_document(doc, default_id="new")
        violations = plans.validate_plan(plan)
        if violations:
            raise DataError(f"plan {plan.id!r}: " + "; ".join(violations))
        new_raster = plans.rasterize(plan)
        return {
            p.id: dist_mod.iou_distance(new_raster, plans.rasterize(p))
            for p in dataset
            if p.id in embedding
        }
    targets: dict[str, float] = {}
    with open(args.distances, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise DataError(f"{args.distances}:{lineno}: expected 'id<TAB>dist'")
            try:
                targets[parts[0]] = float(parts[1])
            except ValueError:
                raise DataError(f"{args.distances}:{lineno}: bad distance") from None
    return targets


def cmd_insert(args) -> int:
    ws = workspace_dir()
    embedding = solver.read_embedding(ws / "embedding.tsv")
    targets = _insert_distances(args, ws, embedding)
    if not targets:
        raise DataError("no anchor distances to insert against")
    cfg = _solver_config(args)
    coord, report = solver.insert_point(embedding, targets, cfg)
    _emit({
        "command": "insert",
        "anchors": len(targets),
        "coordinate": [float(v) for v in coord],
        **report.to_dict(),
    })
    return 3 if report.termination == "max-iterations" else 0


def cmd_query(args) -> int:
    ws = workspace_dir()
    embedding = solver.read_embedding(ws / "embedding.tsv")
    exclude = None
    if args.id is not None:
        query = embedding[args.id]
        exclude = args.id
    else:
        try:
            query = np.array([float(v) for v in args.coord.split(",")])
        except ValueError:
            raise DataError(f"bad coordinate {args.coord!r}") from None
        if query.shape[0] != embedding.dim:
            raise DataError(
                f"coordinate has {query.shape[0]} components, embedding dim is {embedding.dim}"
            )
    results = explore.exhaustive_knn(
        list(embedding.ids), embedding.matrix(), query, args.k,
        exclude=exclude, farthest=args.order == "farthest",
    )
    _emit({
        "command": "query",
        "id": args.id,
        "order": args.order,
        "k": args.k,
        "results": [{"id": pid, "distance": d} for pid, d in results],
    })
    return 0


def cmd_cluster(args) -> int:
    ws = workspace_dir()
    embedding = solver.read_embedding(ws / "embedding.tsv")
    assignment = explore.kmeans(embedding, args.k, seed=args.seed)
    out = ws / "clusters.tsv"
    explore.write_clusters(assignment, out)
    _emit({
        "command": "cluster",
        "k": args.k,
        "seed": args.seed,
        "n": len(assignment.labels),
        "within_ss": explore.within_cluster_ss(assignment, embedding),
        "path": str(out),
    })
    return 0


def cmd_prune(args) -> int:
    ws = workspace_dir()
    dataset = _load_dataset(ws)
    groups = explore.prune_redundant(dataset, threshold=args.threshold,
                                     resolution=args.resolution)
    out = ws / "redundant.tsv"
    explore.write_redundant(groups, out)
    _emit({
        "command": "prune",
        "threshold": args.threshold,
        "resolution": args.resolution,
        "groups": len(groups),
        "redundant_count": explore.redundant_count(groups),
        "path": str(out),
    })
    return 0


def cmd_stats(args) -> int:
    ws = workspace_dir()
    embedding = solver.read_embedding(ws / "embedding.tsv")
    table = dist_mod.read_table(ws / "distances.tsv")
    _emit({
        "command": "stats",
        "n": len(embedding),
        "dim": embedding.dim,
        "entries": len(table),
        "stress": solver.stress(embedding, table),
        "backend": kernels.BACKEND,
    })
    return 0


def cmd_serve(args) -> int:
    from .service import run_server  # deferred: keeps non-serve commands light

    run_server(workspace_dir(), host=args.host, port=args.port, ui_dir=args.ui)
    return 0


def build_parser() -> _Parser:
    parser = _Parser(prog="planspace", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    encode = sub.add_parser("encode",
                            help="build distances.tsv from plans or features")
    encode.add_argument("--oracle", choices=("cosine", "iou"), default="iou")
    encode.add_argument("--pairs", choices=("all", "triples"), default="triples")
    encode.add_argument("--per-anchor", type=int, default=5, dest="per_anchor")
    encode.add_argument("--iou-mode", choices=("category", "occupancy"),
                        default="category", dest="iou_mode")
    encode.add_argument("--seed", type=int, default=0)
    encode.add_argument("--yes", action="store_true",
                        help="confirm quadratic --pairs all above "
                             f"{ALL_PAIRS_CONFIRM_LIMIT} plans")
    encode.set_defaults(func=cmd_encode)

    solve = sub.add_parser("solve",
                           help="solve embedding.tsv from distances.tsv")
    solve.add_argument("--dim", type=int, default=3)
    solve.add_argument("--seed", type=int, default=0)
    solve.add_argument("--restarts", type=int, default=1)
    solve.add_argument("--max-iters", type=int, default=500, dest="max_iters")
    solve.add_argument("--tol", type=float, default=1e-9)
    solve.set_defaults(func=cmd_solve)

    insert = sub.add_parser("insert",
                            help="place one new plan against the fixed embedding")
    source = insert.add_mutually_exclusive_group(required=True)
    source.add_argument("--plan", help="plan document file (IoU distances to all plans)")
    source.add_argument("--distances", help="precomputed 'id<TAB>dist' file")
    insert.add_argument("--seed", type=int, default=0)
    insert.add_argument("--restarts", type=int, default=3)
    insert.add_argument("--max-iters", type=int, default=500, dest="max_iters")
    insert.add_argument("--tol", type=float, default=1e-12)
    insert.set_defaults(func=cmd_insert)

    query = sub.add_parser("query",
                           help="k nearest or farthest plans")
    target = query.add_mutually_exclusive_group(required=True)
    target.add_argument("--id")
    target.add_argument("--coord", help="comma-separated coordinate")
    query.add_argument("--k", type=int, default=5)
    query.add_argument("--order", choices=("nearest", "farthest"), default="nearest")
    query.set_defaults(func=cmd_query)

    cluster = sub.add_parser("cluster", help="k-means over the embedding")
    cluster.add_argument("--k", type=int, required=True)
    cluster.add_argument("--seed", type=int, default=0)
    cluster.set_defaults(func=cmd_cluster)

    prune = sub.add_parser("prune",
                           help="group nearly identical plans by pixel diff")
    prune.add_argument("--threshold", type=int, default=50)
    prune.add_argument("--resolution", type=int, default=256)
    prune.set_defaults(func=cmd_prune)

    stats = sub.add_parser("stats",
                           help="stress of the current embedding against the table")
    stats.set_defaults(func=cmd_stats)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--port", type=int, default=8080)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--ui", default=None, help="directory of static UI files")
    serve.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DataError as exc:
        sys.stderr.write(f"planspace: {exc}\n")
        return 2
    except KeyboardInterrupt:
        return 0


if __name__ == "__main__":
    raise SystemExit(main())
