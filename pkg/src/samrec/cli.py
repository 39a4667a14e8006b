"""Command line entry point: ``samrec ingest|recommend|evaluate|bench|serve``.

Every flag with an environment override reads ``SAMREC_<NAME>`` (for
example ``SAMREC_GRAPH``, ``SAMREC_PORT``) when the flag is not given.
Exit codes: 0 ok, 1 usage, 2 I/O, 3 data error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import signal
import sys
from pathlib import Path

from . import __version__
from .errors import DatasetError, MissingNodeError, SamRecError, SnapshotError
from .evaluation import (
    dump_reports,
    evaluate,
    format_reports,
    knn_predictor,
    latency_bench,
    request_stream,
    sam_predictor,
    write_latency_csv,
)
from .graph import ContextGraph
from .ingest import RatingScale, SamplePlan, ingest, read_test_csv, write_test_csv
from .relevance import EngineConfig
from .service import RecommendationService, ServiceConfig, make_server, running

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_DATA = 0, 1, 2, 3

log = logging.getLogger("samrec")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _env(name, default=None, cast=str):
    value = os.environ.get("SAMREC_" + name)
    return default if value is None else cast(value)


def _engine_args(p):
    p.add_argument("--max-depth", type=int, default=_env("MAX_DEPTH", 2, int), help="relevance recursion depth [SAMREC_MAX_DEPTH]")
    p.add_argument("--t-root", type=int, default=_env("T_ROOT", 6, int), help="interaction types on root assets [SAMREC_T_ROOT]")
    p.add_argument("--t-widget", type=int, default=_env("T_WIDGET", 5, int), help="interaction types on widgets [SAMREC_T_WIDGET]")


def _engine_config(args) -> EngineConfig:
    return EngineConfig(max_depth=args.max_depth, t_root=args.t_root, t_widget=args.t_widget)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="samrec", description="Graph + collaborative filtering recommender")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("ingest", help="sample a MovieLens-style dataset into a graph snapshot and test CSV")
    p.add_argument("--ratings", required=_env("RATINGS") is None, default=_env("RATINGS"), help="ratings.csv [SAMREC_RATINGS]")
    p.add_argument("--tags", default=_env("TAGS"), help="tags.csv [SAMREC_TAGS]")
    p.add_argument("--movies", default=_env("MOVIES"), help="movies.csv [SAMREC_MOVIES]")
    p.add_argument("--seed", type=int, default=_env("SEED", 42, int), help="split seed [SAMREC_SEED]")
    p.add_argument("--n-movies", type=int, default=30)
    p.add_argument("--keywords", type=int, default=5, help="keywords per movie")
    p.add_argument("--train-fraction", type=float, default=0.7)
    p.add_argument("--scale-min", type=float, default=_env("SCALE_MIN", 0.5, float), help="[SAMREC_SCALE_MIN]")
    p.add_argument("--scale-max", type=float, default=_env("SCALE_MAX", 5.0, float), help="[SAMREC_SCALE_MAX]")
    p.add_argument("--out", required=True, help="graph snapshot (JSONL) to write")
    p.add_argument("--test-out", help="test CSV to write (default: <out stem>.test.csv)")

    p = sub.add_parser("recommend", help="print a ranked list as JSON")
    p.add_argument("--graph", required=_env("GRAPH") is None, default=_env("GRAPH"), help="[SAMREC_GRAPH]")
    p.add_argument("--user", required=True)
    p.add_argument("--level", choices=("roots", "widgets"), default="roots")
    p.add_argument("--root", help="root asset whose widgets to rank (level widgets)")
    p.add_argument("--k", type=int, default=10, help="list length for roots")
    p.add_argument("--include-consumed", action="store_true")
    _engine_args(p)

    p = sub.add_parser("evaluate", help="MAE/RMSE/MPE of the hybrid and K-NN predictors")
    p.add_argument("--graph", required=_env("GRAPH") is None, default=_env("GRAPH"), help="[SAMREC_GRAPH]")
    p.add_argument("--test", required=_env("TEST") is None, default=_env("TEST"), help="[SAMREC_TEST]")
    p.add_argument("--knn-k", type=int, default=_env("KNN_K", 10, int), help="[SAMREC_KNN_K]")
    p.add_argument("--json", dest="json_out", help="also write the reports as JSON here")
    _engine_args(p)

    p = sub.add_parser("bench", help="replay test-set requests against both engines and time them")
    p.add_argument("--graph", default=_env("GRAPH"), help="graph to serve in-process [SAMREC_GRAPH]")
    p.add_argument("--url", default=_env("URL"), help="benchmark an already running service instead [SAMREC_URL]")
    p.add_argument("--test", required=_env("TEST") is None, default=_env("TEST"), help="[SAMREC_TEST]")
    p.add_argument("--requests", type=int, default=1050, help="requests per endpoint")
    p.add_argument("--warmup", type=int, default=50)
    p.add_argument("--limit", type=int, default=10)
    p.add_argument("--retries", type=int, default=3)
    p.add_argument("--knn-k", type=int, default=_env("KNN_K", 10, int), help="[SAMREC_KNN_K]")
    p.add_argument("--csv", dest="csv_out", default="latency.csv", help="raw latency series")
    p.add_argument("--json", dest="json_out", help="summary JSON")
    _engine_args(p)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--graph", required=_env("GRAPH") is None, default=_env("GRAPH"), help="[SAMREC_GRAPH]")
    p.add_argument("--host", default=_env("HOST", "127.0.0.1"), help="[SAMREC_HOST]")
    p.add_argument("--port", type=int, default=_env("PORT", 8080, int), help="[SAMREC_PORT]")
    p.add_argument("--snapshot", default=_env("SNAPSHOT"), help="flush target for POST /admin/snapshot and shutdown [SAMREC_SNAPSHOT]")
    p.add_argument("--knn-k", type=int, default=_env("KNN_K", 10, int), help="[SAMREC_KNN_K]")
    p.add_argument("--include-consumed", action="store_true")
    _engine_args(p)
    return parser


def _cmd_ingest(args):
    plan = SamplePlan(args.n_movies, args.keywords, args.train_fraction, args.seed)
    scale = RatingScale(args.scale_min, args.scale_max)
    result = ingest(args.ratings, args.movies, args.tags, plan, scale)
    out = Path(args.out)
    test_out = Path(args.test_out) if args.test_out else out.with_name(out.stem + ".test.csv")
    result.graph.snapshot(out)
    write_test_csv(test_out, result.test, scale)
    print(
        json.dumps(
            {
                "graph": str(out),
                "test": str(test_out),
                "movies": len(result.sample.movies),
                "users": len(result.sample.users),
                "ratings": len(result.sample.ratings),
                "train": len(result.train),
                "test_ratings": len(result.test),
            },
            indent=2,
        )
    )


def _cmd_recommend(args):
    graph = ContextGraph.restore(args.graph)
    service = RecommendationService(graph, ServiceConfig(engine=_engine_config(args), include_consumed=args.include_consumed))
    if args.level == "roots":
        if args.k < 1:
            raise _UsageError("--k must be at least 1")
        ranked = service.roots(args.user, args.k)
    else:
        if not args.root:
            raise _UsageError("--level widgets needs --root")
        ranked = service.widgets(args.user, args.root)
    print(json.dumps([{"asset": e.asset, "score": round(e.value, 6), "source": e.source.value} for e in ranked.entries], indent=2))


def _cmd_evaluate(args):
    graph = ContextGraph.restore(args.graph)
    test = read_test_csv(args.test)
    reports = {
        "sam": evaluate(sam_predictor(graph, _engine_config(args)), test),
        "knn": evaluate(knn_predictor(graph, args.knn_k), test),
    }
    print(format_reports(reports), file=sys.stderr)
    print(dump_reports(reports))
    if args.json_out:
        Path(args.json_out).write_text(dump_reports(reports) + "\n", encoding="utf-8")


def _cmd_bench(args):
    if not args.url and not args.graph:
        raise _UsageError("bench needs --graph or --url")
    test = read_test_csv(args.test)
    streams = {
        engine: request_stream(test, engine, args.limit, args.requests) for engine in ("sam", "knn")
    }
    if args.url:
        reports = latency_bench(args.url, streams, args.warmup, retries=args.retries)
    else:
        graph = ContextGraph.restore(args.graph)
        config = ServiceConfig(port=0, engine=_engine_config(args), knn_k=args.knn_k)
        with running(RecommendationService(graph, config)) as url:
            reports = latency_bench(url, streams, args.warmup, retries=args.retries)
    write_latency_csv(args.csv_out, reports)
    summary = {name: r.summary() for name, r in reports.items()}
    print(json.dumps(summary, indent=2))
    if args.json_out:
        Path(args.json_out).write_text(json.dumps(summary, indent=2) + "\n", encoding="utf-8")


def _cmd_serve(args):
    graph = ContextGraph.restore(args.graph)
    config = ServiceConfig(
        args.host, args.port, args.snapshot, _engine_config(args), args.include_consumed, args.knn_k
    )
    service = RecommendationService(graph, config)
    server = make_server(service)
    signal.signal(signal.SIGTERM, _interrupt)
    log.info("serving %d nodes on http://%s:%d", len(graph), *server.server_address[:2])
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
        if args.snapshot:
            service.snapshot()
            log.info("flushed snapshot to %s", args.snapshot)


def _interrupt(signum, frame):
    raise KeyboardInterrupt


class _UsageError(Exception):
    pass


COMMANDS = {
    "ingest": _cmd_ingest,
    "recommend": _cmd_recommend,
    "evaluate": _cmd_evaluate,
    "bench": _cmd_bench,
    "serve": _cmd_serve,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO, format="%(levelname)s %(message)s")
    try:
        COMMANDS[args.command](args)
    except _UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"samrec: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SnapshotError, DatasetError, MissingNodeError) as exc:
        print(f"samrec: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"samrec: {exc}", file=sys.stderr)
        return EXIT_IO
    except (SamRecError, ValueError) as exc:
        print(f"samrec: {exc}", file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
