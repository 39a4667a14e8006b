"""Error metrics, the user-based K-NN baseline, and HTTP latency replay."""

from __future__ import annotations

import csv
import http.client
import json
import math
import os
import time
from collections import Counter
from dataclasses import dataclass, field
from typing import Callable, Iterable, Mapping, Sequence
from urllib.parse import urlsplit

import numpy as np

from .cf import UserRatingVector, clip, pearson, rating_vectors
from .errors import BenchConnectionError, EmptyInputError
from .graph import ContextGraph, NodeId
from .recommender import RelevanceScore, score
from .relevance import EngineConfig

SOURCES = ("graph", "cf_fallback", "user_mean")


@dataclass(frozen=True)
class EvalReport:
    mae: float
    rmse: float
    mpe_percent: float
    n: int
    per_source_counts: Mapping[str, int] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "mae": self.mae,
            "rmse": self.rmse,
            "mpe_percent": self.mpe_percent,
            "n": self.n,
            "per_source_counts": dict(self.per_source_counts),
        }


def mpe_from_mae(mae: float) -> float:
    """Mean percentage error: MAE relative to the width 2 of the [-1, 1] scale."""
    return mae / 2 * 100


def report(predictions: Sequence[float], truth: Sequence[float], sources: Iterable[str] = ()) -> EvalReport:
    if len(predictions) != len(truth):
        raise ValueError("predictions and ground truth differ in length")
    if not truth:
        raise EmptyInputError("empty test set")
    errors = [p - g for p, g in zip(predictions, truth)]
    n = len(errors)
    mae = math.fsum(abs(e) for e in errors) / n
    # hypot scales internally, so tiny errors do not underflow when squared;
    # the max only absorbs last-ulp rounding below the power-mean bound
    rmse = max(math.hypot(*errors) / math.sqrt(n), mae)
    counts = Counter(sources)
    return EvalReport(mae, rmse, mpe_from_mae(mae), n, {s: counts.get(s, 0) for s in SOURCES})


Predictor = Callable[[NodeId, NodeId], "float | RelevanceScore"]


def evaluate(predictor: Predictor, test: Iterable[tuple[NodeId, NodeId, float]]) -> EvalReport:
    """Score every ``(user, asset, ground_truth)`` triple with ``predictor``."""
    predictions, truth, sources = [], [], []
    for person, asset, g in test:
        p = predictor(person, asset)
        if isinstance(p, RelevanceScore):
            sources.append(p.source.value)
            p = p.value
        predictions.append(float(p))
        truth.append(g)
    return report(predictions, truth, sources)


def sam_predictor(graph: ContextGraph, config: EngineConfig = EngineConfig()) -> Predictor:
    return lambda person, asset: score(person, asset, graph, config)


# -- K-NN baseline ----------------------------------------------------------


def knn_neighbours(
    me: UserRatingVector, candidates: Iterable[UserRatingVector], k: int
) -> list[tuple[float, UserRatingVector]]:
    """The ``k`` most positively correlated candidates, ties by person id."""
    scored = []
    mean_me = me.mean
    for u in candidates:
        if u.person == me.person:
            continue
        corr = pearson(me, u, mean_me, u.mean)
        if corr.defined and corr.value > 0.0:
            scored.append((corr.value, u))
    scored.sort(key=lambda cu: (-cu[0], cu[1].person))
    return scored[:k]


def knn_from_vectors(
    me: UserRatingVector, asset: NodeId, raters: Iterable[UserRatingVector], k: int = 10
) -> float:
    if k < 1:
        raise ValueError("k must be at least 1")
    nearest = knn_neighbours(me, (u for u in raters if asset in u.ratings), k)
    if not nearest:
        return clip(me.mean)
    num = math.fsum(c * u.ratings[asset] for c, u in nearest)
    den = math.fsum(c for c, _ in nearest)
    return clip(num / den)


def knn_predict(person: NodeId, asset: NodeId, k: int, graph: ContextGraph) -> float:
    """User-based K-NN: correlation-weighted mean rating of the k nearest raters."""
    graph.node(asset)
    me = UserRatingVector.from_graph(graph, person)
    raters = [UserRatingVector.from_graph(graph, u) for u in sorted(graph.raters(asset))]
    return knn_from_vectors(me, asset, raters, k)


def knn_predictor(graph: ContextGraph, k: int = 10) -> Predictor:
    return lambda person, asset: knn_predict(person, asset, k, graph)


def knn_scores(person: NodeId, assets: Iterable[NodeId], graph: ContextGraph, k: int = 10) -> dict[NodeId, float]:
    """K-NN predictions for several assets, correlating ``person`` with everyone once."""
    vectors = rating_vectors(graph)
    me = vectors.get(person) or UserRatingVector.from_graph(graph, person)
    mean_me = me.mean
    correlations = {}
    for u in vectors.values():
        if u.person == person:
            continue
        corr = pearson(me, u, mean_me, u.mean)
        if corr.defined and corr.value > 0.0:
            correlations[u.person] = (corr.value, u)
    result = {}
    for asset in assets:
        nearest = sorted(
            (cu for p, cu in correlations.items() if asset in cu[1].ratings),
            key=lambda cu: (-cu[0], cu[1].person),
        )[:k]
        if nearest:
            num = math.fsum(c * u.ratings[asset] for c, u in nearest)
            result[asset] = clip(num / math.fsum(c for c, _ in nearest))
        else:
            result[asset] = clip(mean_me)
    return result


# -- latency ----------------------------------------------------------------


@dataclass(frozen=True)
class LatencyReport:
    endpoint: str
    latencies_us: tuple[float, ...]
    warmup: int = 0
    failures: int = 0

    @property
    def count(self) -> int:
        return len(self.latencies_us)

    @property
    def measured(self) -> np.ndarray:
        return np.asarray(self.latencies_us[self.warmup :], dtype=float)

    @property
    def mean(self) -> float:
        return float(self.measured.mean()) if self.measured.size else math.nan

    @property
    def median(self) -> float:
        return float(np.median(self.measured)) if self.measured.size else math.nan

    def percentile(self, q: float) -> float:
        return float(np.percentile(self.measured, q)) if self.measured.size else math.nan

    @property
    def p95(self) -> float:
        return self.percentile(95)

    @property
    def p99(self) -> float:
        return self.percentile(99)

    def summary(self) -> dict:
        return {
            "endpoint": self.endpoint,
            "count": self.count,
            "warmup": self.warmup,
            "failures": self.failures,
            "mean_us": self.mean,
            "median_us": self.median,
            "p95_us": self.p95,
            "p99_us": self.p99,
        }


class _Client:
    def __init__(self, base_url: str, timeout: float, retries: int, backoff: float):
        parts = urlsplit(base_url)
        if parts.scheme != "http" or not parts.hostname:
            raise ValueError(f"expected an http:// base url, got {base_url!r}")
        self.host, self.port = parts.hostname, parts.port or 80
        self.prefix = parts.path.rstrip("/")
        self.timeout, self.retries, self.backoff = timeout, retries, backoff
        self.conn = None

    def get(self, path: str) -> int:
        last = None
        for attempt in range(self.retries + 1):
            try:
                if self.conn is None:
                    self.conn = http.client.HTTPConnection(self.host, self.port, timeout=self.timeout)
                self.conn.request("GET", self.prefix + path)
                resp = self.conn.getresponse()
                resp.read()
                return resp.status
            except (OSError, http.client.HTTPException) as exc:
                last = exc
                if self.conn is not None:
                    self.conn.close()
                self.conn = None
                if attempt < self.retries:
                    time.sleep(self.backoff * (attempt + 1))
        raise BenchConnectionError(f"{self.host}:{self.port} unreachable: {last}") from last

    def close(self):
        if self.conn is not None:
            self.conn.close()


def request_stream(
    test: Iterable[tuple[NodeId, NodeId, float]], engine: str, limit: int = 10, max_requests: int | None = None
) -> list[str]:
    """One root-recommendation request path per test rating."""
    paths = []
    for person, _asset, _g in test:
        if max_requests is not None and len(paths) >= max_requests:
            break
        paths.append(f"/users/{person}/recommendations/roots?limit={limit}&engine={engine}")
    return paths


def latency_bench(
    base_url: str,
    streams: Mapping[str, Sequence[str]],
    warmup: int = 50,
    timeout: float = 30.0,
    retries: int = 3,
    backoff: float = 0.2,
) -> dict[str, LatencyReport]:
    """Replay each endpoint's request stream sequentially and time every request.

    Non-2xx responses are timed like the rest and counted as failures.
    """
    if not streams or any(len(s) == 0 for s in streams.values()):
        raise EmptyInputError("empty request stream")
    reports = {}
    for name, paths in streams.items():
        client = _Client(base_url, timeout, retries, backoff)
        latencies = []
        failures = 0
        try:
            for path in paths:
                start = time.perf_counter_ns()
                status = client.get(path)
                latencies.append((time.perf_counter_ns() - start) / 1000.0)
                if not 200 <= status < 300:
                    failures += 1
        finally:
            client.close()
        reports[name] = LatencyReport(name, tuple(latencies), min(warmup, len(latencies)), failures)
    return reports


def write_latency_csv(path: str | os.PathLike, reports: Mapping[str, LatencyReport]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["request_index", "endpoint", "micros"])
        for name, rep in reports.items():
            for i, us in enumerate(rep.latencies_us):
                writer.writerow([i, name, f"{us:.1f}"])


def format_reports(reports: Mapping[str, EvalReport]) -> str:
    lines = [f"{'predictor':<10} {'MAE':>8} {'RMSE':>8} {'MPE':>7} {'n':>6}"]
    for name, r in reports.items():
        lines.append(f"{name:<10} {r.mae:8.4f} {r.rmse:8.4f} {r.mpe_percent:6.1f}% {r.n:6d}")
    return "\n".join(lines)


def dump_reports(reports: Mapping[str, EvalReport]) -> str:
    return json.dumps({k: v.as_dict() for k, v in reports.items()}, indent=2, sort_keys=True)
