"""Hybrid scoring and the two ranked-list levels (root assets, widgets)."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .cf import UserRatingVector, clip, predict_with_support
from .errors import NotRootAssetError
from .graph import AssetKind, ContextGraph, InteractionType, NodeId
from .relevance import EngineConfig, TraversalStats, asset_relevance


class Source(str, Enum):
    GRAPH = "graph"
    CF_FALLBACK = "cf_fallback"
    USER_MEAN = "user_mean"
    # only emitted by the K-NN comparison endpoint
    KNN = "knn"


class Level(str, Enum):
    ROOT = "root"
    WIDGET = "widget"


@dataclass(frozen=True)
class RelevanceScore:
    asset: NodeId
    value: float
    source: Source


@dataclass(frozen=True)
class RankedList:
    person: NodeId
    level: Level
    entries: tuple[RelevanceScore, ...]
    scope: NodeId | None = None

    def assets(self) -> list[NodeId]:
        return [e.asset for e in self.entries]


def rank(scores) -> tuple[RelevanceScore, ...]:
    return tuple(sorted(scores, key=lambda s: (-s.value, s.asset)))


def cf_estimate(person: NodeId, asset: NodeId, graph: ContextGraph) -> tuple[float, int]:
    """CF prediction for ``person`` on ``asset`` and the number of contributing users."""
    me = UserRatingVector.from_graph(graph, person)
    others = [UserRatingVector.from_graph(graph, u) for u in sorted(graph.raters(asset)) if u != person]
    return predict_with_support(me, asset, others)


def score(
    person: NodeId,
    asset: NodeId,
    graph: ContextGraph,
    config: EngineConfig = EngineConfig(),
    stats: TraversalStats | None = None,
) -> RelevanceScore:
    breakdown = asset_relevance(person, asset, graph, config, stats)
    if breakdown.contributing_terms > 0:
        return RelevanceScore(asset, clip(breakdown.total), Source.GRAPH)
    value, support = cf_estimate(person, asset, graph)
    return RelevanceScore(asset, value, Source.CF_FALLBACK if support else Source.USER_MEAN)


def recommend_roots(
    person: NodeId,
    graph: ContextGraph,
    config: EngineConfig = EngineConfig(),
    limit: int = 10,
    include_consumed: bool = False,
) -> RankedList:
    if limit < 1:
        raise ValueError("limit must be at least 1")
    graph.node(person)
    candidates = graph.root_assets()
    if not include_consumed:
        candidates = [a for a in candidates if not _consumed(graph, person, a)]
    scores = rank(score(person, a, graph, config) for a in candidates)
    return RankedList(person, Level.ROOT, scores[:limit])


def recommend_widgets(
    person: NodeId, root_asset: NodeId, graph: ContextGraph, config: EngineConfig = EngineConfig()
) -> RankedList:
    graph.node(person)
    if graph.asset_kind(root_asset) is not AssetKind.ROOT:
        raise NotRootAssetError(f"{root_asset!r} is not a root asset")
    scores = rank(score(person, w, graph, config) for w in graph.widgets(root_asset))
    return RankedList(person, Level.WIDGET, scores, scope=root_asset)


def _consumed(graph: ContextGraph, person: NodeId, asset: NodeId) -> bool:
    return any(i.type is InteractionType.CONSUME for i in graph.implicit_interactions(person, asset))
