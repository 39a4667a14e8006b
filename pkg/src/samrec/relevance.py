"""Graph relevance of an asset for a person.

The relevance of an asset combines three parts:

* the explicit weight of the person's latest like/dislike/comment,
* one ``polarity / (t - 1)`` term per implicit interaction type, where ``t``
  counts the interaction types admitted by the asset's kind,
* for each structural neighbour ``x`` (widgets, parent root, keywords) the
  neighbour's own relevance divided by ``n + 1``, ``n`` being the number of
  neighbours considered.

Neighbour relevance is computed recursively with every node already on the
current path removed from the graph, down to ``max_depth`` hops.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from types import MappingProxyType
from typing import Mapping

from .errors import InvalidInteractionError, MissingNodeError
from .graph import (
    FIXED_POLARITY,
    IMPLICIT_TYPES,
    AssetKind,
    ContextGraph,
    Interaction,
    InteractionType,
    NodeId,
)

DEFAULT_IMPLICIT_POLARITIES = MappingProxyType(
    {t: FIXED_POLARITY[t] for t in sorted(IMPLICIT_TYPES, key=lambda t: t.value)}
)


@dataclass(frozen=True)
class EngineConfig:
    max_depth: int = 2
    t_root: int = 6
    t_widget: int = 5
    implicit_polarities: Mapping[InteractionType, float] = DEFAULT_IMPLICIT_POLARITIES

    def __post_init__(self):
        if self.max_depth < 1:
            raise ValueError("max_depth must be at least 1")
        if self.t_root < 2 or self.t_widget < 2:
            raise ValueError("interaction type counts must be at least 2")
        polarities = {InteractionType(k): float(v) for k, v in self.implicit_polarities.items()}
        if set(polarities) != set(IMPLICIT_TYPES):
            raise ValueError("implicit_polarities must cover every implicit type")
        if any(v not in (-1.0, 1.0) for v in polarities.values()):
            raise ValueError("implicit polarities must be +1 or -1")
        object.__setattr__(self, "implicit_polarities", MappingProxyType(polarities))

    def type_count(self, kind: AssetKind) -> int:
        return self.t_root if kind is AssetKind.ROOT else self.t_widget


@dataclass(frozen=True)
class WeightBreakdown:
    explicit: float = 0.0
    implicit_sum: float = 0.0
    indirect_sum: float = 0.0
    contributing_terms: int = 0

    @property
    def total(self) -> float:
        return self.explicit + self.implicit_sum + self.indirect_sum


@dataclass
class TraversalStats:
    """Per-query instrumentation: recursive calls and distinct nodes touched."""

    calls: int = 0
    touched: set = field(default_factory=set)

    @property
    def distinct_nodes(self) -> int:
        return len(self.touched)


def explicit_weight(person: NodeId, asset: NodeId, graph: ContextGraph) -> float:
    graph.node(person)
    graph.node(asset)
    interaction = graph.explicit_interaction(person, asset)
    return 0.0 if interaction is None else interaction.weight


def implicit_weight(interaction: Interaction, asset_kind: AssetKind, config: EngineConfig) -> float:
    if interaction.explicit:
        raise InvalidInteractionError(
            f"{interaction.type.value} is explicit; implicit_weight takes implicit interactions"
        )
    polarity = config.implicit_polarities[interaction.type]
    return polarity / (config.type_count(AssetKind(asset_kind)) - 1)


def direct_weight(
    person: NodeId, asset: NodeId, graph: ContextGraph, config: EngineConfig = EngineConfig()
) -> WeightBreakdown:
    graph.node(person)
    kind = graph.asset_kind(asset)
    terms = 0
    explicit = 0.0
    interaction = graph.explicit_interaction(person, asset)
    if interaction is not None:
        explicit = interaction.weight
        terms += 1
    implicit = 0.0
    for interaction in graph.implicit_interactions(person, asset):
        implicit += implicit_weight(interaction, kind, config)
        terms += 1
    return WeightBreakdown(explicit, implicit, 0.0, terms)


def asset_relevance(
    person: NodeId,
    asset: NodeId,
    graph: ContextGraph,
    config: EngineConfig = EngineConfig(),
    stats: TraversalStats | None = None,
) -> WeightBreakdown:
    """Relevance breakdown of ``asset`` for ``person``; the total is not clipped.

    ``contributing_terms`` counts every interaction reached by the traversal,
    so zero terms means the person has no interaction within reach.
    """
    graph.node(person)
    graph.asset_kind(asset)
    if stats is None:
        stats = TraversalStats()
    direct_cache: dict[NodeId, tuple[float, int]] = {}
    head = direct_weight(person, asset, graph, config)
    direct_cache[asset] = (head.explicit + head.implicit_sum, head.contributing_terms)
    stats.calls += 1
    stats.touched.add(asset)

    path = {asset}
    neighbours = graph.structural_neighbors(asset)
    share = len(neighbours) + 1
    indirect = 0.0
    terms = head.contributing_terms
    for x in neighbours:
        value, found = _relevance(person, x, config.max_depth - 1, path, graph, config, direct_cache, stats)
        indirect += value / share
        terms += found
    return WeightBreakdown(head.explicit, head.implicit_sum, indirect, terms)


def _relevance(person, node, remaining, path, graph, config, direct_cache, stats):
    stats.calls += 1
    stats.touched.add(node)
    cached = direct_cache.get(node)
    if cached is None:
        if graph.is_keyword(node):
            cached = (0.0, 0)
        else:
            direct = direct_weight(person, node, graph, config)
            cached = (direct.explicit + direct.implicit_sum, direct.contributing_terms)
        direct_cache[node] = cached
    value, terms = cached
    if remaining <= 0:
        return value, terms
    neighbours = [x for x in graph.structural_neighbors(node) if x not in path]
    if not neighbours:
        return value, terms
    share = len(neighbours) + 1
    path.add(node)
    try:
        for x in neighbours:
            sub_value, sub_terms = _relevance(person, x, remaining - 1, path, graph, config, direct_cache, stats)
            value += sub_value / share
            terms += sub_terms
    finally:
        path.discard(node)
    return value, terms


def neighbourhood(graph: ContextGraph, start: NodeId, radius: int) -> set[NodeId]:
    """Nodes within ``radius`` structural hops of ``start`` (including it)."""
    if start not in graph:
        raise MissingNodeError(start)
    seen = {start}
    frontier = [start]
    for _ in range(radius):
        nxt = []
        for node in frontier:
            for x in graph.structural_neighbors(node):
                if x not in seen:
                    seen.add(x)
                    nxt.append(x)
        frontier = nxt
    return seen
