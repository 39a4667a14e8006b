"""User-based collaborative filtering with Pearson correlation.

Ratings are explicit relevance weights in [-1, 1]. Each user's mean is taken
over their whole rating vector and reused by both the correlation and the
prediction step.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping

from .graph import ContextGraph, NodeId


@dataclass(frozen=True)
class UserRatingVector:
    person: NodeId
    ratings: Mapping[NodeId, float] = field(default_factory=dict)

    @property
    def mean(self) -> float:
        if not self.ratings:
            return 0.0
        return math.fsum(self.ratings.values()) / len(self.ratings)

    @classmethod
    def from_graph(cls, graph: ContextGraph, person: NodeId) -> UserRatingVector:
        return cls(person, graph.explicit_ratings(person))


@dataclass(frozen=True)
class CorrelationResult:
    value: float
    overlap: int
    defined: bool


UNDEFINED = CorrelationResult(0.0, 0, False)


def pearson(a: UserRatingVector, u: UserRatingVector, mean_a: float | None = None, mean_u: float | None = None) -> CorrelationResult:
    """Pearson correlation over the assets both users rated.

    Undefined (value 0) when fewer than two assets are shared or either
    user's shared ratings are constant.
    """
    if len(a.ratings) > len(u.ratings):
        common = sorted(k for k in u.ratings if k in a.ratings)
    else:
        common = sorted(k for k in a.ratings if k in u.ratings)
    h = len(common)
    if h < 2:
        return CorrelationResult(0.0, h, False)
    ra = [a.ratings[k] for k in common]
    ru = [u.ratings[k] for k in common]
    if min(ra) == max(ra) or min(ru) == max(ru):
        return CorrelationResult(0.0, h, False)
    ma = a.mean if mean_a is None else mean_a
    mu = u.mean if mean_u is None else mean_u
    da = [x - ma for x in ra]
    du = [x - mu for x in ru]
    num = math.fsum(x * y for x, y in zip(da, du))
    den = math.sqrt(math.fsum(x * x for x in da) * math.fsum(y * y for y in du))
    if den == 0.0:
        return CorrelationResult(0.0, h, False)
    return CorrelationResult(max(-1.0, min(1.0, num / den)), h, True)


def clip(value: float, low: float = -1.0, high: float = 1.0) -> float:
    return max(low, min(high, value))


def weighted_deviation(mean_a: float, contributions: Iterable[tuple[float, float, float]]) -> tuple[float, int]:
    """Mean-centred prediction from ``(r_uj, mean_u, c_au)`` triples.

    Only triples with strictly positive correlation take part. Returns the
    clipped prediction and how many users contributed; with none it is the
    user's own mean.
    """
    num = []
    den = []
    for r_uj, mean_u, c in contributions:
        if c > 0.0:
            num.append((r_uj - mean_u) * c)
            den.append(c)
    if not den:
        return clip(mean_a), 0
    return clip(mean_a + math.fsum(num) / math.fsum(den)), len(den)


def predict_with_support(
    a: UserRatingVector, asset: NodeId, others: Iterable[UserRatingVector]
) -> tuple[float, int]:
    mean_a = a.mean
    triples = []
    for u in others:
        if u.person == a.person or asset not in u.ratings:
            continue
        mean_u = u.mean
        corr = pearson(a, u, mean_a, mean_u)
        if corr.defined:
            triples.append((u.ratings[asset], mean_u, corr.value))
    return weighted_deviation(mean_a, triples)


def predict(a: UserRatingVector, asset: NodeId, others: Iterable[UserRatingVector]) -> float:
    return predict_with_support(a, asset, others)[0]


def rating_vectors(graph: ContextGraph) -> dict[NodeId, UserRatingVector]:
    """Explicit rating vectors of every person in the graph."""
    ratings = graph.all_explicit_ratings()
    return {p: UserRatingVector(p, ratings.get(p, {})) for p in graph.persons()}
