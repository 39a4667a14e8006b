"""Context graph recommender: graph relevance with a Pearson CF fallback."""

from .cf import CorrelationResult, UserRatingVector, pearson, predict
from .errors import SamRecError
from .graph import (
    AssetKind,
    AssetNode,
    ContextGraph,
    EdgeKind,
    Interaction,
    InteractionType,
    KeywordNode,
    PersonNode,
    StructuralEdge,
)
from .evaluation import EvalReport, LatencyReport, evaluate, knn_predict
from .ingest import RatingScale, SamplePlan, ingest
from .recommender import RankedList, RelevanceScore, Source, recommend_roots, recommend_widgets, score
from .relevance import EngineConfig, WeightBreakdown, asset_relevance, direct_weight

__version__ = "0.1.0"

__all__ = [
    "AssetKind",
    "AssetNode",
    "ContextGraph",
    "CorrelationResult",
    "EdgeKind",
    "EngineConfig",
    "EvalReport",
    "Interaction",
    "InteractionType",
    "KeywordNode",
    "LatencyReport",
    "PersonNode",
    "RatingScale",
    "RankedList",
    "RelevanceScore",
    "SamRecError",
    "SamplePlan",
    "Source",
    "StructuralEdge",
    "UserRatingVector",
    "WeightBreakdown",
    "asset_relevance",
    "direct_weight",
    "evaluate",
    "ingest",
    "knn_predict",
    "pearson",
    "predict",
    "recommend_roots",
    "recommend_widgets",
    "score",
]
