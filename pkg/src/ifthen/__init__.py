"""Typed if-then event knowledge graph with trainable inference models."""

from ifthen.graph import (
    AtlasGraph,
    EventPhrase,
    InferenceTarget,
    Split,
    StatsReport,
    Triple,
    build_graph,
    graph_stats,
    query_inferences,
)
from ifthen.taxonomy import (
    CausalCategory,
    ContentType,
    Dimension,
    Subject,
    TaxonomyCoords,
    Volition,
    classify_dimension,
)

__version__ = "0.1.0"

__all__ = [
    "AtlasGraph",
    "CausalCategory",
    "ContentType",
    "Dimension",
    "EventPhrase",
    "InferenceTarget",
    "Split",
    "StatsReport",
    "Subject",
    "TaxonomyCoords",
    "Triple",
    "Volition",
    "build_graph",
    "classify_dimension",
    "graph_stats",
    "query_inferences",
    "__version__",
]
