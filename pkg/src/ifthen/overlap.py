"""Overlap analysis against an external concept knowledge base.

Dimensions are grouped into six families, each mapped to a fixed set of
external relation names. Matching is exact string equality after a
documented, swappable normalization; no fuzzy matching.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import IO, Callable

from ifthen.graph import AtlasGraph, person_variable_of
from ifthen.taxonomy import Dimension


class OverlapError(ValueError):
    pass


@dataclass(frozen=True)
class ExternalEdge:
    """A ``start --relation--> end`` edge of the external graph."""

    relation: str
    start: str
    end: str

    def __post_init__(self) -> None:
        if not (self.relation and self.start and self.end):
            raise OverlapError("edge fields must be non-empty")


class DimensionGroup(str, Enum):
    Wants = "Wants"
    Effects = "Effects"
    Needs = "Needs"
    Intents = "Intents"
    Reactions = "Reactions"
    Attributes = "Attributes"


_GROUP_TABLE: dict[DimensionGroup, tuple[frozenset[Dimension], frozenset[str]]] = {
    DimensionGroup.Wants: (
        frozenset({Dimension.xWant, Dimension.oWant}),
        frozenset({"MotivatedByGoal", "HasSubevent", "HasFirstSubevent", "CausesDesire"}),
    ),
    DimensionGroup.Effects: (
        frozenset({Dimension.xEffect, Dimension.oEffect}),
        frozenset({"Causes", "HasSubevent", "HasFirstSubevent", "HasLastSubevent"}),
    ),
    DimensionGroup.Needs: (
        frozenset({Dimension.xNeed}),
        frozenset({"MotivatedByGoal", "Entails", "HasPrerequisite"}),
    ),
    DimensionGroup.Intents: (
        frozenset({Dimension.xIntent}),
        frozenset({"MotivatedByGoal", "CausesDesire", "HasSubevent", "HasFirstSubevent"}),
    ),
    DimensionGroup.Reactions: (
        frozenset({Dimension.xReact, Dimension.oReact}),
        frozenset({"Causes", "HasLastSubevent", "HasSubevent"}),
    ),
    DimensionGroup.Attributes: (
        frozenset({Dimension.xAttr}),
        frozenset({"HasProperty"}),
    ),
}


def dimension_relation_map() -> dict[DimensionGroup, tuple[frozenset[Dimension], frozenset[str]]]:
    """The fixed group -> (dimensions, external relations) table."""
    return dict(_GROUP_TABLE)


def normalize_concept(text: str) -> str:
    """Default concept normalization for matching.

    Drops person-variable tokens, lowercases, collapses whitespace, and
    strips a leading "to " or "the ".
    """
    tokens = [t for t in text.split() if person_variable_of(t) is None]
    out = " ".join(" ".join(tokens).lower().split())
    for prefix in ("to ", "the "):
        if out.startswith(prefix):
            out = out[len(prefix):]
            break
    return out


Normalizer = Callable[[str], str]


def load_edge_file(stream: IO[str]) -> set[ExternalEdge]:
    """TSV ``relation<TAB>start<TAB>end``; concepts are normalized on load."""
    edges = set()
    for line_no, line in enumerate(stream, start=1):
        line = line.rstrip("\n")
        if not line.strip() or line.startswith("#"):
            continue
        cols = line.split("\t")
        if len(cols) != 3:
            raise OverlapError(f"line {line_no}: expected 3 columns, got {len(cols)}")
        relation, start, end = cols
        edges.add(
            ExternalEdge(
                relation=relation,
                start=normalize_concept(start),
                end=normalize_concept(end),
            )
        )
    return edges


def triple_overlap(
    atlas: AtlasGraph,
    edges: set[ExternalEdge],
    normalizer: Normalizer = normalize_concept,
) -> dict[DimensionGroup, float]:
    """Percentage of each group's triples present as external edges.

    A triple overlaps when some edge whose relation belongs to the group
    links the normalized event to the normalized target. Groups without
    triples report 0%.
    """
    by_relation: dict[str, set[tuple[str, str]]] = {}
    for edge in edges:
        by_relation.setdefault(edge.relation, set()).add((edge.start, edge.end))

    result: dict[DimensionGroup, float] = {}
    for group, (dims, relations) in _GROUP_TABLE.items():
        total = 0
        matched = 0
        for e in atlas.edges:
            if e.dimension not in dims or e.target.is_empty:
                continue
            total += 1
            pair = (normalizer(e.event.text), normalizer(e.target.text))
            if any(pair in by_relation.get(rel, ()) for rel in relations):
                matched += 1
        result[group] = 100.0 * matched / total if total else 0.0
    return result


def event_coverage(
    atlas: AtlasGraph,
    edges: set[ExternalEdge],
    normalizer: Normalizer = normalize_concept,
) -> float:
    """Percentage of base events whose normalized text is an external concept."""
    if not atlas.events:
        return 0.0
    concepts = {e.start for e in edges} | {e.end for e in edges}
    found = sum(1 for ev in atlas.events if normalizer(ev.text) in concepts)
    return 100.0 * found / len(atlas.events)
