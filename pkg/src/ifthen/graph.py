"""Knowledge-graph data model: event phrases, triples, graph build and queries.

A graph is a deduplicated set of ``<event, dimension, inference>`` edges.
Node identity is exact string equality on whitespace-normalized,
lowercased text (no stemming); this is deliberately the most conservative
reading of "distinct" and is centralized in :func:`normalize_node_text`
so it can be swapped.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from statistics import fmean

from ifthen.taxonomy import ContentType, Dimension, classify_dimension

log = logging.getLogger(__name__)

PERSON_VARIABLES = ("PersonX", "PersonY", "PersonZ")
BLANK_TOKEN = "___"
EMPTY_SENTINEL = "none"


def normalize_node_text(text: str) -> str:
    """Canonical node identity: lowercased, whitespace-collapsed."""
    return " ".join(text.lower().split())


def person_variable_of(token: str) -> str | None:
    """The person variable a token mentions, honoring possessives ("PersonX's")."""
    for var in PERSON_VARIABLES:
        if token == var or token.startswith(var + "'"):
            return var
    return None


class Split(str, Enum):
    Train = "train"
    Dev = "dev"
    Test = "test"


@dataclass(frozen=True)
class EventPhrase:
    """A normalized base-event verb phrase.

    ``person_slots`` lists the person variables mentioned, in canonical
    PersonX/PersonY/PersonZ order; ``blank_count`` counts ``___`` tokens.
    """

    text: str
    person_slots: tuple[str, ...]
    blank_count: int

    @classmethod
    def from_text(cls, text: str) -> "EventPhrase":
        tokens = text.split()
        if not tokens:
            raise ValueError("event text must be non-empty")
        slots = tuple(
            var
            for var in PERSON_VARIABLES
            if any(person_variable_of(tok) == var for tok in tokens)
        )
        if slots and "PersonX" not in slots:
            raise ValueError(
                f"event mentions {slots} without PersonX: {text!r}"
            )
        blanks = sum(1 for tok in tokens if tok == BLANK_TOKEN)
        return cls(text=" ".join(tokens), person_slots=slots, blank_count=blanks)

    @property
    def tokens(self) -> list[str]:
        return self.text.split()


@dataclass(frozen=True)
class InferenceTarget:
    """An annotated inference; ``none`` is the empty-annotation sentinel."""

    text: str
    is_empty: bool

    @classmethod
    def from_text(cls, text: str) -> "InferenceTarget":
        text = " ".join(text.split())
        if text == EMPTY_SENTINEL:
            return cls(text=EMPTY_SENTINEL, is_empty=True)
        if not text:
            raise ValueError("inference text must be non-empty or the 'none' sentinel")
        return cls(text=text, is_empty=False)

    @property
    def tokens(self) -> list[str]:
        return self.text.split()


@dataclass(frozen=True)
class Triple:
    """One worker's ``<event, dimension, inference>`` annotation."""

    event: EventPhrase
    dimension: Dimension
    target: InferenceTarget
    worker_id: str
    split: Split


@dataclass(frozen=True)
class Edge:
    """A deduplicated triple with all contributing workers as provenance."""

    event: EventPhrase
    dimension: Dimension
    target: InferenceTarget
    worker_ids: tuple[str, ...]
    split: Split

    def to_triples(self) -> list[Triple]:
        return [
            Triple(self.event, self.dimension, self.target, w, self.split)
            for w in self.worker_ids
        ]


@dataclass(frozen=True)
class AtlasGraph:
    """Immutable deduplicated graph; all queries are read-only.

    ``edges`` iterate lexicographically by (event text, dimension name,
    target text); ``adjacency`` keys are (normalized event text, dimension).
    """

    events: tuple[EventPhrase, ...]
    edges: tuple[Edge, ...]
    adjacency: dict[tuple[str, Dimension], tuple[Edge, ...]]
    nodes: frozenset[str]
    diagnostics: tuple[str, ...] = field(default=())

    def to_triples(self) -> list[Triple]:
        """Expand back to one triple per worker, in canonical order."""
        out: list[Triple] = []
        for edge in self.edges:
            out.extend(edge.to_triples())
        return out


@dataclass(frozen=True)
class StatsReport:
    triples_total: int
    triples_by_content_type: dict[ContentType, int]
    nodes_total: int
    nodes_by_content_type: dict[ContentType, int]
    avg_words_per_node: dict[ContentType, float]
    base_event_count: int
    base_event_avg_words: float
    nodes_appearing_multiple: int


def build_graph(triples: list[Triple]) -> AtlasGraph:
    """Deduplicate triples and build the adjacency structure.

    Duplicates (same event text, dimension, target text after node
    normalization) are collapsed, keeping every worker id as provenance.
    Targets for o-dimensions on events without an explicit PersonY are
    legal (implied participants) and only produce a diagnostic.
    """
    merged: dict[tuple[str, str, str], dict] = {}
    diagnostics: list[str] = []
    for t in triples:
        key = (
            normalize_node_text(t.event.text),
            t.dimension.value,
            normalize_node_text(t.target.text),
        )
        slot = merged.get(key)
        if slot is None:
            if t.dimension.value.startswith("o") and "PersonY" not in t.event.person_slots:
                msg = (
                    f"{t.dimension.value} annotation on event without explicit "
                    f"PersonY (implied participant): {t.event.text!r}"
                )
                diagnostics.append(msg)
                log.warning(msg)
            merged[key] = {
                "event": t.event,
                "dimension": t.dimension,
                "target": t.target,
                "workers": {t.worker_id},
                "split": t.split,
            }
        else:
            slot["workers"].add(t.worker_id)
            if slot["split"] is not t.split:
                msg = (
                    f"conflicting splits for duplicate triple {key}; "
                    f"keeping {slot['split'].value}"
                )
                diagnostics.append(msg)
                log.warning(msg)

    edges = tuple(
        Edge(
            event=slot["event"],
            dimension=slot["dimension"],
            target=slot["target"],
            worker_ids=tuple(sorted(slot["workers"])),
            split=slot["split"],
        )
        for _, slot in sorted(merged.items())
    )

    events_by_norm: dict[str, EventPhrase] = {}
    adjacency: dict[tuple[str, Dimension], list[Edge]] = {}
    nodes: set[str] = set()
    for edge in edges:
        ev_norm = normalize_node_text(edge.event.text)
        events_by_norm.setdefault(ev_norm, edge.event)
        adjacency.setdefault((ev_norm, edge.dimension), []).append(edge)
        nodes.add(ev_norm)
        if not edge.target.is_empty:
            nodes.add(normalize_node_text(edge.target.text))

    return AtlasGraph(
        events=tuple(events_by_norm[k] for k in sorted(events_by_norm)),
        edges=edges,
        adjacency={k: tuple(v) for k, v in adjacency.items()},
        nodes=frozenset(nodes),
        diagnostics=tuple(diagnostics),
    )


def query_inferences(
    graph: AtlasGraph,
    event_text: str,
    dim: Dimension,
    include_empty: bool = False,
) -> list[InferenceTarget]:
    """Targets annotated for (event, dimension), in deterministic order.

    Unknown events or dimensions yield an empty list. Empty-annotation
    sentinels are withheld unless ``include_empty`` is set.
    """
    edges = graph.adjacency.get((normalize_node_text(event_text), Dimension(dim)), ())
    return [
        e.target for e in edges if include_empty or not e.target.is_empty
    ]


def graph_stats(graph: AtlasGraph) -> StatsReport:
    """Exact counts over the deduplicated graph.

    Target nodes are attributed to the content type of the dimension they
    appear under; empty annotations are excluded from node counts.
    """
    triples_by_ct = {ct: 0 for ct in ContentType}
    nodes_by_ct: dict[ContentType, set[str]] = {ct: set() for ct in ContentType}
    appearances: dict[str, int] = {}
    for edge in graph.edges:
        ct = classify_dimension(edge.dimension).content_type
        triples_by_ct[ct] += 1
        ev_norm = normalize_node_text(edge.event.text)
        appearances[ev_norm] = appearances.get(ev_norm, 0) + 1
        if not edge.target.is_empty:
            tgt_norm = normalize_node_text(edge.target.text)
            nodes_by_ct[ct].add(tgt_norm)
            appearances[tgt_norm] = appearances.get(tgt_norm, 0) + 1

    base_events = [normalize_node_text(e.text) for e in graph.events]
    avg_words = {
        ct: (fmean(len(n.split()) for n in nodes) if nodes else 0.0)
        for ct, nodes in nodes_by_ct.items()
    }
    return StatsReport(
        triples_total=len(graph.edges),
        triples_by_content_type=triples_by_ct,
        nodes_total=len(graph.nodes),
        nodes_by_content_type={ct: len(nodes) for ct, nodes in nodes_by_ct.items()},
        avg_words_per_node=avg_words,
        base_event_count=len(base_events),
        base_event_avg_words=(
            fmean(len(e.split()) for e in base_events) if base_events else 0.0
        ),
        nodes_appearing_multiple=sum(1 for c in appearances.values() if c > 1),
    )
