"""In-memory property graph of persons, assets, keywords and user interactions.

Structural edges (``is_root_asset_of``, ``has_keywords``) link assets to their
widgets and tags. Interaction edges link persons to assets; explicit feedback
(like, dislike, comment) lives in a single latest-wins slot per
(person, asset) pair, implicit feedback keeps one edge per type.
"""

from __future__ import annotations

import json
import math
import os
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Iterator, Mapping

from .errors import (
    DuplicateNodeError,
    InvalidInteractionError,
    KindMismatchError,
    MissingNodeError,
    SnapshotError,
)

NodeId = str


class NodeKind(str, Enum):
    PERSON = "person"
    ASSET = "asset"
    KEYWORD = "keyword"


class AssetKind(str, Enum):
    ROOT = "root"
    SUB = "sub"


class EdgeKind(str, Enum):
    IS_ROOT_ASSET_OF = "is_root_asset_of"
    HAS_KEYWORDS = "has_keywords"


STRUCTURAL_EDGE_KINDS = frozenset(EdgeKind)


class InteractionType(str, Enum):
    CONSUME = "consume"
    SCROLL = "scroll"
    FULLSCREEN = "fullscreen"
    COMMENT = "comment"
    LIKE = "like"
    DISLIKE = "dislike"
    DISMISS = "dismiss"

    @property
    def explicit(self) -> bool:
        return self in EXPLICIT_TYPES


EXPLICIT_TYPES = frozenset(
    {InteractionType.COMMENT, InteractionType.LIKE, InteractionType.DISLIKE}
)
IMPLICIT_TYPES = frozenset(InteractionType) - EXPLICIT_TYPES

ALLOWED_TYPES = {
    AssetKind.ROOT: frozenset(
        {
            InteractionType.CONSUME,
            InteractionType.SCROLL,
            InteractionType.FULLSCREEN,
            InteractionType.COMMENT,
            InteractionType.LIKE,
            InteractionType.DISLIKE,
        }
    ),
    AssetKind.SUB: frozenset(
        {
            InteractionType.SCROLL,
            InteractionType.DISMISS,
            InteractionType.LIKE,
            InteractionType.DISLIKE,
            InteractionType.COMMENT,
        }
    ),
}

# Polarity of every type whose polarity is not supplied by the caller.
FIXED_POLARITY = {
    InteractionType.LIKE: 1.0,
    InteractionType.DISLIKE: -1.0,
    InteractionType.CONSUME: 1.0,
    InteractionType.SCROLL: 1.0,
    InteractionType.FULLSCREEN: 1.0,
    InteractionType.DISMISS: -1.0,
}


@dataclass(frozen=True)
class PersonNode:
    id: NodeId
    name: str = ""
    attributes: Mapping[str, str] = field(default_factory=dict)

    kind = NodeKind.PERSON


@dataclass(frozen=True)
class AssetNode:
    id: NodeId
    asset_kind: AssetKind = AssetKind.ROOT
    title: str = ""
    attributes: Mapping[str, str] = field(default_factory=dict)

    kind = NodeKind.ASSET

    def __post_init__(self):
        object.__setattr__(self, "asset_kind", AssetKind(self.asset_kind))


def normalize_label(label: str) -> str:
    return " ".join(label.split()).lower()


def keyword_id(label: str) -> NodeId:
    return "k:" + normalize_label(label)


@dataclass(frozen=True)
class KeywordNode:
    label: str
    id: NodeId = ""

    kind = NodeKind.KEYWORD

    def __post_init__(self):
        label = normalize_label(self.label)
        if not label:
            raise ValueError("keyword label is empty")
        object.__setattr__(self, "label", label)
        if not self.id:
            object.__setattr__(self, "id", keyword_id(label))


Node = PersonNode | AssetNode | KeywordNode


@dataclass(frozen=True)
class StructuralEdge:
    kind: EdgeKind
    source: NodeId
    target: NodeId

    def __post_init__(self):
        object.__setattr__(self, "kind", EdgeKind(self.kind))


@dataclass(frozen=True)
class Interaction:
    """A person's interaction with an asset.

    ``polarity`` may be omitted for every type except ``comment``; it is then
    filled with the fixed per-type constant. For comments the sign of the
    polarity carries the sentiment and ``intensity`` its strength.
    """

    person: NodeId
    asset: NodeId
    type: InteractionType
    polarity: float | None = None
    intensity: float = 0.0
    text: str | None = None
    timestamp: int = 0

    def __post_init__(self):
        itype = InteractionType(self.type)
        object.__setattr__(self, "type", itype)
        fixed = FIXED_POLARITY.get(itype)
        if fixed is None:
            if self.polarity is None:
                raise InvalidInteractionError("comment interactions need a polarity")
        elif self.polarity is None:
            object.__setattr__(self, "polarity", fixed)
        elif float(self.polarity) != fixed:
            raise InvalidInteractionError(
                f"{itype.value} has fixed polarity {fixed:+g}, got {self.polarity}"
            )
        polarity = float(self.polarity)
        intensity = float(self.intensity)
        if not (-1.0 <= polarity <= 1.0) or math.isnan(polarity):
            raise InvalidInteractionError(f"polarity {polarity} outside [-1, 1]")
        if not (0.0 <= intensity <= 1.0) or math.isnan(intensity):
            raise InvalidInteractionError(f"intensity {intensity} outside [0, 1]")
        object.__setattr__(self, "polarity", polarity)
        object.__setattr__(self, "intensity", intensity)
        object.__setattr__(self, "timestamp", int(self.timestamp))

    @property
    def explicit(self) -> bool:
        return self.type in EXPLICIT_TYPES

    @property
    def weight(self) -> float:
        """Explicit weight: +1 like, -1 dislike, signed intensity for comments."""
        if self.type is InteractionType.COMMENT:
            return self.intensity if self.polarity >= 0 else -self.intensity
        if self.explicit:
            return self.polarity
        raise InvalidInteractionError(f"{self.type.value} is not an explicit interaction")


class ContextGraph:
    """Property graph with latest-wins explicit feedback.

    Mutations need exclusive access; queries are read-only. Replacing an
    explicit interaction is a single slot assignment, so readers observe
    either the old or the new interaction, never neither or both.
    """

    def __init__(self):
        self._nodes: dict[NodeId, Node] = {}
        self._keyword_by_label: dict[str, NodeId] = {}
        self._adjacency: dict[NodeId, dict[NodeId, EdgeKind]] = {}
        self._edges: list[StructuralEdge] = []
        self._root_of: dict[NodeId, NodeId] = {}
        self._explicit: dict[tuple[NodeId, NodeId], Interaction] = {}
        self._implicit: dict[tuple[NodeId, NodeId], dict[InteractionType, Interaction]] = {}
        self._assets_of_person: dict[NodeId, set[NodeId]] = {}
        self._persons_of_asset: dict[NodeId, set[NodeId]] = {}
        self._raters: dict[NodeId, set[NodeId]] = {}

    # -- nodes -------------------------------------------------------------

    def add_node(self, node: Node) -> NodeId:
        if isinstance(node, KeywordNode):
            existing = self._keyword_by_label.get(node.label)
            if existing is not None:
                return existing
            if node.id in self._nodes:
                raise DuplicateNodeError(f"node id {node.id!r} already present")
            self._keyword_by_label[node.label] = node.id
        elif not isinstance(node, (PersonNode, AssetNode)):
            raise TypeError(f"not a graph node: {node!r}")
        elif node.id in self._nodes:
            raise DuplicateNodeError(f"node id {node.id!r} already present")
        self._nodes[node.id] = node
        self._adjacency[node.id] = {}
        if isinstance(node, PersonNode):
            self._assets_of_person[node.id] = set()
        elif isinstance(node, AssetNode):
            self._persons_of_asset[node.id] = set()
            self._raters[node.id] = set()
        return node.id

    def add_person(self, id: NodeId, name: str = "", **attributes) -> NodeId:
        return self.add_node(PersonNode(id, name, attributes))

    def add_asset(
        self, id: NodeId, asset_kind: AssetKind | str = AssetKind.ROOT, title: str = "", **attributes
    ) -> NodeId:
        return self.add_node(AssetNode(id, AssetKind(asset_kind), title, attributes))

    def add_keyword(self, label: str) -> NodeId:
        return self.add_node(KeywordNode(label))

    def node(self, id: NodeId) -> Node:
        try:
            return self._nodes[id]
        except KeyError:
            raise MissingNodeError(id) from None

    def __contains__(self, id) -> bool:
        return id in self._nodes

    def __len__(self) -> int:
        return len(self._nodes)

    def nodes(self, kind: NodeKind | None = None) -> list[Node]:
        if kind is None:
            return list(self._nodes.values())
        return [n for n in self._nodes.values() if n.kind is kind]

    def persons(self) -> list[NodeId]:
        return sorted(n.id for n in self._nodes.values() if isinstance(n, PersonNode))

    def root_assets(self) -> list[NodeId]:
        return sorted(
            n.id
            for n in self._nodes.values()
            if isinstance(n, AssetNode) and n.asset_kind is AssetKind.ROOT
        )

    def keyword(self, label: str) -> NodeId | None:
        return self._keyword_by_label.get(normalize_label(label))

    def is_asset(self, id: NodeId) -> bool:
        return isinstance(self._nodes.get(id), AssetNode)

    def is_keyword(self, id: NodeId) -> bool:
        return isinstance(self._nodes.get(id), KeywordNode)

    def asset_kind(self, id: NodeId) -> AssetKind:
        node = self.node(id)
        if not isinstance(node, AssetNode):
            raise KindMismatchError(f"{id!r} is a {node.kind.value}, not an asset")
        return node.asset_kind

    # -- structure ---------------------------------------------------------

    def add_structural_edge(self, edge: StructuralEdge) -> None:
        src, dst = self.node(edge.source), self.node(edge.target)
        if edge.kind is EdgeKind.IS_ROOT_ASSET_OF:
            if not (
                isinstance(src, AssetNode)
                and isinstance(dst, AssetNode)
                and src.asset_kind is AssetKind.ROOT
                and dst.asset_kind is AssetKind.SUB
            ):
                raise KindMismatchError(
                    f"is_root_asset_of must link a root asset to a sub asset, "
                    f"got {edge.source!r} -> {edge.target!r}"
                )
            parent = self._root_of.get(edge.target)
            if parent is not None and parent != edge.source:
                raise KindMismatchError(
                    f"sub asset {edge.target!r} already belongs to root {parent!r}"
                )
        elif not (isinstance(src, AssetNode) and isinstance(dst, KeywordNode)):
            raise KindMismatchError(
                f"has_keywords must link an asset to a keyword, "
                f"got {edge.source!r} -> {edge.target!r}"
            )
        if edge.target in self._adjacency[edge.source]:
            return
        self._adjacency[edge.source][edge.target] = edge.kind
        self._adjacency[edge.target][edge.source] = edge.kind
        self._edges.append(edge)
        if edge.kind is EdgeKind.IS_ROOT_ASSET_OF:
            self._root_of[edge.target] = edge.source

    def link_widget(self, root: NodeId, widget: NodeId) -> None:
        self.add_structural_edge(StructuralEdge(EdgeKind.IS_ROOT_ASSET_OF, root, widget))

    def tag(self, asset: NodeId, label: str) -> NodeId:
        kw = self.add_keyword(label)
        self.add_structural_edge(StructuralEdge(EdgeKind.HAS_KEYWORDS, asset, kw))
        return kw

    def structural_edges(self) -> list[StructuralEdge]:
        return list(self._edges)

    def structural_neighbors(self, id: NodeId) -> list[NodeId]:
        """Sorted ids adjacent to ``id`` through structural edges, either direction."""
        try:
            return sorted(self._adjacency[id])
        except KeyError:
            raise MissingNodeError(id) from None

    def widgets(self, root: NodeId) -> list[NodeId]:
        if self.asset_kind(root) is not AssetKind.ROOT:
            return []
        return sorted(
            n for n, kind in self._adjacency[root].items() if kind is EdgeKind.IS_ROOT_ASSET_OF
        )

    def root_of(self, sub: NodeId) -> NodeId | None:
        self.node(sub)
        return self._root_of.get(sub)

    def neighbors(self, id: NodeId, kinds: Iterable[str] | None = None) -> list[tuple[NodeId, str]]:
        """All (node, edge kind) pairs one hop away, sorted by node id then kind.

        Edge kinds are the structural edge names plus the interaction type
        names; ``kinds`` restricts the result to those edge kinds.
        """
        node = self.node(id)
        wanted = None if kinds is None else {str(getattr(k, "value", k)) for k in kinds}
        found = [(n, kind.value) for n, kind in self._adjacency[id].items()]
        if isinstance(node, PersonNode):
            for asset in self._assets_of_person[id]:
                found.extend((asset, i.type.value) for i in self.interactions_between(id, asset))
        elif isinstance(node, AssetNode):
            for person in self._persons_of_asset[id]:
                found.extend((person, i.type.value) for i in self.interactions_between(person, id))
        if wanted is not None:
            found = [pair for pair in found if pair[1] in wanted]
        return sorted(found)

    # -- interactions ------------------------------------------------------

    def record_interaction(self, interaction: Interaction) -> None:
        person = self.node(interaction.person)
        if not isinstance(person, PersonNode):
            raise KindMismatchError(f"{interaction.person!r} is not a person")
        kind = self.asset_kind(interaction.asset)
        if interaction.type not in ALLOWED_TYPES[kind]:
            raise InvalidInteractionError(
                f"{interaction.type.value} is not valid on a {kind.value} asset"
            )
        key = (interaction.person, interaction.asset)
        if interaction.explicit:
            self._explicit[key] = interaction
            self._raters[interaction.asset].add(interaction.person)
        else:
            per_type = self._implicit.get(key)
            if per_type is None:
                per_type = self._implicit[key] = {}
            previous = per_type.get(interaction.type)
            if previous is not None and previous.timestamp > interaction.timestamp:
                interaction = previous
            per_type[interaction.type] = interaction
        self._assets_of_person[interaction.person].add(interaction.asset)
        self._persons_of_asset[interaction.asset].add(interaction.person)

    def interact(self, person: NodeId, asset: NodeId, type, **fields) -> Interaction:
        interaction = Interaction(person, asset, InteractionType(type), **fields)
        self.record_interaction(interaction)
        return interaction

    def explicit_interaction(self, person: NodeId, asset: NodeId) -> Interaction | None:
        return self._explicit.get((person, asset))

    def implicit_interactions(self, person: NodeId, asset: NodeId) -> list[Interaction]:
        per_type = self._implicit.get((person, asset))
        if not per_type:
            return []
        return [per_type[t] for t in sorted(per_type, key=lambda t: t.value)]

    def interactions_between(self, person: NodeId, asset: NodeId) -> list[Interaction]:
        self.node(person)
        self.node(asset)
        found = []
        explicit = self._explicit.get((person, asset))
        if explicit is not None:
            found.append(explicit)
        found.extend(self.implicit_interactions(person, asset))
        return found

    def interactions(self) -> Iterator[Interaction]:
        yield from self._explicit.values()
        for per_type in self._implicit.values():
            yield from per_type.values()

    def interacted_assets(self, person: NodeId) -> set[NodeId]:
        self.node(person)
        return set(self._assets_of_person.get(person, ()))

    def raters(self, asset: NodeId) -> set[NodeId]:
        """Persons holding an explicit interaction on ``asset``."""
        self.node(asset)
        return set(self._raters.get(asset, ()))

    def explicit_ratings(self, person: NodeId) -> dict[NodeId, float]:
        self.node(person)
        return {
            asset: self._explicit[(person, asset)].weight
            for asset in self._assets_of_person.get(person, ())
            if (person, asset) in self._explicit
        }

    def all_explicit_ratings(self) -> dict[NodeId, dict[NodeId, float]]:
        ratings: dict[NodeId, dict[NodeId, float]] = {}
        for (person, asset), interaction in self._explicit.items():
            ratings.setdefault(person, {})[asset] = interaction.weight
        return ratings

    @property
    def edge_count(self) -> int:
        implicit = sum(len(v) for v in self._implicit.values())
        return len(self._edges) + len(self._explicit) + implicit

    @property
    def interaction_count(self) -> int:
        return len(self._explicit) + sum(len(v) for v in self._implicit.values())

    # -- persistence -------------------------------------------------------

    def records(self) -> Iterator[dict]:
        for node in self._nodes.values():
            yield _node_record(node)
        for edge in self._edges:
            yield {"record": "edge", "kind": edge.kind.value, "from": edge.source, "to": edge.target}
        for interaction in self.interactions():
            yield {
                "record": "interaction",
                "person": interaction.person,
                "asset": interaction.asset,
                "type": interaction.type.value,
                "polarity": interaction.polarity,
                "intensity": interaction.intensity,
                "text": interaction.text,
                "timestamp": interaction.timestamp,
            }

    def snapshot(self, path: str | os.PathLike) -> None:
        """Write the graph as JSON lines, closed by an ``end`` record with counts."""
        count = 0
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            for record in self.records():
                f.write(json.dumps(record, ensure_ascii=False, sort_keys=True))
                f.write("\n")
                count += 1
            f.write(json.dumps({"record": "end", "records": count}, sort_keys=True))
            f.write("\n")

    @classmethod
    def restore(cls, path: str | os.PathLike) -> ContextGraph:
        graph = cls()
        count = 0
        ended = False
        with open(path, encoding="utf-8") as f:
            for lineno, line in enumerate(f, 1):
                if not line.strip():
                    continue
                if ended:
                    raise SnapshotError("record after end marker", lineno)
                try:
                    record = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise SnapshotError(f"invalid JSON ({exc.msg})", lineno) from None
                if not isinstance(record, dict):
                    raise SnapshotError("record is not an object", lineno)
                if record.get("record") == "end":
                    if record.get("records") != count:
                        raise SnapshotError(
                            f"end marker expects {record.get('records')} records, read {count}",
                            lineno,
                        )
                    ended = True
                    continue
                try:
                    graph._apply(record)
                except SnapshotError as exc:
                    raise SnapshotError(str(exc), lineno) from None
                except (KeyError, TypeError, ValueError) as exc:
                    raise SnapshotError(f"bad {record.get('record')} record: {exc}", lineno) from None
                count += 1
        if count and not ended:
            raise SnapshotError("missing end marker (truncated snapshot)", count + 1)
        return graph

    def _apply(self, record: dict) -> None:
        kind = record.get("record")
        if kind == "node":
            node_kind = record["kind"]
            if node_kind == NodeKind.PERSON.value:
                node = PersonNode(record["id"], record.get("name", ""), dict(record.get("attributes", {})))
            elif node_kind == NodeKind.ASSET.value:
                node = AssetNode(
                    record["id"],
                    AssetKind(record["asset_kind"]),
                    record.get("title", ""),
                    dict(record.get("attributes", {})),
                )
            elif node_kind == NodeKind.KEYWORD.value:
                node = KeywordNode(record["label"], record["id"])
            else:
                raise SnapshotError(f"unknown node kind {node_kind!r}")
            self.add_node(node)
        elif kind == "edge":
            self.add_structural_edge(StructuralEdge(EdgeKind(record["kind"]), record["from"], record["to"]))
        elif kind == "interaction":
            self.record_interaction(
                Interaction(
                    record["person"],
                    record["asset"],
                    InteractionType(record["type"]),
                    record["polarity"],
                    record["intensity"],
                    record.get("text"),
                    record["timestamp"],
                )
            )
        else:
            raise SnapshotError(f"unknown record kind {kind!r}")

    def __eq__(self, other) -> bool:
        if not isinstance(other, ContextGraph):
            return NotImplemented
        return (
            self._nodes == other._nodes
            and set(self._edges) == set(other._edges)
            and self._explicit == other._explicit
            and self._implicit == other._implicit
        )

    __hash__ = None


def _node_record(node: Node) -> dict:
    if isinstance(node, PersonNode):
        return {
            "record": "node",
            "kind": "person",
            "id": node.id,
            "name": node.name,
            "attributes": dict(node.attributes),
        }
    if isinstance(node, AssetNode):
        return {
            "record": "node",
            "kind": "asset",
            "id": node.id,
            "asset_kind": node.asset_kind.value,
            "title": node.title,
            "attributes": dict(node.attributes),
        }
    return {"record": "node", "kind": "keyword", "id": node.id, "label": node.label}
