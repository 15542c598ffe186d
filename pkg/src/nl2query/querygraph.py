"""Engine-agnostic query representation: pairs, triples and the token codec.

A query graph is a connected, labeled subgraph of the schema graph.  Reported
attributes are (class, attribute) pairs; constraints are
(class, attribute, operator, value) triples.  The flat token encoding of the
pairs and triples is the target language that the sequence model predicts, so
its format is a wire contract and must stay bit-exact.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterable, Sequence

from .schema import Relationship, SchemaGraph

SEGMENT_SEPARATOR = ";"

VALUE_PLACEHOLDER = "@value"


class ConstraintOp(enum.Enum):
    EQ = "="
    NEQ = "!="
    LT = "<"
    LEQ = "<="
    GT = ">"
    GEQ = ">="

    @property
    def token(self) -> str:
        return self.value


OP_BY_TOKEN = {op.value: op for op in ConstraintOp}


@dataclass(frozen=True)
class Constraint:
    """Comparison operator plus a literal value (single whitespace-free token)."""

    op: ConstraintOp
    value: str

    def __post_init__(self) -> None:
        if not self.value:
            raise ValueError("constraint value must be nonempty")
        if any(ch.isspace() for ch in self.value):
            raise ValueError(f"constraint value contains whitespace: {self.value!r}")


@dataclass(frozen=True)
class QueryGraph:
    """One query: visited classes, reported pairs, constraint triples, tree edges.

    `classes` keeps visit order (it drives serialization); `reported` and
    `constraints` keep insertion order, which for generated queries is the
    schema's attribute order.  Comparison is set-based via query_graph_equal.
    """

    classes: tuple[str, ...]
    reported: tuple[tuple[str, str], ...]
    constraints: tuple[tuple[str, str, Constraint], ...]
    tree_edges: frozenset[Relationship] = frozenset()

    def reported_set(self) -> frozenset[tuple[str, str]]:
        return frozenset(self.reported)

    def constraint_set(self) -> frozenset[tuple[str, str, Constraint]]:
        return frozenset(self.constraints)

    def mentioned_classes(self) -> frozenset[str]:
        """Classes that actually carry a pair or triple.

        A walk may enter a class without sampling anything from it; such
        silent classes stay in `classes` but never reach the token encoding.
        """
        return frozenset(c for c, _ in self.reported) | frozenset(
            c for c, _, _ in self.constraints
        )

    def class_count(self) -> int:
        return len(self.classes)


class QueryGraphError(ValueError):
    """Raised when a query graph violates its structural invariants."""


def validate_query_graph(q: QueryGraph, g: SchemaGraph) -> None:
    """Check all QueryGraph invariants against the schema; raise on violation."""
    if not q.classes:
        raise QueryGraphError("query has no classes")
    class_set = set(q.classes)
    if len(class_set) != len(q.classes):
        raise QueryGraphError("duplicate classes in visit order")
    for cls in q.classes:
        if cls not in g.classes:
            raise QueryGraphError(f"unknown class {cls!r}")
    for cls, attr in q.reported:
        if cls not in class_set:
            raise QueryGraphError(f"pair references class {cls!r} outside the query")
        if not g.has_attribute(cls, attr):
            raise QueryGraphError(f"no attribute {attr!r} on class {cls!r}")
    for cls, attr, _ in q.constraints:
        if cls not in class_set:
            raise QueryGraphError(f"triple references class {cls!r} outside the query")
        if not g.has_attribute(cls, attr):
            raise QueryGraphError(f"no attribute {attr!r} on class {cls!r}")
    if not q.reported and not q.constraints:
        raise QueryGraphError("query has no reported attributes and no constraints")
    if len(q.tree_edges) != len(q.classes) - 1:
        raise QueryGraphError(
            f"{len(q.tree_edges)} tree edges for {len(q.classes)} classes (tree needs n-1)"
        )
    if len(q.classes) > 1:
        adjacency: dict[str, set[str]] = {c: set() for c in q.classes}
        for rel in q.tree_edges:
            if rel.from_class not in class_set or rel.to_class not in class_set:
                raise QueryGraphError("tree edge leaves the query's class set")
            adjacency[rel.from_class].add(rel.to_class)
            adjacency[rel.to_class].add(rel.from_class)
        seen = {q.classes[0]}
        stack = [q.classes[0]]
        while stack:
            node = stack.pop()
            for nb in adjacency[node]:
                if nb not in seen:
                    seen.add(nb)
                    stack.append(nb)
        if seen != class_set:
            raise QueryGraphError("tree edges do not connect all classes")


def serialize_target(q: QueryGraph) -> str:
    """Token encoding of a query graph.

    Pairs become ``class attribute``, triples ``class attribute op value``,
    segments joined by `` ; `` in class visit order with pairs before triples
    within each class.
    """
    segments = []
    for cls in q.classes:
        for c, attr in q.reported:
            if c == cls:
                segments.append(f"{cls} {attr}")
        for c, attr, constraint in q.constraints:
            if c == cls:
                segments.append(f"{cls} {attr} {constraint.op.token} {constraint.value}")
    return f" {SEGMENT_SEPARATOR} ".join(segments)


class TargetParseError(ValueError):
    """Structured parse failure for one malformed target segment."""

    def __init__(self, segment_index: int, segment: Sequence[str], reason: str):
        self.segment_index = segment_index
        self.segment = list(segment)
        self.reason = reason
        super().__init__(
            f"segment {segment_index} {' '.join(segment)!r}: {reason}"
        )


def _split_segments(tokens: Sequence[str]) -> list[list[str]]:
    segments: list[list[str]] = [[]]
    for token in tokens:
        if token == SEGMENT_SEPARATOR:
            segments.append([])
        else:
            segments[-1].append(token)
    return segments


def parse_target(tokens: Sequence[str] | str, g: SchemaGraph) -> QueryGraph:
    """Decode a (possibly model-produced) token sequence into a QueryGraph.

    Malformed input raises TargetParseError naming the offending segment;
    callers running beam candidates catch it and drop the candidate.  Classes
    are reconnected through the schema via connect_predicted_classes.
    """
    if isinstance(tokens, str):
        tokens = tokens.split()
    classes: list[str] = []
    reported: list[tuple[str, str]] = []
    constraints: list[tuple[str, str, Constraint]] = []
    for index, segment in enumerate(_split_segments(tokens)):
        if not segment:
            raise TargetParseError(index, segment, "empty segment")
        cls = segment[0]
        if cls not in g.classes:
            raise TargetParseError(index, segment, f"unknown class {cls!r}")
        if len(segment) == 2:
            attr = segment[1]
            if not g.has_attribute(cls, attr):
                raise TargetParseError(
                    index, segment, f"class {cls!r} has no attribute {attr!r}"
                )
            if cls not in classes:
                classes.append(cls)
            if (cls, attr) not in reported:
                reported.append((cls, attr))
        elif len(segment) >= 4:
            attr, op_token = segment[1], segment[2]
            if not g.has_attribute(cls, attr):
                raise TargetParseError(
                    index, segment, f"class {cls!r} has no attribute {attr!r}"
                )
            if op_token not in OP_BY_TOKEN:
                raise TargetParseError(index, segment, f"invalid operator {op_token!r}")
            value = "_".join(segment[3:])
            if cls not in classes:
                classes.append(cls)
            triple = (cls, attr, Constraint(OP_BY_TOKEN[op_token], value))
            if triple not in constraints:
                constraints.append(triple)
        else:
            raise TargetParseError(
                index, segment, f"segment has {len(segment)} tokens (need 2 or >=4)"
            )
    tree_edges = connect_predicted_classes(classes, g)
    all_classes = list(classes)
    for cls in sorted(_edge_nodes(tree_edges) - set(classes)):
        all_classes.append(cls)
    return QueryGraph(
        classes=tuple(all_classes),
        reported=tuple(reported),
        constraints=tuple(constraints),
        tree_edges=tree_edges,
    )


def _edge_nodes(edges: Iterable[Relationship]) -> set[str]:
    nodes: set[str] = set()
    for rel in edges:
        nodes.add(rel.from_class)
        nodes.add(rel.to_class)
    return nodes


def _shortest_path(g: SchemaGraph, source: str, target: str) -> list[str]:
    """BFS path under unit weights; sorted neighbor order breaks ties."""
    if source == target:
        return [source]
    parents = {source: source}
    frontier = [source]
    while frontier:
        next_frontier = []
        for node in frontier:
            for nb in g.neighbors(node):
                if nb in parents:
                    continue
                parents[nb] = node
                if nb == target:
                    path = [nb]
                    while path[-1] != source:
                        path.append(parents[path[-1]])
                    return path[::-1]
                next_frontier.append(nb)
        frontier = next_frontier
    raise QueryGraphError(f"no path between {source!r} and {target!r}")


def connect_predicted_classes(
    classes: Sequence[str] | Iterable[str], g: SchemaGraph
) -> frozenset[Relationship]:
    """Connect predicted classes into a tree through the schema graph.

    Metric-closure construction: shortest paths between every pair of
    predicted classes, a spanning tree over those distances, then expansion
    of closure edges back into schema paths.  The expansion is reduced to a
    spanning tree and non-predicted leaves are pruned, so the result is
    always a tree over the predicted classes plus any intermediates the
    paths required.
    """
    predicted = sorted(set(classes))
    if not predicted:
        raise QueryGraphError("no classes to connect")
    for cls in predicted:
        if cls not in g.classes:
            raise QueryGraphError(f"unknown class {cls!r}")
    if len(predicted) == 1:
        return frozenset()

    paths: dict[tuple[str, str], list[str]] = {}
    closure_edges = []
    for i, a in enumerate(predicted):
        for b in predicted[i + 1 :]:
            path = _shortest_path(g, a, b)
            paths[(a, b)] = path
            closure_edges.append((len(path) - 1, a, b))
    closure_edges.sort()

    # Kruskal over the metric closure.
    parent = {c: c for c in predicted}

    def find(x: str) -> str:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    expanded: dict[frozenset[str], Relationship] = {}
    for _, a, b in closure_edges:
        ra, rb = find(a), find(b)
        if ra == rb:
            continue
        parent[ra] = rb
        path = paths[(a, b)]
        for u, v in zip(path, path[1:]):
            key = frozenset((u, v))
            if key not in expanded:
                expanded[key] = g.edge_between(u, v)

    # Expansion may contain cycles when closure paths overlap; take a
    # spanning tree of it and prune leaves that are not predicted classes.
    adjacency: dict[str, list[str]] = {}
    for key in expanded:
        u, v = sorted(key)
        adjacency.setdefault(u, []).append(v)
        adjacency.setdefault(v, []).append(u)
    root = predicted[0]
    tree_keys: set[frozenset[str]] = set()
    seen = {root}
    frontier = [root]
    while frontier:
        node = frontier.pop(0)
        for nb in sorted(adjacency.get(node, [])):
            if nb in seen:
                continue
            seen.add(nb)
            tree_keys.add(frozenset((node, nb)))
            frontier.append(nb)

    predicted_set = set(predicted)
    while True:
        degree: dict[str, int] = {}
        for key in tree_keys:
            for node in key:
                degree[node] = degree.get(node, 0) + 1
        removable = [
            key
            for key in tree_keys
            if any(degree[node] == 1 and node not in predicted_set for node in key)
        ]
        if not removable:
            break
        for key in removable:
            tree_keys.discard(key)
    return frozenset(expanded[key] for key in tree_keys)


def query_graph_equal(a: QueryGraph, b: QueryGraph) -> bool:
    """Exact-match comparison on pair and triple sets.

    Order-independent; classes and tree edges are derived data and excluded.
    """
    return a.reported_set() == b.reported_set() and a.constraint_set() == b.constraint_set()
