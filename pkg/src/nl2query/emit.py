"""Emit executable queries from a query graph.

Three dialects share one traversal of the query's join tree: SQL
(SELECT/INNER JOIN/WHERE), Cypher (MATCH pattern with typed
relationships), and a neutral structured "service query" document that
round-trips losslessly.  A deterministic English paraphrase supports
read-back display of predictions.
"""

from __future__ import annotations

from .english import canonical_choices, render_with_choices, TemplateStyle
from .querygraph import Constraint, ConstraintOp, OP_BY_TOKEN, QueryGraph
from .schema import Relationship, SchemaGraph


class EmissionError(ValueError):
    pass


def _join_order(q: QueryGraph, root: str) -> list[Relationship]:
    """Tree edges in breadth-first discovery order from ``root``.

    Neighbor ties break alphabetically so emission is deterministic.
    """
    by_node: dict[str, list[Relationship]] = {cls: [] for cls in q.classes}
    for edge in q.tree_edges:
        by_node[edge.from_class].append(edge)
        by_node[edge.to_class].append(edge)
    seen = {root}
    frontier = [root]
    ordered: list[Relationship] = []
    while frontier:
        node = frontier.pop(0)
        nexts = sorted(by_node[node], key=lambda e: (e.other(node), e.label))
        for edge in nexts:
            other = edge.other(node)
            if other not in seen:
                seen.add(other)
                ordered.append(edge)
                frontier.append(other)
    if len(seen) != len(q.classes):
        missing = sorted(set(q.classes) - seen)
        raise EmissionError(
            f"join tree does not reach {missing}; cannot emit a connected query"
        )
    return ordered


def _value_kind(g: SchemaGraph, cls: str, attr: str) -> str:
    for attribute in g.classes[cls].attributes:
        if attribute.name == attr:
            return attribute.value_kind
    raise EmissionError(f"unknown attribute {cls}.{attr}")


def _sql_literal(value: str, kind: str) -> str:
    if value == "@value":
        # Named-parameter marker, left for the caller to bind.
        return "@value"
    if kind == "text":
        return "'" + value.replace("'", "''") + "'"
    return value


def to_sql(q: QueryGraph, g: SchemaGraph) -> str:
    """ANSI-style SELECT over the query's join tree."""
    root = q.classes[0]
    select = ", ".join(f"{cls}.{attr}" for cls, attr in q.reported)
    if not select:
        # Constraint-only query: project the constrained columns so the
        # statement remains a complete SELECT.
        select = ", ".join(f"{cls}.{attr}" for cls, attr, _ in q.constraints)
    parts = [f"SELECT {select}", f"FROM {root}"]
    introduced = {root}
    for edge in _join_order(q, root):
        new = edge.to_class if edge.from_class in introduced else edge.from_class
        introduced.add(new)
        parts.append(
            f"INNER JOIN {new} ON {edge.from_class}.{edge.join_from_column} "
            f"= {edge.to_class}.{edge.join_to_column}"
        )
    if q.constraints:
        predicates = [
            f"{cls}.{attr} {constraint.op.value} "
            f"{_sql_literal(constraint.value, _value_kind(g, cls, attr))}"
            for cls, attr, constraint in q.constraints
        ]
        parts.append("WHERE " + " AND ".join(predicates))
    return "\n".join(parts)


def _cypher_literal(value: str, kind: str) -> str:
    if value == "@value":
        return "$value"
    if kind == "text":
        return "'" + value.replace("\\", "\\\\").replace("'", "\\'") + "'"
    return value


def to_cypher(q: QueryGraph, g: SchemaGraph) -> str:
    """MATCH/WHERE/RETURN form of the query.

    Each class becomes a node variable named after it; a variable carries
    its label only at first occurrence.
    """
    root = q.classes[0]
    labeled: set[str] = set()

    def node(cls: str) -> str:
        if cls in labeled:
            return f"({cls})"
        labeled.add(cls)
        return f"({cls}:{cls})"

    segments = []
    edges = _join_order(q, root)
    if not edges:
        segments.append(node(root))
    for edge in edges:
        left = node(edge.from_class)
        right = node(edge.to_class)
        segments.append(f"{left}-[:{edge.label}]->{right}")
    parts = ["MATCH " + ", ".join(segments)]
    if q.constraints:
        predicates = [
            f"{cls}.{attr} {constraint.op.value} "
            f"{_cypher_literal(constraint.value, _value_kind(g, cls, attr))}"
            for cls, attr, constraint in q.constraints
        ]
        parts.append("WHERE " + " AND ".join(predicates))
    returns = ", ".join(f"{cls}.{attr}" for cls, attr in q.reported)
    if not returns:
        returns = ", ".join(dict.fromkeys(cls for cls, _, _ in q.constraints))
    parts.append("RETURN " + returns)
    return "\n".join(parts)


def to_service_query(q: QueryGraph, g: SchemaGraph) -> dict:
    """Engine-neutral document: select paths, constraints, join paths.

    Join paths read ``from_class.label.to_class``; the join list is ordered
    by a breadth-first walk rooted at the first select (or constraint)
    path's class, which makes document -> graph -> document the identity.
    """
    if q.reported:
        root = q.reported[0][0]
    elif q.constraints:
        root = q.constraints[0][0]
    else:
        root = q.classes[0]
    return {
        "select": [f"{cls}.{attr}" for cls, attr in q.reported],
        "constraints": [
            {"path": f"{cls}.{attr}", "op": constraint.op.value, "value": constraint.value}
            for cls, attr, constraint in q.constraints
        ],
        "joins": [
            f"{edge.from_class}.{edge.label}.{edge.to_class}"
            for edge in _join_order(q, root)
        ],
    }


def from_service_query(doc: dict, g: SchemaGraph) -> QueryGraph:
    """Rebuild the query graph a service document describes."""

    def checked(path: str) -> tuple[str, str]:
        cls, _, attr = path.partition(".")
        if cls not in g.classes:
            raise EmissionError(f"path {path!r} names unknown class {cls!r}")
        if not g.has_attribute(cls, attr):
            raise EmissionError(f"class {cls!r} has no attribute {attr!r}")
        return cls, attr

    reported = [checked(path) for path in doc.get("select", ())]
    constraints: list[tuple[str, str, Constraint]] = []
    for item in doc.get("constraints", ()):
        cls, attr = checked(item["path"])
        op = OP_BY_TOKEN.get(item["op"])
        if op is None:
            raise EmissionError(f"unknown operator {item['op']!r} in document")
        constraints.append((cls, attr, Constraint(op, str(item["value"]))))
    edges: list[Relationship] = []
    classes: list[str] = []

    def note(cls: str) -> None:
        if cls not in classes:
            classes.append(cls)

    for cls, _ in reported:
        note(cls)
    for cls, _, _ in constraints:
        note(cls)
    for path in doc.get("joins", ()):
        from_class, _, rest = path.partition(".")
        label, _, to_class = rest.partition(".")
        try:
            edge = g.edge_between(from_class, to_class)
        except KeyError:
            edge = None
        if edge is None or edge.label != label or edge.from_class != from_class:
            raise EmissionError(f"join path {path!r} names no declared relationship")
        note(from_class)
        note(to_class)
        edges.append(edge)
    return QueryGraph(
        classes=tuple(classes),
        reported=tuple(reported),
        constraints=tuple(constraints),
        tree_edges=frozenset(edges),
    )


def paraphrase(q: QueryGraph) -> str:
    """Deterministic read-back sentence for displaying a predicted query."""
    return render_with_choices(q, TemplateStyle.PER_CLASS, canonical_choices(q))
