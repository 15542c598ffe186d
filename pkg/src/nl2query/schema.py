"""Schema graph: classes, attributes and relationships of a target database.

The schema graph is the universe that random queries are drawn from.  It is
ingested from a portable JSON descriptor or from SQL DDL text; live engine
connectors can be added behind the same interface but only file adapters
ship here.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field

VALUE_KINDS = ("text", "integer", "real", "boolean")

_IDENT_RE = re.compile(r"^[a-z][a-z0-9_]*$")


class SchemaError(ValueError):
    """Raised for malformed descriptors, DDL or invariant violations."""


@dataclass(frozen=True)
class AttributeDef:
    """An attribute of a class; value_kind only drives constraint-value sampling."""

    name: str
    value_kind: str = "text"

    def __post_init__(self) -> None:
        if not self.name:
            raise SchemaError("attribute name must be nonempty")
        if not _IDENT_RE.match(self.name):
            raise SchemaError(f"invalid attribute name {self.name!r}")
        if self.value_kind not in VALUE_KINDS:
            raise SchemaError(
                f"attribute {self.name!r}: unknown value_kind {self.value_kind!r}"
            )


@dataclass(frozen=True)
class ClassDef:
    """A class (table / node label) with its ordered attributes."""

    name: str
    attributes: tuple[AttributeDef, ...]
    instance_count: int = 0

    def __post_init__(self) -> None:
        if not _IDENT_RE.match(self.name):
            raise SchemaError(f"invalid class name {self.name!r}")
        if not self.attributes:
            raise SchemaError(f"class {self.name!r} has no attributes")
        if self.instance_count < 0:
            raise SchemaError(f"class {self.name!r}: negative instance_count")
        seen = set()
        for a in self.attributes:
            if a.name in seen:
                raise SchemaError(f"class {self.name!r}: duplicate attribute {a.name!r}")
            seen.add(a.name)

    def attribute_names(self) -> list[str]:
        return [a.name for a in self.attributes]

    def attribute(self, name: str) -> AttributeDef:
        for a in self.attributes:
            if a.name == name:
                return a
        raise KeyError(f"{self.name}.{name}")


@dataclass(frozen=True)
class Relationship:
    """An edge between two classes.

    `label` is the referencing column (or edge type).  For SQL join emission
    the default predicate is ``from_class.label = to_class.id``; descriptors
    may override the columns explicitly.
    """

    from_class: str
    to_class: str
    label: str
    from_column: str | None = None
    to_column: str | None = None

    def __post_init__(self) -> None:
        if self.from_class == self.to_class:
            raise SchemaError(f"self-loop relationship on {self.from_class!r}")
        if not _IDENT_RE.match(self.label):
            raise SchemaError(f"invalid relationship label {self.label!r}")

    @property
    def join_from_column(self) -> str:
        return self.from_column or self.label

    @property
    def join_to_column(self) -> str:
        return self.to_column or "id"

    def endpoints(self) -> frozenset[str]:
        return frozenset((self.from_class, self.to_class))

    def other(self, cls: str) -> str:
        if cls == self.from_class:
            return self.to_class
        if cls == self.to_class:
            return self.from_class
        raise KeyError(cls)


@dataclass
class SchemaGraph:
    """Validated, connected graph of classes and relationships.

    Immutable after construction; safe to share across threads.
    """

    classes: dict[str, ClassDef]
    relationships: list[Relationship] = field(default_factory=list)

    def __post_init__(self) -> None:
        if not self.classes:
            raise SchemaError("schema has no classes")
        for name, cls in self.classes.items():
            if name != cls.name:
                raise SchemaError(f"class map key {name!r} != class name {cls.name!r}")
        for rel in self.relationships:
            for endpoint in (rel.from_class, rel.to_class):
                if endpoint not in self.classes:
                    raise SchemaError(
                        f"relationship {rel.from_class}->{rel.to_class} references "
                        f"unknown class {endpoint!r}"
                    )
        components = self._components()
        if len(components) > 1:
            parts = "; ".join(",".join(sorted(c)) for c in components)
            raise SchemaError(f"schema is disconnected: components [{parts}]")
        adjacency: dict[str, list[str]] = {name: [] for name in self.classes}
        for rel in self.relationships:
            adjacency[rel.from_class].append(rel.to_class)
            adjacency[rel.to_class].append(rel.from_class)
        # Deterministic traversal order; duplicates removed for multi-edges.
        self._adjacency = {k: sorted(set(v)) for k, v in adjacency.items()}

    def _components(self) -> list[set[str]]:
        remaining = set(self.classes)
        neighbors: dict[str, set[str]] = {name: set() for name in self.classes}
        for rel in self.relationships:
            neighbors[rel.from_class].add(rel.to_class)
            neighbors[rel.to_class].add(rel.from_class)
        components = []
        while remaining:
            start = next(iter(remaining))
            seen = {start}
            stack = [start]
            while stack:
                node = stack.pop()
                for nb in neighbors[node]:
                    if nb not in seen:
                        seen.add(nb)
                        stack.append(nb)
            components.append(seen)
            remaining -= seen
        return components

    def class_names(self) -> list[str]:
        return list(self.classes)

    def neighbors(self, cls: str) -> list[str]:
        """Classes adjacent to `cls`, sorted by name."""
        return self._adjacency[cls]

    def has_attribute(self, cls: str, attribute: str) -> bool:
        c = self.classes.get(cls)
        return c is not None and any(a.name == attribute for a in c.attributes)

    def edge_between(self, a: str, b: str) -> Relationship:
        """The relationship connecting `a` and `b` (first declared wins)."""
        for rel in self.relationships:
            if rel.endpoints() == frozenset((a, b)):
                return rel
        raise KeyError(f"no relationship between {a!r} and {b!r}")


@dataclass(frozen=True)
class SchemaStats:
    class_count: int
    total_attributes: int
    unique_attributes: int
    edge_count: int


def schema_stats(g: SchemaGraph) -> SchemaStats:
    """Exact counts: classes, attributes (total and unique by name), edges."""
    names: list[str] = []
    for cls in g.classes.values():
        names.extend(a.name for a in cls.attributes)
    return SchemaStats(
        class_count=len(g.classes),
        total_attributes=len(names),
        unique_attributes=len(set(names)),
        edge_count=len(g.relationships),
    )


def _normalize_ident(raw: str, what: str) -> str:
    token = str(raw).strip().lower()
    if not _IDENT_RE.match(token):
        raise SchemaError(f"invalid {what} identifier {raw!r}")
    return token


def parse_schema_descriptor(text: str) -> SchemaGraph:
    """Parse the JSON descriptor format into a validated SchemaGraph.

    Descriptor layout::

        {"classes": [{"name": ..., "instance_count": ...,
                      "attributes": [{"name": ..., "value_kind": ...}]}],
         "relationships": [{"from": ..., "to": ..., "label": ...,
                            "from_column": ..., "to_column": ...}]}

    Identifiers are lowercased; collisions after normalization are an error.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"descriptor syntax error at line {exc.lineno}: {exc.msg}") from exc
    if not isinstance(doc, dict):
        raise SchemaError("descriptor root must be an object")
    classes: dict[str, ClassDef] = {}
    for entry in doc.get("classes", []):
        name = _normalize_ident(entry.get("name", ""), "class")
        if name in classes:
            raise SchemaError(f"duplicate class {name!r} after normalization")
        attrs = []
        for a in entry.get("attributes", []):
            attrs.append(
                AttributeDef(
                    name=_normalize_ident(a.get("name", ""), "attribute"),
                    value_kind=a.get("value_kind", "text"),
                )
            )
        classes[name] = ClassDef(
            name=name,
            attributes=tuple(attrs),
            instance_count=int(entry.get("instance_count", 0)),
        )
    relationships = []
    for entry in doc.get("relationships", []):
        from_cls = _normalize_ident(entry.get("from", ""), "class")
        to_cls = _normalize_ident(entry.get("to", ""), "class")
        for endpoint in (from_cls, to_cls):
            if endpoint not in classes:
                raise SchemaError(
                    f"relationship {from_cls!r}->{to_cls!r} references "
                    f"undeclared class {endpoint!r}"
                )
        relationships.append(
            Relationship(
                from_class=from_cls,
                to_class=to_cls,
                label=_normalize_ident(entry.get("label", ""), "label"),
                from_column=entry.get("from_column"),
                to_column=entry.get("to_column"),
            )
        )
    return SchemaGraph(classes=classes, relationships=relationships)


def serialize_schema_descriptor(g: SchemaGraph) -> str:
    """Inverse of parse_schema_descriptor: parse(serialize(g)) == g."""
    doc = {
        "classes": [
            {
                "name": cls.name,
                "instance_count": cls.instance_count,
                "attributes": [
                    {"name": a.name, "value_kind": a.value_kind} for a in cls.attributes
                ],
            }
            for cls in g.classes.values()
        ],
        "relationships": [
            {
                "from": rel.from_class,
                "to": rel.to_class,
                "label": rel.label,
                **({"from_column": rel.from_column} if rel.from_column else {}),
                **({"to_column": rel.to_column} if rel.to_column else {}),
            }
            for rel in g.relationships
        ],
    }
    return json.dumps(doc, indent=2) + "\n"


_SQL_TYPE_MAP = {
    "int": "integer",
    "integer": "integer",
    "bigint": "integer",
    "smallint": "integer",
    "tinyint": "integer",
    "serial": "integer",
    "float": "real",
    "double": "real",
    "decimal": "real",
    "numeric": "real",
    "real": "real",
    "bool": "boolean",
    "boolean": "boolean",
    "varchar": "text",
    "char": "text",
    "text": "text",
    "date": "text",
    "datetime": "text",
    "timestamp": "text",
}

_CREATE_RE = re.compile(r"CREATE\s+TABLE\s+`?(\w+)`?\s*\((.*?)\)\s*;", re.IGNORECASE | re.DOTALL)
_FK_RE = re.compile(
    r"FOREIGN\s+KEY\s*\(\s*`?(\w+)`?\s*\)\s*REFERENCES\s+`?(\w+)`?\s*(?:\(\s*`?(\w+)`?\s*\))?",
    re.IGNORECASE,
)


def sql_type_to_value_kind(sql_type: str) -> str:
    """Map a SQL column type to the descriptor value_kind (default text)."""
    base = sql_type.split("(")[0].strip().lower()
    return _SQL_TYPE_MAP.get(base, "text")


def _split_column_defs(body: str) -> list[str]:
    """Split a CREATE TABLE body on commas not nested in parentheses."""
    parts, depth, current = [], 0, []
    for ch in body:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == "," and depth == 0:
            parts.append("".join(current).strip())
            current = []
        else:
            current.append(ch)
    tail = "".join(current).strip()
    if tail:
        parts.append(tail)
    return parts


def import_sql_ddl(ddl: str) -> SchemaGraph:
    """Build a SchemaGraph from CREATE TABLE statements.

    One class per table (columns become attributes) and one relationship per
    FOREIGN KEY clause, labeled with the referencing column.
    """
    classes: dict[str, ClassDef] = {}
    pending_fks: list[tuple[str, str, str, str | None]] = []
    consumed_spans: list[tuple[int, int]] = []
    for match in _CREATE_RE.finditer(ddl):
        consumed_spans.append(match.span())
        table = match.group(1).lower()
        if table in classes:
            raise SchemaError(f"duplicate table {table!r}")
        attrs = []
        for col_def in _split_column_defs(match.group(2)):
            upper = col_def.upper()
            if upper.startswith(("PRIMARY ", "UNIQUE ", "KEY ", "INDEX ", "CONSTRAINT ")):
                fk = _FK_RE.search(col_def)
                if fk:
                    pending_fks.append((table, fk.group(1).lower(), fk.group(2).lower(),
                                        fk.group(3).lower() if fk.group(3) else None))
                continue
            if upper.startswith("FOREIGN "):
                fk = _FK_RE.search(col_def)
                if not fk:
                    line = ddl[: match.start()].count("\n") + 1
                    raise SchemaError(f"unparseable FOREIGN KEY clause near line {line}: {col_def!r}")
                pending_fks.append((table, fk.group(1).lower(), fk.group(2).lower(),
                                    fk.group(3).lower() if fk.group(3) else None))
                continue
            parts = col_def.split()
            if len(parts) < 2:
                line = ddl[: match.start()].count("\n") + 1
                raise SchemaError(f"unparseable column near line {line}: {col_def!r}")
            attrs.append(
                AttributeDef(
                    name=parts[0].strip("`").lower(),
                    value_kind=sql_type_to_value_kind(parts[1]),
                )
            )
        classes[table] = ClassDef(name=table, attributes=tuple(attrs))
    leftover = ddl
    for start, end in sorted(consumed_spans, reverse=True):
        leftover = leftover[:start] + leftover[end:]
    stray = [ln for ln in leftover.splitlines() if ln.strip() and not ln.strip().startswith("--")]
    if stray:
        line = ddl.splitlines().index(stray[0]) + 1 if stray[0] in ddl.splitlines() else 0
        raise SchemaError(f"unparseable statement at line {line}: {stray[0].strip()!r}")
    relationships = []
    for table, column, ref_table, ref_column in pending_fks:
        if ref_table not in classes:
            raise SchemaError(
                f"table {table!r}: REFERENCES undeclared table {ref_table!r}"
            )
        relationships.append(
            Relationship(
                from_class=table,
                to_class=ref_table,
                label=column,
                to_column=ref_column,
            )
        )
    return SchemaGraph(classes=classes, relationships=relationships)
