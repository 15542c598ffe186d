"""Parametric random-walk synthesis of query graphs from a schema graph.

Each query is produced by a self-avoiding walk: a uniformly chosen start
class, per-attribute Bernoulli draws for reporting and constraining, and a
traversal dice that decides whether to pull one more neighboring class into
the query until refusal, neighbor exhaustion or the class cap.
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .querygraph import Constraint, ConstraintOp, QueryGraph, VALUE_PLACEHOLDER
from .schema import Relationship, SchemaGraph

VALUE_MODES = ("placeholder", "sampled")


class GenerationError(ValueError):
    """Raised for invalid generation parameters or unreachable targets."""


def _uniform_op_weights() -> dict[ConstraintOp, float]:
    return {op: 1.0 for op in ConstraintOp}


@dataclass(frozen=True)
class GenParams:
    """Stochastic generation parameters; defaults follow the standard setup
    (attribute 0.25, constraint 0.05, traversal 0.5)."""

    n_queries: int = 1000
    attribute_choice_probability: float = 0.25
    constraint_choice_probability: float = 0.05
    graph_traversal_probability: float = 0.5
    cap_classes: int = 3
    op_weights: dict[ConstraintOp, float] = field(default_factory=_uniform_op_weights)
    value_mode: str = "sampled"
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_queries < 1:
            raise GenerationError("n_queries must be positive")
        for name in (
            "attribute_choice_probability",
            "constraint_choice_probability",
            "graph_traversal_probability",
        ):
            p = getattr(self, name)
            if not 0.0 <= p <= 1.0:
                raise GenerationError(f"{name} must be in [0, 1], got {p}")
        if self.cap_classes < 1:
            raise GenerationError("cap_classes must be >= 1")
        if self.value_mode not in VALUE_MODES:
            raise GenerationError(f"unknown value_mode {self.value_mode!r}")
        if not self.op_weights or sum(self.op_weights.values()) <= 0:
            raise GenerationError("op_weights must have positive total weight")


@dataclass(frozen=True)
class GeneratedQuery:
    """A generated query plus bookkeeping about the walk that produced it.

    `forced_report` names the pair injected when a finished walk carried no
    pairs and no triples; None when the walk produced payload on its own.
    """

    query: QueryGraph
    forced_report: tuple[str, str] | None = None


@lru_cache(maxsize=1)
def load_lexicon() -> tuple[str, ...]:
    """The bundled word list used to sample text constraint values."""
    text = (
        importlib.resources.files("nl2query.data").joinpath("lexicon.txt").read_text()
    )
    words = tuple(w for w in text.split() if w)
    return words


def _sample_ops_order(p: GenParams) -> tuple[list[ConstraintOp], np.ndarray]:
    ops = sorted(p.op_weights, key=lambda op: op.token)
    weights = np.array([p.op_weights[op] for op in ops], dtype=float)
    return ops, np.cumsum(weights / weights.sum())


def _sample_value(kind: str, mode: str, rng: np.random.Generator) -> str:
    if mode == "placeholder":
        return VALUE_PLACEHOLDER
    if kind == "integer":
        return str(int(rng.integers(0, 10001)))
    if kind == "real":
        return f"{rng.uniform(0.0, 10000.0):.2f}"
    if kind == "boolean":
        return "true" if rng.integers(0, 2) == 1 else "false"
    lexicon = load_lexicon()
    n_words = 2 if rng.random() < 0.3 else 1
    picks = [lexicon[int(rng.integers(0, len(lexicon)))] for _ in range(n_words)]
    return "_".join(picks)


def generate_query_detailed(
    g: SchemaGraph, p: GenParams, rng: np.random.Generator
) -> GeneratedQuery:
    """One random walk; see generate_query for the plain QueryGraph variant."""
    ops, op_cumulative = _sample_ops_order(p)
    class_names = g.class_names()
    start = class_names[int(rng.integers(0, len(class_names)))]
    visited: list[str] = [start]
    tree_edges: list[Relationship] = []
    reported: list[tuple[str, str]] = []
    constraints: list[tuple[str, str, Constraint]] = []
    current = start
    while True:
        attrs = g.classes[current].attributes
        report_draws = rng.random(len(attrs))
        constrain_draws = rng.random(len(attrs))
        for i, attr in enumerate(attrs):
            if report_draws[i] < p.attribute_choice_probability:
                reported.append((current, attr.name))
            if constrain_draws[i] < p.constraint_choice_probability:
                op = ops[int(np.searchsorted(op_cumulative, rng.random(), side="right"))]
                value = _sample_value(attr.value_kind, p.value_mode, rng)
                constraints.append((current, attr.name, Constraint(op, value)))
        if len(visited) >= p.cap_classes:
            break
        if rng.random() >= p.graph_traversal_probability:
            break
        fresh = [n for n in g.neighbors(current) if n not in visited]
        if not fresh:
            break
        nxt = fresh[int(rng.integers(0, len(fresh)))]
        tree_edges.append(g.edge_between(current, nxt))
        visited.append(nxt)
        current = nxt
    forced: tuple[str, str] | None = None
    if not reported and not constraints:
        attrs = g.classes[start].attributes
        attr = attrs[int(rng.integers(0, len(attrs)))]
        forced = (start, attr.name)
        reported.append(forced)
    query = QueryGraph(
        classes=tuple(visited),
        reported=tuple(reported),
        constraints=tuple(constraints),
        tree_edges=frozenset(tree_edges),
    )
    return GeneratedQuery(query=query, forced_report=forced)


def generate_query(g: SchemaGraph, p: GenParams, rng: np.random.Generator) -> QueryGraph:
    """Generate one random query graph from the schema."""
    return generate_query_detailed(g, p, rng).query


def _cap_reachable(g: SchemaGraph, cap: int) -> bool:
    """True when some self-avoiding walk visits `cap` distinct classes."""
    if cap <= 1:
        return True

    def extend(node: str, visited: set[str]) -> bool:
        if len(visited) == cap:
            return True
        for nb in g.neighbors(node):
            if nb not in visited:
                visited.add(nb)
                if extend(nb, visited):
                    return True
                visited.remove(nb)
        return False

    return any(extend(start, {start}) for start in g.class_names())


_MAX_REJECTIONS = 200_000


def _query_stream_for_index(
    g: SchemaGraph, p: GenParams, index: int, target_nc: int
) -> QueryGraph:
    """Rejection-sample the index's substream until the class count matches."""
    rng = np.random.default_rng([p.seed, index])
    for _ in range(_MAX_REJECTIONS):
        q = generate_query(g, p, rng)
        if q.class_count() == target_nc:
            return q
    raise GenerationError(
        f"bucket for class count {target_nc} not hit after {_MAX_REJECTIONS} draws; "
        "check traversal probability and schema shape"
    )


def generate_bucketed(
    g: SchemaGraph, p: GenParams, bucket_sizes: dict[int, int]
) -> list[tuple[QueryGraph, int]]:
    """Generate a corpus with an explicit number of queries per class count.

    Each output index owns an independent RNG substream derived from
    (seed, index), so generation may be parallelized without changing the
    result; order is by index either way.
    """
    for nc, size in bucket_sizes.items():
        if not 1 <= nc <= p.cap_classes:
            raise GenerationError(f"bucket class count {nc} outside 1..{p.cap_classes}")
        if size < 0:
            raise GenerationError(f"negative bucket size for class count {nc}")
    if max(bucket_sizes) > 1 and not _cap_reachable(g, max(bucket_sizes)):
        raise GenerationError(
            f"schema cannot produce queries with {max(bucket_sizes)} classes "
            "(no walk that long exists)"
        )
    targets: list[int] = []
    for nc in sorted(bucket_sizes):
        targets.extend([nc] * bucket_sizes[nc])
    out = []
    for index, target_nc in enumerate(targets):
        q = _query_stream_for_index(g, p, index, target_nc)
        out.append((q, target_nc))
    return out


def generate_corpus(g: SchemaGraph, p: GenParams) -> list[tuple[QueryGraph, int]]:
    """Class-count-normalized corpus: n_queries/cap_classes queries per count.

    Deterministic given the seed.  Errors before generation when n_queries is
    not divisible by cap_classes or the schema cannot reach the cap.
    """
    if p.n_queries % p.cap_classes != 0:
        raise GenerationError(
            f"n_queries={p.n_queries} not divisible by cap_classes={p.cap_classes}"
        )
    per_bucket = p.n_queries // p.cap_classes
    return generate_bucketed(
        g, p, {nc: per_bucket for nc in range(1, p.cap_classes + 1)}
    )
