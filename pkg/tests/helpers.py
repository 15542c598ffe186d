"""Shared test utilities: finite-difference gradient checking, an
independent SQL re-parser, and a sqlite-backed grammar check.  Used by both
the unit tests and the acceptance gate."""

from __future__ import annotations

import re
import sqlite3
from typing import Callable

import numpy as np
import torch

from nl2query.schema import SchemaGraph
from nl2query.vocab import PAD_ID


def finite_difference_max_rel_error(
    model: torch.nn.Module,
    compute_loss: Callable[[], torch.Tensor],
    n_samples: int = 220,
    eps: float = 1e-5,
    seed: int = 0,
) -> tuple[float, int]:
    """Compare analytic gradients against central finite differences.

    Samples ``n_samples`` scalar parameters uniformly (excluding the
    autograd-frozen PAD embedding rows, whose analytic gradient is zero by
    the padding_idx contract) and returns ``(max_error, n_checked)``.
    The error is ``|a - n| / max(|a|, |n|, 1e-5)``: relative for healthy
    gradients, absolute at 1e-9 for near-zero ones.

    The model must be in eval mode, use float64 parameters, and
    ``compute_loss`` must be deterministic.
    """
    model.zero_grad()
    loss = compute_loss()
    loss.backward()

    frozen: set[int] = set()
    params = []
    offset = 0
    for name, param in model.named_parameters():
        if not param.requires_grad:
            continue
        params.append(param)
        if name.endswith("embed.weight"):
            start = offset + PAD_ID * param.shape[1]
            frozen.update(range(start, start + param.shape[1]))
        offset += param.numel()
    total = offset

    rng = np.random.default_rng(seed)
    candidates = rng.permutation(total)
    picked: list[int] = []
    for flat in candidates:
        if int(flat) not in frozen:
            picked.append(int(flat))
        if len(picked) == n_samples:
            break

    sizes = [p.numel() for p in params]
    worst = 0.0
    with torch.no_grad():
        for flat in picked:
            index, which = flat, 0
            while index >= sizes[which]:
                index -= sizes[which]
                which += 1
            param = params[which]
            flat_view = param.view(-1)
            original = flat_view[index].item()

            flat_view[index] = original + eps
            upper = float(compute_loss())
            flat_view[index] = original - eps
            lower = float(compute_loss())
            flat_view[index] = original

            numeric = (upper - lower) / (2.0 * eps)
            analytic = float(param.grad.view(-1)[index])
            denom = max(abs(numeric), abs(analytic), 1e-5)
            worst = max(worst, abs(numeric - analytic) / denom)
    return worst, len(picked)


_JOIN_RE = re.compile(r"INNER JOIN (\w+) ON (\w+)\.(\w+) = (\w+)\.(\w+)")
_PREDICATE_RE = re.compile(r"(\w+)\.(\w+) (=|!=|<=|>=|<|>) (.+)")


def reparse_sql(sql: str) -> dict:
    """Structurally re-parse an emitted SELECT statement.

    Written independently of the emitter: it only assumes the documented
    line layout (SELECT, FROM, zero or more INNER JOINs, optional WHERE).
    Returns selected columns, the root table, join tuples, and predicate
    tuples (table, column, op, literal).
    """
    lines = sql.split("\n")
    if not lines[0].startswith("SELECT "):
        raise AssertionError(f"missing SELECT: {lines[0]!r}")
    select = set()
    for column in lines[0][len("SELECT "):].split(", "):
        table, _, attr = column.partition(".")
        if not table or not attr:
            raise AssertionError(f"unqualified select column {column!r}")
        select.add((table, attr))
    if not lines[1].startswith("FROM "):
        raise AssertionError(f"missing FROM: {lines[1]!r}")
    root = lines[1][len("FROM "):]
    joins = []
    predicates = set()
    for line in lines[2:]:
        if line.startswith("INNER JOIN "):
            match = _JOIN_RE.fullmatch(line)
            if not match:
                raise AssertionError(f"malformed join {line!r}")
            joins.append(match.groups())
        elif line.startswith("WHERE "):
            for clause in line[len("WHERE "):].split(" AND "):
                match = _PREDICATE_RE.fullmatch(clause)
                if not match:
                    raise AssertionError(f"malformed predicate {clause!r}")
                predicates.add(match.groups())
        else:
            raise AssertionError(f"unexpected line {line!r}")
    return {"select": select, "root": root, "joins": joins, "predicates": predicates}


def sqlite_connection_for(schema: SchemaGraph) -> sqlite3.Connection:
    """Materialize the schema as empty sqlite tables (attributes plus the
    join columns the relationships reference)."""
    conn = sqlite3.connect(":memory:")
    for name, cls in schema.classes.items():
        columns = {attribute.name for attribute in cls.attributes}
        for edge in schema.relationships:
            if edge.from_class == name:
                columns.add(edge.join_from_column)
            if edge.to_class == name:
                columns.add(edge.join_to_column)
        conn.execute(f'CREATE TABLE "{name}" ({", ".join(sorted(columns))})')
    return conn


def assert_sql_well_formed(conn: sqlite3.Connection, sql: str) -> None:
    """Fail if sqlite cannot prepare the statement against the schema.

    EXPLAIN forces a full parse, name resolution, and plan build without
    executing.  The @value parameter marker is bound to NULL because the
    Python driver refuses statements with unbound parameters.
    """
    bindings = {"value": None} if "@value" in sql else {}
    conn.execute("EXPLAIN " + sql, bindings)


def reparse_cypher(text: str) -> dict:
    """Structurally re-parse an emitted MATCH statement."""
    lines = text.split("\n")
    if not lines[0].startswith("MATCH "):
        raise AssertionError(f"missing MATCH: {lines[0]!r}")
    pattern = lines[0][len("MATCH "):]
    labels = dict(re.findall(r"\((\w+):(\w+)\)", pattern))
    edges = [
        (src, label, dst)
        for src, label, dst in re.findall(
            r"\((\w+)(?::\w+)?\)-\[:(\w+)\]->\((\w+)(?::\w+)?\)", pattern
        )
    ]
    predicates = set()
    returns = None
    for line in lines[1:]:
        if line.startswith("WHERE "):
            for clause in line[len("WHERE "):].split(" AND "):
                match = _PREDICATE_RE.fullmatch(clause)
                if not match:
                    raise AssertionError(f"malformed predicate {clause!r}")
                predicates.add(match.groups())
        elif line.startswith("RETURN "):
            returns = line[len("RETURN "):].split(", ")
        else:
            raise AssertionError(f"unexpected line {line!r}")
    if returns is None:
        raise AssertionError("missing RETURN")
    return {"labels": labels, "edges": edges, "predicates": predicates, "returns": returns}
