"""Accuracy metrics and machine-readable evaluation reports."""

from __future__ import annotations

import json
import pathlib
from typing import Sequence

from .querygraph import QueryGraph, query_graph_equal


def global_accuracy(
    predictions: Sequence[Sequence[QueryGraph]],
    truths: Sequence[QueryGraph],
    k: int,
) -> float:
    """Fraction of records whose top-``k`` candidates contain the truth.

    ``predictions[i]`` is the rank-ordered candidate list for record ``i``;
    entries beyond ``k`` are ignored.
    """
    if len(predictions) != len(truths):
        raise ValueError("one prediction list per truth required")
    if not truths:
        return 0.0
    hits = 0
    for candidates, truth in zip(predictions, truths):
        if any(query_graph_equal(c, truth) for c in candidates[:k]):
            hits += 1
    return hits / len(truths)


def component_accuracy(
    top1: Sequence[QueryGraph | None],
    truths: Sequence[QueryGraph],
) -> dict[str, float]:
    """Set-exact correctness of classes, attributes, and constraints.

    Compared on the classes that actually carry reported attributes or
    constraints, so connectivity repair never changes the score.  A record
    with no parseable top-1 candidate (``None``) is wrong on all three.
    """
    if len(top1) != len(truths):
        raise ValueError("one top-1 candidate per truth required")
    if not truths:
        return {"classes": 0.0, "attributes": 0.0, "constraints": 0.0}
    class_hits = attr_hits = constraint_hits = 0
    for candidate, truth in zip(top1, truths):
        if candidate is None:
            continue
        if set(candidate.mentioned_classes()) == set(truth.mentioned_classes()):
            class_hits += 1
        if candidate.reported_set() == truth.reported_set():
            attr_hits += 1
        if candidate.constraint_set() == truth.constraint_set():
            constraint_hits += 1
    n = len(truths)
    return {
        "classes": class_hits / n,
        "attributes": attr_hits / n,
        "constraints": constraint_hits / n,
    }


def per_class_count_report(
    predictions: Sequence[Sequence[QueryGraph]],
    truths: Sequence[QueryGraph],
    class_counts: Sequence[int],
    training_minutes: float | None = None,
    ks: Sequence[int] = (1, 3, 5),
) -> dict:
    """Full evaluation report: global and component accuracy plus a
    per-class-count breakdown of top-1 accuracy."""
    if not len(predictions) == len(truths) == len(class_counts):
        raise ValueError("predictions, truths, class_counts must align")
    by_count: dict[int, list[int]] = {}
    for index, nc in enumerate(class_counts):
        by_count.setdefault(int(nc), []).append(index)
    per_nc = {}
    for nc, indices in sorted(by_count.items()):
        acc = global_accuracy(
            [predictions[i] for i in indices], [truths[i] for i in indices], k=1
        )
        per_nc[nc] = {"count": len(indices), "accuracy": acc}
    top1 = [candidates[0] if candidates else None for candidates in predictions]
    return {
        "dataset_size": len(truths),
        "global_accuracy": {k: global_accuracy(predictions, truths, k) for k in ks},
        "component_accuracy": component_accuracy(top1, truths),
        "per_class_count": per_nc,
        "training_minutes": training_minutes,
    }


def write_report(report: dict, path: str | pathlib.Path) -> None:
    """Serialize a report to JSON (integer keys become strings)."""
    pathlib.Path(path).write_text(
        json.dumps(report, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def read_report(path: str | pathlib.Path) -> dict:
    """Read a report back, restoring the integer keys JSON stringified."""
    raw = json.loads(pathlib.Path(path).read_text(encoding="utf-8"))
    if "global_accuracy" in raw:
        raw["global_accuracy"] = {int(k): v for k, v in raw["global_accuracy"].items()}
    if "per_class_count" in raw:
        raw["per_class_count"] = {
            int(k): v for k, v in raw["per_class_count"].items()
        }
    return raw
