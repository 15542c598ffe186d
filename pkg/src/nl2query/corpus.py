"""Corpus materialization, splitting, holdout, and overlap analysis.

A corpus record pairs one synthetic English sentence with the token
serialization of its query graph, plus the class count of the walk that
produced it.  Splitting is 60/20/20 with one twist: every record whose
class count equals the corpus maximum is forced into the test split, so
the longest queries are never seen in training.
"""

from __future__ import annotations

import json
import pathlib
from dataclasses import dataclass

import numpy as np

from .english import SynonymTable, sample_rendering
from .querygraph import SEGMENT_SEPARATOR, QueryGraph, serialize_target

SPLIT_NAMES = ("train", "validation", "test")

#: Short split tags used in on-disk file names.
_FILE_TAGS = {"train": "train", "validation": "val", "test": "test"}

TRAIN_FRACTION = 0.6
VAL_FRACTION = 0.2


class SplitError(ValueError):
    """Raised when the 60/20/20 split and the holdout cannot coexist."""


@dataclass(frozen=True)
class CorpusRecord:
    source: str
    target: str
    class_count: int


@dataclass(frozen=True)
class ParallelCorpus:
    """Records plus a parallel tuple of split assignments."""

    records: tuple[CorpusRecord, ...]
    assignments: tuple[str, ...]

    def __post_init__(self) -> None:
        if len(self.records) != len(self.assignments):
            raise ValueError("one assignment per record required")
        bad = set(self.assignments) - set(SPLIT_NAMES)
        if bad:
            raise ValueError(f"unknown split names: {sorted(bad)}")

    def split(self, name: str) -> list[CorpusRecord]:
        if name not in SPLIT_NAMES:
            raise ValueError(f"unknown split {name!r}")
        return [
            record
            for record, assigned in zip(self.records, self.assignments)
            if assigned == name
        ]

    def sizes(self) -> dict[str, int]:
        return {name: len(self.split(name)) for name in SPLIT_NAMES}


def materialize_records(
    pairs: list[tuple[QueryGraph, int]],
    seed: int,
    table: SynonymTable | None = None,
) -> list[CorpusRecord]:
    """Render each generated query into a (sentence, target) record.

    Record ``i`` uses the substream ``[seed, i]`` so the corpus text is
    reproducible record-by-record.
    """
    records = []
    for index, (query, class_count) in enumerate(pairs):
        rng = np.random.default_rng([seed, index])
        sentence = sample_rendering(query, rng, table)
        records.append(CorpusRecord(sentence, serialize_target(query), class_count))
    return records


def split_dataset(records: list[CorpusRecord], seed: int) -> ParallelCorpus:
    """Assign records to train/validation/test.

    The maximum-class-count bucket goes to test first; the remainder is
    shuffled with ``seed`` and dealt out so the global proportions are
    60/20/20 up to rounding.
    """
    if not records:
        raise SplitError("cannot split an empty corpus")
    n = len(records)
    n_test = round((1.0 - TRAIN_FRACTION - VAL_FRACTION) * n)
    n_val = round(VAL_FRACTION * n)

    cap = max(record.class_count for record in records)
    cap_indices = [i for i, r in enumerate(records) if r.class_count == cap]
    if len(cap_indices) > n_test:
        raise SplitError(
            f"{len(cap_indices)} records have the maximum class count {cap}, "
            f"but the test split holds only {n_test} of {n} records; "
            f"the holdout would overflow the 20% test share"
        )

    rest = [i for i, r in enumerate(records) if r.class_count != cap]
    rng = np.random.default_rng(seed)
    rest = [rest[j] for j in rng.permutation(len(rest))]

    fill = n_test - len(cap_indices)
    assignment = ["train"] * n
    for i in cap_indices:
        assignment[i] = "test"
    for i in rest[:fill]:
        assignment[i] = "test"
    for i in rest[fill : fill + n_val]:
        assignment[i] = "validation"
    return ParallelCorpus(tuple(records), tuple(assignment))


def write_parallel_files(pc: ParallelCorpus, directory: str | pathlib.Path) -> None:
    """Write src-/tgt- line files per split, plus a class-count sidecar.

    The six ``src-{train,val,test}.txt`` / ``tgt-...`` files are the
    OpenNMT-style interchange format; ``splits.json`` additionally records
    each line's class count so per-length reports survive a round trip.
    """
    directory = pathlib.Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    meta: dict[str, list[int]] = {}
    for name in SPLIT_NAMES:
        tag = _FILE_TAGS[name]
        rows = pc.split(name)
        src = "".join(r.source + "\n" for r in rows)
        tgt = "".join(r.target + "\n" for r in rows)
        (directory / f"src-{tag}.txt").write_text(src, encoding="utf-8")
        (directory / f"tgt-{tag}.txt").write_text(tgt, encoding="utf-8")
        meta[name] = [r.class_count for r in rows]
    (directory / "splits.json").write_text(
        json.dumps(meta, indent=2) + "\n", encoding="utf-8"
    )


def read_parallel_files(directory: str | pathlib.Path) -> ParallelCorpus:
    """Rebuild a ParallelCorpus from a directory written by this module.

    Records come back grouped by split (train, validation, test).  When the
    ``splits.json`` sidecar is missing, each record's class count falls back
    to the number of distinct classes named in its target line.
    """
    directory = pathlib.Path(directory)
    meta: dict[str, list[int]] | None = None
    meta_path = directory / "splits.json"
    if meta_path.exists():
        meta = json.loads(meta_path.read_text(encoding="utf-8"))

    records: list[CorpusRecord] = []
    assignment: list[str] = []
    for name in SPLIT_NAMES:
        tag = _FILE_TAGS[name]
        src_lines = (directory / f"src-{tag}.txt").read_text(encoding="utf-8").splitlines()
        tgt_lines = (directory / f"tgt-{tag}.txt").read_text(encoding="utf-8").splitlines()
        if len(src_lines) != len(tgt_lines):
            raise ValueError(
                f"split {name!r}: {len(src_lines)} source lines but "
                f"{len(tgt_lines)} target lines"
            )
        counts = meta[name] if meta else [_classes_in_target(t) for t in tgt_lines]
        if len(counts) != len(src_lines):
            raise ValueError(f"split {name!r}: sidecar length mismatch")
        for src, tgt, nc in zip(src_lines, tgt_lines, counts):
            records.append(CorpusRecord(src, tgt, nc))
            assignment.append(name)
    return ParallelCorpus(tuple(records), tuple(assignment))


def _classes_in_target(target: str) -> int:
    return len({seg.split()[0] for seg in target.split(SEGMENT_SEPARATOR) if seg.split()})


def record_key(target: str) -> tuple[frozenset[str], frozenset[tuple[str, str]]]:
    """Overlap key: (classes mentioned, reported pairs), constraints ignored.

    Derived purely from the target token sequence so it applies equally to
    reference and predicted targets.
    """
    classes: set[str] = set()
    pairs: set[tuple[str, str]] = set()
    for segment in target.split(SEGMENT_SEPARATOR):
        tokens = segment.split()
        if not tokens:
            continue
        classes.add(tokens[0])
        if len(tokens) == 2:
            pairs.add((tokens[0], tokens[1]))
    return frozenset(classes), frozenset(pairs)


def overlap_analysis(pc: ParallelCorpus) -> dict[int, float]:
    """Per-class-count fraction of test records whose key occurs in train."""
    train_keys = {record_key(r.target) for r in pc.split("train")}
    by_count: dict[int, list[CorpusRecord]] = {}
    for record in pc.split("test"):
        by_count.setdefault(record.class_count, []).append(record)
    return {
        nc: sum(1 for r in rows if record_key(r.target) in train_keys) / len(rows)
        for nc, rows in sorted(by_count.items())
    }
