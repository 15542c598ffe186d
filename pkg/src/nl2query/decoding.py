"""Beam-search prediction from a trained checkpoint."""

from __future__ import annotations

from dataclasses import dataclass

import torch

from .checkpoint import Checkpoint, build_model
from .querygraph import QueryGraph, TargetParseError, parse_target
from .schema import SchemaGraph
from .transformer import TransformerModel
from .vocab import BOS_ID, EOS_ID, PAD_ID

#: Exponent of the length normalization applied to beam scores.
LENGTH_NORM_POWER = 0.6


@dataclass(frozen=True)
class Beam:
    token_ids: tuple[int, ...]
    log_prob: float
    finished: bool

    def score(self) -> float:
        return self.log_prob / max(len(self.token_ids), 1) ** LENGTH_NORM_POWER


def beam_predict(
    sentence: str,
    ckpt: Checkpoint,
    k: int,
    model: TransformerModel | None = None,
) -> list[tuple[str, float]]:
    """Top-``k`` target token sequences with length-normalized scores.

    Pass ``model`` (from ``checkpoint.build_model``) to amortize model
    construction over many calls; otherwise it is built per call.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if model is None:
        model = build_model(ckpt)

    source_ids = ckpt.source_vocab.encode(sentence.lower().split()) + [EOS_ID]
    src = torch.tensor([source_ids], dtype=torch.long)
    with torch.no_grad():
        memory, memory_mask = model.encode(src)

        beams = [Beam((), 0.0, False)]
        max_steps = ckpt.config.max_sequence_length - 1
        for _ in range(max_steps):
            active = [b for b in beams if not b.finished]
            if not active:
                break
            tgt_in = torch.tensor(
                [(BOS_ID,) + b.token_ids for b in active], dtype=torch.long
            )
            n = len(active)
            hidden = model.decode(
                memory.expand(n, -1, -1), memory_mask.expand(n, -1, -1, -1), tgt_in
            )
            log_probs = torch.log_softmax(
                model.generator(hidden[:, -1, :]), dim=-1
            )
            # PAD is never a legal continuation.
            log_probs[:, PAD_ID] = float("-inf")
            width = min(k, log_probs.shape[1] - 1)
            top = torch.topk(log_probs, width, dim=-1)

            pool = [b for b in beams if b.finished]
            for row, beam in enumerate(active):
                for col in range(width):
                    token = int(top.indices[row, col])
                    log_prob = beam.log_prob + float(top.values[row, col])
                    pool.append(
                        Beam(beam.token_ids + (token,), log_prob, token == EOS_ID)
                    )
            pool.sort(key=lambda b: -b.score())
            beams = pool[:k]

        beams = [b if b.finished else Beam(b.token_ids + (EOS_ID,), b.log_prob, True)
                 for b in beams]
        beams.sort(key=lambda b: -b.score())

    results = []
    for beam in beams[:k]:
        tokens = ckpt.target_vocab.decode(list(beam.token_ids))
        results.append((" ".join(tokens), beam.score()))
    return results


@dataclass(frozen=True)
class PredictedQuery:
    target: str
    score: float
    query: QueryGraph


@dataclass(frozen=True)
class PredictionSet:
    """Parsed beam candidates in beam order, plus any parse failures."""

    candidates: tuple[PredictedQuery, ...]
    failures: tuple[tuple[str, str], ...]


def predict_query_graphs(
    sentence: str,
    ckpt: Checkpoint,
    schema: SchemaGraph,
    k: int,
    model: TransformerModel | None = None,
) -> PredictionSet:
    """Decode, then parse each beam into a connected query graph.

    Beams that do not parse against the schema are dropped from the
    candidate list and reported in ``failures`` with the parser's reason.
    Beams that parse to a query graph already produced by a higher-scoring
    beam (the same pairs and triples serialized in a different segment
    order) are dropped silently, so the candidate list holds distinct
    queries — asking for three suggestions yields three different queries,
    not one query spelled three ways.
    """
    candidates: list[PredictedQuery] = []
    failures: list[tuple[str, str]] = []
    seen: set[tuple[frozenset, frozenset]] = set()
    for target, score in beam_predict(sentence, ckpt, k, model=model):
        try:
            query = parse_target(target, schema)
        except TargetParseError as exc:
            failures.append((target, str(exc)))
        else:
            key = (query.reported_set(), query.constraint_set())
            if key in seen:
                continue
            seen.add(key)
            candidates.append(PredictedQuery(target, score, query))
    return PredictionSet(tuple(candidates), tuple(failures))
