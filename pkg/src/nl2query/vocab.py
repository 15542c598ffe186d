"""Token vocabularies and optional pretrained embedding initialization."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field

import numpy as np

from .corpus import ParallelCorpus

PAD_TOKEN, BOS_TOKEN, EOS_TOKEN, UNK_TOKEN = "<pad>", "<bos>", "<eos>", "<unk>"
PAD_ID, BOS_ID, EOS_ID, UNK_ID = 0, 1, 2, 3
RESERVED_TOKENS = (PAD_TOKEN, BOS_TOKEN, EOS_TOKEN, UNK_TOKEN)


class VocabularyError(ValueError):
    pass


@dataclass(frozen=True)
class Vocabulary:
    """Bijective token/id map with four fixed reserved ids."""

    id_to_token: tuple[str, ...]
    token_to_id: dict[str, int] = field(repr=False)

    def __post_init__(self) -> None:
        if self.id_to_token[: len(RESERVED_TOKENS)] != RESERVED_TOKENS:
            raise VocabularyError("reserved tokens must occupy ids 0..3")
        if len(set(self.id_to_token)) != len(self.id_to_token):
            raise VocabularyError("duplicate tokens in vocabulary")

    @classmethod
    def from_tokens(cls, tokens: list[str]) -> "Vocabulary":
        ordered = RESERVED_TOKENS + tuple(t for t in tokens if t not in RESERVED_TOKENS)
        return cls(ordered, {t: i for i, t in enumerate(ordered)})

    def __len__(self) -> int:
        return len(self.id_to_token)

    def __contains__(self, token: str) -> bool:
        return token in self.token_to_id

    def encode(self, tokens: list[str]) -> list[int]:
        return [self.token_to_id.get(t, UNK_ID) for t in tokens]

    def decode(self, ids: list[int], keep_reserved: bool = False) -> list[str]:
        tokens = [self.id_to_token[i] for i in ids]
        if keep_reserved:
            return tokens
        return [t for t in tokens if t not in RESERVED_TOKENS]


def build_vocab(
    pc: ParallelCorpus, min_count: int = 1
) -> tuple[Vocabulary, Vocabulary]:
    """Build source and target vocabularies from the training split only.

    Tokens seen fewer than ``min_count`` times are left out and will encode
    to UNK.  Tokens are ordered by descending count, ties alphabetical, so
    the result is independent of record order.
    """
    train = pc.split("train")
    if not train:
        raise VocabularyError("training split is empty")
    source_counts: Counter[str] = Counter()
    target_counts: Counter[str] = Counter()
    for record in train:
        source_counts.update(record.source.split())
        target_counts.update(record.target.split())

    def keep(counts: Counter[str]) -> list[str]:
        kept = [t for t, c in counts.items() if c >= min_count]
        return sorted(kept, key=lambda t: (-counts[t], t))

    return (
        Vocabulary.from_tokens(keep(source_counts)),
        Vocabulary.from_tokens(keep(target_counts)),
    )


def load_pretrained_embeddings(
    path, vocab: Vocabulary, dim: int, seed: int = 0
) -> tuple[np.ndarray, int]:
    """Initialize an embedding matrix from a textual word-vector file.

    The file holds one ``token f1 ... f<dim>`` line per word; a leading
    ``count dim`` header line is tolerated.  Rows for tokens missing from
    the file (and all reserved tokens) are random-initialized.  Returns the
    matrix and the number of vocabulary tokens matched.
    """
    rng = np.random.default_rng(seed)
    matrix = rng.normal(0.0, dim ** -0.5, size=(len(vocab), dim)).astype(np.float64)
    matrix[PAD_ID] = 0.0
    matched = 0
    with open(path, "r", encoding="utf-8") as handle:
        for lineno, raw in enumerate(handle, start=1):
            parts = raw.rstrip("\n").split(" ")
            if not raw.strip():
                continue
            if lineno == 1 and len(parts) == 2:
                try:
                    int(parts[0]), int(parts[1])
                except ValueError:
                    pass
                else:
                    if int(parts[1]) != dim:
                        raise VocabularyError(
                            f"line 1: file declares dimension {parts[1]}, expected {dim}"
                        )
                    continue
            token, values = parts[0], parts[1:]
            if len(values) != dim:
                raise VocabularyError(
                    f"line {lineno}: expected {dim} values for {token!r}, "
                    f"got {len(values)}"
                )
            if token in vocab.token_to_id and token not in RESERVED_TOKENS:
                try:
                    row = np.array([float(v) for v in values], dtype=np.float64)
                except ValueError as exc:
                    raise VocabularyError(f"line {lineno}: {exc}") from exc
                matrix[vocab.token_to_id[token]] = row
                matched += 1
    return matrix, matched
