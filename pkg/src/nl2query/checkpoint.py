"""Self-contained binary model checkpoints.

One file carries everything prediction needs: a version header, the model
configuration, both vocabularies, and every weight tensor.  Layout:

* magic ``NLQCKPT\\0`` (8 bytes), format version (uint32 LE)
* header length (uint64 LE), then a UTF-8 JSON header holding the config,
  the two vocabularies, and free-form training metadata
* tensor count (uint32 LE), then per tensor, sorted by name:
  name length (uint32) + name bytes, dtype tag (uint8, 0 = float32),
  rank (uint8), dims (uint64 each), raw little-endian row-major data

The JSON header is emitted with sorted keys and fixed separators, and the
tensor section is sorted, so loading a file and saving it again reproduces
it byte for byte.
"""

from __future__ import annotations

import dataclasses
import json
import pathlib
import struct
from dataclasses import dataclass

import numpy as np
import torch

from .transformer import ModelConfig, TransformerModel, make_model
from .vocab import Vocabulary

MAGIC = b"NLQCKPT\x00"
FORMAT_VERSION = 1
_DTYPE_TAGS = {0: np.dtype("<f4")}


class CheckpointError(ValueError):
    pass


@dataclass(frozen=True)
class Checkpoint:
    config: ModelConfig
    source_vocab: Vocabulary
    target_vocab: Vocabulary
    weights: dict[str, np.ndarray]
    metadata: dict
    version: int = FORMAT_VERSION


def checkpoint_from_model(
    model: TransformerModel,
    source_vocab: Vocabulary,
    target_vocab: Vocabulary,
    metadata: dict,
) -> Checkpoint:
    weights = {
        name: tensor.detach().cpu().numpy().astype("<f4")
        for name, tensor in model.state_dict().items()
    }
    return Checkpoint(model.config, source_vocab, target_vocab, weights, dict(metadata))


def build_model(ckpt: Checkpoint) -> TransformerModel:
    """Materialize the checkpoint as an eval-mode model."""
    model = make_model(
        ckpt.config, len(ckpt.source_vocab), len(ckpt.target_vocab), seed=0
    )
    state = {
        name: torch.from_numpy(np.ascontiguousarray(array))
        for name, array in ckpt.weights.items()
    }
    model.load_state_dict(state)
    model.eval()
    return model


def save_checkpoint(ckpt: Checkpoint, path: str | pathlib.Path) -> None:
    header = {
        "config": dataclasses.asdict(ckpt.config),
        "source_vocab": list(ckpt.source_vocab.id_to_token),
        "target_vocab": list(ckpt.target_vocab.id_to_token),
        "metadata": ckpt.metadata,
    }
    header_bytes = json.dumps(header, sort_keys=True, separators=(",", ":")).encode()
    chunks = [MAGIC, struct.pack("<I", ckpt.version)]
    chunks.append(struct.pack("<Q", len(header_bytes)))
    chunks.append(header_bytes)
    chunks.append(struct.pack("<I", len(ckpt.weights)))
    for name in sorted(ckpt.weights):
        array = np.ascontiguousarray(ckpt.weights[name], dtype="<f4")
        encoded = name.encode()
        chunks.append(struct.pack("<I", len(encoded)))
        chunks.append(encoded)
        chunks.append(struct.pack("<BB", 0, array.ndim))
        chunks.append(struct.pack(f"<{array.ndim}Q", *array.shape))
        chunks.append(array.tobytes(order="C"))
    pathlib.Path(path).write_bytes(b"".join(chunks))


def load_checkpoint(path: str | pathlib.Path) -> Checkpoint:
    data = pathlib.Path(path).read_bytes()
    view = memoryview(data)
    offset = 0

    def take(count: int) -> memoryview:
        nonlocal offset
        if offset + count > len(data):
            raise CheckpointError("checkpoint truncated")
        piece = view[offset : offset + count]
        offset += count
        return piece

    if bytes(take(len(MAGIC))) != MAGIC:
        raise CheckpointError("not a model checkpoint (bad magic)")
    (version,) = struct.unpack("<I", take(4))
    if version != FORMAT_VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    (header_len,) = struct.unpack("<Q", take(8))
    header = json.loads(bytes(take(header_len)).decode())

    config = ModelConfig(**header["config"])
    source_vocab = _vocab_from_tokens(header["source_vocab"])
    target_vocab = _vocab_from_tokens(header["target_vocab"])

    (tensor_count,) = struct.unpack("<I", take(4))
    weights: dict[str, np.ndarray] = {}
    for _ in range(tensor_count):
        (name_len,) = struct.unpack("<I", take(4))
        name = bytes(take(name_len)).decode()
        tag, ndim = struct.unpack("<BB", take(2))
        if tag not in _DTYPE_TAGS:
            raise CheckpointError(f"tensor {name!r}: unknown dtype tag {tag}")
        dims = struct.unpack(f"<{ndim}Q", take(8 * ndim))
        dtype = _DTYPE_TAGS[tag]
        count = int(np.prod(dims, dtype=np.int64)) if ndim else 1
        array = np.frombuffer(take(count * dtype.itemsize), dtype=dtype)
        weights[name] = array.reshape(dims).copy()
    if offset != len(data):
        raise CheckpointError(f"{len(data) - offset} trailing bytes after tensors")
    return Checkpoint(config, source_vocab, target_vocab, weights, header["metadata"], version)


def _vocab_from_tokens(tokens: list[str]) -> Vocabulary:
    return Vocabulary(tuple(tokens), {t: i for i, t in enumerate(tokens)})
