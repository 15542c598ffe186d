"""Encoder-decoder Transformer for sentence-to-token-sequence translation.

Implemented from first principles on top of torch tensor ops: multi-head
scaled dot-product attention, sinusoidal position encodings, residual
connections with post-sublayer layer norm, and a causal decoder.  The
forward pass returns log-probabilities so the loss and the beam decoder
share one normalization.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import torch
from torch import nn

from .vocab import PAD_ID


@dataclass(frozen=True)
class ModelConfig:
    """Architecture plus the training knobs that travel with a checkpoint."""

    n_layers: int = 2
    n_heads: int = 4
    model_dim: int = 128
    feedforward_dim: int = 512
    dropout_rate: float = 0.1
    max_sequence_length: int = 160
    warmup_steps: int = 400
    lr_factor: float = 1.0
    batch_size: int = 64
    early_stopping_patience: int = 5
    beam_size: int = 5
    label_smoothing: float = 0.1

    def __post_init__(self) -> None:
        if self.model_dim % self.n_heads != 0:
            raise ValueError(
                f"model_dim {self.model_dim} not divisible by "
                f"n_heads {self.n_heads}"
            )
        if self.beam_size < 1:
            raise ValueError("beam_size must be >= 1")
        if not 0.0 <= self.label_smoothing < 1.0:
            raise ValueError("label_smoothing must lie in [0, 1)")


class SequenceTooLongError(ValueError):
    pass


def sinusoidal_positions(length: int, dim: int) -> torch.Tensor:
    """The fixed sin/cos position table, shape (length, dim)."""
    position = torch.arange(length, dtype=torch.float64).unsqueeze(1)
    div = torch.exp(
        torch.arange(0, dim, 2, dtype=torch.float64) * (-math.log(10000.0) / dim)
    )
    table = torch.zeros(length, dim, dtype=torch.float64)
    table[:, 0::2] = torch.sin(position * div)
    table[:, 1::2] = torch.cos(position * div)
    return table


class MultiHeadAttention(nn.Module):
    def __init__(self, dim: int, n_heads: int, dropout: float) -> None:
        super().__init__()
        self.n_heads = n_heads
        self.head_dim = dim // n_heads
        self.query_proj = nn.Linear(dim, dim)
        self.key_proj = nn.Linear(dim, dim)
        self.value_proj = nn.Linear(dim, dim)
        self.out_proj = nn.Linear(dim, dim)
        self.dropout = nn.Dropout(dropout)

    def forward(
        self,
        query: torch.Tensor,
        key: torch.Tensor,
        value: torch.Tensor,
        mask: torch.Tensor | None,
    ) -> torch.Tensor:
        """mask: broadcastable to (B, heads, Tq, Tk), True = may attend."""
        batch, q_len, dim = query.shape
        k_len = key.shape[1]

        def split(x: torch.Tensor, length: int) -> torch.Tensor:
            return (
                x.view(batch, length, self.n_heads, self.head_dim)
                .transpose(1, 2)
            )

        q = split(self.query_proj(query), q_len)
        k = split(self.key_proj(key), k_len)
        v = split(self.value_proj(value), k_len)

        scores = q @ k.transpose(-2, -1) / math.sqrt(self.head_dim)
        if mask is not None:
            scores = scores.masked_fill(~mask, float("-inf"))
        weights = self.dropout(torch.softmax(scores, dim=-1))
        mixed = (weights @ v).transpose(1, 2).reshape(batch, q_len, dim)
        return self.out_proj(mixed)


class FeedForward(nn.Module):
    def __init__(self, dim: int, hidden: int, dropout: float) -> None:
        super().__init__()
        self.inner = nn.Linear(dim, hidden)
        self.outer = nn.Linear(hidden, dim)
        self.dropout = nn.Dropout(dropout)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.outer(self.dropout(torch.relu(self.inner(x))))


class EncoderLayer(nn.Module):
    def __init__(self, config: ModelConfig) -> None:
        super().__init__()
        d = config.model_dim
        self.self_attn = MultiHeadAttention(d, config.n_heads, config.dropout_rate)
        self.ffn = FeedForward(d, config.feedforward_dim, config.dropout_rate)
        self.norm_attn = nn.LayerNorm(d)
        self.norm_ffn = nn.LayerNorm(d)
        self.dropout = nn.Dropout(config.dropout_rate)

    def forward(self, x: torch.Tensor, src_mask: torch.Tensor) -> torch.Tensor:
        x = self.norm_attn(x + self.dropout(self.self_attn(x, x, x, src_mask)))
        return self.norm_ffn(x + self.dropout(self.ffn(x)))


class DecoderLayer(nn.Module):
    def __init__(self, config: ModelConfig) -> None:
        super().__init__()
        d = config.model_dim
        self.self_attn = MultiHeadAttention(d, config.n_heads, config.dropout_rate)
        self.cross_attn = MultiHeadAttention(d, config.n_heads, config.dropout_rate)
        self.ffn = FeedForward(d, config.feedforward_dim, config.dropout_rate)
        self.norm_self = nn.LayerNorm(d)
        self.norm_cross = nn.LayerNorm(d)
        self.norm_ffn = nn.LayerNorm(d)
        self.dropout = nn.Dropout(config.dropout_rate)

    def forward(
        self,
        x: torch.Tensor,
        memory: torch.Tensor,
        tgt_mask: torch.Tensor,
        memory_mask: torch.Tensor,
    ) -> torch.Tensor:
        x = self.norm_self(x + self.dropout(self.self_attn(x, x, x, tgt_mask)))
        x = self.norm_cross(
            x + self.dropout(self.cross_attn(x, memory, memory, memory_mask))
        )
        return self.norm_ffn(x + self.dropout(self.ffn(x)))


class TransformerModel(nn.Module):
    """Full encoder-decoder; ``forward`` maps id batches to log-probs."""

    def __init__(self, config: ModelConfig, src_vocab: int, tgt_vocab: int) -> None:
        super().__init__()
        self.config = config
        d = config.model_dim
        self.src_embed = nn.Embedding(src_vocab, d, padding_idx=PAD_ID)
        self.tgt_embed = nn.Embedding(tgt_vocab, d, padding_idx=PAD_ID)
        table = sinusoidal_positions(config.max_sequence_length, d).to(torch.float32)
        self.register_buffer("positions", table, persistent=False)
        self.embed_dropout = nn.Dropout(config.dropout_rate)
        self.encoder = nn.ModuleList(
            EncoderLayer(config) for _ in range(config.n_layers)
        )
        self.decoder = nn.ModuleList(
            DecoderLayer(config) for _ in range(config.n_layers)
        )
        self.generator = nn.Linear(d, tgt_vocab)

    def _embed(self, ids: torch.Tensor, table: nn.Embedding) -> torch.Tensor:
        length = ids.shape[1]
        if length > self.config.max_sequence_length:
            raise SequenceTooLongError(
                f"sequence length {length} exceeds the configured maximum "
                f"{self.config.max_sequence_length}"
            )
        scale = math.sqrt(self.config.model_dim)
        positions = self.positions[:length].to(dtype=table.weight.dtype)
        return self.embed_dropout(table(ids) * scale + positions)

    def encode(self, src: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        # (B, 1, 1, S): every query may attend any non-PAD source position.
        src_mask = (src != PAD_ID)[:, None, None, :]
        x = self._embed(src, self.src_embed)
        for layer in self.encoder:
            x = layer(x, src_mask)
        return x, src_mask

    def decode(
        self, memory: torch.Tensor, memory_mask: torch.Tensor, tgt: torch.Tensor
    ) -> torch.Tensor:
        t = tgt.shape[1]
        causal = torch.tril(
            torch.ones(t, t, dtype=torch.bool, device=tgt.device)
        )
        tgt_mask = causal[None, None, :, :] & (tgt != PAD_ID)[:, None, None, :]
        x = self._embed(tgt, self.tgt_embed)
        for layer in self.decoder:
            x = layer(x, memory, tgt_mask, memory_mask)
        return x

    def forward(self, src: torch.Tensor, tgt_in: torch.Tensor) -> torch.Tensor:
        """Log-probabilities of the next target token, (B, T, |tgt vocab|)."""
        memory, memory_mask = self.encode(src)
        hidden = self.decode(memory, memory_mask, tgt_in)
        return torch.log_softmax(self.generator(hidden), dim=-1)


def make_model(
    config: ModelConfig, src_vocab_size: int, tgt_vocab_size: int, seed: int = 0
) -> TransformerModel:
    """Build a model with seeded Xavier initialization."""
    torch.manual_seed(seed)
    model = TransformerModel(config, src_vocab_size, tgt_vocab_size)
    for name, parameter in model.named_parameters():
        if parameter.dim() > 1:
            nn.init.xavier_uniform_(parameter)
    with torch.no_grad():
        model.src_embed.weight[PAD_ID].zero_()
        model.tgt_embed.weight[PAD_ID].zero_()
    return model
