"""Training loop: label-smoothed cross entropy, warmup learning-rate
schedule, early stopping on validation loss, and checkpoint export."""

from __future__ import annotations

import time
from typing import Callable

import numpy as np
import torch
from torch import nn

from .checkpoint import Checkpoint, checkpoint_from_model
from .corpus import CorpusRecord, ParallelCorpus
from .transformer import ModelConfig, TransformerModel, make_model
from .vocab import BOS_ID, EOS_ID, PAD_ID, Vocabulary, build_vocab


class TrainingDivergedError(RuntimeError):
    """Raised when the loss turns non-finite; carries where it happened."""

    def __init__(self, epoch: int, step: int, last_loss: float) -> None:
        super().__init__(
            f"non-finite training loss at epoch {epoch}, step {step}; "
            f"last finite loss was {last_loss:.4f}"
        )
        self.epoch = epoch
        self.step = step
        self.last_loss = last_loss


class LabelSmoothingLoss(nn.Module):
    """KL divergence against a smoothed one-hot distribution.

    The true token receives ``1 - smoothing``; the remainder is spread over
    the vocabulary excluding PAD and the true token.  PAD target positions
    contribute nothing.  Returns the mean loss per real token.
    """

    def __init__(self, vocab_size: int, smoothing: float) -> None:
        super().__init__()
        self.vocab_size = vocab_size
        self.smoothing = smoothing

    def forward(self, log_probs: torch.Tensor, targets: torch.Tensor) -> torch.Tensor:
        flat_logp = log_probs.reshape(-1, self.vocab_size)
        flat_tgt = targets.reshape(-1)
        keep = flat_tgt != PAD_ID
        flat_logp = flat_logp[keep]
        flat_tgt = flat_tgt[keep]
        smooth = self.smoothing / (self.vocab_size - 2)
        true_dist = torch.full_like(flat_logp, smooth)
        true_dist[:, PAD_ID] = 0.0
        true_dist.scatter_(1, flat_tgt.unsqueeze(1), 1.0 - self.smoothing)
        return -(true_dist * flat_logp).sum(dim=1).mean()


class WarmupSchedule:
    """lr = factor * d^-0.5 * min(step^-0.5, step * warmup^-1.5)."""

    def __init__(self, model_dim: int, warmup_steps: int, factor: float) -> None:
        self.model_dim = model_dim
        self.warmup_steps = warmup_steps
        self.factor = factor

    def rate(self, step: int) -> float:
        if step < 1:
            raise ValueError("schedule steps start at 1")
        return (
            self.factor
            * self.model_dim ** -0.5
            * min(step ** -0.5, step * self.warmup_steps ** -1.5)
        )


def encode_batch(
    records: list[CorpusRecord],
    source_vocab: Vocabulary,
    target_vocab: Vocabulary,
) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
    """Pad a record batch into (src, tgt_in, tgt_out) id tensors.

    Sources end with EOS; decoder input is BOS + target ids and decoder
    output is target ids + EOS, shifted by one as usual.
    """
    src_rows = [source_vocab.encode(r.source.split()) + [EOS_ID] for r in records]
    tgt_rows = [target_vocab.encode(r.target.split()) for r in records]
    src_len = max(len(row) for row in src_rows)
    tgt_len = max(len(row) for row in tgt_rows) + 1

    def pad(row: list[int], length: int) -> list[int]:
        return row + [PAD_ID] * (length - len(row))

    src = torch.tensor([pad(row, src_len) for row in src_rows], dtype=torch.long)
    tgt_in = torch.tensor(
        [pad([BOS_ID] + row, tgt_len) for row in tgt_rows], dtype=torch.long
    )
    tgt_out = torch.tensor(
        [pad(row + [EOS_ID], tgt_len) for row in tgt_rows], dtype=torch.long
    )
    return src, tgt_in, tgt_out


def run_epoch_loss(
    model: TransformerModel,
    records: list[CorpusRecord],
    source_vocab: Vocabulary,
    target_vocab: Vocabulary,
    loss_fn: LabelSmoothingLoss,
    batch_size: int,
) -> float:
    """Mean per-token loss over ``records`` without touching gradients."""
    model.eval()
    total, count = 0.0, 0
    with torch.no_grad():
        for start in range(0, len(records), batch_size):
            batch = records[start : start + batch_size]
            src, tgt_in, tgt_out = encode_batch(batch, source_vocab, target_vocab)
            log_probs = model(src, tgt_in)
            tokens = int((tgt_out != PAD_ID).sum())
            total += float(loss_fn(log_probs, tgt_out)) * tokens
            count += tokens
    return total / max(count, 1)


def train(
    pc: ParallelCorpus,
    config: ModelConfig,
    pretrained_embeddings: np.ndarray | None = None,
    seed: int = 0,
    max_epochs: int = 100,
    log: Callable[[str], None] | None = None,
) -> Checkpoint:
    """Train to convergence and return the best-validation checkpoint.

    Stops early once validation loss has failed to improve for
    ``config.early_stopping_patience`` consecutive epochs.
    """
    train_records = pc.split("train")
    val_records = pc.split("validation")
    if not train_records or not val_records:
        raise ValueError("training requires nonempty train and validation splits")

    source_vocab, target_vocab = build_vocab(pc)
    model = make_model(config, len(source_vocab), len(target_vocab), seed=seed)
    torch.manual_seed(seed)
    if pretrained_embeddings is not None:
        if pretrained_embeddings.shape != (len(source_vocab), config.model_dim):
            raise ValueError(
                f"pretrained matrix shape {pretrained_embeddings.shape} does not "
                f"match ({len(source_vocab)}, {config.model_dim})"
            )
        with torch.no_grad():
            model.src_embed.weight.copy_(
                torch.from_numpy(pretrained_embeddings).to(torch.float32)
            )

    loss_fn = LabelSmoothingLoss(len(target_vocab), config.label_smoothing)
    optimizer = torch.optim.Adam(
        model.parameters(), lr=1.0, betas=(0.9, 0.98), eps=1e-9
    )
    schedule = WarmupSchedule(config.model_dim, config.warmup_steps, config.lr_factor)

    started = time.perf_counter()
    step = 0
    last_finite = float("nan")
    best_loss = float("inf")
    best_state: dict[str, torch.Tensor] | None = None
    bad_epochs = 0
    history: dict[str, list[float]] = {"train_loss": [], "validation_loss": []}
    epochs_run = 0

    for epoch in range(1, max_epochs + 1):
        epochs_run = epoch
        order = np.random.default_rng([seed, epoch]).permutation(len(train_records))
        model.train()
        epoch_total, epoch_tokens = 0.0, 0
        for start in range(0, len(order), config.batch_size):
            batch = [train_records[i] for i in order[start : start + config.batch_size]]
            src, tgt_in, tgt_out = encode_batch(batch, source_vocab, target_vocab)
            step += 1
            for group in optimizer.param_groups:
                group["lr"] = schedule.rate(step)
            optimizer.zero_grad()
            log_probs = model(src, tgt_in)
            loss = loss_fn(log_probs, tgt_out)
            if not torch.isfinite(loss):
                raise TrainingDivergedError(epoch, step, last_finite)
            loss.backward()
            optimizer.step()
            last_finite = float(loss.detach())
            tokens = int((tgt_out != PAD_ID).sum())
            epoch_total += last_finite * tokens
            epoch_tokens += tokens

        train_loss = epoch_total / max(epoch_tokens, 1)
        val_loss = run_epoch_loss(
            model, val_records, source_vocab, target_vocab, loss_fn, config.batch_size
        )
        history["train_loss"].append(train_loss)
        history["validation_loss"].append(val_loss)
        if log:
            log(
                f"epoch {epoch}: train {train_loss:.4f}  "
                f"validation {val_loss:.4f}  lr {schedule.rate(step):.2e}"
            )

        if val_loss < best_loss:
            best_loss = val_loss
            best_state = {
                name: tensor.detach().clone()
                for name, tensor in model.state_dict().items()
            }
            bad_epochs = 0
        else:
            bad_epochs += 1
            if bad_epochs >= config.early_stopping_patience:
                break

    if best_state is not None:
        model.load_state_dict(best_state)
    minutes = (time.perf_counter() - started) / 60.0
    metadata = {
        "epochs_trained": epochs_run,
        "best_validation_loss": best_loss,
        "wall_clock_minutes": minutes,
        "train_records": len(train_records),
        "history": history,
    }
    return checkpoint_from_model(model, source_vocab, target_vocab, metadata)
