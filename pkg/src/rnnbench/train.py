"""The supervised training loop and its per-epoch bookkeeping.

One update per sample (batch size 1) in chronological order, squared
error on normalized values, full-window BPTT, then one optimizer step.
For NAG the loop performs a second forward/backward at the looked-ahead
parameters, so NAG costs exactly two gradient evaluations per sample
where Adam and momentum cost one (``RunResult.grad_evals`` counts them).

A learning rate of 0 short-circuits the optimizer entirely: the loop
still measures losses (and gradients, for the instrument counter) but
parameters stay bit-identical — useful as an evaluation-only pass.

Non-finite loss is a hard error naming the epoch and sample: masking a
NaN would silently corrupt the optimizer comparison this package exists
to make.
"""

from __future__ import annotations

import time
from dataclasses import dataclass
from math import isfinite, sqrt

from .cells import CELL_KINDS, Forecaster, backward_sequence, forward_sequence
from .data import WindowedDataset
from .linalg import Rng
from .optim import OPTIMIZER_NAMES, make_optimizer


@dataclass
class TrainConfig:
    cell: str = "lstm"
    optimizer: str = "adam"
    epochs: int = 10
    hidden: int = 50
    lookback: int = 60
    lr: float = 0.001
    momentum: float = 0.9
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    seed: int = 0
    threshold: float = 1e-3     # convergence-speed loss threshold
    clip_norm: float = 0.0      # 0 disables gradient clipping
    shuffle: bool = False       # seeded shuffle; off = chronological

    def validate(self) -> None:
        if self.cell not in CELL_KINDS:
            raise ValueError(f"cell must be one of {CELL_KINDS}, got {self.cell!r}")
        if self.optimizer not in OPTIMIZER_NAMES:
            raise ValueError(
                f"optimizer must be one of {OPTIMIZER_NAMES}, got {self.optimizer!r}"
            )
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")
        if self.hidden < 1:
            raise ValueError(f"hidden must be >= 1, got {self.hidden}")
        if self.lookback < 1:
            raise ValueError(f"lookback must be >= 1, got {self.lookback}")
        if self.lr < 0.0:
            raise ValueError(f"lr must be >= 0, got {self.lr}")
        if self.threshold <= 0.0:
            raise ValueError(f"threshold must be > 0, got {self.threshold}")
        if self.clip_norm < 0.0:
            raise ValueError(f"clip_norm must be >= 0, got {self.clip_norm}")

    @property
    def config_id(self) -> str:
        return f"{self.cell}-{self.optimizer}"


@dataclass
class EpochRecord:
    epoch: int          # 1-based, contiguous
    train_loss: float   # mean per-sample squared error, normalized units
    val_loss: float
    seconds: float


@dataclass
class RunResult:
    config: TrainConfig
    records: list               # [EpochRecord]
    model: Forecaster
    epochs_to_threshold: int | None
    stability_count: int
    stability_sum: float
    wall_clock_s: float
    grad_evals: int
    samples_seen: int


class TrainingDiverged(RuntimeError):
    """Raised when a loss goes non-finite mid-run."""


def mse_loss(prediction: float, target: float) -> float:
    d = prediction - target
    return d * d


def mse_grad(prediction: float, target: float) -> float:
    """d(mse_loss)/d(prediction)."""
    return 2.0 * (prediction - target)


def _clip_gradients(grads, max_norm: float) -> None:
    """Scale all blocks so the global L2 norm is at most max_norm."""
    total = 0.0
    for blk in grads.blocks:
        for g in blk.data:
            total += g * g
    norm = sqrt(total)
    if norm > max_norm:
        scale = max_norm / norm
        for blk in grads.blocks:
            d = blk.data
            for i in range(len(d)):
                d[i] *= scale


@dataclass
class _Counter:
    grad_evals: int = 0
    samples: int = 0


def train_epoch(model: Forecaster, optimizer, dataset: WindowedDataset,
                epoch: int = 1, counter: _Counter | None = None,
                clip_norm: float = 0.0, order=None) -> float:
    """One pass over the dataset; returns the mean per-sample loss.

    optimizer may be None (no updates; losses only).  ``order`` is the
    sample visiting order, default chronological.
    """
    samples = dataset.samples
    if not samples:
        raise ValueError("train_epoch needs a non-empty dataset")
    if order is None:
        order = range(len(samples))
    counter = counter if counter is not None else _Counter()
    total = 0.0
    blocks = model.param_blocks()
    for pos, idx in enumerate(order):
        window, target = samples[idx]
        pred, cache = forward_sequence(model, window)
        loss = mse_loss(pred, target)
        if not isfinite(loss):
            raise TrainingDiverged(
                f"non-finite loss {loss!r} at epoch {epoch}, sample {pos} "
                f"(dataset index {idx})"
            )
        total += loss
        grads = backward_sequence(model, cache, mse_grad(pred, target))
        counter.grad_evals += 1
        counter.samples += 1
        if clip_norm > 0.0:
            _clip_gradients(grads, clip_norm)
        if optimizer is None:
            continue
        if optimizer.needs_lookahead:
            def grad_fn(shifted):
                for blk, vals in zip(blocks, shifted):
                    blk.data[:] = vals
                p2, cache2 = forward_sequence(model, window)
                g2 = backward_sequence(model, cache2, mse_grad(p2, target))
                counter.grad_evals += 1
                if clip_norm > 0.0:
                    _clip_gradients(g2, clip_norm)
                return [b.data for b in g2.blocks]

            optimizer.step_with(blocks, grad_fn)
        else:
            optimizer.step(blocks, [b.data for b in grads.blocks])
    return total / len(samples)


def evaluate(model: Forecaster, dataset: WindowedDataset) -> float:
    """Mean per-sample loss, forward only; never mutates parameters."""
    samples = dataset.samples
    if not samples:
        raise ValueError("evaluate needs a non-empty dataset")
    total = 0.0
    for window, target in samples:
        total += mse_loss(forward_sequence(model, window)[0], target)
    return total / len(samples)


def convergence_speed(records, threshold: float):
    """First epoch whose train loss is <= threshold, or None if never."""
    if not records:
        raise ValueError("convergence_speed needs at least one record")
    for rec in records:
        if rec.train_loss <= threshold:
            return rec.epoch
    return None


def stability_score(records) -> tuple:
    """(count, sum) of positive epoch-to-epoch train-loss increases.

    Lower is more stable.  With fewer than 2 records there are no
    increments, so the score is (0, 0.0).
    """
    count = 0
    total = 0.0
    for prev, cur in zip(records, records[1:]):
        inc = cur.train_loss - prev.train_loss
        if inc > 0.0:
            count += 1
            total += inc
    return count, total


def fit(config: TrainConfig, train_set: WindowedDataset,
        val_set: WindowedDataset, progress=None) -> RunResult:
    """Train a fresh model per config; returns records, model, metrics.

    ``progress`` is a text stream for per-epoch lines
    (epoch<TAB>train<TAB>val<TAB>seconds); pass None to silence,
    sys.stderr for live output.
    """
    config.validate()
    model = Forecaster.init_random(config.cell, config.hidden, 1,
                                   seed=config.seed)
    if config.lr == 0.0:
        optimizer = None
    else:
        optimizer = make_optimizer(config.optimizer, lr=config.lr,
                                   momentum=config.momentum,
                                   beta1=config.beta1, beta2=config.beta2,
                                   eps=config.eps)
    shuffle_rng = Rng(config.seed * 2654435761 + 97) if config.shuffle else None
    counter = _Counter()
    records = []
    t_run = time.perf_counter()
    for epoch in range(1, config.epochs + 1):
        t0 = time.perf_counter()
        order = None
        if shuffle_rng is not None:
            order = list(range(len(train_set.samples)))
            shuffle_rng.shuffle(order)
        train_loss = train_epoch(model, optimizer, train_set, epoch=epoch,
                                 counter=counter, clip_norm=config.clip_norm,
                                 order=order)
        val_loss = evaluate(model, val_set)
        seconds = time.perf_counter() - t0
        records.append(EpochRecord(epoch=epoch, train_loss=train_loss,
                                   val_loss=val_loss, seconds=seconds))
        if progress is not None:
            print(f"{epoch}\t{train_loss:.17g}\t{val_loss:.17g}\t"
                  f"{seconds:.3f}", file=progress, flush=True)
    wall = time.perf_counter() - t_run
    count, total = stability_score(records)
    return RunResult(
        config=config,
        records=records,
        model=model,
        epochs_to_threshold=convergence_speed(records, config.threshold),
        stability_count=count,
        stability_sum=total,
        wall_clock_s=wall,
        grad_evals=counter.grad_evals,
        samples_seen=counter.samples,
    )
