"""Complementary-pair batches, ranking and threshold losses, and the training loop."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .encoder import EmbedConfig, EncoderParams, encode, init_params, save_checkpoint
from .fuzzy import DualEmbedding, complementarity_energy
from .numeric import ad
from .numeric.autodiff import NonFiniteError, Tape, value
from .numeric.optim import AdamState, adam_step
from .shapes.graph import split_random
from .shapes.partial import SplitPair, make_split_pair

log = logging.getLogger(__name__)

LOSS_MODES = ("ranking", "threshold")
LOG_FIELDS = ("epoch", "mean_loss", "lr", "recall_at_10")
MAX_REDRAWS = 64


class TrainingError(RuntimeError):
    pass


@dataclass
class LossConfig:
    mode: str = "ranking"
    alpha: float = 0.05
    epochs: int = 200
    batch_size: int = 8
    lr: float = 1e-3
    decay_rate: float = 0.7
    decay_steps: int = 200_000
    seed: int = 0
    eval_every: int = 0
    checkpoint_every: int = 0

    def validate(self):
        if self.mode not in LOSS_MODES:
            raise ValueError(f"loss mode must be one of {LOSS_MODES}, got {self.mode!r}")
        if not self.alpha > 0:
            raise ValueError("margin alpha must be positive")
        if self.batch_size < 2:
            raise ValueError("batch size must be at least 2 (negatives are in-batch mismatches)")
        if self.epochs < 0:
            raise ValueError("epochs must be nonnegative")


# -- losses ---------------------------------------------------------------


def _check_square(energies):
    shape = np.shape(value(energies))
    if len(shape) != 2 or shape[0] != shape[1]:
        raise ValueError(f"energy matrix must be square, got shape {shape}")
    if shape[0] < 2:
        raise ValueError("energy matrix needs N >= 2")
    return shape[0]


def energy_matrix(x: DualEmbedding, y: DualEmbedding):
    """``E[i, j]`` is the two-way complementarity energy of query ``i`` and complement ``j``."""
    n, d = np.shape(value(x.f))
    m = np.shape(value(y.f))[0]
    rows = DualEmbedding(ad.reshape(x.f, (n, 1, d)), ad.reshape(x.g, (n, 1, d)))
    cols = DualEmbedding(ad.reshape(y.f, (1, m, d)), ad.reshape(y.g, (1, m, d)))
    return complementarity_energy(rows, cols)


def _diag(energies, n):
    return ad.sum(ad.mul(energies, np.eye(n)), axis=1)


def ranking_loss(energies, alpha: float):
    """Pairwise ranking hinge over all in-batch mismatches.

    Each mismatch ``(i, j)`` is compared once against the row positive
    ``E[i, i]`` and once against the column positive ``E[j, j]``.
    """
    n = _check_square(energies)
    off = 1.0 - np.eye(n)
    diag = _diag(energies, n)
    rows = ad.relu(ad.add(ad.sub(ad.reshape(diag, (n, 1)), energies), alpha))
    cols = ad.relu(ad.add(ad.sub(ad.reshape(diag, (1, n)), energies), alpha))
    return ad.add(ad.sum(ad.mul(rows, off)), ad.sum(ad.mul(cols, off)))


def threshold_loss(energies, alpha: float, t):
    """Hinge positives below ``t - alpha/2`` and negatives above ``t + alpha/2``."""
    n = _check_square(energies)
    off = 1.0 - np.eye(n)
    diag = _diag(energies, n)
    pos = ad.sum(ad.relu(ad.sub(diag, ad.sub(t, 0.5 * alpha))))
    neg = ad.sum(ad.mul(ad.relu(ad.sub(ad.add(t, 0.5 * alpha), energies)), off))
    return ad.add(ad.mul(pos, 1.0 / n), ad.mul(neg, 1.0 / (n * (n - 1))))


def batch_loss(params, batch: "TrainBatch", embed_config: EmbedConfig, loss: LossConfig):
    """Loss of one batch; ``params`` may be arrays or tape tensors."""
    n = len(batch)
    both = encode(params, np.concatenate([batch.queries, batch.complements]), embed_config)
    energies = energy_matrix(both[:n], both[n:])
    if loss.mode == "ranking":
        return ranking_loss(energies, loss.alpha)
    return threshold_loss(energies, loss.alpha, params["t"])


# -- batches --------------------------------------------------------------


@dataclass
class TrainBatch:
    pairs: list  # of SplitPair
    queries: np.ndarray  # (N, n, 3)
    complements: np.ndarray  # (N, n, 3)

    def __len__(self):
        return len(self.pairs)


def build_batch(objects, epoch_seed, n: int, points: int = 1024) -> TrainBatch:
    """Draw ``n`` objects with replacement and split each one afresh.

    Splits within one batch are distinct: an object may appear several times
    but never with the same query side twice, unless it has too few splits.
    """
    eligible = []
    for obj in objects:
        if len(obj.graph.nodes) < 2:
            log.warning("skipping %s: a single component cannot be split", obj.id)
        else:
            eligible.append(obj)
    if not eligible:
        raise ValueError("no training object has two or more components")
    rng = np.random.default_rng(epoch_seed)
    pairs: list[SplitPair] = []
    used = set()
    for _ in range(n):
        # a repeated (object, query side) would be an in-batch negative identical
        # to its own positive, so redraw it a bounded number of times
        for _attempt in range(MAX_REDRAWS):
            obj = eligible[int(rng.integers(len(eligible)))]
            split_rng = np.random.default_rng(int(rng.integers(2**63)))
            split = split_random(obj.graph, split_rng)
            if (obj.id, split.query) not in used:
                break
        else:
            log.warning("batch repeats split %s of %s: too few distinct splits", split.query, obj.id)
        used.add((obj.id, split.query))
        pairs.append(make_split_pair(obj, split_rng, points, split=split))
    return TrainBatch(pairs, np.stack([p.query.points for p in pairs]),
                      np.stack([p.complement.points for p in pairs]))


# -- loop -----------------------------------------------------------------


@dataclass
class TrainResult:
    params: EncoderParams
    adam: AdamState
    log: list = field(default_factory=list)


def limit_threads(threads: int):
    """Context manager capping BLAS threads; ``threads=1`` is the bit-reproducible mode."""
    from threadpoolctl import threadpool_limits

    return threadpool_limits(limits=int(threads))


def _fmt(v):
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return ""
    return repr(float(v)) if isinstance(v, float) else str(v)


def write_log_row(path, row: dict, header: bool):
    with open(path, "a", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if header:
            w.writerow(LOG_FIELDS)
        w.writerow([_fmt(row.get(k)) for k in LOG_FIELDS])


def train(
    train_objects,
    loss: LossConfig,
    embed_config: EmbedConfig,
    *,
    init: EncoderParams | None = None,
    adam: AdamState | None = None,
    start_epoch: int = 0,
    validation_objects=None,
    log_path=None,
    checkpoint_dir=None,
    threads: int = 1,
) -> TrainResult:
    """Train both encoders on fresh random splits of ``train_objects``.

    ``init``/``adam``/``start_epoch`` resume an earlier run.  Every epoch
    appends ``(epoch, mean_loss, lr, recall_at_10)`` to the log; recall is
    computed on ``validation_objects`` every ``loss.eval_every`` epochs.
    """
    loss.validate()
    embed_config.validate()
    train_objects = list(train_objects)
    if not train_objects:
        raise ValueError("training split is empty")
    params = (init.copy() if init is not None else init_params(embed_config))
    adam = adam if adam is not None else AdamState(lr=loss.lr, decay_rate=loss.decay_rate,
                                                   decay_steps=loss.decay_steps)
    steps_per_epoch = max(1, math.ceil(len(train_objects) / loss.batch_size))
    result = TrainResult(params, adam)
    if log_path is not None and start_epoch == 0:
        Path(log_path).unlink(missing_ok=True)

    with limit_threads(threads):
        for epoch in range(start_epoch + 1, start_epoch + loss.epochs + 1):
            losses = []
            lr = adam.effective_lr()
            for b in range(steps_per_epoch):
                seed = np.random.SeedSequence([loss.seed, epoch, b])
                batch = build_batch(train_objects, seed, loss.batch_size, embed_config.points)
                batch_tape = Tape()
                try:
                    leaves = {k: batch_tape.leaf(v, k) for k, v in params.arrays.items()}
                    out = batch_loss(leaves, batch, embed_config, loss)
                except NonFiniteError as err:
                    raise TrainingError(_diagnose(err, epoch, b, seed, params)) from err
                val = float(out.data)
                if not math.isfinite(val):
                    raise TrainingError(_diagnose("non-finite loss", epoch, b, seed, params))
                all_g = batch_tape.gradient(out)
                grads = {k: (np.zeros_like(v.data) if all_g[v.index] is None else all_g[v.index])
                         for k, v in leaves.items()}
                params.arrays, adam = adam_step(adam, params.arrays, grads)
                losses.append(val)
            row = {"epoch": epoch, "mean_loss": float(np.mean(losses)), "lr": lr,
                   "recall_at_10": None}
            if validation_objects and loss.eval_every and epoch % loss.eval_every == 0:
                from .retrieval import evaluate_complements

                row["recall_at_10"] = evaluate_complements(params, validation_objects)["recall_at_10"]
            result.log.append(row)
            if log_path is not None:
                write_log_row(log_path, row, header=(epoch == 1 or not Path(log_path).exists()))
            log.info("epoch %d loss %.6f", epoch, row["mean_loss"])
            if checkpoint_dir is not None and loss.checkpoint_every and epoch % loss.checkpoint_every == 0:
                save_checkpoint(Path(checkpoint_dir) / f"epoch_{epoch:05d}.ckpt", params, adam,
                                {"epoch": epoch})
    result.params = params
    result.adam = adam
    return result


def _diagnose(what, epoch, b, seed, params: EncoderParams) -> str:
    norms = ", ".join(f"{k}={np.linalg.norm(v):.4g}" for k, v in params.arrays.items())
    return (f"{what} at epoch {epoch}, batch {b} (seed entropy {seed.entropy}, "
            f"spawn {seed.spawn_key}); parameter norms: {norms}")
