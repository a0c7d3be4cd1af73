"""
Training loop pieces: stratified split, inverse-frequency class weights,
the two-consecutive-rise early-stopping rule and the epoch loop itself.
"""
import csv
import math
import time
import zlib
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ..exceptions import ClassTooSmall, DegenerateBatch, EmptyDataset, ZeroCount
from ..neural import layers
from ..neural.model import loss_and_grads, model_forward, regularization
from .optim import AdamState, adam_step


def sub_rng(seed, name):
    """Independent generator for a named purpose ("split", "init", ...)."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), zlib.crc32(name.encode())]))


def stratified_split(labels, ratio=0.7, seed=0):
    """Split sample positions per class; ``ceil(ratio * n_c)`` go to train.

    Returns two sorted int arrays ``(train_idx, val_idx)``.
    """
    labels = np.asarray(labels)
    if not 0.0 < ratio <= 1.0:
        raise ValueError("ratio must be in (0, 1]")
    rng = sub_rng(seed, "split")
    train, val = [], []
    for cls in np.unique(labels):
        members = np.flatnonzero(labels == cls)
        if len(members) < 2:
            raise ClassTooSmall(f"class {cls!r} has {len(members)} instance(s), need >= 2")
        members = rng.permutation(members)
        # round() guards against 0.7 * 10 = 7.000000000000001
        k = math.ceil(round(ratio * len(members), 9))
        train.append(members[:k])
        val.append(members[k:])
    return np.sort(np.concatenate(train)), np.sort(np.concatenate(val))


def class_weights(counts):
    """``w_c = N / (K * n_c)``; the frequency-weighted mean of ``w`` is 1."""
    counts = np.asarray(counts, dtype=np.float64)
    if np.any(counts <= 0):
        raise ZeroCount("every class needs at least one instance")
    return counts.sum() / (len(counts) * counts)


def early_stop(val_losses):
    """True iff each of the last two validation losses rose strictly."""
    v = list(val_losses)
    return len(v) >= 3 and v[-1] > v[-2] and v[-2] > v[-3]


@dataclass
class TrainHistory:
    train_loss: list = field(default_factory=list)
    val_loss: list = field(default_factory=list)
    val_acc: list = field(default_factory=list)
    seconds: list = field(default_factory=list)

    def __len__(self):
        return len(self.train_loss)

    def append(self, train_loss, val_loss, val_acc, seconds):
        self.train_loss.append(train_loss)
        self.val_loss.append(val_loss)
        self.val_acc.append(val_acc)
        self.seconds.append(seconds)

    @property
    def best_epoch(self):
        """1-based epoch of minimum validation loss (last epoch if none)."""
        finite = [(v, i) for i, v in enumerate(self.val_loss) if not math.isnan(v)]
        if not finite:
            return len(self)
        return min(finite)[1] + 1

    def to_csv(self, path, record_timing=False):
        """Write ``epoch,train_loss,val_loss,val_acc,seconds``.

        Wall time is written only with ``record_timing``; otherwise the
        column is 0 so that reruns are byte-identical.
        """
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["epoch", "train_loss", "val_loss", "val_acc", "seconds"])
            for e in range(len(self)):
                secs = self.seconds[e] if record_timing else 0.0
                w.writerow([e + 1, repr(self.train_loss[e]), repr(self.val_loss[e]),
                            repr(self.val_acc[e]), f"{secs:.3f}"])


class EncodedData(NamedTuple):
    indices: np.ndarray
    lengths: np.ndarray
    feats: np.ndarray
    y: np.ndarray

    def __len__(self):
        return len(self.y)

    def take(self, rows):
        return EncodedData(self.indices[rows], self.lengths[rows], self.feats[rows], self.y[rows])


def minibatches(n, batch_size, seq_len, rng=None):
    """Index batches over ``n`` samples, shuffled when ``rng`` is given.

    A trailing batch too small for train-mode batch norm is merged into
    the previous one.
    """
    order = rng.permutation(n) if rng is not None else np.arange(n)
    batches = [order[i:i + batch_size] for i in range(0, n, batch_size)]
    if len(batches) > 1 and len(batches[-1]) * seq_len < 2:
        tail = batches.pop()
        batches[-1] = np.concatenate([batches[-1], tail])
    return batches


def predict_proba_batched(state, data, batch_size=256):
    out = np.zeros((len(data), state.config.n_classes))
    for rows in minibatches(len(data), batch_size, state.config.seq_len):
        out[rows], _ = model_forward(state, data.indices[rows], data.lengths[rows],
                                     data.feats[rows], "infer")
    return out


def evaluate_loss(state, data, weights, batch_size=256):
    """Weighted cross-entropy + L2 penalty in infer mode, and accuracy."""
    if len(data) == 0:
        return math.nan, math.nan
    probs = predict_proba_batched(state, data, batch_size)
    ce, _ = layers.weighted_crossentropy(probs, data.y, weights)
    acc = float(np.mean(np.argmax(probs, axis=1) == data.y))
    return ce + regularization(state), acc


def run_training(state, train, val, weights, lr=0.0005, batch_size=32, max_epochs=100,
                 seed=0, callback=None):
    """Fit ``state`` in place and return ``(best_state, history, adam)``.

    Each epoch shuffles ``train`` into minibatches, takes one Adam step per
    batch and then scores ``val`` in infer mode. Training stops after the
    validation loss rises on two consecutive epochs. The returned state is a
    copy taken at the epoch with the lowest validation loss.
    """
    if len(train) == 0:
        raise EmptyDataset("no training instances")
    if batch_size < 1:
        raise ValueError("batch_size must be >= 1")
    L = state.config.seq_len
    if len(train) * L < 2:
        raise DegenerateBatch("training set too small for batch normalization")
    shuffle_rng = sub_rng(seed, "shuffle")
    dropout_rng = sub_rng(seed, "dropout")
    adam = AdamState(lr=lr)
    history = TrainHistory()
    best, best_adam, best_loss = state.copy(), adam.copy(), math.inf
    for epoch in range(max_epochs):
        t0 = time.perf_counter()
        losses = []
        for rows in minibatches(len(train), batch_size, L, shuffle_rng):
            b = train.take(rows)
            loss, grads, _ = loss_and_grads(state, b.indices, b.lengths, b.feats, b.y,
                                            weights, "train", dropout_rng)
            adam_step(state.params, grads, adam)
            losses.append(loss * len(rows))
        train_loss = float(np.sum(losses) / len(train))
        val_loss, val_acc = evaluate_loss(state, val, weights)
        history.append(train_loss, val_loss, val_acc, time.perf_counter() - t0)
        if len(val) == 0 or val_loss < best_loss:
            best, best_adam = state.copy(), adam.copy()
            best_loss = val_loss if len(val) else best_loss
        if callback is not None:
            callback(epoch + 1, history)
        if early_stop(history.val_loss):
            break
    return best, history, best_adam
