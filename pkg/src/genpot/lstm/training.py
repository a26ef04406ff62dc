"""Mini-batch MSE training with Adam."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..errors import EmptyTrainingSetError
from ..timeseries import stack_windows
from .model import EncoderDecoderModel, ModelStack
from .optim import AdamState, adam_step

log = logging.getLogger(__name__)


@dataclass
class TrainReport:
    train_mse: list = field(default_factory=list)
    val_mse: list = field(default_factory=list)

    @property
    def epochs(self) -> int:
        return len(self.train_mse)


def _predict_chunked(stack: ModelStack, X, chunk: int = 256) -> np.ndarray:
    parts = [stack.predict(X[i : i + chunk]) for i in range(0, len(X), chunk)]
    return np.concatenate(parts, axis=1)


def train_many(
    models,
    windows,
    epochs: int = 1000,
    lr: float = 1e-3,
    batch_size: int = 32,
    rng_seed: int = 0,
    validation=None,
    progress=None,
) -> list[TrainReport]:
    """Train several single-output models on the same windows.

    The models are independent; they share the shuffle order and are
    evaluated in one stacked pass for speed.  Each epoch reshuffles the
    windows with ``numpy.random.default_rng(rng_seed)``, and each batch's
    gradient is the mean over its windows.  ``progress(epoch, train_mse,
    val_mse)`` is called after every epoch when given.
    """
    models = list(models)
    windows = list(windows)
    if not windows:
        raise EmptyTrainingSetError("no training windows")
    if not models:
        raise ValueError("no models to train")
    X, ahead = stack_windows(windows)
    stack = ModelStack.from_models(models)
    T_all = stack.targets_of(ahead)
    if validation:
        Xv, aheadv = stack_windows(validation)
        Tv = stack.targets_of(aheadv)

    state = AdamState(lr=lr)
    rng = np.random.default_rng(rng_seed)
    reports = [TrainReport() for _ in models]
    n = len(X)
    for epoch in range(epochs):
        order = rng.permutation(n)
        total = np.zeros(stack.M)
        for start in range(0, n, batch_size):
            idx = np.sort(order[start : start + batch_size])
            T = T_all[:, idx]
            Y, cache = stack.forward(X[idx])
            total += ModelStack.loss(Y, T) * len(idx)
            grads = stack.backward(cache, T)
            adam_step(stack.params, grads, state)
        train_mse = total / n
        if validation:
            val_mse = ModelStack.loss(_predict_chunked(stack, Xv), Tv)
        else:
            val_mse = np.full(stack.M, np.nan)
        for r, tr, va in zip(reports, train_mse, val_mse):
            r.train_mse.append(float(tr))
            r.val_mse.append(float(va))
        if progress is not None:
            progress(epoch, train_mse, val_mse)
    stack.write_back(models)
    return reports


def train(
    model: EncoderDecoderModel,
    windows,
    epochs: int = 1000,
    lr: float = 1e-3,
    batch_size: int = 32,
    rng_seed: int = 0,
    validation=None,
) -> TrainReport:
    """Train one model in place and return its loss history."""
    return train_many([model], windows, epochs, lr, batch_size, rng_seed, validation)[0]
