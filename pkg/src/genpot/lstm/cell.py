"""Single LSTM cell: forward and backward for one time step.

Gate order along the ``4h`` axis is (input, forget, candidate, output).
Inputs may carry any number of leading batch axes.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import ShapeMismatchError


def sigmoid(x):
    # tanh form avoids overflow warnings for large |x|
    return 0.5 * np.tanh(0.5 * x) + 0.5


@dataclass
class LstmCellWeights:
    W: np.ndarray  # (4h, d)
    R: np.ndarray  # (4h, h)
    b: np.ndarray  # (4h,)

    def __post_init__(self):
        self.W = np.asarray(self.W, dtype=np.float64)
        self.R = np.asarray(self.R, dtype=np.float64)
        self.b = np.asarray(self.b, dtype=np.float64)
        g, h = self.R.shape
        if g != 4 * h or self.W.ndim != 2 or self.W.shape[0] != g or self.b.shape != (g,):
            raise ShapeMismatchError(
                f"inconsistent cell shapes W{self.W.shape} R{self.R.shape} b{self.b.shape}"
            )

    @property
    def input_size(self) -> int:
        return self.W.shape[1]

    @property
    def hidden_size(self) -> int:
        return self.R.shape[1]

    @classmethod
    def init(cls, rng: np.random.Generator, d: int, h: int, forget_bias: float = 1.0):
        """Uniform ``[-1/sqrt(h), 1/sqrt(h)]`` weights, forget-gate bias ``forget_bias``."""
        k = 1.0 / np.sqrt(h)
        W = rng.uniform(-k, k, size=(4 * h, d))
        R = rng.uniform(-k, k, size=(4 * h, h))
        b = np.zeros(4 * h)
        b[h : 2 * h] = forget_bias
        return cls(W, R, b)

    def copy(self) -> "LstmCellWeights":
        return LstmCellWeights(self.W.copy(), self.R.copy(), self.b.copy())


def cell_forward(x, h, c, w: LstmCellWeights):
    """One step; returns ``(h_new, c_new, cache)``."""
    x = np.asarray(x, dtype=np.float64)
    h = np.asarray(h, dtype=np.float64)
    c = np.asarray(c, dtype=np.float64)
    n = w.hidden_size
    if x.shape[-1] != w.input_size or h.shape[-1] != n or c.shape != h.shape:
        raise ShapeMismatchError(
            f"x{x.shape} h{h.shape} c{c.shape} do not fit d={w.input_size}, h={n}"
        )
    a = x @ w.W.T + h @ w.R.T + w.b
    i = sigmoid(a[..., :n])
    f = sigmoid(a[..., n : 2 * n])
    g = np.tanh(a[..., 2 * n : 3 * n])
    o = sigmoid(a[..., 3 * n :])
    c_new = f * c + i * g
    tc = np.tanh(c_new)
    h_new = o * tc
    cache = (x, h, c, i, f, g, o, tc)
    return h_new, c_new, cache


def cell_backward(dh, dc, cache, w: LstmCellWeights):
    """Backprop one step.

    Returns ``(dx, dh_prev, dc_prev, grads)`` where ``grads`` holds ``W``,
    ``R`` and ``b`` gradients summed over the leading batch axes.
    """
    x, h, c, i, f, g, o, tc = cache
    do = dh * tc
    dc = dc + dh * o * (1.0 - tc * tc)
    da = np.concatenate(
        [
            dc * g * i * (1.0 - i),
            dc * c * f * (1.0 - f),
            dc * i * (1.0 - g * g),
            do * o * (1.0 - o),
        ],
        axis=-1,
    )
    dc_prev = dc * f
    dx = da @ w.W
    dh_prev = da @ w.R
    da2 = da.reshape(-1, da.shape[-1])
    grads = LstmCellWeights(
        da2.T @ x.reshape(-1, x.shape[-1]),
        da2.T @ h.reshape(-1, h.shape[-1]),
        da2.sum(axis=0),
    )
    return dx, dh_prev, dc_prev, grads
