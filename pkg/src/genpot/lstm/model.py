"""Single-output encoder-decoder LSTM and its batched forward/backward pass.

The encoder reads the full multivariate look-back; its final state seeds a
decoder that unrolls ``H`` scalar predictions, feeding each prediction back in
as the next decoder input.  The first decoder input is the last look-back
value of the target variable.

:class:`ModelStack` evaluates ``M`` independent models of identical shape at
once by giving every parameter a leading model axis.  A single model is just
a stack of one.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import ShapeMismatchError
from .cell import LstmCellWeights

PARAM_NAMES = ("enc_W", "enc_R", "enc_b", "dec_W", "dec_R", "dec_b", "proj_w", "proj_b")


@dataclass
class EncoderDecoderModel:
    encoder: LstmCellWeights
    decoder: LstmCellWeights
    proj_w: np.ndarray  # (h,)
    proj_b: np.ndarray  # (1,)
    L: int
    H: int
    target: int

    def __post_init__(self):
        self.proj_w = np.asarray(self.proj_w, dtype=np.float64).reshape(-1)
        self.proj_b = np.asarray(self.proj_b, dtype=np.float64).reshape(1)
        h = self.encoder.hidden_size
        if self.decoder.hidden_size != h or self.decoder.input_size != 1:
            raise ShapeMismatchError("decoder must have input size 1 and the encoder's hidden size")
        if self.proj_w.shape != (h,):
            raise ShapeMismatchError(f"projection expects {h} weights, got {self.proj_w.shape}")
        if not 0 <= self.target < self.encoder.input_size:
            raise ShapeMismatchError(f"target index {self.target} outside 0..{self.encoder.input_size - 1}")
        if self.L < 1 or self.H < 1:
            raise ShapeMismatchError("L and H must be >= 1")

    @property
    def hidden_size(self) -> int:
        return self.encoder.hidden_size

    @property
    def input_size(self) -> int:
        return self.encoder.input_size

    @classmethod
    def init(cls, rng, L: int, H: int, hidden: int = 64, target: int = 0, d: int = 8):
        k = 1.0 / np.sqrt(hidden)
        encoder = LstmCellWeights.init(rng, d, hidden)
        decoder = LstmCellWeights.init(rng, 1, hidden)
        proj_w = rng.uniform(-k, k, size=hidden)
        proj_b = rng.uniform(-k, k, size=1)
        return cls(encoder, decoder, proj_w, proj_b, L, H, target)

    def params(self) -> dict[str, np.ndarray]:
        """Parameter arrays by name; these are the live arrays, not copies."""
        return {
            "enc_W": self.encoder.W,
            "enc_R": self.encoder.R,
            "enc_b": self.encoder.b,
            "dec_W": self.decoder.W,
            "dec_R": self.decoder.R,
            "dec_b": self.decoder.b,
            "proj_w": self.proj_w,
            "proj_b": self.proj_b,
        }

    def set_params(self, params: dict[str, np.ndarray]) -> None:
        for name, arr in self.params().items():
            arr[...] = params[name]

    def copy(self) -> "EncoderDecoderModel":
        return EncoderDecoderModel(
            self.encoder.copy(), self.decoder.copy(), self.proj_w.copy(),
            self.proj_b.copy(), self.L, self.H, self.target,
        )

    def equals(self, other: "EncoderDecoderModel") -> bool:
        """Bitwise equality of configuration and every weight."""
        if (self.L, self.H, self.target) != (other.L, other.H, other.target):
            return False
        a, b = self.params(), other.params()
        return all(
            a[k].shape == b[k].shape and a[k].tobytes() == b[k].tobytes() for k in PARAM_NAMES
        )


# gate activation constants: one tanh evaluates all four gates,
# sigmoid(x) = 0.5 * tanh(x / 2) + 0.5 for i, f, o and plain tanh for g
def _gate_consts(h):
    scale = np.full(4 * h, 0.5)
    scale[2 * h : 3 * h] = 1.0
    mul = scale.copy()
    add = np.full(4 * h, 0.5)
    add[2 * h : 3 * h] = 0.0
    # derivative wrt pre-activation: act * (alpha - act) + beta
    alpha = np.ones(4 * h)
    alpha[2 * h : 3 * h] = 0.0
    beta = np.zeros(4 * h)
    beta[2 * h : 3 * h] = 1.0
    return scale, mul, add, alpha, beta


@dataclass
class ForwardCache:
    X: np.ndarray  # (B, L, d)
    act_e: np.ndarray  # (L, M, B, 4h)
    c_e: np.ndarray  # (L+1, M, B, h)
    h_e: np.ndarray
    tc_e: np.ndarray  # (L, M, B, h)
    act_d: np.ndarray  # (H, M, B, 4h)
    c_d: np.ndarray  # (H+1, M, B, h), index 0 = encoder final state
    h_d: np.ndarray
    tc_d: np.ndarray
    x_d: np.ndarray  # (H, M, B) decoder inputs
    Y: np.ndarray  # (H, M, B)


@dataclass
class ModelStack:
    """``M`` same-shaped models evaluated together.

    ``params`` maps each name in :data:`PARAM_NAMES` to an array with a
    leading model axis.
    """

    params: dict[str, np.ndarray]
    targets: np.ndarray
    L: int
    H: int
    _consts: tuple = field(init=False, repr=False)

    def __post_init__(self):
        self.targets = np.asarray(self.targets, dtype=np.intp)
        self._consts = _gate_consts(self.hidden_size)

    @classmethod
    def from_models(cls, models) -> "ModelStack":
        models = list(models)
        first = models[0]
        for m in models:
            if (m.L, m.H, m.hidden_size, m.input_size) != (
                first.L, first.H, first.hidden_size, first.input_size,
            ):
                raise ShapeMismatchError("stacked models must share L, H, hidden and input size")
        params = {k: np.stack([m.params()[k] for m in models]) for k in PARAM_NAMES}
        return cls(params, [m.target for m in models], first.L, first.H)

    def write_back(self, models) -> None:
        for i, m in enumerate(models):
            m.set_params({k: v[i] for k, v in self.params.items()})

    @property
    def M(self) -> int:
        return self.params["enc_W"].shape[0]

    @property
    def hidden_size(self) -> int:
        return self.params["enc_R"].shape[2]

    @property
    def input_size(self) -> int:
        return self.params["enc_W"].shape[2]

    def _check_input(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 2:
            X = X[None]
        if X.ndim != 3 or X.shape[1] != self.L or X.shape[2] != self.input_size:
            raise ShapeMismatchError(
                f"look-back must be (B, {self.L}, {self.input_size}), got {X.shape}"
            )
        return X

    def _encoder_inputs(self, X):
        p = self.params
        B, L, d = X.shape
        Xg = np.matmul(X.reshape(1, B * L, d), p["enc_W"].transpose(0, 2, 1))
        Xg += p["enc_b"][:, None, :]
        # time-major so each step reads a contiguous block
        return np.ascontiguousarray(Xg.reshape(self.M, B, L, -1).transpose(2, 0, 1, 3))

    def predict(self, X) -> np.ndarray:
        """Forecast without keeping activations; returns ``(M, B, H)``."""
        X = self._check_input(X)
        p = self.params
        M, B, n = self.M, X.shape[0], self.hidden_size
        scale, mul, add, _, _ = self._consts
        Xg = self._encoder_inputs(X)
        eRT = np.ascontiguousarray(p["enc_R"].transpose(0, 2, 1))
        dRT = np.ascontiguousarray(p["dec_R"].transpose(0, 2, 1))
        dW = p["dec_W"][:, None, :, 0]
        db = p["dec_b"][:, None, :]
        pw = p["proj_w"][:, :, None]
        pb = p["proj_b"][:, None, :]
        h = np.zeros((M, B, n))
        c = np.zeros((M, B, n))
        a = np.empty((M, B, 4 * n))
        for t in range(self.L):
            np.matmul(h, eRT, out=a)
            a += Xg[t]
            a *= scale
            np.tanh(a, out=a)
            a *= mul
            a += add
            c *= a[..., n : 2 * n]
            c += a[..., :n] * a[..., 2 * n : 3 * n]
            np.tanh(c, out=h)
            h *= a[..., 3 * n :]
        y = X[:, -1, self.targets].T[..., None].copy()  # (M, B, 1)
        out = np.empty((self.H, M, B))
        for t in range(self.H):
            np.matmul(h, dRT, out=a)
            a += y * dW
            a += db
            a *= scale
            np.tanh(a, out=a)
            a *= mul
            a += add
            c *= a[..., n : 2 * n]
            c += a[..., :n] * a[..., 2 * n : 3 * n]
            np.tanh(c, out=h)
            h *= a[..., 3 * n :]
            np.matmul(h, pw, out=y)
            y += pb
            out[t] = y[..., 0]
        return out.transpose(1, 2, 0)

    def forward(self, X) -> tuple[np.ndarray, ForwardCache]:
        """Forecast and keep every activation for :meth:`backward`."""
        X = self._check_input(X)
        p = self.params
        M, B, n, L, H = self.M, X.shape[0], self.hidden_size, self.L, self.H
        scale, mul, add, _, _ = self._consts
        Xg = self._encoder_inputs(X)
        eRT = np.ascontiguousarray(p["enc_R"].transpose(0, 2, 1))
        dRT = np.ascontiguousarray(p["dec_R"].transpose(0, 2, 1))
        dW = p["dec_W"][:, None, :, 0]
        db = p["dec_b"][:, None, :]
        pw = p["proj_w"][:, :, None]
        pb = p["proj_b"]  # (M, 1)

        act_e = np.empty((L, M, B, 4 * n))
        c_e = np.zeros((L + 1, M, B, n))
        h_e = np.zeros((L + 1, M, B, n))
        tc_e = np.empty((L, M, B, n))
        for t in range(L):
            a = act_e[t]
            np.matmul(h_e[t], eRT, out=a)
            a += Xg[t]
            a *= scale
            np.tanh(a, out=a)
            a *= mul
            a += add
            c = c_e[t + 1]
            np.multiply(c_e[t], a[..., n : 2 * n], out=c)
            c += a[..., :n] * a[..., 2 * n : 3 * n]
            np.tanh(c, out=tc_e[t])
            np.multiply(tc_e[t], a[..., 3 * n :], out=h_e[t + 1])

        act_d = np.empty((H, M, B, 4 * n))
        c_d = np.empty((H + 1, M, B, n))
        h_d = np.empty((H + 1, M, B, n))
        tc_d = np.empty((H, M, B, n))
        x_d = np.empty((H, M, B))
        Y = np.empty((H, M, B))
        c_d[0] = c_e[L]
        h_d[0] = h_e[L]
        y = X[:, -1, self.targets].T.copy()  # (M, B)
        for t in range(H):
            x_d[t] = y
            a = act_d[t]
            np.matmul(h_d[t], dRT, out=a)
            a += y[..., None] * dW
            a += db
            a *= scale
            np.tanh(a, out=a)
            a *= mul
            a += add
            c = c_d[t + 1]
            np.multiply(c_d[t], a[..., n : 2 * n], out=c)
            c += a[..., :n] * a[..., 2 * n : 3 * n]
            np.tanh(c, out=tc_d[t])
            np.multiply(tc_d[t], a[..., 3 * n :], out=h_d[t + 1])
            y = (h_d[t + 1] @ pw)[..., 0] + pb
            Y[t] = y
        cache = ForwardCache(X, act_e, c_e, h_e, tc_e, act_d, c_d, h_d, tc_d, x_d, Y)
        return Y.transpose(1, 2, 0), cache

    def targets_of(self, lookahead) -> np.ndarray:
        """Per-model target series ``(M, B, H)`` from ``(B, H, d)`` look-ahead windows."""
        lookahead = np.asarray(lookahead, dtype=np.float64)
        return lookahead[:, :, self.targets].transpose(2, 0, 1)

    @staticmethod
    def loss(Y, T) -> np.ndarray:
        """Per-model MSE averaged over batch and horizon, shape ``(M,)``."""
        return np.mean((Y - T) ** 2, axis=(1, 2))

    def backward(self, cache: ForwardCache, T) -> dict[str, np.ndarray]:
        """Gradients of ``sum_m MSE_m`` via backpropagation through time.

        ``T`` has shape ``(M, B, H)``.  The decoder's output-to-input feedback
        path is differentiated, so every prediction also receives gradient
        from all later ones.
        """
        p = self.params
        M, n, L, H = self.M, self.hidden_size, self.L, self.H
        B = cache.X.shape[0]
        _, _, _, alpha, beta = self._consts
        T = np.asarray(T, dtype=np.float64)
        if T.shape != (M, B, H):
            raise ShapeMismatchError(f"targets must be {(M, B, H)}, got {T.shape}")
        dY = (2.0 / (B * H)) * (cache.Y - T.transpose(2, 0, 1))  # (H, M, B)

        pw = p["proj_w"][:, None, :]
        dWcol = p["dec_W"]  # (M, 4h, 1)
        dR = p["dec_R"]
        eR = p["enc_R"]

        dh = np.zeros((M, B, n))
        dc = np.zeros((M, B, n))
        dx_next = np.zeros((M, B))
        dy_all = np.empty((H, M, B))
        da_d = np.empty((H, M, B, 4 * n))
        dact = np.empty((M, B, 4 * n))

        def cell_back(act, c_prev, tc, dh, dc, out):
            i = act[..., :n]
            f = act[..., n : 2 * n]
            g = act[..., 2 * n : 3 * n]
            o = act[..., 3 * n :]
            dc = dc + dh * o * (1.0 - tc * tc)
            np.multiply(dc, g, out=dact[..., :n])
            np.multiply(dc, c_prev, out=dact[..., n : 2 * n])
            np.multiply(dc, i, out=dact[..., 2 * n : 3 * n])
            np.multiply(dh, tc, out=dact[..., 3 * n :])
            np.multiply(dact, act * (alpha - act) + beta, out=out)
            return dc * f

        for t in range(H - 1, -1, -1):
            dy = dY[t] + dx_next
            dy_all[t] = dy
            dh = dh + dy[..., None] * pw
            dc = cell_back(cache.act_d[t], cache.c_d[t], cache.tc_d[t], dh, dc, da_d[t])
            dh = da_d[t] @ dR
            dx_next = (da_d[t] @ dWcol)[..., 0]

        da_e = np.empty((L, M, B, 4 * n))
        for t in range(L - 1, -1, -1):
            dc = cell_back(cache.act_e[t], cache.c_e[t], cache.tc_e[t], dh, dc, da_e[t])
            dh = da_e[t] @ eR

        grads = {
            "proj_w": (dy_all[..., None] * cache.h_d[1:]).sum(axis=(0, 2)),
            "proj_b": dy_all.sum(axis=(0, 2))[:, None],
            "dec_W": (da_d * cache.x_d[..., None]).sum(axis=(0, 2))[..., None],
            "dec_R": _sum_outer(da_d, cache.h_d[:-1]),
            "dec_b": da_d.sum(axis=(0, 2)),
            "enc_W": _sum_outer(da_e, np.broadcast_to(cache.X.transpose(1, 0, 2)[:, None], (L, M, B, self.input_size))),
            "enc_R": _sum_outer(da_e, cache.h_e[:-1]),
            "enc_b": da_e.sum(axis=(0, 2)),
        }
        return grads


def _sum_outer(da, z):
    """``sum over (t, b) of da[t, m, b, :] outer z[t, m, b, :]`` as ``(M, G, K)``."""
    T, M, B, G = da.shape
    a = da.transpose(1, 0, 2, 3).reshape(M, T * B, G)
    b = z.transpose(1, 0, 2, 3).reshape(M, T * B, z.shape[-1])
    return a.transpose(0, 2, 1) @ b


def forward(model: EncoderDecoderModel, lookback) -> np.ndarray:
    """Forecast ``H`` normalized values of the model's target from one ``(L, d)`` look-back."""
    lookback = np.asarray(lookback, dtype=np.float64)
    if lookback.ndim != 2:
        raise ShapeMismatchError(f"look-back must be 2-D, got shape {lookback.shape}")
    return ModelStack.from_models([model]).predict(lookback[None])[0, 0]


def loss_and_grads(model: EncoderDecoderModel, lookback, target):
    """MSE of one or a batch of windows and its gradient for every parameter."""
    stack = ModelStack.from_models([model])
    lookback = np.asarray(lookback, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    if lookback.ndim == 2:
        lookback, target = lookback[None], target[None]
    Y, cache = stack.forward(lookback)
    T = target[None]
    if T.shape != Y.shape:
        raise ShapeMismatchError(f"target must match the output shape {Y.shape[1:]}")
    grads = stack.backward(cache, T)
    return float(ModelStack.loss(Y, T)[0]), {k: v[0] for k, v in grads.items()}


def backward(model: EncoderDecoderModel, lookback, target) -> dict[str, np.ndarray]:
    """Gradients of the MSE between ``forward(model, lookback)`` and ``target``."""
    return loss_and_grads(model, lookback, target)[1]
