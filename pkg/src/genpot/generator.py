"""Multivariate trajectory generation from eight single-output models.

Every segment is produced by running all eight models on the same look-back
and stacking their outputs column-wise.  The segment then becomes the newest
part of the next look-back, so one seed window yields a trajectory of any
length.
"""
from __future__ import annotations

import configparser
import hashlib
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ManifestError, ModelOrderMismatchError, ShapeMismatchError
from .lstm.model import EncoderDecoderModel, ModelStack
from .lstm.serialize import load_model, save_model
from .timeseries import N_VARS, REPLICATED, Dataset, ScalerParams, denormalize

log = logging.getLogger(__name__)

MANIFEST_FORMAT = "genpot-composite/1"


@dataclass(frozen=True)
class Segment:
    values: np.ndarray  # (H, 8) raw units
    sequence: int
    normalized: np.ndarray = field(repr=False, default=None)

    @property
    def H(self) -> int:
        return self.values.shape[0]


class CompositeGenerator:
    """Eight per-variable models plus the scaler they were trained with.

    ``models[k]`` must predict variable ``k`` of :data:`~genpot.timeseries.REPLICATED`.
    With ``single_step=True`` only the first prediction of each model is kept
    and the window advances one sample at a time.
    """

    def __init__(self, models, scaler: ScalerParams, rate_hz: float = 500.0, single_step: bool = False):
        models = list(models)
        if len(models) != N_VARS:
            raise ModelOrderMismatchError(f"need {N_VARS} models, got {len(models)}")
        targets = [m.target for m in models]
        if sorted(targets) != list(range(N_VARS)):
            raise ModelOrderMismatchError(f"model targets {targets} are not a permutation of 0..{N_VARS - 1}")
        if targets != list(range(N_VARS)):
            raise ModelOrderMismatchError(f"models must be ordered by target variable, got {targets}")
        shapes = {(m.L, m.H) for m in models}
        if len(shapes) != 1:
            raise ShapeMismatchError(f"models disagree on (L, H): {sorted(shapes)}")
        if scaler.mins.shape != (N_VARS,):
            raise ShapeMismatchError("scaler must cover the eight replicated variables")
        self.models = tuple(models)
        self.scaler = scaler
        self.rate_hz = float(rate_hz)
        self.single_step = single_step
        self._stack = ModelStack.from_models(models)

    @property
    def L(self) -> int:
        return self.models[0].L

    @property
    def H(self) -> int:
        return self.models[0].H

    @property
    def hidden_size(self) -> int:
        return self.models[0].hidden_size

    def _check(self, lookback) -> np.ndarray:
        lookback = np.asarray(lookback, dtype=np.float64)
        if lookback.shape[-2:] != (self.L, N_VARS):
            raise ShapeMismatchError(f"look-back must be ({self.L}, {N_VARS}), got {lookback.shape}")
        if not np.all(np.isfinite(lookback)):
            raise ValueError("look-back contains non-finite values")
        return lookback

    def step(self, lookbacks) -> np.ndarray:
        """Next normalized segment for a batch of look-backs: ``(B, L, 8) -> (B, H, 8)``."""
        X = self._check(lookbacks)
        if self.single_step:
            out = np.empty((X.shape[0], self.H, N_VARS))
            window = X.copy()
            for k in range(self.H):
                y = _clamp(self._stack.predict(window)[:, :, 0].T)
                out[:, k] = y
                window = np.concatenate([window[:, 1:], y[:, None]], axis=1)
            return out
        return _clamp(self._stack.predict(X).transpose(1, 2, 0))

    def rollout(self, seeds, n_segments: int) -> np.ndarray:
        """Normalized trajectories ``(B, n_segments * H, 8)`` from ``(B, L, 8)`` seeds."""
        if n_segments < 1:
            raise ValueError("n_segments must be >= 1")
        window = self._check(seeds).copy()
        if window.ndim == 2:
            window = window[None]
        H = self.H
        out = np.empty((window.shape[0], n_segments * H, N_VARS))
        for s in range(n_segments):
            seg = self.step(window)
            out[:, s * H : (s + 1) * H] = seg
            window = advance_window(window, seg)
        return out

    def manifest_hash(self) -> str:
        h = hashlib.sha256()
        for m in self.models:
            for arr in m.params().values():
                h.update(arr.tobytes())
        h.update(self.scaler.mins.tobytes())
        h.update(self.scaler.maxs.tobytes())
        return h.hexdigest()


def _clamp(values: np.ndarray) -> np.ndarray:
    clipped = np.clip(values, 0.0, 1.0)
    if log.isEnabledFor(logging.DEBUG):
        n = int(np.count_nonzero(clipped != values))
        if n:
            log.debug("clamped %d generated values into [0, 1]", n)
    return clipped


def advance_window(window: np.ndarray, segment: np.ndarray) -> np.ndarray:
    """Drop the oldest ``H`` rows of ``window`` and append ``segment``."""
    H = segment.shape[-2]
    L = window.shape[-2]
    if H >= L:
        return segment[..., H - L :, :].copy()
    return np.concatenate([window[..., H:, :], segment], axis=-2)


def generate_segment(gen: CompositeGenerator, lookback, sequence: int = 0) -> Segment:
    """One look-ahead segment from a normalized ``(L, 8)`` look-back."""
    norm = gen.step(np.asarray(lookback)[None])[0]
    return Segment(denormalize(norm, gen.scaler), sequence, norm)


def generate_trajectory(gen: CompositeGenerator, seed_lookback, n_segments: int) -> list[Segment]:
    """``n_segments`` consecutive segments, each fed back into the look-back."""
    if n_segments < 1:
        raise ValueError("n_segments must be >= 1")
    window = np.asarray(seed_lookback, dtype=np.float64)
    segments = []
    for k in range(n_segments):
        seg = generate_segment(gen, window, k)
        segments.append(seg)
        window = advance_window(window, seg.normalized)
    return segments


def trajectory_dataset(segments, rate_hz: float) -> Dataset:
    """Pack generated segments into a 13-column dataset; unmodelled columns are zero."""
    values = np.concatenate([s.values for s in segments])
    return Dataset.from_columns(rate_hz, **{name: values[:, k] for k, name in enumerate(REPLICATED)})


# ---------------------------------------------------------------------------
# manifest

def save_composite(gen: CompositeGenerator, directory, manifest_name: str = "manifest.ini") -> Path:
    """Write the eight ``EDL1`` files and a manifest; returns the manifest path.

    Manifest keys::

        [composite]  format, rate_hz, L, H, hidden
        [models]     <variable> = <model file relative to the manifest>
        [scaler]     <variable>.min, <variable>.max
    """
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    cp = configparser.ConfigParser()
    cp.optionxform = str
    cp["composite"] = {
        "format": MANIFEST_FORMAT,
        "rate_hz": repr(gen.rate_hz),
        "L": str(gen.L),
        "H": str(gen.H),
        "hidden": str(gen.hidden_size),
    }
    cp["models"] = {}
    cp["scaler"] = {}
    for k, name in enumerate(REPLICATED):
        fname = f"{name}.edl"
        save_model(gen.models[k], directory / fname)
        cp["models"][name] = fname
        cp["scaler"][f"{name}.min"] = repr(float(gen.scaler.mins[k]))
        cp["scaler"][f"{name}.max"] = repr(float(gen.scaler.maxs[k]))
    path = directory / manifest_name
    with path.open("w") as fh:
        cp.write(fh)
    return path


def load_composite(manifest, single_step: bool = False) -> CompositeGenerator:
    manifest = Path(manifest)
    cp = configparser.ConfigParser()
    cp.optionxform = str
    try:
        with manifest.open() as fh:
            cp.read_file(fh)
        if cp["composite"]["format"] != MANIFEST_FORMAT:
            raise ManifestError(f"unsupported manifest format {cp['composite']['format']!r}")
        rate_hz = float(cp["composite"]["rate_hz"])
        models = [load_model(manifest.parent / cp["models"][name]) for name in REPLICATED]
        mins = [float(cp["scaler"][f"{name}.min"]) for name in REPLICATED]
        maxs = [float(cp["scaler"][f"{name}.max"]) for name in REPLICATED]
    except (KeyError, configparser.Error) as exc:
        raise ManifestError(f"bad manifest {manifest}: {exc}") from exc
    return CompositeGenerator(models, ScalerParams(mins, maxs), rate_hz, single_step)


def file_sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def init_models(rng: np.random.Generator, L: int, H: int, hidden: int) -> list[EncoderDecoderModel]:
    """Fresh models, one per replicated variable, in canonical order."""
    return [EncoderDecoderModel.init(rng, L, H, hidden, target=k, d=N_VARS) for k in range(N_VARS)]
