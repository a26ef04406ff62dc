"""Segment-wise RMSE protocol and producer timing."""
from __future__ import annotations

import csv
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ShapeMismatchError, ValidationTooShortError
from .generator import CompositeGenerator, Segment, advance_window, generate_segment
from .timeseries import N_VARS, REPLICATED, Dataset, ScalerParams, normalize

QUANTILES = (0.25, 0.5, 0.75)


def segment_rmse(estimated, reference, scaler: ScalerParams) -> np.ndarray:
    """Per-variable RMSE between two ``(H, 8)`` raw-unit blocks, on normalized values."""
    est = estimated.values if isinstance(estimated, Segment) else np.asarray(estimated, dtype=np.float64)
    ref = np.asarray(reference, dtype=np.float64)
    if est.shape != ref.shape or est.ndim != 2 or est.shape[1] != N_VARS:
        raise ShapeMismatchError(f"shapes {est.shape} and {ref.shape} differ or are not (H, 8)")
    diff = normalize(est, scaler) - normalize(ref, scaler)
    return np.sqrt(np.mean(diff * diff, axis=0))


@dataclass
class RmseTable:
    """RMSE quantiles per (segment step, variable); arrays are ``(S, 8)``."""

    median: np.ndarray
    q_low: np.ndarray
    q_high: np.ndarray
    raw: np.ndarray  # (T, S, 8)
    positions: np.ndarray  # (T,) seed offsets into the validation data

    @property
    def steps(self) -> int:
        return self.median.shape[0]

    def ordered(self) -> bool:
        return bool(np.all(self.q_low <= self.median) and np.all(self.median <= self.q_high))

    def accumulating_variables(self) -> list[str]:
        """Variables whose median RMSE at the last step exceeds the first step's."""
        return [REPLICATED[k] for k in range(N_VARS) if self.median[-1, k] > self.median[0, k]]

    def rows(self):
        for s in range(self.steps):
            for k, name in enumerate(REPLICATED):
                yield s + 1, name, self.median[s, k], self.q_low[s, k], self.q_high[s, k]

    def to_csv(self, path) -> None:
        with Path(path).open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["step", "variable", "median", "q_low", "q_high"])
            for step, name, med, lo, hi in self.rows():
                w.writerow([step, name, repr(float(med)), repr(float(lo)), repr(float(hi))])

    def summary(self) -> dict:
        return {
            "seeds": int(self.raw.shape[0]),
            "steps": self.steps,
            "median_first": {n: float(self.median[0, k]) for k, n in enumerate(REPLICATED)},
            "median_last": {n: float(self.median[-1, k]) for k, n in enumerate(REPLICATED)},
            "accumulating": self.accumulating_variables(),
            "ordered": self.ordered(),
        }


def aggregate(raw) -> RmseTable:
    """Median and 25th/75th percentiles (linear interpolation) over the seed axis."""
    raw = np.asarray(raw, dtype=np.float64)
    q = np.quantile(raw, QUANTILES, axis=0, method="linear")
    return RmseTable(q[1], q[0], q[2], raw, np.arange(raw.shape[0]))


def evaluate(
    gen: CompositeGenerator,
    validation: Dataset,
    T: int = 301,
    S: int = 20,
    rng_seed: int = 0,
    batch: int = 64,
) -> RmseTable:
    """RMSE of ``S`` generated segments against the recording, for ``T`` random seeds.

    Seed offsets are drawn uniformly (with replacement) from every position
    that leaves room for the look-back plus ``S * H`` reference samples.
    """
    L, H = gen.L, gen.H
    need = L + S * H
    n = len(validation)
    if n < need:
        raise ValidationTooShortError(f"need {need} validation samples, have {n}")
    rng = np.random.default_rng(rng_seed)
    positions = rng.integers(0, n - need + 1, size=T)
    norm = normalize(validation.replicated(), gen.scaler)

    raw = np.empty((T, S, N_VARS))
    for start in range(0, T, batch):
        pos = positions[start : start + batch]
        seeds = np.stack([norm[p : p + L] for p in pos])
        ref = np.stack([norm[p + L : p + need] for p in pos])
        est = gen.rollout(seeds, S)
        diff = (est - ref).reshape(len(pos), S, H, N_VARS)
        raw[start : start + len(pos)] = np.sqrt(np.mean(diff * diff, axis=2))
    table = aggregate(raw)
    table.positions = positions
    return table


# ---------------------------------------------------------------------------
# timing


@dataclass(frozen=True)
class TimingStats:
    min: float
    mean: float
    max: float
    n: int

    @classmethod
    def from_durations(cls, durations) -> "TimingStats":
        d = np.asarray(durations, dtype=np.float64)
        if d.size == 0:
            raise ValueError("no durations")
        mean = float(d.mean())
        # guard the ordering against rounding in the mean of identical values
        lo, hi = float(d.min()), float(d.max())
        return cls(lo, min(max(mean, lo), hi), hi, int(d.size))

    def as_dict(self) -> dict:
        return {"n": self.n, "min": self.min, "mean": self.mean, "max": self.max}


def time_calls(fn, n: int, clock=time.perf_counter, warmup: int = 0) -> TimingStats:
    """Call ``fn()`` ``warmup + n`` times and time the last ``n`` with ``clock``."""
    if n < 1:
        raise ValueError("n must be >= 1")
    for _ in range(warmup):
        fn()
    durations = []
    for _ in range(n):
        t0 = clock()
        fn()
        durations.append(clock() - t0)
    return TimingStats.from_durations(durations)


def bench_producer(gen: CompositeGenerator, n: int = 300, lookback=None, clock=time.perf_counter, warmup: int = 3) -> TimingStats:
    """Wall time of ``n`` consecutive segment generations after ``warmup`` calls.

    The look-back advances between calls as it would in the producer thread.
    """
    window = np.full((gen.L, N_VARS), 0.5) if lookback is None else np.asarray(lookback, dtype=np.float64)
    state = {"window": window, "seq": 0}

    def produce():
        seg = generate_segment(gen, state["window"], state["seq"])
        state["seq"] += 1
        state["window"] = advance_window(state["window"], seg.normalized)

    return time_calls(produce, n, clock, warmup)
