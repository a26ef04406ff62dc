"""Dataset model, CSV I/O, min-max scaling and supervised windowing.

A :class:`Dataset` stores the 13 recorded columns as one ``(N, 13)`` float64
array.  Eight of those columns are replicated by the generative model; they
are addressed in the fixed order given by :data:`REPLICATED`.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np

from .errors import (
    DatasetTooShortError,
    EmptyDatasetError,
    MalformedRowError,
    MissingColumnError,
    NonMonotoneTimeError,
)

COLUMNS = (
    "Time",
    "Voltage0",
    "Voltage1",
    "Current0",
    "Current1",
    "MotorSpeed0",
    "MotorSpeed1",
    "Yaw",
    "Pitch",
    "TargetYaw",
    "TargetPitch",
    "YawDot",
    "PitchDot",
)
COLUMN_INDEX = {name: i for i, name in enumerate(COLUMNS)}

# U0, U1, yaw, pitch, target yaw, target pitch, yaw rate, pitch rate
REPLICATED = (
    "Voltage0",
    "Voltage1",
    "Yaw",
    "Pitch",
    "TargetYaw",
    "TargetPitch",
    "YawDot",
    "PitchDot",
)
REPLICATED_INDEX = np.array([COLUMN_INDEX[name] for name in REPLICATED])
N_VARS = len(REPLICATED)


class SampleFrame(NamedTuple):
    """One snapshot of all recorded columns."""

    t: float
    U0: float
    U1: float
    I0: float
    I1: float
    s0: float
    s1: float
    yaw: float
    pitch: float
    target_yaw: float
    target_pitch: float
    yaw_dot: float
    pitch_dot: float


class Dataset:
    """An ordered, immutable block of sample frames at a fixed rate."""

    def __init__(self, data, rate_hz: float):
        arr = np.array(data, dtype=np.float64)
        if arr.size == 0:
            arr = arr.reshape(0, len(COLUMNS))
        if arr.ndim != 2 or arr.shape[1] != len(COLUMNS):
            raise ValueError(f"expected (N, {len(COLUMNS)}) array, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("dataset contains non-finite values")
        if rate_hz <= 0 or not math.isfinite(rate_hz):
            raise ValueError(f"rate_hz must be positive, got {rate_hz}")
        if len(arr) > 1 and np.any(np.diff(arr[:, 0]) <= 0):
            raise NonMonotoneTimeError("time column must be strictly increasing")
        arr.setflags(write=False)
        self._data = arr
        self.rate_hz = float(rate_hz)

    @classmethod
    def from_columns(cls, rate_hz: float, t0: float = 0.0, **columns) -> "Dataset":
        """Build a dataset from named column arrays; Time is generated from the rate."""
        n = len(next(iter(columns.values())))
        arr = np.zeros((n, len(COLUMNS)))
        arr[:, 0] = t0 + np.arange(n) / rate_hz
        for name, values in columns.items():
            arr[:, COLUMN_INDEX[name]] = values
        return cls(arr, rate_hz)

    @property
    def data(self) -> np.ndarray:
        return self._data

    @property
    def frames(self) -> list[SampleFrame]:
        return [SampleFrame(*map(float, row)) for row in self._data]

    def frame(self, i: int) -> SampleFrame:
        return SampleFrame(*map(float, self._data[i]))

    def column(self, name: str) -> np.ndarray:
        return self._data[:, COLUMN_INDEX[name]]

    def replicated(self) -> np.ndarray:
        """The ``(N, 8)`` block of replicated variables in canonical order."""
        return self._data[:, REPLICATED_INDEX]

    def __len__(self) -> int:
        return len(self._data)

    def __getitem__(self, item: slice) -> "Dataset":
        if not isinstance(item, slice):
            raise TypeError("Dataset supports slicing only; use frame(i) for a single frame")
        return Dataset(self._data[item], self.rate_hz)

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return self.rate_hz == other.rate_hz and np.array_equal(self._data, other._data)

    def allclose(self, other: "Dataset", atol: float = 1e-12) -> bool:
        return (
            len(self) == len(other)
            and abs(self.rate_hz - other.rate_hz) <= atol * max(1.0, self.rate_hz)
            and bool(np.all(np.abs(self._data - other._data) <= atol))
        )

    def is_uniform(self, tol: float = 1e-9) -> bool:
        """True when consecutive times differ by ``1/rate_hz`` within ``tol``."""
        if len(self) < 2:
            return True
        return bool(np.all(np.abs(np.diff(self._data[:, 0]) - 1.0 / self.rate_hz) <= tol))

    def __repr__(self) -> str:
        return f"Dataset(n={len(self)}, rate_hz={self.rate_hz:g})"


# ---------------------------------------------------------------------------
# CSV


def format_number(x: float) -> str:
    """Shortest round-trip decimal text; integral values drop the ``.0``."""
    s = repr(float(x))
    if s.endswith(".0"):
        s = s[:-2]
    return s


def _infer_rate(t: np.ndarray) -> float:
    dt = float(np.median(np.diff(t)))
    rate = 1.0 / dt
    nearest = round(rate)
    if nearest > 0 and abs(rate - nearest) <= 1e-6 * rate:
        return float(nearest)
    return rate


def read_csv(path, rate_hz: float | None = None) -> Dataset:
    """Read a 13-column recording.

    The sample rate is inferred from the median time step unless given.  A
    single-row file needs an explicit ``rate_hz``; it defaults to 500 Hz.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise MissingColumnError(COLUMNS[0], 0) from None
        header = [h.strip() for h in header]
        for pos, expected in enumerate(COLUMNS):
            if pos >= len(header) or header[pos] != expected:
                raise MissingColumnError(expected, pos)
        if len(header) != len(COLUMNS):
            raise MissingColumnError(header[len(COLUMNS)], len(COLUMNS))

        rows = []
        for i, row in enumerate(reader):
            if not row:
                continue
            if len(row) != len(COLUMNS):
                raise MalformedRowError(i, f"expected {len(COLUMNS)} fields, got {len(row)}")
            try:
                values = [float(v) for v in row]
            except ValueError as exc:
                raise MalformedRowError(i, str(exc)) from None
            if not all(math.isfinite(v) for v in values):
                raise MalformedRowError(i, "non-finite value")
            rows.append(values)

    data = np.array(rows, dtype=np.float64).reshape(-1, len(COLUMNS))
    if len(data) > 1 and np.any(np.diff(data[:, 0]) <= 0):
        bad = int(np.argmax(np.diff(data[:, 0]) <= 0)) + 1
        raise NonMonotoneTimeError(f"time does not increase at row {bad}")
    if rate_hz is None:
        rate_hz = _infer_rate(data[:, 0]) if len(data) > 1 else 500.0
    return Dataset(data, rate_hz)


def write_csv(dataset: Dataset, path) -> None:
    """Write ``dataset`` with a Table-style header; Time is regenerated from the rate."""
    data = dataset.data
    t0 = float(data[0, 0]) if len(data) else 0.0
    times = t0 + np.arange(len(data)) / dataset.rate_hz
    with Path(path).open("w", newline="") as fh:
        fh.write(",".join(COLUMNS) + "\n")
        for t, row in zip(times, data):
            fh.write(format_number(t))
            for x in row[1:]:
                fh.write(",")
                fh.write(format_number(x))
            fh.write("\n")


# ---------------------------------------------------------------------------
# scaling


@dataclass(frozen=True)
class ScalerParams:
    mins: np.ndarray
    maxs: np.ndarray

    def __post_init__(self):
        mins = np.asarray(self.mins, dtype=np.float64).copy()
        maxs = np.asarray(self.maxs, dtype=np.float64).copy()
        if mins.shape != maxs.shape or mins.ndim != 1:
            raise ValueError("mins and maxs must be 1-D arrays of equal length")
        if np.any(maxs < mins):
            raise ValueError("scaler max must be >= min for every variable")
        mins.setflags(write=False)
        maxs.setflags(write=False)
        object.__setattr__(self, "mins", mins)
        object.__setattr__(self, "maxs", maxs)

    @property
    def span(self) -> np.ndarray:
        return self.maxs - self.mins

    def __eq__(self, other) -> bool:
        if not isinstance(other, ScalerParams):
            return NotImplemented
        return np.array_equal(self.mins, other.mins) and np.array_equal(self.maxs, other.maxs)


def fit_scaler(dataset: Dataset) -> ScalerParams:
    if len(dataset) == 0:
        raise EmptyDatasetError("cannot fit a scaler on an empty dataset")
    values = dataset.replicated()
    return ScalerParams(values.min(axis=0), values.max(axis=0))


def normalize(values, params: ScalerParams) -> np.ndarray:
    """Map raw values (last axis = variables) to ``(x - min) / (max - min)``.

    Constant variables (``max == min``) map to 0.
    """
    values = np.asarray(values, dtype=np.float64)
    span = params.span
    degenerate = span == 0
    safe = np.where(degenerate, 1.0, span)
    out = (values - params.mins) / safe
    return np.where(degenerate, 0.0, out)


def denormalize(values, params: ScalerParams) -> np.ndarray:
    values = np.asarray(values, dtype=np.float64)
    return values * params.span + params.mins


# ---------------------------------------------------------------------------
# windows


@dataclass(frozen=True)
class WindowPair:
    lookback: np.ndarray  # (L, 8), normalized
    lookahead: np.ndarray  # (H, 8), normalized
    origin_index: int


def window_count(n: int, lookback: int, horizon: int, stride: int) -> int:
    if n < lookback + horizon:
        return 0
    return (n - lookback - horizon) // stride + 1


def make_windows(
    dataset: Dataset, L: int, H: int, stride: int, params: ScalerParams
) -> list[WindowPair]:
    """Cut ``dataset`` into normalized (look-back, look-ahead) pairs.

    Window ``k`` starts at ``k * stride``; its look-back covers ``L`` samples and
    its look-ahead the ``H`` samples right after.
    """
    if L < 1 or H < 1 or stride < 1:
        raise ValueError("L, H and stride must all be >= 1")
    n = len(dataset)
    if n < L + H:
        raise DatasetTooShortError(f"need at least {L + H} samples, dataset has {n}")
    norm = normalize(dataset.replicated(), params)
    norm.setflags(write=False)
    windows = []
    for k in range(window_count(n, L, H, stride)):
        o = k * stride
        windows.append(WindowPair(norm[o : o + L], norm[o + L : o + L + H], o))
    return windows


def stack_windows(windows) -> tuple[np.ndarray, np.ndarray]:
    """Stack window pairs into ``(B, L, 8)`` and ``(B, H, 8)`` arrays."""
    return (
        np.stack([w.lookback for w in windows]),
        np.stack([w.lookahead for w in windows]),
    )


def split(dataset: Dataset, train_fraction: float) -> tuple[Dataset, Dataset]:
    """Contiguous prefix/suffix split; the prefix gets the rounding remainder."""
    if not 0.0 < train_fraction < 1.0:
        raise ValueError("train_fraction must lie strictly between 0 and 1")
    n = len(dataset)
    if n == 0:
        raise EmptyDatasetError("cannot split an empty dataset")
    n_train = math.floor(n * train_fraction + 0.5)
    n_train = min(max(n_train, 1), n - 1) if n > 1 else n_train
    if n_train <= 0 or n_train >= n:
        raise EmptyDatasetError(f"split of {n} frames at {train_fraction} leaves one side empty")
    return dataset[:n_train], dataset[n_train:]
