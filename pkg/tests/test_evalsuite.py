import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from oracles import linear_quantile

from genpot.errors import ShapeMismatchError, ValidationTooShortError
from genpot.evalsuite import (
    TimingStats,
    aggregate,
    bench_producer,
    evaluate,
    segment_rmse,
    time_calls,
)
from genpot.generator import CompositeGenerator, Segment, generate_trajectory, init_models
from genpot.timeseries import REPLICATED, Dataset, ScalerParams, normalize

SCALER = ScalerParams(np.zeros(8), np.arange(1.0, 9.0))


def small_gen(L=5, H=2, seed=0):
    return CompositeGenerator(init_models(np.random.default_rng(seed), L, H, 3), SCALER)


def validation(n=120, seed=0):
    rng = np.random.default_rng(seed)
    cols = {name: rng.uniform(0, k + 1, n) for k, name in enumerate(REPLICATED)}
    return Dataset.from_columns(500.0, **cols)


class FakeClock:
    def __init__(self, readings):
        self.readings = iter(readings)

    def __call__(self):
        return next(self.readings)


# -- segment RMSE


def test_rmse_zero_for_identical():
    ref = np.random.default_rng(0).uniform(size=(4, 8))
    assert np.all(segment_rmse(ref.copy(), ref, SCALER) == 0)


def test_rmse_constant_offset():
    ref = np.random.default_rng(1).uniform(size=(6, 8))
    est = ref.copy()
    d = 0.125
    est[:, 3] += d * (SCALER.maxs[3] - SCALER.mins[3])
    r = segment_rmse(Segment(est, 0), ref, SCALER)
    assert r[3] == pytest.approx(d, abs=1e-12)
    assert np.all(np.delete(r, 3) == 0)


def test_rmse_matches_scalar_loop():
    rng = np.random.default_rng(2)
    est, ref = rng.uniform(0, 8, (5, 8)), rng.uniform(0, 8, (5, 8))
    got = segment_rmse(est, ref, SCALER)
    for k in range(8):
        span = SCALER.maxs[k] - SCALER.mins[k]
        acc = 0.0
        for t in range(5):
            acc += ((est[t, k] - SCALER.mins[k]) / span - (ref[t, k] - SCALER.mins[k]) / span) ** 2
        assert abs(got[k] - math.sqrt(acc / 5)) < 1e-12


def test_rmse_shape_mismatch():
    with pytest.raises(ShapeMismatchError):
        segment_rmse(np.zeros((3, 8)), np.zeros((4, 8)), SCALER)


@given(st.integers(0, 2**32 - 1))
def test_rmse_non_negative_and_zero_iff_equal(seed):
    rng = np.random.default_rng(seed)
    a, b = rng.uniform(0, 8, (3, 8)), rng.uniform(0, 8, (3, 8))
    r = segment_rmse(a, b, SCALER)
    assert np.all(r >= 0)
    assert np.all((r == 0) == np.all(a == b, axis=0))


# -- aggregation


def test_three_seed_aggregation():
    raw = np.zeros((3, 2, 8))
    raw[:, 0, 0] = [4.0, 1.0, 2.0]
    raw[:, 1, 5] = [0.3, 0.9, 0.6]
    t = aggregate(raw)
    # sorted (1, 2, 4): quartile positions 0.5 and 1.5
    assert (t.q_low[0, 0], t.median[0, 0], t.q_high[0, 0]) == (1.5, 2.0, 3.0)
    assert t.q_low[1, 5] == pytest.approx(0.45)
    assert t.median[1, 5] == pytest.approx(0.6)
    assert t.q_high[1, 5] == pytest.approx(0.75)


@given(st.lists(st.floats(0, 10), min_size=1, max_size=40))
def test_aggregation_matches_order_statistics(values):
    raw = np.zeros((len(values), 1, 8))
    raw[:, 0, 2] = values
    t = aggregate(raw)
    for q, arr in ((0.25, t.q_low), (0.5, t.median), (0.75, t.q_high)):
        assert arr[0, 2] == pytest.approx(linear_quantile(values, q), abs=1e-12)
    assert t.ordered()


# -- evaluate


def test_evaluate_shapes_and_ordering():
    gen = small_gen()
    t = evaluate(gen, validation(), T=7, S=4, rng_seed=3)
    assert t.raw.shape == (7, 4, 8) and t.median.shape == (4, 8)
    assert t.ordered() and np.all(t.raw >= 0)
    assert np.all((t.positions >= 0) & (t.positions <= 120 - (5 + 4 * 2)))


def test_evaluate_single_seed_collapses_band():
    t = evaluate(small_gen(), validation(), T=1, S=3)
    assert np.array_equal(t.q_low, t.median) and np.array_equal(t.q_high, t.median)


def test_evaluate_matches_per_seed_reconstruction():
    gen = small_gen()
    val = validation()
    t = evaluate(gen, val, T=5, S=3, rng_seed=8, batch=2)
    raw_vals = val.replicated()
    norm = normalize(raw_vals, SCALER)
    for i, p in enumerate(t.positions):
        segs = generate_trajectory(gen, norm[p : p + 5], 3)
        for s, seg in enumerate(segs):
            ref = raw_vals[p + 5 + 2 * s : p + 5 + 2 * (s + 1)]
            assert np.allclose(t.raw[i, s], segment_rmse(seg, ref, SCALER), rtol=1e-12, atol=1e-14)


def test_evaluate_deterministic():
    gen, val = small_gen(), validation()
    a = evaluate(gen, val, T=6, S=2, rng_seed=4)
    b = evaluate(gen, val, T=6, S=2, rng_seed=4)
    assert np.array_equal(a.raw, b.raw) and np.array_equal(a.positions, b.positions)


def test_evaluate_too_short():
    with pytest.raises(ValidationTooShortError):
        evaluate(small_gen(), validation(12), T=3, S=4)


def test_rmse_table_csv(tmp_path):
    t = evaluate(small_gen(), validation(), T=4, S=2)
    t.to_csv(tmp_path / "r.csv")
    lines = (tmp_path / "r.csv").read_text().splitlines()
    assert lines[0] == "step,variable,median,q_low,q_high"
    assert len(lines) == 1 + 2 * 8
    assert lines[1].startswith("1,Voltage0,")
    summary = t.summary()
    json.dumps(summary)
    assert summary["seeds"] == 4 and summary["steps"] == 2


# -- timing


def test_fake_clock_stats():
    clock = FakeClock([0.0, 1.0, 10.0, 12.0, 20.0, 23.0])
    s = time_calls(lambda: None, 3, clock)
    assert (s.min, s.mean, s.max, s.n) == (1.0, 2.0, 3.0, 3)


def test_single_run_stats_collapse():
    s = time_calls(lambda: None, 1, FakeClock([5.0, 5.25]))
    assert s.min == s.mean == s.max == 0.25


@given(st.lists(st.floats(0, 1e3), min_size=1, max_size=300))
def test_stats_ordering(durations):
    s = TimingStats.from_durations(durations)
    assert s.min <= s.mean <= s.max


def test_time_calls_runs_warmup():
    calls = []
    time_calls(lambda: calls.append(1), 4, warmup=3)
    assert len(calls) == 7


def test_bench_producer():
    s = bench_producer(small_gen(), n=10)
    assert s.n == 10 and 0 <= s.min <= s.mean <= s.max
