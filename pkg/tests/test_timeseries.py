import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from genpot.cps_sim import load_config, simulate
from genpot.errors import (
    DatasetTooShortError,
    EmptyDatasetError,
    MalformedRowError,
    MissingColumnError,
    NonMonotoneTimeError,
)
from genpot.timeseries import (
    COLUMNS,
    N_VARS,
    REPLICATED,
    Dataset,
    ScalerParams,
    denormalize,
    fit_scaler,
    format_number,
    make_windows,
    normalize,
    read_csv,
    split,
    stack_windows,
    window_count,
    write_csv,
)


def small_dataset(n, rate=500.0, seed=0):
    rng = np.random.default_rng(seed)
    cols = {name: rng.uniform(-2, 2, n) for name in COLUMNS[1:]}
    cols["Voltage0"] = rng.uniform(-24, 24, n)
    return Dataset.from_columns(rate, **cols)


@pytest.fixture(scope="module")
def sim():
    return simulate(load_config(), 2.0, 500.0, 3)


def test_columns_follow_the_published_layout():
    assert COLUMNS == (
        "Time", "Voltage0", "Voltage1", "Current0", "Current1", "MotorSpeed0", "MotorSpeed1",
        "Yaw", "Pitch", "TargetYaw", "TargetPitch", "YawDot", "PitchDot",
    )
    assert REPLICATED == ("Voltage0", "Voltage1", "Yaw", "Pitch", "TargetYaw", "TargetPitch", "YawDot", "PitchDot")


def test_read_three_rows(tmp_path):
    path = tmp_path / "three.csv"
    rows = [",".join(COLUMNS)]
    for i in range(3):
        rows.append(",".join([format_number(i / 500)] + ["1.5"] * 12))
    path.write_text("\n".join(rows) + "\n")
    ds = read_csv(path)
    assert len(ds) == 3
    assert ds.rate_hz == 500
    assert ds.frame(2).pitch == 1.5


def test_swapped_header_names_first_offender(tmp_path):
    header = list(COLUMNS)
    header[7], header[8] = header[8], header[7]
    path = tmp_path / "bad.csv"
    path.write_text(",".join(header) + "\n" + ",".join(["0"] * 13) + "\n")
    with pytest.raises(MissingColumnError) as exc:
        read_csv(path)
    assert "Yaw" in str(exc.value)
    assert "Pitch" not in str(exc.value).split("Yaw")[0]


def test_malformed_row_reports_index(tmp_path):
    path = tmp_path / "bad.csv"
    lines = [",".join(COLUMNS), ",".join(["0"] * 13), ",".join(["0.002"] + ["x"] + ["0"] * 11)]
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(MalformedRowError) as exc:
        read_csv(path)
    assert "1" in str(exc.value)


def test_non_monotone_time(tmp_path):
    path = tmp_path / "bad.csv"
    lines = [",".join(COLUMNS)] + [",".join([t] + ["0"] * 12) for t in ("0", "0.004", "0.002")]
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(NonMonotoneTimeError):
        read_csv(path)


def test_simulator_csv_round_trip(tmp_path, sim):
    path = tmp_path / "sim.csv"
    write_csv(sim, path)
    back = read_csv(path)
    assert back.allclose(sim, atol=1e-12)
    assert back.rate_hz == sim.rate_hz


def test_thousand_frame_round_trip(tmp_path):
    ds = simulate(load_config(), 2.0, 500.0, 11)[:1000]
    assert len(ds) == 1000
    write_csv(ds, tmp_path / "k.csv")
    assert read_csv(tmp_path / "k.csv").allclose(ds, atol=1e-12)


def test_empty_dataset_writes_header_only(tmp_path):
    ds = Dataset(np.empty((0, 13)), 500.0)
    write_csv(ds, tmp_path / "e.csv")
    assert (tmp_path / "e.csv").read_text() == ",".join(COLUMNS) + "\n"


def test_zero_frame_writes_zeros(tmp_path):
    ds = Dataset(np.zeros((1, 13)), 500.0)
    write_csv(ds, tmp_path / "z.csv")
    lines = (tmp_path / "z.csv").read_bytes().split(b"\n")
    assert lines[1] == b",".join([b"0"] * 13)
    assert lines[2] == b""


def test_csv_uses_lf_and_shortest_repr(tmp_path):
    ds = Dataset.from_columns(500.0, Yaw=np.array([0.1, 1 / 3]))
    write_csv(ds, tmp_path / "f.csv")
    raw = (tmp_path / "f.csv").read_bytes()
    assert b"\r" not in raw
    assert b"0.1," in raw and repr(1 / 3).encode() in raw


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 40), st.sampled_from([50.0, 100.0, 500.0]), st.integers(0, 2**31))
def test_csv_round_trip_property(tmp_path_factory, n, rate, seed):
    ds = small_dataset(n, rate, seed)
    path = tmp_path_factory.mktemp("rt") / "d.csv"
    write_csv(ds, path)
    assert read_csv(path, rate_hz=rate).allclose(ds, atol=1e-12)


def test_fit_scaler_examples():
    const = Dataset.from_columns(500.0, **{n: np.full(4, 3.0) for n in REPLICATED})
    p = fit_scaler(const)
    assert np.all(p.mins == 3.0) and np.all(p.maxs == 3.0)
    ds = Dataset.from_columns(500.0, Yaw=np.array([-1.0, 0.0, 2.0]))
    p = fit_scaler(ds)
    k = REPLICATED.index("Yaw")
    assert (p.mins[k], p.maxs[k]) == (-1.0, 2.0)


def test_fit_scaler_matches_linear_scan(sim):
    p = fit_scaler(sim)
    vals = sim.replicated()
    for k in range(N_VARS):
        lo = hi = vals[0, k]
        for x in vals[:, k]:
            lo = x if x < lo else lo
            hi = x if x > hi else hi
        assert p.mins[k] == lo and p.maxs[k] == hi


def test_fit_scaler_empty():
    with pytest.raises(EmptyDatasetError):
        fit_scaler(Dataset(np.empty((0, 13)), 500.0))


def test_normalize_endpoints_and_degenerate():
    p = ScalerParams(np.arange(8.0), np.arange(8.0) + 2)
    assert np.all(normalize(p.mins, p) == 0.0)
    assert np.all(normalize(p.maxs, p) == 1.0)
    d = ScalerParams(np.full(8, 5.0), np.full(8, 5.0))
    assert np.all(normalize(np.array([-3.0, 0, 1, 5, 7, 9, 100, 1e9]), d) == 0.0)
    assert np.all(denormalize(np.full(8, 0.7), d) == 5.0)


def test_normalize_round_trip_random():
    rng = np.random.default_rng(5)
    p = ScalerParams(rng.uniform(-5, 0, 8), rng.uniform(0.1, 5, 8))
    x = rng.uniform(-10, 10, (1000, 8))
    assert np.allclose(denormalize(normalize(x, p), p), x, rtol=0, atol=1e-12)


@given(st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=30))
def test_normalized_training_values_in_unit_interval(values):
    x = np.array(values)
    ds = Dataset.from_columns(500.0, **{n: x for n in REPLICATED})
    z = normalize(ds.replicated(), fit_scaler(ds))
    assert np.all((z >= 0) & (z <= 1))


def test_window_examples():
    ds = small_dataset(10)
    p = fit_scaler(ds)
    ws = make_windows(ds, 4, 2, 2, p)
    assert [w.origin_index for w in ws] == [0, 2, 4]
    assert len(make_windows(ds[:6], 4, 2, 1, p)) == 1
    w = ws[1]
    assert w.lookback.shape == (4, 8) and w.lookahead.shape == (2, 8)
    z = normalize(ds.replicated(), p)
    assert np.array_equal(w.lookback, z[2:6]) and np.array_equal(w.lookahead, z[6:8])
    X, Y = stack_windows(ws)
    assert X.shape == (3, 4, 8) and Y.shape == (3, 2, 8)


def test_window_too_short():
    ds = small_dataset(5)
    with pytest.raises(DatasetTooShortError):
        make_windows(ds, 4, 2, 1, fit_scaler(ds))


def test_window_count_exhaustive():
    for n in range(2, 51):
        for L in range(1, n):
            for H in range(1, n - L + 1):
                for stride in range(1, 8):
                    origins = [o for o in range(0, n) if o % stride == 0 and o + L + H <= n]
                    assert window_count(n, L, H, stride) == len(origins)


def test_full_scale_window_span():
    assert 2000 / 500 == 4.0 and 200 / 500 == 0.4


def test_split_examples():
    a, b = split(small_dataset(10), 0.8)
    assert (len(a), len(b)) == (8, 2)
    a, b = split(small_dataset(3), 0.5)
    assert (len(a), len(b)) == (2, 1)


@given(st.integers(2, 300), st.floats(0.01, 0.99))
def test_split_concatenation(n, f):
    ds = small_dataset(n)
    try:
        a, b = split(ds, f)
    except EmptyDatasetError:
        assert round(n * f) in (0, n) or int(n * f + 0.5) in (0, n)
        return
    assert len(a) + len(b) == n
    assert abs(len(a) - n * f) <= 1
    assert np.array_equal(np.concatenate([a.data, b.data]), ds.data)


def test_dataset_is_read_only(sim):
    with pytest.raises(ValueError):
        sim.data[0, 0] = 1.0


def test_dataset_rejects_non_finite():
    bad = np.zeros((2, 13))
    bad[:, 0] = [0, 0.002]
    bad[1, 3] = np.nan
    with pytest.raises(ValueError):
        Dataset(bad, 500.0)
