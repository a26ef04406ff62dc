"""Acceptance gate: one test per criterion, each recording a PASS/FAIL line.

The lines are repeated in an "acceptance criteria" section at the end of the
pytest run.  Criteria 3 to 5 and 10 share the session-scoped desk pipeline
from ``conftest.py``; running this file alone takes roughly 15 minutes on
one core, dominated by training the desk models twice.
"""
import json
import math
import time

import numpy as np
from oracles import adam_two_steps, finite_difference_error
from pipeline import run_cli
from wiregen import Mutator, RandomWire

from genpot.evalsuite import bench_producer
from genpot.generator import CompositeGenerator, init_models, load_composite
from genpot.lstm import AdamState, EncoderDecoderModel, adam_step
from genpot.opcua import messages as m
from genpot.opcua import status
from genpot.opcua.addrspace import OBJECTS, AttributeId, build_address_space
from genpot.opcua.client import Client, ClientError, poll
from genpot.opcua.codec import DecodingError, NodeId, Variant, VariantType
from genpot.opcua.server import IntrusionLog, OpcUaServer
from genpot.runtime import Honeypot, RuntimeConfig
from genpot.timeseries import REPLICATED, ScalerParams, read_csv


def steps_ok(run, *names):
    bad = [f"{n} exit {run['steps'][n]['code']}: {run['steps'][n]['stderr'].strip()[-300:]}" for n in names if run["steps"][n]["code"] != 0]
    return not bad, "; ".join(bad)


def test_criterion_01_lstm_gradients(verdict):
    t0 = time.perf_counter()
    worst = 0.0
    for s in range(20):
        rng = np.random.default_rng(1000 + s)
        model = EncoderDecoderModel.init(rng, 5, 3, 4, target=s % 8)
        X, T = rng.uniform(size=(5, 8)), rng.uniform(size=3)
        worst = max(worst, finite_difference_error(model, X, T, step=1e-5))
    elapsed = time.perf_counter() - t0
    verdict(1, "BPTT vs central differences", worst < 1e-4 and elapsed < 30, f"worst relative error {worst:.2e} (< 1e-4), {elapsed:.1f} s (< 30 s)")


def test_criterion_02_adam_oracle(verdict):
    p = {"p": np.array([1.0])}
    state = AdamState(lr=1e-3)
    for _ in range(2):
        adam_step(p, {"p": 2 * p["p"]}, state)
    err = abs(float(p["p"][0]) - adam_two_steps(1.0, 1e-3))
    verdict(2, "Adam two steps on p^2", err < 1e-12, f"|diff| {err:.1e} (< 1e-12)")


def test_criterion_03_desk_training(desk_run, verdict):
    ok, why = steps_ok(desk_run, "simulate", "train")
    if not ok:
        verdict(3, "desk training", False, why)
    lines = (desk_run["model"] / "history.csv").read_text().splitlines()
    header = lines[0].split(",")
    first = dict(zip(header, map(float, lines[1].split(","))))
    last = dict(zip(header, map(float, lines[-1].split(","))))
    ratios = {n: last[f"train_{n}"] / first[f"train_{n}"] for n in REPLICATED}
    seconds = desk_run["steps"]["simulate"]["seconds"] + desk_run["steps"]["train"]["seconds"]
    epochs = len(lines) - 1
    worst = max(ratios, key=ratios.get)
    ok = epochs == 150 and all(r < 0.2 for r in ratios.values()) and seconds < 15 * 60
    verdict(3, "desk training", ok, f"{epochs} epochs, worst final/first MSE {worst}={ratios[worst]:.4f} (< 0.2), {seconds:.0f} s (< 900 s)")


def test_criterion_04_recursive_generation_bounds(desk_run, verdict):
    ok, why = steps_ok(desk_run, "train", "generate")
    if not ok:
        verdict(4, "1200-segment rollout", False, why)
    gen = load_composite(desk_run["manifest"])
    values = read_csv(desk_run["traj"]).replicated()
    inside = (values >= gen.scaler.mins) & (values <= gen.scaler.maxs)
    seconds = desk_run["steps"]["generate"]["seconds"]
    ok = values.shape == (1200 * gen.H, 8) and bool(inside.all()) and seconds < 300
    verdict(4, "1200-segment rollout", ok, f"{values.shape[0]} rows, {inside.mean():.2%} within training range, {seconds:.1f} s (< 300 s)")


def test_criterion_05_rmse_protocol(desk_run, verdict):
    ok, why = steps_ok(desk_run, "evaluate")
    if not ok:
        verdict(5, "RMSE protocol", False, why)
    summary = desk_run["summary"]
    rows = desk_run["rmse"].read_text().splitlines()[1:]
    full = summary["seeds"] == 301 and summary["steps"] == 20 and len(rows) == 20 * 8
    finite = all(math.isfinite(float(x)) for r in rows for x in r.split(",")[2:])
    n_acc = len(summary["accumulating"])
    ok = full and finite and summary["ordered"] and n_acc >= 6
    verdict(5, "RMSE protocol", ok, f"T=301 S=20 table complete={full and finite}, quantiles ordered={summary['ordered']}, accumulating {n_acc}/8 (>= 6)")


def test_criterion_06_producer_timing(desk_run, verdict):
    ok, why = steps_ok(desk_run, "train")
    if not ok:
        verdict(6, "producer timing", False, why)
    res = run_cli(["--profile", "desk", "bench", "--manifest", str(desk_run["manifest"]), "--n", "300", "--json"])
    desk = json.loads(res["stdout"]) if res["code"] == 0 else {"min": 1, "mean": 0, "max": 0, "n": 0}
    desk_ok = res["code"] == 0 and desk["n"] == 300 and desk["min"] <= desk["mean"] <= desk["max"]

    rng = np.random.default_rng(0)
    scaler = ScalerParams(np.zeros(8), np.ones(8))
    full = CompositeGenerator(init_models(rng, 2000, 200, 64), scaler, 500.0)
    look = rng.uniform(size=(2000, 8))
    stats = bench_producer(full, 300, look)
    full_ok = stats.min <= stats.mean <= stats.max and stats.mean < 0.4
    verdict(
        6,
        "producer timing",
        desk_ok and full_ok,
        f"desk n=300 min/mean/max {desk['min']:.4f}/{desk['mean']:.4f}/{desk['max']:.4f} s; "
        f"L=2000 H=200 mean {stats.mean:.3f} s (< 0.4 s)",
    )


def _conformance():
    """HEL/ACK, OPN (None), session, Browse, Read and Write against the own client."""
    failures = []

    def expect(cond, what):
        if not cond:
            failures.append(what)

    with OpcUaServer(build_address_space(), port=0, log=IntrusionLog(keep=True)) as srv:
        c = Client(*srv.address)
        try:
            ack = c.hello(65536)
            expect(ack.receive_buffer_size == 65536, "ACK buffer size")
            token = c.open_channel()
            expect(token.channel_id == 1, "first channel id")
            c.create_session()
            c.activate_session()
            expect(sorted(c.browse_names(OBJECTS)) == ["Beam", "Fan0", "Fan1", "Target"], "browse Objects")
            srv.space.set_value(srv.space.find("Beam", "Yaw"), 0.5)
            expect(c.read_value(NodeId(2, 2021)) == 0.5, "read Beam/Yaw")
            expect(c.write(NodeId(2, 2032), 0.3) == status.Good, "write TargetPitch")
            expect(c.read_value(NodeId(2, 2032)) == 0.3, "read back TargetPitch")
            expect(c.write(NodeId(2, 2001), 1.0) == status.BadNotWritable, "write Fan0/Voltage")
            expect(c.write(NodeId(2, 2031), Variant(VariantType.String, "x")) == status.BadTypeMismatch, "string write")
        except (ClientError, OSError) as exc:
            failures.append(repr(exc))
        finally:
            c.disconnect()
    return failures


def test_criterion_07_wire_codec(verdict):
    t0 = time.perf_counter()
    mut = Mutator(2024)
    accepted = crashes = mismatches = 0
    first_crash = None
    for _ in range(1_000_000):
        data = mut.case()
        try:
            msg = m.decode_message(data)
        except DecodingError:
            continue
        except Exception as exc:  # anything but a structured decoding error counts as a crash
            crashes += 1
            first_crash = first_crash or (data.hex(), repr(exc))
            continue
        accepted += 1
        if m.encode_message(msg) != data:
            mismatches += 1
    fuzz_s = time.perf_counter() - t0

    gen = RandomWire(77)
    round_trip_bad = 0
    for _ in range(10_000):
        msg, data = gen.frame()
        back = m.decode_message(data)
        if back != msg or m.encode_message(back) != data:
            round_trip_bad += 1

    conf = _conformance()
    ok = crashes == 0 and mismatches == 0 and round_trip_bad == 0 and not conf
    verdict(
        7,
        "wire codec",
        ok,
        f"10^6 fuzz cases in {fuzz_s:.0f} s: {crashes} crashes, {accepted} accepted, {mismatches} re-encode mismatches; "
        f"10^4 round trips: {round_trip_bad} failures; conformance failures: {conf or 'none'}"
        + (f"; first crash {first_crash}" if first_crash else ""),
    )


def test_criterion_08_access_control(verdict):
    log = IntrusionLog(keep=True)
    space = build_address_space()
    read_only = [n for name, n in space.by_variable.items() if not name.startswith("Target")]
    payloads = [Variant.double(1.0), Variant.double(-7.5), Variant(VariantType.Float, 2.0), Variant(VariantType.String, "x"), Variant(VariantType.Double, [1.0, 2.0], True), Variant()]
    attempts = bad = 0
    with OpcUaServer(space, port=0, log=log) as srv:
        before = {n.node_id: n.state for n in read_only}
        c = Client(*srv.address).connect()
        try:
            for node in read_only:
                for v in payloads:
                    attempts += 1
                    if c.write(node.node_id, v) != status.BadNotWritable:
                        bad += 1
                for attr in (AttributeId.Value, AttributeId.BrowseName, AttributeId.AccessLevel):
                    attempts += 1
                    if c.write(node.node_id, 3.0, attr) == status.Good:
                        bad += 1
        finally:
            c.disconnect()
        unchanged = all(n.state == before[n.node_id] for n in read_only)
    logged = [r for r in log.records if r["op"] == "write"]
    nodes = {str(n.node_id) for n in read_only}
    all_logged = len(logged) == attempts and all(r["node"] in nodes and r["session"] and r["ts"] for r in logged)
    ok = bad == 0 and unchanged and all_logged and len(read_only) == 6
    verdict(8, "access control", ok, f"{attempts} writes to {len(read_only)} read-only variables: {bad} accepted, values unchanged={unchanged}, {len(logged)} log entries")


def test_criterion_09_decoy_smoke(desk_run, verdict):
    ok, why = steps_ok(desk_run, "train")
    if not ok:
        verdict(9, "decoy smoke", False, why)
    gen = load_composite(desk_run["manifest"])
    cfg = RuntimeConfig(host="127.0.0.1", port=0, publish_rate_hz=500.0, intrusion_log=None)
    with Honeypot(gen, cfg, log_sink=IntrusionLog()) as pot:
        time.sleep(0.5)
        c = Client(*pot.server.address).connect()
        try:
            dvs = poll(c, NodeId(2, 2022), 100.0, 10.0)
        finally:
            c.disconnect()
        spacing = pot.stats.median_spacing()
        error = pot.producer_error
    stamps = {dv.source_timestamp for dv in dvs}
    k = REPLICATED.index("Pitch")
    values = np.array([dv.value.value for dv in dvs])
    bounded = bool(np.all((values >= gen.scaler.mins[k]) & (values <= gen.scaler.maxs[k])))
    ok = error is None and len(stamps) >= 990 and bounded and abs(spacing - 0.002) <= 0.0005
    verdict(9, "decoy smoke", ok, f"{len(dvs)} reads, {len(stamps)} distinct timestamps (>= 990), in bounds={bounded}, median spacing {spacing * 1e3:.3f} ms (2 ms +- 25%)")


def test_criterion_10_determinism(desk_run, desk_rerun, verdict):
    a, b = desk_run, desk_rerun
    ok_a, why_a = steps_ok(a, *a["steps"])
    ok_b, why_b = steps_ok(b, *b["steps"])
    if not (ok_a and ok_b):
        verdict(10, "determinism", False, why_a or why_b)
    files = ["sim.csv", "traj.csv", "rmse.csv"] + [f"model/{p.name}" for p in sorted(a["model"].iterdir())]
    differing = [f for f in files if (a["root"] / f).read_bytes() != (b["root"] / f).read_bytes()]
    same_summary = a["steps"]["evaluate"]["stdout"] == b["steps"]["evaluate"]["stdout"]
    ok = not differing and same_summary and len(files) == 3 + 10
    verdict(10, "determinism", ok, f"{len(files)} files compared, differing: {differing or 'none'}, evaluate summary identical={same_summary}")
