"""The running decoy: producer, consumer and OPC UA front-end.

The producer thread generates segments as fast as the bounded queue lets
it.  The consumer drains the queue one row every ``1 / publish_rate``
seconds and writes the row into the address space, so the queue's
backpressure alone sets the production rate.
"""
from __future__ import annotations

import logging
import math
import queue
import signal
import sys
import threading
import time
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .cps_sim import SimConfig, load_config, simulate
from .errors import MissingColumnError, SeedSchemaMismatchError, SeedTooShortError
from .generator import CompositeGenerator, Segment, advance_window, generate_segment
from .opcua.addrspace import AddressSpace, build_address_space
from .opcua.codec import now_ticks
from .opcua.server import DEFAULT_PORT, IntrusionLog, OpcUaServer
from .timeseries import Dataset, ScalerParams, denormalize, normalize, read_csv

log = logging.getLogger(__name__)

SIMULATOR = "simulator"


class SegmentQueue:
    """Bounded FIFO of segments; ``put`` blocks when full, ``get`` when empty."""

    def __init__(self, capacity: int = 4):
        if capacity < 1:
            raise ValueError("capacity must be >= 1")
        self.capacity = capacity
        self._q: queue.Queue = queue.Queue(maxsize=capacity)

    def put(self, segment: Segment, stop: threading.Event | None = None, poll: float = 0.05) -> bool:
        """Block until there is room; returns False if ``stop`` was set first."""
        while True:
            try:
                self._q.put(segment, timeout=poll)
                return True
            except queue.Full:
                if stop is not None and stop.is_set():
                    return False

    def get(self, timeout: float | None = None) -> Segment | None:
        """Next segment, or ``None`` if none arrives within ``timeout``."""
        try:
            if timeout is not None and timeout <= 0:
                return self._q.get_nowait()
            return self._q.get(timeout=timeout)
        except queue.Empty:
            return None

    def drain(self) -> int:
        n = 0
        while self.get(0) is not None:
            n += 1
        return n

    def qsize(self) -> int:
        return self._q.qsize()

    def full(self) -> bool:
        return self._q.full()

    def empty(self) -> bool:
        return self._q.empty()


@dataclass
class RuntimeConfig:
    manifest: str | None = None
    publish_rate_hz: float = 500.0
    segment_rate_hz: float | None = None  # derived from publish rate and H when unset
    seed_source: str = SIMULATOR  # CSV path or "simulator"
    seed: int = 42
    sim_config: str | None = None
    host: str = "0.0.0.0"
    port: int = DEFAULT_PORT
    queue_capacity: int = 4
    intrusion_log: str | None = "intrusion.jsonl"
    log_reads: bool = True
    inject_writes: bool = False  # reserved; writes never reach the generator

    def validate(self, H: int | None = None) -> None:
        if self.publish_rate_hz <= 0:
            raise ValueError("publish rate must be positive")
        if self.queue_capacity < 1:
            raise ValueError("queue capacity must be >= 1")
        if self.inject_writes:
            raise ValueError("feeding client writes into the look-back is not supported")
        if H is not None and self.segment_rate_hz is not None:
            if not math.isclose(self.segment_rate_hz * H, self.publish_rate_hz, rel_tol=1e-9):
                raise ValueError(f"segment rate {self.segment_rate_hz} x H={H} != publish rate {self.publish_rate_hz}")

    def segment_rate(self, H: int) -> float:
        return self.segment_rate_hz if self.segment_rate_hz is not None else self.publish_rate_hz / H


def init_lookback(source, L: int, scaler: ScalerParams, rate_hz: float = 500.0, seed: int = 42, sim_config: SimConfig | None = None) -> np.ndarray:
    """Last ``L`` samples of ``source`` as a normalized ``(L, 8)`` buffer.

    ``source`` is a :class:`Dataset`, a CSV path, or ``"simulator"`` (a fresh
    simulation with ``seed``).
    """
    if isinstance(source, Dataset):
        ds = source
    elif str(source) == SIMULATOR:
        cfg = sim_config if sim_config is not None else load_config()
        # twice the look-back so the window starts after the initial transient
        ds = simulate(cfg, 2 * L / rate_hz + 1.0 / rate_hz, rate_hz, seed)
    else:
        try:
            ds = read_csv(Path(source))
        except MissingColumnError as exc:
            raise SeedSchemaMismatchError(f"seed file {source}: {exc}") from exc
    if len(ds) < L:
        raise SeedTooShortError(f"seed source has {len(ds)} samples, look-back needs {L}")
    return normalize(ds.replicated()[-L:], scaler)


# ---------------------------------------------------------------------------
# producer


def producer_loop(gen, segments: SegmentQueue, lookback, stop: threading.Event, start_sequence: int = 0) -> int:
    """Generate and enqueue segments until ``stop`` is set; returns the count produced.

    ``gen`` is a :class:`CompositeGenerator` or a callable ``(window, seq) -> Segment``.
    A generation failure sets ``stop`` before propagating.
    """
    step = (lambda w, s: generate_segment(gen, w, s)) if isinstance(gen, CompositeGenerator) else gen
    window = np.asarray(lookback, dtype=np.float64)
    seq = start_sequence
    try:
        while not stop.is_set():
            seg = step(window, seq)
            window = advance_window(window, seg.normalized)
            if not segments.put(seg, stop):
                break
            seq += 1
    except BaseException:
        log.exception("producer failed; shutting down")
        stop.set()
        raise
    return seq - start_sequence


# ---------------------------------------------------------------------------
# consumer


@dataclass
class PublishStats:
    published: int = 0
    segments: int = 0
    underruns: int = 0
    out_of_order: int = 0
    lost: int = 0
    resyncs: int = 0
    max_lateness: float = 0.0
    last_sequence: int | None = None
    times: deque = field(default_factory=lambda: deque(maxlen=20000))

    def spacing(self) -> np.ndarray:
        t = np.fromiter(self.times, dtype=np.float64)
        return np.diff(t)

    def median_spacing(self) -> float:
        d = self.spacing()
        return float(np.median(d)) if d.size else math.nan

    def as_dict(self) -> dict:
        return {
            "published": self.published,
            "segments": self.segments,
            "underruns": self.underruns,
            "out_of_order": self.out_of_order,
            "lost": self.lost,
            "resyncs": self.resyncs,
            "max_lateness": self.max_lateness,
            "median_spacing": self.median_spacing(),
        }


def _tick_mapper(clock):
    base_ticks = now_ticks()
    base = clock()
    return lambda c: base_ticks + int(round((c - base) * 1e7))


def consumer_loop(
    segments: SegmentQueue,
    space: AddressSpace,
    rate_hz: float,
    stop: threading.Event,
    clock=time.monotonic,
    sleep=time.sleep,
    stats: PublishStats | None = None,
    underrun_after: float | None = None,
    timestamp=None,
    max_segments: int | None = None,
    max_lag: float = 0.025,
    poll: float = 0.005,
) -> PublishStats:
    """Publish queued rows on a fixed grid of absolute deadlines.

    Row ``k`` is due at ``t0 + k / rate_hz``.  When the queue runs dry the
    variables keep their last values; starvation longer than
    ``underrun_after`` (default: two segment durations) is logged once per
    episode.  Falling more than ``max_lag`` behind re-anchors the grid
    instead of bursting to catch up.
    """
    stats = stats if stats is not None else PublishStats()
    period = 1.0 / rate_hz
    stamp = timestamp if timestamp is not None else _tick_mapper(clock)
    t0 = None
    k = 0
    starved_since = None
    underrun_logged = False
    while not stop.is_set():
        if max_segments is not None and stats.segments >= max_segments:
            break
        seg = segments.get(poll)
        if seg is None:
            now = clock()
            if starved_since is None:
                starved_since = now if t0 is None else max(now, t0 + k * period)
            # before the first segment the segment length, and so the limit, is unknown
            if underrun_after is not None and not underrun_logged and now - starved_since > underrun_after:
                stats.underruns += 1
                underrun_logged = True
                log.warning("queue starved for %.3f s; holding last values", now - starved_since)
            continue
        if underrun_after is None:
            underrun_after = 2 * seg.H * period
        if stats.last_sequence is not None:
            if seg.sequence <= stats.last_sequence:
                stats.out_of_order += 1
                log.error("segment %d arrived after %d", seg.sequence, stats.last_sequence)
            elif seg.sequence > stats.last_sequence + 1:
                stats.lost += seg.sequence - stats.last_sequence - 1
        stats.last_sequence = seg.sequence
        stats.segments += 1
        starved_since = None
        underrun_logged = False

        for row in seg.values:
            if stop.is_set():
                return stats
            now = clock()
            if t0 is None:
                t0, k = now, 0
            elif now - (t0 + k * period) > max_lag:
                t0, k = now, 0
                stats.resyncs += 1
            deadline = t0 + k * period
            delay = deadline - now
            if delay > 0:
                sleep(delay)
            now = clock()
            space.publish(row, stamp(now))
            stats.published += 1
            stats.times.append(now)
            stats.max_lateness = max(stats.max_lateness, now - deadline)
            k += 1
    return stats


# ---------------------------------------------------------------------------
# the decoy


class Honeypot:
    """Producer, consumer and server wired together; ``start``/``stop`` control all three."""

    def __init__(self, gen: CompositeGenerator, config: RuntimeConfig, lookback=None, log_sink: IntrusionLog | None = None):
        config.validate(gen.H)
        self.gen = gen
        self.config = config
        if lookback is None:
            sim_cfg = load_config(config.sim_config) if config.sim_config else None
            lookback = init_lookback(config.seed_source, gen.L, gen.scaler, gen.rate_hz, config.seed, sim_cfg)
        self.lookback = np.asarray(lookback, dtype=np.float64)
        self.space = build_address_space()
        self.log = log_sink if log_sink is not None else IntrusionLog(config.intrusion_log)
        self.server = OpcUaServer(self.space, config.host, config.port, self.log, config.log_reads)
        self.queue = SegmentQueue(config.queue_capacity)
        self.stop_event = threading.Event()
        self.stats = PublishStats()
        self.producer_error: BaseException | None = None
        self._threads: list[threading.Thread] = []
        self._old_switch = None

    def _run_producer(self):
        try:
            producer_loop(self.gen, self.queue, self.lookback, self.stop_event)
        except BaseException as exc:
            self.producer_error = exc

    def _run_consumer(self):
        consumer_loop(self.queue, self.space, self.config.publish_rate_hz, self.stop_event, stats=self.stats)

    def status_line(self) -> str:
        host, port = self.server.address
        return (
            f"serving opc.tcp://{host}:{port} manifest={self.gen.manifest_hash()[:16]} "
            f"publish={self.config.publish_rate_hz:g}Hz segment={self.config.segment_rate(self.gen.H):g}Hz "
            f"L={self.gen.L} H={self.gen.H}"
        )

    def start(self) -> "Honeypot":
        # shorter GIL hand-off so the publisher wakes close to its deadlines
        self._old_switch = sys.getswitchinterval()
        sys.setswitchinterval(0.0005)
        self.space.publish(denormalize(self.lookback[-1], self.gen.scaler))
        self.server.start()
        for name, target in (("producer", self._run_producer), ("consumer", self._run_consumer)):
            t = threading.Thread(target=target, name=name, daemon=True)
            t.start()
            self._threads.append(t)
        return self

    def stop(self, timeout: float = 1.0) -> None:
        self.stop_event.set()
        self.server.stop()
        for t in self._threads:
            t.join(timeout)
        self.queue.drain()
        if self._old_switch is not None:
            sys.setswitchinterval(self._old_switch)
            self._old_switch = None
        self.log.close()

    def __enter__(self):
        return self.start()

    def __exit__(self, *exc):
        self.stop()


def serve(gen: CompositeGenerator, config: RuntimeConfig, stop: threading.Event | None = None, out=None, install_signals: bool = True) -> int:
    """Run the decoy in the foreground until ``stop`` is set or SIGTERM/SIGINT arrives."""
    out = out if out is not None else sys.stdout
    pot = Honeypot(gen, config)
    stop = stop if stop is not None else threading.Event()
    previous = {}
    if install_signals and threading.current_thread() is threading.main_thread():
        for sig in (signal.SIGTERM, signal.SIGINT):
            previous[sig] = signal.signal(sig, lambda *_: stop.set())
    pot.start()
    print(pot.status_line(), file=out, flush=True)
    try:
        while not stop.is_set() and not pot.stop_event.is_set():
            stop.wait(0.1)
    finally:
        pot.stop()
        for sig, handler in previous.items():
            signal.signal(sig, handler)
    if pot.producer_error is not None:
        print(f"producer failed: {pot.producer_error}", file=sys.stderr)
        return 1
    return 0
