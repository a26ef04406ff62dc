"""Deterministic stand-in for the 2-DoF fan/beam process.

Linear rigid-body dynamics for pitch and yaw, an LQR state-feedback
controller with voltage saturation, first-order motor current/speed lags,
and a cyclic target schedule.  :func:`run_cycle` turns all of that into a
:class:`~genpot.timeseries.Dataset` with the recorded column layout.
"""
from __future__ import annotations

import configparser
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy import signal

from .errors import NoConvergenceError
from .timeseries import Dataset

DEFAULT_CONFIG = "aero_default.ini"


class PlantState(NamedTuple):
    pitch: float = 0.0
    yaw: float = 0.0
    pitch_dot: float = 0.0
    yaw_dot: float = 0.0
    I0: float = 0.0
    I1: float = 0.0
    s0: float = 0.0
    s1: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array(self, dtype=np.float64)

    @classmethod
    def from_array(cls, z) -> "PlantState":
        return cls(*(float(v) for v in z))

    @property
    def kinematic(self) -> np.ndarray:
        """The controlled state ``(pitch, yaw, pitch_dot, yaw_dot)``."""
        return np.array(self[:4], dtype=np.float64)


@dataclass(frozen=True)
class PlantParams:
    pitch_inertia: float = 0.0219
    yaw_inertia: float = 0.1
    pitch_damping: float = 0.0071
    yaw_damping: float = 0.022
    yaw_friction: float = 0.1
    pitch_gain: float = 0.0011
    yaw_gain: float = 0.002
    current_gain: float = 0.06
    current_tau: float = 0.01
    speed_gain: float = 180.0
    speed_tau: float = 0.12
    voltage_limit: float = 24.0

    @property
    def A(self) -> np.ndarray:
        A = np.zeros((4, 4))
        A[0, 2] = 1.0
        A[1, 3] = 1.0
        A[2, 2] = -self.pitch_damping / self.pitch_inertia
        A[3, 3] = -(self.yaw_damping + self.yaw_friction) / self.yaw_inertia
        return A

    @property
    def B(self) -> np.ndarray:
        kp = self.pitch_gain / self.pitch_inertia
        ky = self.yaw_gain / self.yaw_inertia
        return np.array([[0.0, 0.0], [0.0, 0.0], [kp, -kp], [ky, ky]])

    def augmented(self) -> tuple[np.ndarray, np.ndarray]:
        """Full 8-state linear model driven by ``w = (U0, U1, |U0|, |U1|)``."""
        Az = np.zeros((8, 8))
        Bz = np.zeros((8, 4))
        Az[:4, :4] = self.A
        Bz[:4, :2] = self.B
        for k in range(2):
            # currents follow |U|, fan speeds follow signed U
            Az[4 + k, 4 + k] = -1.0 / self.current_tau
            Bz[4 + k, 2 + k] = self.current_gain / self.current_tau
            Az[6 + k, 6 + k] = -1.0 / self.speed_tau
            Bz[6 + k, k] = self.speed_gain / self.speed_tau
        return Az, Bz


@dataclass(frozen=True)
class LqrWeights:
    q_pitch: float = 200.0
    q_yaw: float = 300.0
    q_pitch_dot: float = 8.0
    q_yaw_dot: float = 12.0
    r: float = 0.02

    @property
    def Q(self) -> np.ndarray:
        return np.diag([self.q_pitch, self.q_yaw, self.q_pitch_dot, self.q_yaw_dot])

    @property
    def R(self) -> np.ndarray:
        return self.r * np.eye(2)


@dataclass(frozen=True)
class NoiseParams:
    angle_quantum: float = 2 * math.pi / 4096
    ripple_std: float = 0.35
    ripple_cutoff_hz: float = 25.0
    physics_dt: float = 0.002


@dataclass(frozen=True)
class SequenceSchedule:
    """Cycled list of ``(target_yaw, target_pitch, duration)`` steps."""

    steps: tuple[tuple[float, float, float], ...]

    def __post_init__(self):
        steps = tuple(tuple(float(v) for v in s) for s in self.steps)
        if not steps:
            raise ValueError("schedule needs at least one step")
        if any(len(s) != 3 for s in steps):
            raise ValueError("each schedule step is (target_yaw, target_pitch, duration)")
        if any(s[2] <= 0 for s in steps):
            raise ValueError("schedule durations must be positive")
        object.__setattr__(self, "steps", steps)

    @property
    def period(self) -> float:
        return sum(s[2] for s in self.steps)

    def step_index(self, t: float) -> int:
        tc = math.fmod(t, self.period)
        acc = 0.0
        for i, (_, _, d) in enumerate(self.steps):
            acc += d
            if tc < acc:
                return i
        return len(self.steps) - 1

    def target(self, t: float) -> tuple[float, float]:
        yaw, pitch, _ = self.steps[self.step_index(t)]
        return yaw, pitch

    def boundaries(self, duration: float) -> list[tuple[float, float, int]]:
        """``(start, end, step index)`` of every step instance inside ``[0, duration)``."""
        out = []
        t = 0.0
        i = 0
        while t < duration:
            d = self.steps[i % len(self.steps)][2]
            out.append((t, min(t + d, duration), i % len(self.steps)))
            t += d
            i += 1
        return out


@dataclass(frozen=True)
class SimConfig:
    plant: PlantParams = field(default_factory=PlantParams)
    lqr: LqrWeights = field(default_factory=LqrWeights)
    noise: NoiseParams = field(default_factory=NoiseParams)
    schedule: SequenceSchedule = field(
        default_factory=lambda: SequenceSchedule(
            ((0.0, 0.0, 5.0), (1.0, 0.35, 5.0), (-0.6, -0.3, 5.0), (0.45, -0.45, 5.0))
        )
    )


def load_config(path=None) -> SimConfig:
    """Read an INI simulator config; ``None`` loads the packaged defaults."""
    parser = configparser.ConfigParser()
    if path is None:
        text = resources.files("genpot.data").joinpath(DEFAULT_CONFIG).read_text()
        parser.read_string(text)
    else:
        with Path(path).open() as fh:
            parser.read_file(fh)

    def section(name, cls):
        if not parser.has_section(name):
            return cls()
        known = cls.__dataclass_fields__
        kwargs = {}
        for key, value in parser.items(name):
            if key not in known:
                raise ValueError(f"unknown key {key!r} in [{name}]")
            kwargs[key] = float(value)
        return cls(**kwargs)

    schedule = SimConfig().schedule
    if parser.has_section("schedule"):
        steps = []
        for _, value in parser.items("schedule"):
            steps.append(tuple(float(v) for v in value.split(",")))
        schedule = SequenceSchedule(tuple(steps))
    return SimConfig(
        plant=section("plant", PlantParams),
        lqr=section("controller", LqrWeights),
        noise=section("noise", NoiseParams),
        schedule=schedule,
    )


# ---------------------------------------------------------------------------
# control


def lqr_gain(A, B, Q, R, max_steps: int = 1_000_000, tol: float = 1e-10) -> np.ndarray:
    """Infinite-horizon LQR gain from the steady state of the Riccati ODE.

    ``dP/dtau = A'P + PA - P B R^-1 B' P + Q`` is integrated in reversed time
    from ``P = 0`` with RK4 until the derivative norm drops below ``tol``.
    Returns ``K = R^-1 B' P`` so that ``u = -K x``.
    """
    A = np.atleast_2d(np.asarray(A, dtype=np.float64))
    B = np.asarray(B, dtype=np.float64).reshape(A.shape[0], -1)
    Q = np.atleast_2d(np.asarray(Q, dtype=np.float64))
    R = np.atleast_2d(np.asarray(R, dtype=np.float64))
    Rinv = np.linalg.inv(R)
    S = B @ Rinv @ B.T
    norm_A = np.linalg.norm(A)
    norm_S = np.linalg.norm(S)

    def rhs(P):
        AtP = A.T @ P
        return AtP + AtP.T - P @ S @ P + Q

    P = np.zeros_like(A)
    for _ in range(max_steps):
        k1 = rhs(P)
        if np.linalg.norm(k1) < tol:
            return Rinv @ B.T @ P
        h = 0.25 / (1.0 + norm_A + norm_S * np.linalg.norm(P))
        k2 = rhs(P + 0.5 * h * k1)
        k3 = rhs(P + 0.5 * h * k2)
        k4 = rhs(P + h * k3)
        P = P + (h / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        P = 0.5 * (P + P.T)
    raise NoConvergenceError(f"Riccati integration did not settle within {max_steps} steps")


def controller_step(state: PlantState, target, K, limit: float = 24.0) -> tuple[float, float]:
    """Saturated state feedback ``u = clamp(-K (x - x_ref))``.

    ``target`` is ``(target_yaw, target_pitch)``; the reference has zero rates.
    """
    target_yaw, target_pitch = target
    err = state.kinematic - np.array([target_pitch, target_yaw, 0.0, 0.0])
    u = np.clip(-(np.asarray(K) @ err), -limit, limit)
    return float(u[0]), float(u[1])


# ---------------------------------------------------------------------------
# integration


def plant_step(state: PlantState, voltages, dt: float, params: PlantParams | None = None) -> PlantState:
    """One RK4 step of the plant with the voltages held over ``dt``."""
    if not 0 < dt <= 0.01:
        raise ValueError("dt must lie in (0, 0.01] s")
    params = params or PlantParams()
    Az, Bz = params.augmented()
    u0, u1 = voltages
    w = Bz @ np.array([u0, u1, abs(u0), abs(u1)])
    z = state.as_array()
    k1 = Az @ z + w
    k2 = Az @ (z + 0.5 * dt * k1) + w
    k3 = Az @ (z + 0.5 * dt * k2) + w
    k4 = Az @ (z + dt * k3) + w
    return PlantState.from_array(z + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4))


def rk4_propagator(Az: np.ndarray, Bz: np.ndarray, dt: float) -> tuple[np.ndarray, np.ndarray]:
    """``(Phi, Gamma)`` with ``z' = Phi z + Gamma w`` equal to one RK4 step.

    For linear dynamics with held input, RK4 collapses to the degree-4 Taylor
    polynomial of ``exp(dt A)``.
    """
    n = Az.shape[0]
    M = dt * Az
    I = np.eye(n)
    M2 = M @ M
    M3 = M2 @ M
    Phi = I + M + M2 / 2 + M3 / 6 + M3 @ M / 24
    Gamma = dt * (I + M / 2 + M2 / 6 + M3 / 24) @ Bz
    return Phi, Gamma


def _ripple(rng: np.random.Generator, n: int, noise: NoiseParams) -> np.ndarray:
    """Two channels of band-limited voltage ripple, shape ``(n, 2)``."""
    if noise.ripple_std == 0 or n == 0:
        return np.zeros((n, 2))
    fs = 1.0 / noise.physics_dt
    alpha = 1.0 - math.exp(-2 * math.pi * noise.ripple_cutoff_hz / fs)
    # first-order low-pass; scale so the stationary std equals ripple_std
    gain = math.sqrt((2 - alpha) / alpha)
    white = rng.standard_normal((n, 2)) * noise.ripple_std * gain
    return signal.lfilter([alpha], [1.0, alpha - 1.0], white, axis=0)


def run_cycle(
    params: PlantParams,
    schedule: SequenceSchedule,
    duration: float,
    rate_hz: float = 500.0,
    noise_seed: int = 0,
    lqr: LqrWeights | None = None,
    noise: NoiseParams | None = None,
) -> Dataset:
    """Simulate the closed loop and sample it into a recording.

    Physics runs at ``noise.physics_dt`` (or finer, so that each sample
    interval holds a whole number of substeps); the controller updates every
    substep.  Random draws come from ``numpy.random.PCG64(noise_seed)``.
    """
    if duration <= 0:
        raise ValueError("duration must be positive")
    lqr = lqr or LqrWeights()
    noise = noise or NoiseParams()
    n = int(math.floor(duration * rate_hz + 1e-9))
    sample_dt = 1.0 / rate_hz
    n_sub = max(1, math.ceil(sample_dt / noise.physics_dt - 1e-9))
    dt = sample_dt / n_sub

    K = lqr_gain(params.A, params.B, lqr.Q, lqr.R)
    Phi, Gamma = rk4_propagator(*params.augmented(), dt)
    limit = params.voltage_limit

    rng = np.random.Generator(np.random.PCG64(noise_seed))
    ripple = _ripple(rng, n * n_sub, noise)
    q = noise.angle_quantum
    angle_noise = rng.uniform(-q / 2, q / 2, size=(n, 2))

    # precompute targets per sample
    times = np.arange(n) / rate_hz
    step_ends = np.cumsum([s[2] for s in schedule.steps])
    tc = np.mod(times, schedule.period)
    idx = np.minimum(np.searchsorted(step_ends, tc, side="right"), len(schedule.steps) - 1)
    targets = np.array([(s[0], s[1]) for s in schedule.steps])[idx]

    out = np.zeros((n, 13))
    z = np.zeros(8)
    w = np.zeros(4)
    ref = np.zeros(4)
    for k in range(n):
        ref[0] = targets[k, 1]
        ref[1] = targets[k, 0]
        row = out[k]
        # sensors are read at the start of the sample interval
        row[3:5] = z[4:6]
        row[5:7] = z[6:8]
        row[7] = z[1] + angle_noise[k, 0]
        row[8] = z[0] + angle_noise[k, 1]
        row[11] = z[3]
        row[12] = z[2]
        for j in range(n_sub):
            u = -(K @ (z[:4] - ref)) + ripple[k * n_sub + j]
            np.clip(u, -limit, limit, out=u)
            if j == 0:
                row[1:3] = u
            w[:2] = u
            w[2:] = np.abs(u)
            z = Phi @ z + Gamma @ w
        row[9] = targets[k, 0]
        row[10] = targets[k, 1]
    out[:, 0] = times
    return Dataset(out, rate_hz)


def simulate(config: SimConfig, duration: float, rate_hz: float = 500.0, seed: int = 0) -> Dataset:
    return run_cycle(config.plant, config.schedule, duration, rate_hz, seed, config.lqr, config.noise)
