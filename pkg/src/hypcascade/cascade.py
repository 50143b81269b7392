"""Branching motion at finite hyperbolic speed.

A unit-mass particle leaves O along the unit half-circle.  At each event of
a rate-``lam`` Poisson clock the currently deviating particle splits in two
halves: one keeps its geodesic, the other turns onto the geodesic
orthogonal to the one joining O with the split point.  Splinter ``k`` is
the half that stopped turning after the ``k``-th event; the terminal
splinter (``k = n``) turned at every event.
"""
from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import hypgeo
from .hypgeo import Isometry

__all__ = [
    "DirectionPolicy", "ModelParams", "SplinterRecord", "CascadeRun",
    "replication_stream", "sample_event_times", "cosh_eta_splinter",
    "log_cosh_eta_splinter", "splinter_cosh_etas", "distances_from_times", "cosh_eta_cm",
    "build_cascade", "sample_trajectories", "replicate", "simulate", "LOG_SCALE_THRESHOLD",
]

# beyond this value of c*t distances are accumulated as log cosh
LOG_SCALE_THRESHOLD = 300.0


class DirectionPolicy(enum.Enum):
    RANDOM = "random"
    CLOCKWISE = "cw"
    COUNTERCLOCKWISE = "ccw"
    ALTERNATING = "alt"

    @classmethod
    def parse(cls, value) -> "DirectionPolicy":
        if isinstance(value, cls):
            return value
        aliases = {"clockwise": "cw", "counterclockwise": "ccw", "alternating": "alt"}
        return cls(aliases.get(str(value).lower(), str(value).lower()))


@dataclass(frozen=True)
class ModelParams:
    c: float
    lam: float
    horizon: float
    seed: int = 0
    reps: int = 1
    direction_policy: DirectionPolicy = DirectionPolicy.RANDOM
    path_dt: float = 0.01

    def __post_init__(self):
        object.__setattr__(self, "direction_policy", DirectionPolicy.parse(self.direction_policy))
        if not self.c > 0:
            raise ValueError("speed c must be positive")
        if not self.lam >= 0:
            raise ValueError("rate lambda must be non-negative")
        if not self.horizon > 0:
            raise ValueError("horizon must be positive")
        if not self.path_dt > 0:
            raise ValueError("path_dt must be positive")
        if self.reps < 1:
            raise ValueError("reps must be at least 1")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def to_dict(self) -> dict:
        return {
            "c": self.c, "lambda": self.lam, "horizon": self.horizon,
            "seed": self.seed, "reps": self.reps,
            "direction_policy": self.direction_policy.value, "path_dt": self.path_dt,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ModelParams":
        return cls(
            c=float(d["c"]), lam=float(d["lambda"]), horizon=float(d["horizon"]),
            seed=int(d["seed"]), reps=int(d["reps"]),
            direction_policy=d["direction_policy"], path_dt=float(d["path_dt"]),
        )


@dataclass(frozen=True)
class SplinterRecord:
    k: int
    mass: float
    birth_time: float
    cosh_eta: float
    log_cosh_eta: float
    frame: Optional[Isometry]
    path: tuple = ()


@dataclass(frozen=True)
class CascadeRun:
    params: ModelParams
    events: tuple[float, ...]
    splinters: tuple[SplinterRecord, ...]
    cosh_eta_cm: float
    log_cosh_eta_cm: float
    # frame of the deviating particle right after each turn (index 0: launch)
    turn_frames: tuple[Isometry, ...] = field(default=(), repr=False)

    @property
    def n_events(self) -> int:
        return len(self.events)


def replication_stream(seed: int, index: int) -> np.random.Generator:
    """Independent stream for replication ``index`` of master ``seed``.

    Philox is counter based: the seed is the key and the replication index
    occupies the third counter word, so each replication owns a disjoint
    block of the sequence and no state is shared between replications.
    """
    return np.random.Generator(np.random.Philox(key=seed, counter=[0, 0, index, 0]))


def sample_event_times(lam: float, horizon: float, stream: np.random.Generator) -> tuple[float, ...]:
    """Poisson event times in (0, horizon) from exponential gaps."""
    if lam < 0 or not horizon > 0:
        raise ValueError("need lam >= 0 and horizon > 0")
    if lam == 0:
        return ()
    mean = lam * horizon
    chunk = max(16, int(mean + 4.0 * math.sqrt(mean)) + 8)
    times: list[float] = []
    last = 0.0
    while True:
        s = last + np.cumsum(stream.standard_exponential(chunk) / lam)
        inside = int(np.searchsorted(s, horizon, side="left"))
        times.extend(s[:inside].tolist())
        if inside < chunk:
            return tuple(t for t in times if 0.0 < t)
        last = float(s[-1])


def _gaps(times, k, t):
    prev = 0.0
    gaps = []
    for s in times[:k]:
        gaps.append(s - prev)
        prev = s
    gaps.append(t - prev)
    return gaps


def cosh_eta_splinter(times: Sequence[float], k: int, t: float, c: float) -> float:
    """cosh of the distance from O of splinter ``k`` at time ``t``.

    Product of ``cosh(c * gap)`` over the first ``k`` inter-event gaps and the
    final stretch ``t - S_k``.
    """
    if not 0 <= k <= len(times):
        raise IndexError(f"splinter {k} does not exist with {len(times)} events")
    if c * t > LOG_SCALE_THRESHOLD:
        return _exp(log_cosh_eta_splinter(times, k, t, c))
    out = 1.0
    for g in _gaps(times, k, t):
        out *= math.cosh(c * g)
    return out


def log_cosh_eta_splinter(times: Sequence[float], k: int, t: float, c: float) -> float:
    if not 0 <= k <= len(times):
        raise IndexError(f"splinter {k} does not exist with {len(times)} events")
    return math.fsum(hypgeo._log_cosh(c * g) for g in _gaps(times, k, t))


def splinter_cosh_etas(times: Sequence[float], t: float, c: float) -> list[float]:
    """cosh distances of all ``n + 1`` splinters in one pass."""
    out = []
    prefix = 1.0
    prev = 0.0
    for s in times:
        out.append(prefix * math.cosh(c * (t - prev)))
        prefix *= math.cosh(c * (s - prev))
        prev = s
    out.append(prefix * math.cosh(c * (t - prev)))
    return out


def _masses(n: int) -> list[float]:
    return [2.0 ** -(k + 1) for k in range(n)] + [2.0 ** -n]


def _weighted_cm(coshes: Sequence[float]) -> float:
    n = len(coshes) - 1
    return math.fsum(m * v for m, v in zip(_masses(n), coshes))


def _log_weighted_cm(logs: Sequence[float]) -> float:
    n = len(logs) - 1
    terms = [math.log(m) + v for m, v in zip(_masses(n), logs)]
    top = max(terms)
    return top + math.log(math.fsum(math.exp(v - top) for v in terms))


def _exp(v: float) -> float:
    # cosh values past the double range are reported as inf; the log stays exact
    return math.exp(v) if v < 709.78 else math.inf


def distances_from_times(times: Sequence[float], t: float, c: float):
    """``(coshes, logs, cm, log_cm)`` for all splinters of one event sequence.

    The log path takes over when ``c * t`` exceeds ``LOG_SCALE_THRESHOLD``.
    """
    n = len(times)
    if c * t > LOG_SCALE_THRESHOLD:
        logs = [log_cosh_eta_splinter(times, k, t, c) for k in range(n + 1)]
        coshes = [_exp(v) for v in logs]
        log_cm = _log_weighted_cm(logs)
        return coshes, logs, _exp(log_cm), log_cm
    coshes = splinter_cosh_etas(times, t, c)
    cm = _weighted_cm(coshes)
    return coshes, [math.log(v) for v in coshes], cm, math.log(cm)


def cosh_eta_cm(run: CascadeRun) -> float:
    """Mass-weighted cosh distance of the center of mass, recomputed from records."""
    if run.params.c * run.params.horizon > LOG_SCALE_THRESHOLD:
        return _exp(_log_weighted_cm([s.log_cosh_eta for s in run.splinters]))
    return math.fsum(s.mass * s.cosh_eta for s in run.splinters)


def _initial_side(policy, bits):
    # +1 heads clockwise (Euclidean dx/dt > 0), -1 counterclockwise
    if policy is DirectionPolicy.RANDOM:
        return 1 if bits[0] == 0 else -1
    if policy is DirectionPolicy.COUNTERCLOCKWISE:
        return -1
    return 1


def _turn_sense(policy, j, bits):
    """Sense (+1 cw, -1 ccw) taken by the particle deviating at event ``j``."""
    if policy is DirectionPolicy.RANDOM:
        return 1 if bits[j] == 0 else -1
    if policy is DirectionPolicy.CLOCKWISE:
        return 1
    if policy is DirectionPolicy.COUNTERCLOCKWISE:
        return -1
    return 1 if j % 2 == 0 else -1


def _polar_frame(theta: float, eta: float, phi: float) -> Isometry:
    """Frame at disk polar angle ``theta`` and distance ``eta`` from O, heading
    ``phi`` away from the outward radial direction (counterclockwise positive)."""
    return hypgeo.polar_frame(theta, eta, phi)


def _advance(eta: float, theta: float, side: int, s: float) -> tuple[float, float, float]:
    """Polar state after leaving (eta, theta) orthogonally to the radial on ``side``
    and running ``s``: the right triangle O, turn point, end point gives
    cosh eta' = cosh eta cosh s, tan(d theta) = tanh s / sinh eta and
    tan(angle at the end point) = tanh eta / sinh s."""
    eta2 = hypgeo.pythagoras(eta, s)
    theta2 = theta + side * math.atan2(math.tanh(s), math.sinh(eta))
    phi2 = side * (math.pi / 2 - math.atan2(math.sinh(s), math.tanh(eta)))
    return eta2, theta2, phi2


def _turn_side(theta: float, eta: float, sense: int) -> int:
    """Orbital side (+1 counterclockwise about O) whose heading has the given
    Euclidean sense (+1: dx/dt > 0 along the new geodesic)."""
    left = _polar_frame(theta, eta, math.pi / 2).heading()
    right = _polar_frame(theta, eta, -math.pi / 2).heading()
    left_cw = math.cos(left) > math.cos(right)
    return 1 if left_cw == (sense == 1) else -1


def build_cascade(params: ModelParams, stream: np.random.Generator) -> CascadeRun:
    """Simulate one realization up to ``params.horizon``.

    Event gaps are drawn from ``stream`` before any direction bits, so the
    event times do not depend on the direction policy.  Positions are kept
    as polar coordinates about O and every turn is exactly orthogonal to
    the radial geodesic, so frames stay accurate for long paths.  Frames are
    omitted (``None``) when ``c * horizon`` exceeds ``LOG_SCALE_THRESHOLD``,
    where half-plane coordinates underflow.
    """
    c, t = params.c, params.horizon
    times = sample_event_times(params.lam, t, stream)
    n = len(times)
    policy = params.direction_policy
    bits = stream.integers(0, 2, size=n + 1).tolist() if policy is DirectionPolicy.RANDOM else None

    births = (0.0,) + tuple(times)
    masses = _masses(n)
    coshes, logs, cm, log_cm = distances_from_times(times, t, c)
    frames = [None] * (n + 1)
    turn_frames: list[Isometry] = []
    if c * t <= LOG_SCALE_THRESHOLD:
        theta0 = 0.0 if _initial_side(policy, bits) == 1 else math.pi
        turn_frames.append(hypgeo.rotation(theta0))
        frames[0] = _polar_frame(theta0, c * t, 0.0)
        eta, theta, side = 0.0, theta0, 0
        for j, s in enumerate(births[1:], start=1):
            gap = c * (s - births[j - 1])
            if j == 1:
                eta = gap
            else:
                eta, theta, _ = _advance(eta, theta, side, gap)
            side = _turn_side(theta, eta, _turn_sense(policy, j, bits))
            turn_frames.append(_polar_frame(theta, eta, side * math.pi / 2))
            e2, th2, phi2 = _advance(eta, theta, side, c * (t - s))
            frames[j] = _polar_frame(th2, e2, phi2)
    splinters = tuple(
        SplinterRecord(k=k, mass=masses[k], birth_time=births[k], cosh_eta=coshes[k],
                       log_cosh_eta=logs[k], frame=frames[k])
        for k in range(n + 1)
    )
    return CascadeRun(params, tuple(times), splinters, cm, log_cm, tuple(turn_frames))


def _segment_grid(start, stop, dt):
    m = max(1, math.ceil((stop - start) / dt - 1e-12))
    return np.linspace(start, stop, m + 1)


def sample_trajectories(run: CascadeRun) -> list[tuple[np.ndarray, np.ndarray]]:
    """Per-splinter polylines ``(halfplane_xy, disk_uv)`` sampled every ``path_dt``.

    Splinter ``k`` follows the deviating particle's segments up to its
    birth and then its own geodesic until the horizon.  Event times are
    always included as vertices.
    """
    p = run.params
    c, t, dt = p.c, p.horizon, p.path_dt
    if len(run.turn_frames) != run.n_events + 1:
        raise ValueError("run has no frames (c * horizon beyond the log-scale threshold)")
    births = (0.0,) + run.events
    ends = run.events + (t,)
    seg_points = []
    for j, f in enumerate(run.turn_frames[:-1]):
        tau = _segment_grid(births[j], ends[j], dt)
        seg_points.append(hypgeo.frame_points(f, c * (tau - births[j])))
    out = []
    for k in range(run.n_events + 1):
        tau = _segment_grid(births[k], t, dt)
        own = hypgeo.frame_points(run.turn_frames[k], c * (tau - births[k]))
        parts = [seg[:-1] for seg in seg_points[:k]] + [own]
        xy = np.vstack(parts)
        out.append((xy, _to_disk(xy)))
    return out


def _to_disk(xy: np.ndarray) -> np.ndarray:
    x, y = xy[:, 0], xy[:, 1]
    den = x * x + (y + 1.0) ** 2
    return np.column_stack([2.0 * x / den, (x * x + y * y - 1.0) / den])


def _map_replications(params: ModelParams, one: Callable[[int], object], workers: int, start: int) -> list:
    idx = range(start, start + params.reps)

    def work(chunk):
        return [one(r) for r in chunk]

    if workers <= 1:
        return work(idx)
    size = math.ceil(len(idx) / workers)
    chunks = [idx[i:i + size] for i in range(0, len(idx), size)]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(work, chunks))
    return [v for part in parts for v in part]


def replicate(
    params: ModelParams,
    statistic: Callable[[tuple[float, ...]], object],
    workers: int = 1,
    start: int = 0,
) -> list:
    """Apply ``statistic`` to the event times of every replication.

    Replication ``r`` always uses ``replication_stream(seed, r)``; results
    come back in replication order whatever the number of workers.
    """
    def one(r):
        return statistic(sample_event_times(params.lam, params.horizon,
                                            replication_stream(params.seed, r)))

    return _map_replications(params, one, workers, start)


def simulate(params: ModelParams, workers: int = 1, start: int = 0) -> list[CascadeRun]:
    """Full cascades for replications ``start .. start + reps - 1``, in order."""
    return _map_replications(
        params, lambda r: build_cascade(params, replication_stream(params.seed, r)), workers, start)
