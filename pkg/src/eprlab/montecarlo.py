"""Pair source and two-station measurement simulation.

Two sampling regimes are available:

``factorized-local``
    each photon is transmitted independently with Malus probability
    ``cos^2(lam - setting)`` about the shared pair phase ``lam``;
``joint``
    both outcomes are drawn at once from the phase-linked joint outcome table.
    This samples the correlation law, it does not model a local mechanism.

Random numbers come from independent substreams. The substream for
``(stream, block)`` is ``numpy.random.SeedSequence(seed, spawn_key=(stream, block))``
with ``stream`` one of :data:`STREAM_SOURCE`, :data:`STREAM_STATION_1`,
:data:`STREAM_STATION_2`, :data:`STREAM_SWITCHING` and ``block`` the index of a
fixed-size block of pairs. Block boundaries do not depend on the worker count,
so results are bit-identical for any number of workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterator, Optional, Sequence

import numpy as np

from .errors import ConfigurationError
from .models import SetupOffset, joint_outcome_table
from .polarization import Angle, _as_radians

STREAM_SOURCE = 0
STREAM_STATION_1 = 1
STREAM_STATION_2 = 2
STREAM_SWITCHING = 3
STREAM_JITTER = 4  # + station id - 1, used by coincidence.apply_jitter

REGIMES = ("factorized-local", "joint")
DEFAULT_BLOCK_SIZE = 1 << 16
_SEED_MASK = (1 << 64) - 1


def substream(seed: int, stream: int, block: int = 0) -> np.random.Generator:
    """Generator for one ``(stream, block)`` substream of a master seed."""
    ss = np.random.SeedSequence(int(seed) & _SEED_MASK, spawn_key=(int(stream), int(block)))
    return np.random.Generator(np.random.PCG64(ss))


# -- records -------------------------------------------------------------------------

@dataclass(frozen=True)
class PairEvent:
    pair_id: int
    emission_time: float
    lam: float


@dataclass(frozen=True)
class DetectionRecord:
    station_id: int
    timestamp: float
    setting: float
    outcome: int
    pair_id: Optional[int] = None


@dataclass(frozen=True)
class PairBatch:
    """Columnar sequence of :class:`PairEvent`."""

    pair_id: np.ndarray
    emission_time: np.ndarray
    lam: np.ndarray

    def __len__(self):
        return len(self.pair_id)

    def __getitem__(self, i) -> PairEvent:
        return PairEvent(int(self.pair_id[i]), float(self.emission_time[i]), float(self.lam[i]))

    def __iter__(self) -> Iterator[PairEvent]:
        for i in range(len(self)):
            yield self[i]


@dataclass(frozen=True)
class DetectionStream:
    """Columnar, time-ordered records of one station.

    ``pair_id`` is ``None`` when ground-truth tagging is disabled.
    """

    station_id: int
    timestamp: np.ndarray
    setting: np.ndarray
    outcome: np.ndarray
    pair_id: Optional[np.ndarray] = None

    def __len__(self):
        return len(self.timestamp)

    def __getitem__(self, i) -> DetectionRecord:
        pid = None if self.pair_id is None else int(self.pair_id[i])
        return DetectionRecord(self.station_id, float(self.timestamp[i]), float(self.setting[i]),
                               int(self.outcome[i]), pid)

    def __iter__(self) -> Iterator[DetectionRecord]:
        for i in range(len(self)):
            yield self[i]

    @property
    def tagged(self) -> bool:
        return self.pair_id is not None

    def is_time_ordered(self) -> bool:
        return bool(np.all(np.diff(self.timestamp) >= 0))

    def take(self, index) -> "DetectionStream":
        return DetectionStream(self.station_id, self.timestamp[index], self.setting[index],
                               self.outcome[index], None if self.pair_id is None else self.pair_id[index])

    @classmethod
    def empty(cls, station_id: int, tagged: bool = True) -> "DetectionStream":
        return cls(station_id, np.empty(0), np.empty(0), np.empty(0, dtype=np.int8),
                   np.empty(0, dtype=np.int64) if tagged else None)

    @classmethod
    def from_records(cls, records: Sequence[DetectionRecord], station_id: int | None = None) -> "DetectionStream":
        records = list(records)
        if station_id is None:
            station_id = records[0].station_id if records else 1
        tagged = all(r.pair_id is not None for r in records)
        return cls(station_id,
                   np.array([r.timestamp for r in records], dtype=float),
                   np.array([r.setting for r in records], dtype=float),
                   np.array([r.outcome for r in records], dtype=np.int8),
                   np.array([r.pair_id for r in records], dtype=np.int64) if tagged else None)


# -- configuration ---------------------------------------------------------------------

@dataclass(frozen=True)
class StationConfig:
    """Settings of one station.

    A single setting is fixed; with several, each pair gets one drawn uniformly
    at random from the switching substream (``switching="uniform-random"``) or the
    list is cycled in pair order (``switching="cyclic"``).
    """

    station_id: int
    settings: tuple[float, ...] = (0.0,)
    switching: str = "uniform-random"

    def __post_init__(self):
        if self.station_id not in (1, 2):
            raise ConfigurationError(f"station_id must be 1 or 2, got {self.station_id!r}")
        settings = tuple(_as_radians(s) for s in (self.settings if isinstance(self.settings, (list, tuple))
                                                  else (self.settings,)))
        if not settings:
            raise ConfigurationError(f"station {self.station_id} needs at least one setting")
        if not all(math.isfinite(s) for s in settings):
            raise ConfigurationError(f"station {self.station_id} settings must be finite")
        if self.switching not in ("uniform-random", "cyclic"):
            raise ConfigurationError(f"unknown switching rule {self.switching!r}")
        object.__setattr__(self, "settings", settings)

    @classmethod
    def fixed(cls, station_id: int, setting: Angle | float) -> "StationConfig":
        return cls(station_id, (_as_radians(setting),))


@dataclass(frozen=True)
class RunPlan:
    """Everything that determines a simulated run.

    ``regime`` applies to both stations; the joint regime draws both outcomes
    together so it cannot be mixed with a factorized station.
    ``collection_efficiency`` is the per-arm probability that a photon reaches
    its detector at all; lost photons leave unmatched partners behind, which is
    what produces accidental coincidences in windowed matching.
    """

    pair_count: int
    seed: int = 0
    source_rate: float = 1.0e5
    regime: str = "joint"
    station1: StationConfig = field(default_factory=lambda: StationConfig(1))
    station2: StationConfig = field(default_factory=lambda: StationConfig(2))
    offset: float = 0.0
    arm_delays: tuple[float, float] = (0.0, 0.0)
    collection_efficiency: tuple[float, float] = (1.0, 1.0)
    tag_pairs: bool = True
    workers: int = 1
    block_size: int = DEFAULT_BLOCK_SIZE

    def __post_init__(self):
        if int(self.pair_count) != self.pair_count or self.pair_count < 0:
            raise ConfigurationError(f"pair_count must be a nonnegative integer, got {self.pair_count!r}")
        if not (self.source_rate > 0 and math.isfinite(self.source_rate)):
            raise ConfigurationError(f"source_rate must be positive, got {self.source_rate!r}")
        if self.regime not in REGIMES:
            raise ConfigurationError(f"unknown sampling regime {self.regime!r}; expected one of {REGIMES}")
        if self.station1.station_id != 1 or self.station2.station_id != 2:
            raise ConfigurationError("station1/station2 must carry station ids 1 and 2")
        for eta in self.collection_efficiency:
            if not 0.0 < eta <= 1.0:
                raise ConfigurationError(f"collection efficiency must be in (0, 1], got {eta!r}")
        if self.workers < 1 or self.block_size < 1:
            raise ConfigurationError("workers and block_size must be positive")
        if isinstance(self.offset, SetupOffset):
            object.__setattr__(self, "offset", self.offset.phi0)

    @property
    def mean_gap(self) -> float:
        return 1.0 / self.source_rate

    def blocks(self) -> list[tuple[int, int, int]]:
        """``(block_index, start, length)`` triples covering all pairs."""
        n, b = int(self.pair_count), int(self.block_size)
        return [(k, s, min(b, n - s)) for k, s in enumerate(range(0, n, b))]


def _check_plan(plan: RunPlan):
    if plan.pair_count < 1:
        raise ConfigurationError(f"pair_count must be >= 1, got {plan.pair_count}")


# -- sampling kernels ---------------------------------------------------------------------

def _factorized_outcomes(lam, setting, u) -> np.ndarray:
    return np.where(u < np.cos(lam - setting) ** 2, 1, -1).astype(np.int8)


def _joint_outcomes(a, b, phi0, u) -> tuple[np.ndarray, np.ndarray]:
    s2 = np.sin(b - a - phi0) ** 2
    pp = 0.5 * s2
    pm = 0.5 * (1.0 - s2)
    # cells in order (+,+), (+,-), (-,+), (-,-)
    cell = (u >= pp).astype(np.int8) + (u >= pp + pm) + (u >= pp + 2 * pm)
    out1 = np.where(cell <= 1, 1, -1).astype(np.int8)
    out2 = np.where(cell % 2 == 0, 1, -1).astype(np.int8)
    return out1, out2


def measure_factorized(pair: PairEvent, settings: tuple[Angle | float, Angle | float],
                       rng: np.random.Generator | None = None):
    """Independent Malus draws at both stations for one pair."""
    rng = rng if rng is not None else substream(pair.pair_id, STREAM_STATION_1)
    a, b = (_as_radians(s) for s in settings)
    u = rng.random(2)
    o1 = int(_factorized_outcomes(pair.lam, a, u[0]))
    o2 = int(_factorized_outcomes(pair.lam, b, u[1]))
    return (DetectionRecord(1, pair.emission_time, a, o1, pair.pair_id),
            DetectionRecord(2, pair.emission_time, b, o2, pair.pair_id))


def measure_joint(pair: PairEvent, settings: tuple[Angle | float, Angle | float],
                  offset: SetupOffset | float = 0.0, rng: np.random.Generator | None = None):
    """Draw both outcomes of one pair from the joint outcome table."""
    rng = rng if rng is not None else substream(pair.pair_id, STREAM_STATION_1)
    a, b = (_as_radians(s) for s in settings)
    phi0 = offset.phi0 if isinstance(offset, SetupOffset) else float(offset)
    table = joint_outcome_table(a, b, phi0)
    cells = ((1, 1), (1, -1), (-1, 1), (-1, -1))
    u = rng.random()
    acc = 0.0
    o1, o2 = cells[-1]
    for cell, p in zip(cells, table.as_tuple()):
        acc += p
        if u < acc:
            o1, o2 = cell
            break
    return (DetectionRecord(1, pair.emission_time, a, o1, pair.pair_id),
            DetectionRecord(2, pair.emission_time, b, o2, pair.pair_id))


# -- bulk generation -------------------------------------------------------------------------

def _source_block(plan: RunPlan, k: int, n: int):
    rng = substream(plan.seed, STREAM_SOURCE, k)
    gaps = rng.exponential(plan.mean_gap, n)
    lam = rng.uniform(0.0, 2.0 * math.pi, n)
    return gaps, lam


def _settings_block(plan: RunPlan, k: int, start: int, n: int):
    rng = substream(plan.seed, STREAM_SWITCHING, k)
    out = []
    for st in (plan.station1, plan.station2):
        choices = np.asarray(st.settings)
        if len(choices) == 1:
            idx = np.zeros(n, dtype=np.int64)
        elif st.switching == "cyclic":
            idx = (start + np.arange(n)) % len(choices)
        else:
            idx = rng.integers(0, len(choices), n)
        out.append(choices[idx])
    return out


def _measure_block(plan: RunPlan, k: int, lam, s1, s2):
    n = len(lam)
    rng1 = substream(plan.seed, STREAM_STATION_1, k)
    rng2 = substream(plan.seed, STREAM_STATION_2, k)
    if plan.regime == "factorized-local":
        o1 = _factorized_outcomes(lam, s1, rng1.random(n))
        o2 = _factorized_outcomes(lam, s2, rng2.random(n))
    else:
        o1, o2 = _joint_outcomes(s1, s2, plan.offset, rng1.random(n))
    eta1, eta2 = plan.collection_efficiency
    d1 = rng1.random(n) < eta1 if eta1 < 1.0 else np.ones(n, dtype=bool)
    d2 = rng2.random(n) < eta2 if eta2 < 1.0 else np.ones(n, dtype=bool)
    return o1, o2, d1, d2


def _block(plan: RunPlan, k: int, start: int, n: int):
    gaps, lam = _source_block(plan, k, n)
    s1, s2 = _settings_block(plan, k, start, n)
    return (gaps, lam, s1, s2) + _measure_block(plan, k, lam, s1, s2)


def _run_blocks(plan: RunPlan, fn):
    blocks = plan.blocks()
    if plan.workers == 1 or len(blocks) <= 1:
        return [fn(plan, k, s, n) for k, s, n in blocks]
    with ThreadPoolExecutor(max_workers=plan.workers) as pool:
        return list(pool.map(lambda b: fn(plan, *b), blocks))


def generate_pairs(plan: RunPlan) -> PairBatch:
    """Emit ``plan.pair_count`` pairs with exponential gaps and uniform ``lam``."""
    _check_plan(plan)
    parts = _run_blocks(plan, lambda p, k, s, n: _source_block(p, k, n))
    gaps = np.concatenate([g for g, _ in parts])
    lam = np.concatenate([l for _, l in parts])
    return PairBatch(np.arange(plan.pair_count, dtype=np.int64), np.cumsum(gaps), lam)


def run_experiment(plan: RunPlan) -> tuple[DetectionStream, DetectionStream]:
    """Simulate a full run and return the time-ordered streams of stations 1 and 2."""
    tagged = plan.tag_pairs
    if plan.pair_count == 0:
        return DetectionStream.empty(1, tagged), DetectionStream.empty(2, tagged)
    parts = _run_blocks(plan, _block)
    cols = [np.concatenate([p[i] for p in parts]) for i in range(8)]
    gaps, _lam, s1, s2, o1, o2, d1, d2 = cols
    t = np.cumsum(gaps)
    pid = np.arange(plan.pair_count, dtype=np.int64)
    streams = []
    for sid, s, o, d, delay in ((1, s1, o1, d1, plan.arm_delays[0]), (2, s2, o2, d2, plan.arm_delays[1])):
        streams.append(DetectionStream(sid, t[d] + delay, s[d], o[d], pid[d] if tagged else None))
    return streams[0], streams[1]
