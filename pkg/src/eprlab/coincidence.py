"""Windowed coincidence matching between the two station streams."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Optional

import numpy as np

from .errors import InvalidInputError, UnsupportedAnalysisError
from .montecarlo import STREAM_JITTER, DetectionRecord, DetectionStream, substream

POLICIES = ("closest-unmatched", "first-unmatched")


@dataclass(frozen=True)
class CoincidenceWindow:
    width: float
    policy: str = "closest-unmatched"

    def __post_init__(self):
        if not (self.width > 0 and math.isfinite(self.width)):
            raise InvalidInputError(f"coincidence window width must be positive, got {self.width!r}")
        if self.policy not in POLICIES:
            raise InvalidInputError(f"unknown matching policy {self.policy!r}; expected one of {POLICIES}")


@dataclass(frozen=True)
class JitterModel:
    sigma: float = 0.0

    def __post_init__(self):
        if not (self.sigma >= 0 and math.isfinite(self.sigma)):
            raise InvalidInputError(f"jitter sigma must be >= 0, got {self.sigma!r}")


@dataclass(frozen=True)
class CoincidencePair:
    record_1: DetectionRecord
    record_2: DetectionRecord
    is_true_pair: Optional[bool] = None


@dataclass(frozen=True)
class CoincidenceSet:
    """Matched records stored as columns.

    ``index_1``/``index_2`` point into the source streams. ``is_true_pair`` is
    ``None`` unless both streams carried ground-truth pair ids.
    """

    t1: np.ndarray
    t2: np.ndarray
    setting1: np.ndarray
    setting2: np.ndarray
    outcome1: np.ndarray
    outcome2: np.ndarray
    is_true_pair: Optional[np.ndarray] = None
    index_1: Optional[np.ndarray] = None
    index_2: Optional[np.ndarray] = None
    window: Optional[CoincidenceWindow] = None

    def __len__(self):
        return len(self.t1)

    def __getitem__(self, i) -> CoincidencePair:
        truth = None if self.is_true_pair is None else bool(self.is_true_pair[i])
        return CoincidencePair(
            DetectionRecord(1, float(self.t1[i]), float(self.setting1[i]), int(self.outcome1[i])),
            DetectionRecord(2, float(self.t2[i]), float(self.setting2[i]), int(self.outcome2[i])),
            truth)

    def __iter__(self) -> Iterator[CoincidencePair]:
        for i in range(len(self)):
            yield self[i]

    @property
    def tagged(self) -> bool:
        return self.is_true_pair is not None

    def select(self, mask) -> "CoincidenceSet":
        def sub(a):
            return None if a is None else a[mask]
        return CoincidenceSet(self.t1[mask], self.t2[mask], self.setting1[mask], self.setting2[mask],
                              self.outcome1[mask], self.outcome2[mask], sub(self.is_true_pair),
                              sub(self.index_1), sub(self.index_2), self.window)

    def true_pairs(self) -> "CoincidenceSet":
        if self.is_true_pair is None:
            raise UnsupportedAnalysisError("coincidences carry no ground-truth tags")
        return self.select(self.is_true_pair)

    @classmethod
    def from_pairs(cls, pairs) -> "CoincidenceSet":
        pairs = list(pairs)
        tagged = bool(pairs) and all(p.is_true_pair is not None for p in pairs)
        return cls(np.array([p.record_1.timestamp for p in pairs], dtype=float),
                   np.array([p.record_2.timestamp for p in pairs], dtype=float),
                   np.array([p.record_1.setting for p in pairs], dtype=float),
                   np.array([p.record_2.setting for p in pairs], dtype=float),
                   np.array([p.record_1.outcome for p in pairs], dtype=np.int8),
                   np.array([p.record_2.outcome for p in pairs], dtype=np.int8),
                   np.array([p.is_true_pair for p in pairs], dtype=bool) if tagged else None)


def apply_jitter(stream: DetectionStream, jitter: JitterModel | float,
                 rng: np.random.Generator | None = None, *, seed: int = 0) -> DetectionStream:
    """Smear timestamps with i.i.d. Gaussian noise and restore time order.

    Without ``rng`` the jitter substream of ``seed`` for this station is used.
    """
    sigma = jitter.sigma if isinstance(jitter, JitterModel) else JitterModel(float(jitter)).sigma
    if sigma == 0.0 or len(stream) == 0:
        return stream
    if rng is None:
        rng = substream(seed, STREAM_JITTER + stream.station_id - 1)
    t = stream.timestamp + rng.normal(0.0, sigma, len(stream))
    order = np.argsort(t, kind="stable")
    moved = stream.take(order)
    return DetectionStream(moved.station_id, t[order], moved.setting, moved.outcome, moved.pair_id)


def _match_indices(t1: np.ndarray, t2: np.ndarray, width: float, policy: str) -> tuple[list, list]:
    """Greedy one-to-one matching driven by station-1 records in time order.

    For each station-1 record the unmatched station-2 records within ``width``
    are candidates; ``closest-unmatched`` takes the nearest (ties go to the
    earlier record), ``first-unmatched`` takes the earliest.
    """
    t1 = t1.tolist()
    t2 = t2.tolist()
    n2 = len(t2)
    used = bytearray(n2)
    out1, out2 = [], []
    j = 0
    closest = policy == "closest-unmatched"
    for i, ta in enumerate(t1):
        lo = ta - width
        while j < n2 and (t2[j] < lo or used[j]):
            j += 1
        hi = ta + width
        best = -1
        best_d = math.inf
        k = j
        while k < n2:
            tb = t2[k]
            if tb > hi:
                break
            if not used[k]:
                if not closest:
                    best = k
                    break
                d = abs(tb - ta)
                if d < best_d:
                    best, best_d = k, d
                elif tb >= ta:
                    # candidates only get farther from here on
                    break
            k += 1
        if best >= 0:
            used[best] = 1
            out1.append(i)
            out2.append(best)
    return out1, out2


def match_coincidences(s1: DetectionStream, s2: DetectionStream,
                       window: CoincidenceWindow) -> CoincidenceSet:
    """Pair records of the two stations whose timestamps differ by at most ``window.width``.

    Each record is used at most once. Output is ordered by the earlier timestamp
    of each pair.
    """
    if not s1.is_time_ordered() or not s2.is_time_ordered():
        raise InvalidInputError("detection streams must be time-ordered")
    i1, i2 = _match_indices(s1.timestamp, s2.timestamp, window.width, window.policy)
    i1 = np.asarray(i1, dtype=np.int64)
    i2 = np.asarray(i2, dtype=np.int64)
    t1 = s1.timestamp[i1]
    t2 = s2.timestamp[i2]
    order = np.lexsort((np.maximum(t1, t2), np.minimum(t1, t2)))
    i1, i2 = i1[order], i2[order]
    truth = None
    if s1.tagged and s2.tagged:
        truth = s1.pair_id[i1] == s2.pair_id[i2]
    return CoincidenceSet(s1.timestamp[i1], s2.timestamp[i2], s1.setting[i1], s2.setting[i2],
                          s1.outcome[i1], s2.outcome[i2], truth, i1, i2, window)


def accidental_fraction(pairs) -> float:
    """Fraction of matched pairs whose records come from different emitted pairs."""
    if isinstance(pairs, CoincidenceSet):
        truth = pairs.is_true_pair
    else:
        pairs = list(pairs)
        if any(p.is_true_pair is None for p in pairs):
            truth = None
        else:
            truth = np.array([p.is_true_pair for p in pairs], dtype=bool)
    if truth is None:
        raise UnsupportedAnalysisError("accidental fraction needs ground-truth pair tags")
    if len(truth) == 0:
        return 0.0
    return float(np.count_nonzero(~truth) / len(truth))


def pair_by_tag(s1: DetectionStream, s2: DetectionStream) -> CoincidenceSet:
    """Ideal coincidence identification: join the streams on ground-truth pair id."""
    if not (s1.tagged and s2.tagged):
        raise UnsupportedAnalysisError("pairing by tag needs ground-truth pair ids on both streams")
    _, i1, i2 = np.intersect1d(s1.pair_id, s2.pair_id, assume_unique=True, return_indices=True)
    i1 = i1.astype(np.int64)
    i2 = i2.astype(np.int64)
    return CoincidenceSet(s1.timestamp[i1], s2.timestamp[i2], s1.setting[i1], s2.setting[i2],
                          s1.outcome[i1], s2.outcome[i2], np.ones(len(i1), dtype=bool), i1, i2)
