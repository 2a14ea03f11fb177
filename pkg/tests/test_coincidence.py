import math

import numpy as np
import pytest

from eprlab.bell import correlation_curve, mixture_law
from eprlab.coincidence import (CoincidencePair, CoincidenceSet, CoincidenceWindow, JitterModel,
                                accidental_fraction, apply_jitter, match_coincidences)
from eprlab.errors import InvalidInputError, UnsupportedAnalysisError
from eprlab.montecarlo import DetectionRecord, DetectionStream, RunPlan, StationConfig, run_experiment, substream


def brute_match(s1, s2, width, policy="closest-unmatched"):
    """Quadratic replay of the greedy matching: station-1 records in time order,
    each takes the best unmatched station-2 record within the window."""
    used = set()
    pairs = []
    for i, ta in enumerate(s1.timestamp):
        cands = [k for k, tb in enumerate(s2.timestamp) if k not in used and abs(tb - ta) <= width]
        if not cands:
            continue
        if policy == "closest-unmatched":
            k = min(cands, key=lambda k: (abs(s2.timestamp[k] - ta), s2.timestamp[k]))
        else:
            k = min(cands, key=lambda k: s2.timestamp[k])
        used.add(k)
        pairs.append((i, k))
    return pairs


def sweep_streams(n=20_000, seed=3, eta=0.5, jitter_gaps=1e-3):
    p = RunPlan(n, seed=seed, station2=StationConfig(2, tuple(k * math.pi / 8 for k in range(8))),
                collection_efficiency=(eta, eta))
    s1, s2 = run_experiment(p)
    j = JitterModel(jitter_gaps * p.mean_gap)
    return p, apply_jitter(s1, j, seed=seed), apply_jitter(s2, j, seed=seed)


class TestJitter:
    def test_zero_sigma_identity(self):
        s1, _ = run_experiment(RunPlan(100, seed=1))
        out = apply_jitter(s1, JitterModel(0.0))
        assert np.array_equal(out.timestamp, s1.timestamp)

    def test_only_times_change(self):
        s1, _ = run_experiment(RunPlan(1000, seed=1, station1=StationConfig(1, (0.0, 1.0))))
        out = apply_jitter(s1, JitterModel(1e-6), seed=1)
        key = lambda s: sorted(zip(s.setting.tolist(), s.outcome.tolist(), s.pair_id.tolist()))
        assert key(out) == key(s1)
        assert out.is_time_ordered()

    def test_reorders_at_mean_gap(self):
        p = RunPlan(10_000, seed=2)
        s1, _ = run_experiment(p)
        out = apply_jitter(s1, JitterModel(p.mean_gap), substream(2, 4))
        inversions = np.count_nonzero(np.diff(out.pair_id) < 0)
        assert inversions > 0

    def test_deterministic(self):
        s1, _ = run_experiment(RunPlan(500, seed=2))
        a = apply_jitter(s1, 1e-6, seed=5)
        b = apply_jitter(s1, 1e-6, seed=5)
        assert np.array_equal(a.timestamp, b.timestamp)

    def test_negative_sigma(self):
        with pytest.raises(InvalidInputError):
            JitterModel(-1.0)


class TestMatch:
    def test_exact_recovery(self):
        # known gaps, all at least 1 us; window below that
        t = np.cumsum(np.array([1.0, 1.5, 1.0, 3.0, 1.2, 2.0]) * 1e-6)
        ids = np.arange(len(t))
        s1 = DetectionStream(1, t, np.zeros(len(t)), np.ones(len(t), dtype=np.int8), ids)
        s2 = DetectionStream(2, t.copy(), np.zeros(len(t)), -np.ones(len(t), dtype=np.int8), ids)
        out = match_coincidences(s1, s2, CoincidenceWindow(0.9e-6))
        assert len(out) == len(t)
        assert out.is_true_pair.all()

    def test_exact_recovery_simulated(self):
        p = RunPlan(5000, seed=7)
        s1, s2 = run_experiment(p)
        min_gap = np.min(np.diff(s1.timestamp))
        out = match_coincidences(s1, s2, CoincidenceWindow(0.5 * min_gap))
        assert len(out) == 5000 and out.is_true_pair.all()

    def test_empty(self):
        e1, e2 = DetectionStream.empty(1), DetectionStream.empty(2)
        assert len(match_coincidences(e1, e2, CoincidenceWindow(1e-9))) == 0

    def test_unordered_rejected(self):
        s = DetectionStream(1, np.array([2.0, 1.0]), np.zeros(2), np.ones(2, dtype=np.int8))
        with pytest.raises(InvalidInputError):
            match_coincidences(s, DetectionStream.empty(2), CoincidenceWindow(1.0))

    def test_bad_window(self):
        with pytest.raises(InvalidInputError):
            CoincidenceWindow(0.0)
        with pytest.raises(InvalidInputError):
            CoincidenceWindow(1.0, "nearest")

    @pytest.mark.parametrize("policy", ["closest-unmatched", "first-unmatched"])
    @pytest.mark.parametrize("gaps", [0.1, 0.5, 2.0])
    def test_against_brute_force(self, policy, gaps):
        p, s1, s2 = sweep_streams(n=1500, seed=int(gaps * 10))
        out = match_coincidences(s1, s2, CoincidenceWindow(gaps * p.mean_gap, policy))
        ref = brute_match(s1, s2, gaps * p.mean_gap, policy)
        assert sorted(zip(out.index_1.tolist(), out.index_2.tolist())) == sorted(ref)

    def test_tie_goes_to_earlier(self):
        s1 = DetectionStream(1, np.array([1.0]), np.zeros(1), np.ones(1, dtype=np.int8))
        s2 = DetectionStream(2, np.array([0.5, 1.5]), np.zeros(2), np.ones(2, dtype=np.int8))
        out = match_coincidences(s1, s2, CoincidenceWindow(1.0))
        assert out.index_2.tolist() == [0]

    def test_invariants(self):
        p, s1, s2 = sweep_streams(n=20_000)
        w = 3 * p.mean_gap
        out = match_coincidences(s1, s2, CoincidenceWindow(w))
        assert len(set(out.index_1.tolist())) == len(out)
        assert len(set(out.index_2.tolist())) == len(out)
        assert np.all(np.abs(out.t1 - out.t2) <= w)
        first = np.minimum(out.t1, out.t2)
        assert np.all(np.diff(first) >= 0)
        assert all(pair.record_1.station_id == 1 and pair.record_2.station_id == 2 for pair in out)

    def test_untagged_streams(self):
        s1, s2 = run_experiment(RunPlan(100, tag_pairs=False))
        out = match_coincidences(s1, s2, CoincidenceWindow(1e-9))
        assert out.is_true_pair is None
        with pytest.raises(UnsupportedAnalysisError):
            accidental_fraction(out)


class TestAccidentalFraction:
    def test_all_true(self):
        r1 = DetectionRecord(1, 0.0, 0.0, 1, 0)
        r2 = DetectionRecord(2, 0.0, 0.0, 1, 0)
        assert accidental_fraction([CoincidencePair(r1, r2, True)] * 4) == 0.0

    def test_half(self):
        r1 = DetectionRecord(1, 0.0, 0.0, 1)
        pairs = [CoincidencePair(r1, r1, True), CoincidencePair(r1, r1, False)] * 3
        assert accidental_fraction(pairs) == 0.5
        assert accidental_fraction(CoincidenceSet.from_pairs(pairs)) == 0.5

    def test_missing_tags(self):
        r1 = DetectionRecord(1, 0.0, 0.0, 1)
        with pytest.raises(UnsupportedAnalysisError):
            accidental_fraction([CoincidencePair(r1, r1, None)])

    def test_half_occupancy_against_replay(self):
        # rate * window = 0.5
        p, s1, s2 = sweep_streams(n=2000, seed=17)
        out = match_coincidences(s1, s2, CoincidenceWindow(0.5 * p.mean_gap))
        f = accidental_fraction(out)
        ref = brute_match(s1, s2, 0.5 * p.mean_gap)
        f_ref = np.mean([s1.pair_id[i] != s2.pair_id[k] for i, k in ref])
        sigma = math.sqrt(f_ref * (1 - f_ref) / len(ref))
        assert abs(f - f_ref) <= 3 * sigma
        assert 0.05 < f < 0.9


class TestDilution:
    @pytest.fixture(scope="class")
    @classmethod
    def sweep(cls):
        p, s1, s2 = sweep_streams(n=100_000, seed=5)
        rows = []
        for g in (0.01, 0.1, 1.0, 10.0):
            out = match_coincidences(s1, s2, CoincidenceWindow(g * p.mean_gap))
            rows.append((accidental_fraction(out), correlation_curve(out).visibility,
                         correlation_curve(out.true_pairs()).visibility, mixture_law(out, s1, s2), out))
        return rows

    def test_monotone(self, sweep):
        f = [r[0] for r in sweep]
        v = [r[1] for r in sweep]
        assert all(b >= a for a, b in zip(f, f[1:]))
        assert all(b <= a for a, b in zip(v, v[1:]))

    def test_wide_window_dilutes(self, sweep):
        f, v, vt, _, _ = sweep[-1]
        assert f > 0.5
        assert v < vt

    def test_limit_recovery(self):
        # sharper timing and a narrower window push the accidental fraction below 0.1 %
        p, s1, s2 = sweep_streams(n=100_000, seed=5, jitter_gaps=1e-4)
        out = match_coincidences(s1, s2, CoincidenceWindow(1e-3 * p.mean_gap))
        assert accidental_fraction(out) < 1e-3
        u = correlation_curve(out)
        t = correlation_curve(out.true_pairs())
        assert np.all(np.abs(u.value - t.value) <= 3 * u.error)

    def test_mixture_law(self, sweep):
        for *_, bins, _ in sweep:
            assert max(abs(b.z) for b in bins) <= 3.0
