"""Correlation estimates, CHSH and three-setting Bell tests, and correlation curves."""

from __future__ import annotations

import math
from dataclasses import dataclass
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

import numpy as np

from .coincidence import CoincidenceSet
from .errors import InsufficientDataError
from .models import DEFAULT_QUADRATURE, QuadratureSettings, model_correlation, model_probability
from .polarization import _as_radians

VIOLATION_SIGMAS = 3.0


def to_mdeg(radians: float) -> int:
    """Axis angle as integer millidegrees in ``[0, 180000)``."""
    m = int(round(math.degrees(float(radians)) * 1000.0)) % 180000
    return m


def from_mdeg(mdeg: int) -> float:
    return math.radians(int(mdeg) / 1000.0)


@dataclass(frozen=True)
class AnglePreset:
    name: str
    a: float
    a_prime: float
    b: float
    b_prime: float

    @property
    def angles(self) -> tuple[float, float, float, float]:
        return (self.a, self.a_prime, self.b, self.b_prime)

    @property
    def combinations(self) -> tuple[tuple[float, float], ...]:
        """Setting pairs in CHSH order: (a,b), (a,b'), (a',b), (a',b')."""
        return ((self.a, self.b), (self.a, self.b_prime), (self.a_prime, self.b), (self.a_prime, self.b_prime))


# polarization convention; chosen by this package, not taken from any experiment
PRESETS: Mapping[str, AnglePreset] = MappingProxyType({
    "weihs-style": AnglePreset("weihs-style", 0.0, math.pi / 4, math.pi / 8, 3 * math.pi / 8),
})


def get_preset(name: str) -> AnglePreset:
    try:
        return PRESETS[name]
    except KeyError:
        raise InsufficientDataError(f"unknown angle preset {name!r}; known: {sorted(PRESETS)}") from None


@dataclass(frozen=True)
class CorrelationEstimate:
    settings: tuple[float, float]
    counts: tuple[int, int, int, int]  # N(++), N(+-), N(-+), N(--)
    e_value: float
    std_error: float

    @property
    def total(self) -> int:
        return sum(self.counts)

    @property
    def settings_mdeg(self) -> tuple[int, int]:
        return (to_mdeg(self.settings[0]), to_mdeg(self.settings[1]))

    @classmethod
    def from_counts(cls, settings, counts) -> "CorrelationEstimate":
        npp, npm, nmp, nmm = (int(c) for c in counts)
        total = npp + npm + nmp + nmm
        if total <= 0:
            raise InsufficientDataError(
                f"no coincidences for setting combination "
                f"({math.degrees(settings[0]):.3f} deg, {math.degrees(settings[1]):.3f} deg)")
        e = (npp + nmm - npm - nmp) / total
        # binomial: E = 2p - 1 with p the fraction of equal outcomes
        err = math.sqrt(max(0.0, 1.0 - e * e) / total)
        return cls((float(settings[0]), float(settings[1])), (npp, npm, nmp, nmm), e, err)

    @classmethod
    def exact(cls, settings, e_value: float) -> "CorrelationEstimate":
        """Noise-free estimate for analytic model values."""
        return cls((float(settings[0]), float(settings[1])), (0, 0, 0, 0), float(e_value), 0.0)


def _counts(o1: np.ndarray, o2: np.ndarray) -> tuple[int, int, int, int]:
    p1, p2 = o1 > 0, o2 > 0
    return (int(np.count_nonzero(p1 & p2)), int(np.count_nonzero(p1 & ~p2)),
            int(np.count_nonzero(~p1 & p2)), int(np.count_nonzero(~p1 & ~p2)))


def _combination_mask(data: CoincidenceSet, settings) -> np.ndarray:
    m1, m2 = to_mdeg(_as_radians(settings[0])), to_mdeg(_as_radians(settings[1]))
    return (_mdeg_array(data.setting1) == m1) & (_mdeg_array(data.setting2) == m2)


def _mdeg_array(radians: np.ndarray) -> np.ndarray:
    return np.mod(np.rint(np.degrees(radians) * 1000.0).astype(np.int64), 180000)


def estimate_correlation(data: CoincidenceSet, settings=None) -> CorrelationEstimate:
    """Correlation from coincidences of one setting combination.

    With ``settings`` given, records of other combinations are filtered out
    (settings are compared at millidegree resolution); without it the data must
    already hold a single combination.
    """
    if settings is None:
        if len(data) == 0:
            raise InsufficientDataError("no coincidences to estimate a correlation from")
        settings = (float(data.setting1[0]), float(data.setting2[0]))
        mask = slice(None)
    else:
        settings = (_as_radians(settings[0]), _as_radians(settings[1]))
        mask = _combination_mask(data, settings)
    return CorrelationEstimate.from_counts(settings, _counts(data.outcome1[mask], data.outcome2[mask]))


def estimate_all(data: CoincidenceSet) -> dict[tuple[int, int], CorrelationEstimate]:
    """Estimates for every setting combination present, keyed by millidegrees."""
    k1, k2 = _mdeg_array(data.setting1), _mdeg_array(data.setting2)
    out = {}
    for m1, m2 in sorted(set(zip(k1.tolist(), k2.tolist()))):
        mask = (k1 == m1) & (k2 == m2)
        out[(m1, m2)] = CorrelationEstimate.from_counts(
            (from_mdeg(m1), from_mdeg(m2)), _counts(data.outcome1[mask], data.outcome2[mask]))
    return out


@dataclass(frozen=True)
class ChshResult:
    angles: tuple[float, float, float, float]
    s_value: float
    std_error: float
    violated: bool
    correlations: tuple[float, float, float, float] = (0.0, 0.0, 0.0, 0.0)

    def as_dict(self) -> dict:
        return {
            "angles_mdeg": [to_mdeg(a) for a in self.angles],
            "correlations": list(self.correlations),
            "S": self.s_value,
            "S_std_error": self.std_error,
            "violated": self.violated,
            "violation_rule": f"S - 2 > {VIOLATION_SIGMAS:g} * std_error",
        }


def chsh(e_ab: CorrelationEstimate, e_abp: CorrelationEstimate,
         e_apb: CorrelationEstimate, e_apbp: CorrelationEstimate) -> ChshResult:
    """``S = |E(a,b) - E(a,b') + E(a',b) + E(a',b')|`` with errors added in quadrature."""
    ests = (e_ab, e_abp, e_apb, e_apbp)
    combos = {e.settings_mdeg for e in ests}
    if len(combos) != 4:
        raise InsufficientDataError("CHSH needs four distinct setting combinations")
    a, b = e_ab.settings
    a_p, b_p = e_apbp.settings
    if e_abp.settings_mdeg != (to_mdeg(a), to_mdeg(b_p)) or e_apb.settings_mdeg != (to_mdeg(a_p), to_mdeg(b)):
        raise InsufficientDataError("CHSH estimates do not share the settings a, a', b, b'")
    s = abs(e_ab.e_value - e_abp.e_value + e_apb.e_value + e_apbp.e_value)
    err = math.sqrt(sum(e.std_error ** 2 for e in ests))
    return ChshResult((a, a_p, b, b_p), s, err, bool(s - 2.0 > VIOLATION_SIGMAS * err),
                      tuple(e.e_value for e in ests))


def chsh_from_data(data: CoincidenceSet | Mapping, preset: AnglePreset | str) -> ChshResult:
    """CHSH using the preset's four combinations looked up in coincidence data."""
    preset = get_preset(preset) if isinstance(preset, str) else preset
    table = estimate_all(data) if isinstance(data, CoincidenceSet) else data
    ests = []
    for a, b in preset.combinations:
        key = (to_mdeg(a), to_mdeg(b))
        if key not in table:
            raise InsufficientDataError(
                f"no coincidences for setting combination ({key[0] / 1000:g} deg, {key[1] / 1000:g} deg)")
        ests.append(table[key])
    return chsh(*ests)


def chsh_analytic(model: str, preset: AnglePreset | str, offset: float = 0.0,
                  q: QuadratureSettings = DEFAULT_QUADRATURE) -> ChshResult:
    preset = get_preset(preset) if isinstance(preset, str) else preset
    ests = [CorrelationEstimate.exact((a, b), model_correlation(model, a, b, offset, q))
            for a, b in preset.combinations]
    return chsh(*ests)


@dataclass(frozen=True)
class Bell1964Verdict:
    lhs: float
    rhs: float
    margin: float
    std_error: float
    violated: bool

    def as_dict(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "margin": self.margin,
                "std_error": self.std_error, "violated": self.violated,
                "inequality": "1 + P(b,c) >= |P(a,b) - P(a,c)|"}


def bell1964_check(p_ab: CorrelationEstimate, p_ac: CorrelationEstimate,
                   p_bc: CorrelationEstimate) -> Bell1964Verdict:
    """Three-setting test ``1 + P(b,c) >= |P(a,b) - P(a,c)|``."""
    for name, e in (("P(a,b)", p_ab), ("P(a,c)", p_ac), ("P(b,c)", p_bc)):
        if e is None:
            raise InsufficientDataError(f"missing correlation estimate {name}")
    lhs = 1.0 + p_bc.e_value
    rhs = abs(p_ab.e_value - p_ac.e_value)
    err = math.sqrt(p_ab.std_error ** 2 + p_ac.std_error ** 2 + p_bc.std_error ** 2)
    margin = lhs - rhs
    return Bell1964Verdict(lhs, rhs, margin, err, bool(-margin > VIOLATION_SIGMAS * err))


# -- correlation curves ------------------------------------------------------------------

@dataclass(frozen=True)
class CorrelationCurve:
    label: str
    delta: np.ndarray
    value: np.ndarray
    error: np.ndarray

    @property
    def visibility(self) -> float:
        return visibility(self.value)

    def __len__(self):
        return len(self.delta)


def visibility(values: Sequence[float]) -> float:
    v = np.asarray(values, dtype=float)
    hi, lo = float(np.max(v)), float(np.min(v))
    if hi + lo == 0.0:
        return 0.0
    return (hi - lo) / (hi + lo)


def default_delta_grid(points: int = 17) -> np.ndarray:
    """Evenly spaced setting differences covering ``[0, pi]``."""
    return np.linspace(0.0, math.pi, points)


def correlation_curve(source, deltas: Iterable[float] | None = None, *, offset: float = 0.0,
                      q: QuadratureSettings = DEFAULT_QUADRATURE, label: str | None = None) -> CorrelationCurve:
    """Coincidence probability against setting difference.

    ``source`` is a model name (evaluated at settings ``(0, delta)``) or a
    :class:`CoincidenceSet`, in which case each bin holds the fraction of (+,+)
    outcomes among coincidences with that setting difference and the binomial
    standard error. For data, ``deltas`` restricts the bins; by default every
    difference present is used.
    """
    if isinstance(source, CoincidenceSet):
        return _data_curve(source, deltas, label or "data")
    grid = default_delta_grid() if deltas is None else np.asarray(list(deltas), dtype=float)
    if grid.size == 0:
        raise InsufficientDataError("delta grid is empty")
    vals = np.array([model_probability(source, 0.0, d, offset, q) for d in grid])
    return CorrelationCurve(label or source, grid, vals, np.zeros_like(vals))


def _data_curve(data: CoincidenceSet, deltas, label: str) -> CorrelationCurve:
    dm = np.mod(_mdeg_array(data.setting2) - _mdeg_array(data.setting1), 180000)
    wanted = sorted(set(dm.tolist())) if deltas is None else [to_mdeg(d) for d in deltas]
    if not wanted:
        raise InsufficientDataError("no coincidences to build a curve from")
    both_plus = (data.outcome1 > 0) & (data.outcome2 > 0)
    vals, errs = [], []
    for m in wanted:
        mask = dm == m
        n = int(np.count_nonzero(mask))
        if n == 0:
            raise InsufficientDataError(f"no coincidences at setting difference {m / 1000:g} deg")
        p = np.count_nonzero(both_plus & mask) / n
        vals.append(p)
        errs.append(math.sqrt(p * (1 - p) / n))
    return CorrelationCurve(label, np.array([from_mdeg(m) for m in wanted]), np.array(vals), np.array(errs))


@dataclass(frozen=True)
class MixtureBin:
    delta: float
    count: int
    accidental_fraction: float
    observed: float
    predicted: float
    sigma: float

    @property
    def z(self) -> float:
        if self.sigma == 0.0:
            return 0.0 if self.observed == self.predicted else math.inf
        return (self.observed - self.predicted) / self.sigma


def _singles(stream) -> dict[int, float]:
    keys = _mdeg_array(stream.setting)
    plus = stream.outcome > 0
    return {m: float(np.count_nonzero(plus & (keys == m)) / np.count_nonzero(keys == m))
            for m in set(keys.tolist())}


def mixture_law(data: CoincidenceSet, s1, s2) -> list[MixtureBin]:
    """Compare each untagged curve bin with ``(1 - f) * true + f * singles product``.

    ``f`` is the bin's accidental fraction, the true-pair part is taken from the
    tagged pairs of the same bin and the accidental part is predicted from the
    single-station (+) rates of streams ``s1``/``s2`` at the records' settings.
    ``sigma`` is the binomial spread of the accidental (+,+) count.
    """
    if data.is_true_pair is None:
        raise InsufficientDataError("mixture law needs ground-truth pair tags")
    p1, p2 = _singles(s1), _singles(s2)
    k1, k2 = _mdeg_array(data.setting1), _mdeg_array(data.setting2)
    dm = np.mod(k2 - k1, 180000)
    both = (data.outcome1 > 0) & (data.outcome2 > 0)
    q = np.array([p1[a] * p2[b] for a, b in zip(k1.tolist(), k2.tolist())])
    acc = ~data.is_true_pair
    out = []
    for m in sorted(set(dm.tolist())):
        sel = dm == m
        n = int(np.count_nonzero(sel))
        n_acc = int(np.count_nonzero(sel & acc))
        true_pp = int(np.count_nonzero(sel & ~acc & both))
        qa = q[sel & acc]
        observed = np.count_nonzero(sel & both) / n
        predicted = (true_pp + float(qa.sum())) / n
        sigma = math.sqrt(float(np.sum(qa * (1 - qa)))) / n
        out.append(MixtureBin(from_mdeg(m), n, n_acc / n, observed, predicted, sigma))
    return out
