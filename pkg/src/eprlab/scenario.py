"""Scenario files: JSON documents describing one reproducible run.

Every key is optional except ``name``; unknown keys are rejected. Angles are
integer millidegrees, times nanoseconds, window widths multiples of the mean
inter-pair gap.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Optional

from .bell import PRESETS
from .coincidence import POLICIES
from .errors import ScenarioError
from .models import MODEL_NAMES
from .montecarlo import REGIMES
from .quadrature import MIN_NODES, RULES

MODES = ("analytic", "montecarlo", "coincidence")


def _default_grid() -> list[int]:
    return list(range(0, 180001, 11250))


@dataclass
class Scenario:
    name: str
    mode: str = "analytic"
    models: list[str] = field(default_factory=lambda: list(MODEL_NAMES))
    seed: int = 0
    pair_count: int = 100_000
    source_rate_hz: float = 1.0e5
    regime: str = "joint"
    phi0_mdeg: int = 0
    preset: Optional[str] = None
    station1_settings_mdeg: Optional[list[int]] = None
    station2_settings_mdeg: Optional[list[int]] = None
    switching: str = "uniform-random"
    collection_efficiency: list[float] = field(default_factory=lambda: [1.0, 1.0])
    arm_delays_ns: list[float] = field(default_factory=lambda: [0.0, 0.0])
    jitter_ns: float = 0.0
    window_sweep_gaps: Optional[list[float]] = None
    window_policy: str = "closest-unmatched"
    delta_grid_mdeg: list[int] = field(default_factory=_default_grid)
    quadrature_nodes: int = 512
    quadrature_rule: str = "trapezoid-periodic"
    workers: int = 1
    export_events: bool = False
    write_coincidences: bool = True
    output_dir: str = "out"

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @property
    def phi0(self) -> float:
        return math.radians(self.phi0_mdeg / 1000.0)


_FIELDS = {f.name: f for f in fields(Scenario)}


def _kind(v) -> str:
    return type(v).__name__


def _expect(cond: bool, path: str, msg: str):
    if not cond:
        raise ScenarioError(msg, path)


def _is_int(v) -> bool:
    return isinstance(v, int) and not isinstance(v, bool)


def _is_num(v) -> bool:
    return (isinstance(v, (int, float)) and not isinstance(v, bool)) and math.isfinite(v)


def _int_list(v, path, allow_none=True, nonempty=True):
    if v is None and allow_none:
        return
    _expect(isinstance(v, list), path, f"expected a list of integers, got {_kind(v)}")
    _expect(not nonempty or len(v) > 0, path, "list must not be empty")
    for i, x in enumerate(v):
        _expect(_is_int(x), f"{path}[{i}]", f"expected integer, got {_kind(x)}")


def _num_list(v, path, length=None):
    _expect(isinstance(v, list), path, f"expected a list of numbers, got {_kind(v)}")
    if length is not None:
        _expect(len(v) == length, path, f"expected {length} entries, got {len(v)}")
    for i, x in enumerate(v):
        _expect(_is_num(x), f"{path}[{i}]", f"expected number, got {_kind(x)}")


def validate(s: Scenario) -> Scenario:
    """Check types, ranges and mode requirements; raise :class:`ScenarioError` with a field path."""
    _expect(isinstance(s.name, str) and s.name != "", "name", "expected a nonempty string")
    _expect(s.mode in MODES, "mode", f"expected one of {list(MODES)}, got {s.mode!r}")
    _expect(isinstance(s.models, list) and s.models, "models", "expected a nonempty list of model names")
    for i, m in enumerate(s.models):
        _expect(m in MODEL_NAMES, f"models[{i}]", f"unknown model {m!r}; expected one of {list(MODEL_NAMES)}")
    _expect(_is_int(s.seed), "seed", f"expected integer, got {_kind(s.seed)}")
    _expect(-(1 << 63) <= s.seed < (1 << 64), "seed", "seed must fit in 64 bits")
    _expect(_is_int(s.pair_count) and s.pair_count >= 1, "pair_count", "expected integer >= 1")
    _expect(_is_num(s.source_rate_hz) and s.source_rate_hz > 0, "source_rate_hz", "expected positive number")
    _expect(s.regime in REGIMES, "regime", f"expected one of {list(REGIMES)}, got {s.regime!r}")
    _expect(_is_int(s.phi0_mdeg), "phi0_mdeg", f"expected integer, got {_kind(s.phi0_mdeg)}")
    _expect(s.preset is None or s.preset in PRESETS, "preset",
            f"unknown preset {s.preset!r}; known: {sorted(PRESETS)}")
    _int_list(s.station1_settings_mdeg, "station1_settings_mdeg")
    _int_list(s.station2_settings_mdeg, "station2_settings_mdeg")
    _expect(s.switching in ("uniform-random", "cyclic"), "switching", f"unknown switching rule {s.switching!r}")
    _num_list(s.collection_efficiency, "collection_efficiency", 2)
    for i, eta in enumerate(s.collection_efficiency):
        _expect(0 < eta <= 1, f"collection_efficiency[{i}]", "expected a value in (0, 1]")
    _num_list(s.arm_delays_ns, "arm_delays_ns", 2)
    _expect(_is_num(s.jitter_ns) and s.jitter_ns >= 0, "jitter_ns", "expected number >= 0")
    if s.window_sweep_gaps is not None:
        _num_list(s.window_sweep_gaps, "window_sweep_gaps")
        _expect(len(s.window_sweep_gaps) > 0, "window_sweep_gaps", "list must not be empty")
        for i, w in enumerate(s.window_sweep_gaps):
            _expect(w > 0, f"window_sweep_gaps[{i}]", "window widths must be positive")
    if s.mode == "coincidence":
        _expect(s.window_sweep_gaps is not None, "window_sweep_gaps", "required when mode is 'coincidence'")
    _expect(s.window_policy in POLICIES, "window_policy", f"expected one of {list(POLICIES)}")
    _int_list(s.delta_grid_mdeg, "delta_grid_mdeg", allow_none=False)
    _expect(_is_int(s.quadrature_nodes) and s.quadrature_nodes >= MIN_NODES, "quadrature_nodes",
            f"expected integer >= {MIN_NODES}")
    _expect(s.quadrature_rule in RULES, "quadrature_rule", f"expected one of {list(RULES)}")
    _expect(_is_int(s.workers) and s.workers >= 1, "workers", "expected integer >= 1")
    _expect(isinstance(s.export_events, bool), "export_events", "expected boolean")
    _expect(isinstance(s.write_coincidences, bool), "write_coincidences", "expected boolean")
    _expect(isinstance(s.output_dir, str) and s.output_dir != "", "output_dir", "expected a nonempty string")
    return s


def scenario_from_dict(doc: Any) -> Scenario:
    if not isinstance(doc, dict):
        raise ScenarioError(f"scenario must be a JSON object, got {_kind(doc)}")
    for key in doc:
        if key not in _FIELDS:
            raise ScenarioError(f"unknown key {key!r}", key)
    if "name" not in doc:
        raise ScenarioError("missing required key", "name")
    return validate(Scenario(**doc))


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario file: {exc.strerror}", str(path)) from None
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"JSON parse error at line {exc.lineno}, column {exc.colno}: {exc.msg}",
                            str(path)) from None
    return scenario_from_dict(doc)
