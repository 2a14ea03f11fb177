"""Execute a scenario end to end and write its outputs plus a manifest."""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .bell import (chsh_analytic, chsh_from_data, correlation_curve, estimate_all, from_mdeg,
                   get_preset, mixture_law, visibility)
from .coincidence import (CoincidenceWindow, JitterModel, accidental_fraction, apply_jitter,
                          match_coincidences, pair_by_tag)
from .io import write_coincidences, write_curve, write_events, write_json
from .models import QuadratureSettings
from .montecarlo import RunPlan, StationConfig, run_experiment
from .scenario import Scenario, validate

MANIFEST_NAME = "manifest.json"


@dataclass(frozen=True)
class RunManifest:
    path: Path
    payload: dict

    @property
    def outputs(self) -> dict[str, str]:
        return {o["path"]: o["sha256"] for o in self.payload["outputs"]}


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def _rad(mdeg_list):
    return tuple(from_mdeg(m) for m in mdeg_list)


def build_plan(s: Scenario) -> RunPlan:
    """Translate scenario fields into a :class:`RunPlan`.

    Station settings default to the preset's (a, a') / (b, b') when a preset is
    named, otherwise station 1 sits at 0 and station 2 sweeps the delta grid.
    """
    if s.preset is not None:
        p = get_preset(s.preset)
        st1 = (p.a, p.a_prime)
        st2 = (p.b, p.b_prime)
    else:
        st1 = (0.0,)
        st2 = _rad(sorted({m % 180000 for m in s.delta_grid_mdeg}))
    if s.station1_settings_mdeg is not None:
        st1 = _rad(s.station1_settings_mdeg)
    if s.station2_settings_mdeg is not None:
        st2 = _rad(s.station2_settings_mdeg)
    return RunPlan(
        pair_count=s.pair_count, seed=s.seed, source_rate=s.source_rate_hz, regime=s.regime,
        station1=StationConfig(1, st1, s.switching), station2=StationConfig(2, st2, s.switching),
        offset=s.phi0, arm_delays=(s.arm_delays_ns[0] * 1e-9, s.arm_delays_ns[1] * 1e-9),
        collection_efficiency=(float(s.collection_efficiency[0]), float(s.collection_efficiency[1])),
        tag_pairs=True, workers=s.workers)


def _estimates_json(table) -> list[dict]:
    return [{"setting1_mdeg": k[0], "setting2_mdeg": k[1],
             "counts": {"++": e.counts[0], "+-": e.counts[1], "-+": e.counts[2], "--": e.counts[3]},
             "E": e.e_value, "E_std_error": e.std_error} for k, e in table.items()]


def _run_analytic(s: Scenario, out: Path) -> list[Path]:
    q = QuadratureSettings(s.quadrature_nodes, s.quadrature_rule)
    grid = np.radians(np.asarray(s.delta_grid_mdeg, dtype=float) / 1000.0)
    files, vis = [], {}
    for model in s.models:
        curve = correlation_curve(model, grid, offset=s.phi0, q=q)
        files.append(write_curve(out / f"curve_{model}.csv", curve))
        vis[model] = curve.visibility
    files.append(write_json(out / "visibility.json", {"phi0_mdeg": s.phi0_mdeg, "visibility": vis}))
    if s.preset is not None:
        res = {m: chsh_analytic(m, s.preset, s.phi0, q).as_dict()
               for m in s.models if m != "single-photon"}
        files.append(write_json(out / "chsh.json", {"preset": s.preset, "mode": "analytic", "chsh": res}))
    return files


def _run_montecarlo(s: Scenario, out: Path) -> list[Path]:
    plan = build_plan(s)
    s1, s2 = run_experiment(plan)
    files = []
    if s.export_events:
        files.append(write_events(out / "events_station1.tsv", s1))
        files.append(write_events(out / "events_station2.tsv", s2))
    pairs = pair_by_tag(s1, s2)
    table = estimate_all(pairs)
    summary = {"regime": s.regime, "pairs": s.pair_count, "coincidences": len(pairs),
               "phi0_mdeg": s.phi0_mdeg, "combinations": _estimates_json(table)}
    if s.preset is not None:
        summary["preset"] = s.preset
        summary["chsh"] = chsh_from_data(table, s.preset).as_dict()
    curve = correlation_curve(pairs, label="montecarlo")
    summary["visibility"] = curve.visibility
    files.append(write_curve(out / "curve_montecarlo.csv", curve))
    files.append(write_json(out / "summary.json", summary))
    return files


def _non_increasing(xs) -> bool:
    return all(b <= a for a, b in zip(xs, xs[1:]))


def _non_decreasing(xs) -> bool:
    return all(b >= a for a, b in zip(xs, xs[1:]))


def _run_coincidence(s: Scenario, out: Path) -> list[Path]:
    plan = build_plan(s)
    s1, s2 = run_experiment(plan)
    jitter = JitterModel(s.jitter_ns * 1e-9)
    s1 = apply_jitter(s1, jitter, seed=s.seed)
    s2 = apply_jitter(s2, jitter, seed=s.seed)
    files = []
    if s.export_events:
        files.append(write_events(out / "events_station1.tsv", s1))
        files.append(write_events(out / "events_station2.tsv", s2))
    rows = []
    for i, gaps in enumerate(s.window_sweep_gaps):
        window = CoincidenceWindow(gaps * plan.mean_gap, s.window_policy)
        pairs = match_coincidences(s1, s2, window)
        untagged = correlation_curve(pairs, label=f"window_{i}")
        tagged = correlation_curve(pairs.true_pairs(), label=f"window_{i}_tagged")
        bins = mixture_law(pairs, s1, s2)
        files.append(write_curve(out / f"curve_window_{i}.csv", untagged))
        files.append(write_curve(out / f"curve_window_{i}_tagged.csv", tagged))
        if s.write_coincidences:
            files.append(write_coincidences(out / f"coincidences_window_{i}.tsv", pairs))
        rows.append({
            "window_gaps": gaps, "window_ns": window.width * 1e9, "coincidences": len(pairs),
            "accidental_fraction": accidental_fraction(pairs),
            "visibility_untagged": untagged.visibility, "visibility_tagged": tagged.visibility,
            "mixture_max_abs_z": max(abs(b.z) for b in bins),
        })
    frac = [r["accidental_fraction"] for r in rows]
    vis = [r["visibility_untagged"] for r in rows]
    summary = {
        "policy": s.window_policy, "mean_gap_ns": plan.mean_gap * 1e9, "jitter_ns": s.jitter_ns,
        "windows": rows,
        "accidental_fraction_non_decreasing": _non_decreasing(frac),
        "visibility_non_increasing": _non_increasing(vis),
    }
    files.append(write_json(out / "window_sweep.json", summary))
    return files


_MODES = {"analytic": _run_analytic, "montecarlo": _run_montecarlo, "coincidence": _run_coincidence}


def run(scenario: Scenario, output_dir: str | Path | None = None) -> RunManifest:
    """Run ``scenario``, write its files and a manifest listing their SHA-256 hashes.

    Output files never contain timestamps or host details, so identical scenarios
    reproduce identical hashes; only the manifest itself records wall-clock times.
    """
    validate(scenario)
    out = Path(output_dir if output_dir is not None else scenario.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    started = _now()
    files = _MODES[scenario.mode](scenario, out)
    payload = {
        "artifact": "eprlab",
        "version": __version__,
        "scenario": scenario.to_dict(),
        "seed": scenario.seed,
        "started_utc": started,
        "finished_utc": _now(),
        "outputs": [{"path": f.name, "sha256": _sha256(f)} for f in files],
    }
    path = write_json(out / MANIFEST_NAME, payload)
    return RunManifest(path, payload)
