"""Oracle suite: every quadrature route checked against its closed form."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bell import chsh_analytic, correlation_curve
from .models import (furry_probability, joint_outcome_table, kracklauer_normalized, lhv_correlation,
                     phase_linked_integral, phase_linked_probability)
from .polarization import (Angle, FieldAmplitude, apply_polarizer, cascade_intensity_fraction,
                           conditional_probability)
from .quadrature import QuadratureSettings


@dataclass(frozen=True)
class OracleRow:
    name: str
    worst: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return self.worst <= self.tolerance


def _cascade_chain(stages):
    f = FieldAmplitude(1.0, Angle(0.0))
    for s in stages:
        f = apply_polarizer(f, Angle(s))
    return f.intensity


def run_oracles(q: QuadratureSettings = QuadratureSettings(), seed: int = 0) -> list[OracleRow]:
    rng = np.random.default_rng(seed)
    rows = []

    phis = np.linspace(0.0, math.pi, 64)
    rows.append(OracleRow("kracklauer quadrature vs 0.5 sin^2", max(
        abs(kracklauer_normalized(p, q) - 0.5 * math.sin(p) ** 2) for p in phis), 1e-9))

    trials = rng.uniform(-math.pi, math.pi, (100, 3))
    rows.append(OracleRow("phase-linked quadrature vs closed form", max(
        abs(phase_linked_integral(a, b, p, q).real - phase_linked_probability(a, b, p)) for a, b, p in trials),
        1e-9))

    furry_exact = [0.125 * (1 + 0.5 * math.cos(2 * d)) for d in phis]
    rows.append(OracleRow("furry quadrature vs (1 + cos 2d / 2) / 8", max(
        abs(furry_probability(0.0, d, q) - e) for d, e in zip(phis, furry_exact)), 1e-9))

    rows.append(OracleRow("cascade 0/45/90 deg transmits 1/4",
                          abs(cascade_intensity_fraction(initial_axis=0.0, stages=[0.0, math.pi / 4, math.pi / 2])
                              - 0.25), 1e-12))
    rows.append(OracleRow("cascade 0/90 deg transmits 0",
                          abs(cascade_intensity_fraction(initial_axis=0.0, stages=[0.0, math.pi / 2])), 1e-12))
    worst = 0.0
    for _ in range(50):
        stages = rng.uniform(0, math.pi, rng.integers(1, 9)).tolist()
        worst = max(worst, abs(cascade_intensity_fraction(initial_axis=0.0, stages=stages) - _cascade_chain(stages)))
    rows.append(OracleRow("cascade fraction vs chained polarizers", worst, 1e-12))

    ab = rng.uniform(-math.pi, math.pi, (1000, 2))
    rows.append(OracleRow("single-photon = 2 x phase-linked", max(
        abs(conditional_probability(a, b) - 2 * phase_linked_probability(a, b, 0.0)) for a, b in ab), 1e-12))

    worst = 0.0
    for d in np.linspace(0, math.pi, 33):
        t = joint_outcome_table(0.0, d, 0.0)
        worst = max(worst, abs(sum(t.as_tuple()) - 1), abs(t.marginal_1 - 0.5), abs(t.marginal_2 - 0.5))
    rows.append(OracleRow("joint table normalization and marginals", worst, 1e-12))

    grid = np.linspace(0, math.pi, 181)
    rows.append(OracleRow("furry visibility 0.5",
                          abs(correlation_curve("furry", grid, q=q).visibility - 0.5), 1e-6))
    rows.append(OracleRow("phase-linked visibility 1.0",
                          abs(correlation_curve("phase-linked", grid, q=q).visibility - 1.0), 1e-6))

    rows.append(OracleRow("lhv E(a,a) = -1", abs(lhv_correlation(0.3, 0.3, q=q) + 1.0), 0.0))
    rows.append(OracleRow("lhv analytic CHSH <= 2", max(0.0, chsh_analytic("lhv", "weihs-style", q=q).s_value - 2), 1e-6))
    rows.append(OracleRow("phase-linked analytic CHSH = 2 sqrt 2",
                          abs(chsh_analytic("phase-linked", "weihs-style", math.pi / 2, q).s_value
                              - 2 * math.sqrt(2)), 1e-12))
    return rows


def format_table(rows: list[OracleRow]) -> str:
    width = max(len(r.name) for r in rows)
    lines = [f"{'check'.ljust(width)}  {'worst':>10}  {'tol':>8}  result"]
    for r in rows:
        lines.append(f"{r.name.ljust(width)}  {r.worst:10.3e}  {r.tolerance:8.1e}  {'PASS' if r.passed else 'FAIL'}")
    return "\n".join(lines)
