"""Command line entry point: ``eprlab <subcommand> [options]``."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace

from .errors import EprLabError
from .models import MODEL_NAMES
from .runner import run
from .scenario import Scenario, load_scenario, validate
from .validation import format_table, run_oracles


def _deg_list(text: str) -> list[int]:
    """Comma-separated degrees to integer millidegrees."""
    try:
        return [int(round(float(x) * 1000)) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated degrees, got {text!r}") from None


def _float_list(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _model_list(text: str) -> list[str]:
    models = [m.strip() for m in text.split(",") if m.strip()]
    for m in models:
        if m not in MODEL_NAMES:
            raise argparse.ArgumentTypeError(f"unknown model {m!r}; choose from {','.join(MODEL_NAMES)}")
    return models


def _common(p: argparse.ArgumentParser):
    p.add_argument("--scenario", help="scenario JSON file; other flags override its fields")
    p.add_argument("--seed", type=int, help="master seed (default 0)")
    p.add_argument("--out", help="output directory (default: scenario output_dir or ./out)")
    p.add_argument("--workers", type=int, help="worker threads for simulation; never changes results")


def _sim(p: argparse.ArgumentParser, default_pairs: int):
    p.add_argument("--pairs", type=int, help=f"number of emitted pairs (default {default_pairs})")
    p.add_argument("--regime", choices=("joint", "factorized-local"), help="sampling regime (default joint)")
    p.add_argument("--phi0-deg", type=float, help="setup phase offset in degrees (default 0)")
    p.add_argument("--rate", type=float, help="source rate in pairs per second (default 1e5)")
    p.add_argument("--efficiency", type=_float_list, metavar="E1,E2",
                   help="per-arm collection efficiency in (0, 1] (default 1,1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eprlab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("curves", help="analytic correlation curves for the selected models")
    _common(p)
    p.add_argument("--model", type=_model_list, help=f"comma-separated subset of {','.join(MODEL_NAMES)}")
    p.add_argument("--phi0-deg", type=float, help="setup phase offset in degrees (default 0)")
    p.add_argument("--grid", type=_deg_list, metavar="DEG,...", help="setting differences in degrees")
    p.add_argument("--preset", help="also write analytic CHSH values at this angle preset")

    p = sub.add_parser("chsh", help="Monte Carlo CHSH test at an angle preset")
    _common(p)
    _sim(p, 1_000_000)
    p.add_argument("--preset", default=None, help="angle preset (default weihs-style)")

    p = sub.add_parser("simulate", help="simulate a run and export both station event streams")
    _common(p)
    _sim(p, 100_000)
    p.add_argument("--settings1", type=_deg_list, metavar="DEG,...", help="station 1 settings in degrees")
    p.add_argument("--settings2", type=_deg_list, metavar="DEG,...", help="station 2 settings in degrees")

    p = sub.add_parser("coincidence", help="coincidence-window sweep with ground-truth accidental tracking")
    _common(p)
    _sim(p, 200_000)
    p.add_argument("--windows", type=_float_list, metavar="G,...",
                   help="window widths as multiples of the mean inter-pair gap")
    p.add_argument("--jitter-ns", type=float, help="Gaussian timing jitter per detection in ns")
    p.add_argument("--policy", choices=("closest-unmatched", "first-unmatched"), help="matching policy")

    p = sub.add_parser("validate", help="run the quadrature-vs-closed-form oracle suite")
    p.add_argument("--nodes", type=int, default=512, help="quadrature nodes (default 512)")
    return parser


_DEFAULTS = {
    "curves": dict(name="curves", mode="analytic"),
    "chsh": dict(name="chsh", mode="montecarlo", preset="weihs-style", pair_count=1_000_000),
    "simulate": dict(name="simulate", mode="montecarlo", export_events=True, pair_count=100_000),
    "coincidence": dict(name="coincidence", mode="coincidence", pair_count=200_000,
                        collection_efficiency=[0.5, 0.5], jitter_ns=10.0,
                        window_sweep_gaps=[0.01, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0]),
}

# argparse dest -> scenario field, with a converter
_OVERRIDES = {
    "seed": ("seed", None),
    "out": ("output_dir", None),
    "workers": ("workers", None),
    "model": ("models", None),
    "grid": ("delta_grid_mdeg", None),
    "preset": ("preset", None),
    "pairs": ("pair_count", None),
    "regime": ("regime", None),
    "phi0_deg": ("phi0_mdeg", lambda d: int(round(d * 1000))),
    "rate": ("source_rate_hz", None),
    "efficiency": ("collection_efficiency", None),
    "settings1": ("station1_settings_mdeg", None),
    "settings2": ("station2_settings_mdeg", None),
    "windows": ("window_sweep_gaps", None),
    "jitter_ns": ("jitter_ns", None),
    "policy": ("window_policy", None),
}


def scenario_from_args(args) -> Scenario:
    if args.scenario:
        s = load_scenario(args.scenario)
    else:
        s = Scenario(**_DEFAULTS[args.command])
    changes = {}
    for dest, (name, conv) in _OVERRIDES.items():
        val = getattr(args, dest, None)
        if val is not None:
            changes[name] = conv(val) if conv else val
    return validate(replace(s, **changes))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "validate":
            from .quadrature import QuadratureSettings
            rows = run_oracles(QuadratureSettings(args.nodes))
            print(format_table(rows))
            return 0 if all(r.passed for r in rows) else 1
        manifest = run(scenario_from_args(args))
    except EprLabError as exc:
        print(f"eprlab: error: {exc}", file=sys.stderr)
        return exc.exit_code
    print(f"wrote {len(manifest.payload['outputs'])} files; manifest {manifest.path}")
    for o in manifest.payload["outputs"]:
        print(f"  {o['sha256'][:16]}  {o['path']}")
    if args.command == "chsh":
        summary = json.loads((manifest.path.parent / "summary.json").read_text())
        if "chsh" in summary:
            c = summary["chsh"]
            print(f"S = {c['S']:.4f} +- {c['S_std_error']:.4f}  violated={c['violated']}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
