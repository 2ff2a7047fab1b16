"""Command-line interface.

Subcommands: run a config-file sweep, run a named figure recipe,
optimize the divergence angle, compute the jitter/beamwidth outage map,
and regenerate the reflection-coefficient tables from simulation.
Exit status is 0 only when no analytic-vs-simulation tolerance flag was
raised during the run.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from . import __version__
from .channel import LinkConfig
from .config import parse_config, parse_link_overrides, require_experiment_keys
from .experiments import (
    ExperimentResult,
    ExperimentSpec,
    heatmap,
    optimize_divergence,
    run_experiment,
    write_outputs,
)
from .mrr import fit_sector_model, sample_hmrr
from .recipes import build_recipe, recipe_names

PAPER_SCALE = 50_000_000


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=None,
                   help="Monte-Carlo samples per grid point (default 1e6)")
    p.add_argument("--paper-scale", action="store_true",
                   help="use the study's 5e7-sample budget")
    p.add_argument("--out", default=None, help="output CSV path")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--set", action="append", default=[], metavar="KEY=VALUE",
                   help="override a link parameter, e.g. --set 'Pt=20 dBm'")


def _samples(args) -> int | None:
    if args.paper_scale:
        return PAPER_SCALE
    return args.samples


def _base_config(args) -> LinkConfig:
    cfg = LinkConfig()
    if args.set:
        overrides = parse_link_overrides(args.set)
        if "zeta" in overrides:
            overrides.setdefault("h_l", None)
        cfg = cfg.with_(**overrides)
    return cfg


def cmd_run(args) -> int:
    raw = parse_config(args.spec_file)
    require_experiment_keys(raw)
    base = raw.build_link_config(_base_config(args))
    exp = raw.experiment
    spec = ExperimentSpec(
        base=base,
        sweep_axis=exp["sweep"],
        grid=tuple(exp["grid"]),
        metrics=tuple(exp["metrics"]),
        engines=tuple(exp["engines"]),
        output_path=args.out or exp.get("out"),
        seed=args.seed if args.seed else exp.get("seed", 0),
        n_samples=_samples(args) or exp.get("samples", 1_000_000),
        regime=exp.get("regime"),
        bins=exp.get("bins", 80),
        ber_terms=exp.get("ber_terms", 20),
        ber_gamma_max=exp.get("ber_gamma_max", 4.0),
        label=exp.get("label", ""),
    )
    result = run_experiment(spec, workers=args.workers)
    _report(result)
    return 0 if result.ok else 2


def cmd_recipe(args) -> int:
    if args.list:
        print("\n".join(recipe_names()))
        return 0
    if args.name == "fig13":
        from .recipes import build_fig13_rows

        rows = build_fig13_rows(seed=args.seed, n_samples=_samples(args) or 1_000_000)
        if args.out:
            write_outputs(rows, args.out, extra_meta={"recipe": "fig13",
                                                      "seed": args.seed})
            print(f"wrote {args.out}")
        print(f"rows: {len(rows)}")
        return 0
    specs = build_recipe(args.name, _base_config(args), seed=args.seed,
                         n_samples=_samples(args))
    rows, flags, errors = [], [], []
    for spec in specs:
        res = run_experiment(spec, workers=args.workers)
        rows.extend(res.rows)
        flags.extend(f"[{spec.label}] {f}" for f in res.flags)
        errors.extend(f"[{spec.label}] {e}" for e in res.errors)
    combined = ExperimentResult(specs[0], rows, flags, errors)
    if args.out:
        write_outputs(combined, args.out,
                      extra_meta={"recipe": args.name,
                                  "curves": [s.label for s in specs]})
    _report(combined)
    return 0 if not flags else 2


def cmd_optimize(args) -> int:
    cfg = _base_config(args)
    res = optimize_divergence(cfg, objective=args.objective,
                              bracket=(args.bracket[0] * 1e-3, args.bracket[1] * 1e-3),
                              regime=args.regime)
    out = {
        "theta_opt_mrad": res.theta_opt * 1e3,
        "objective": args.objective,
        "value": res.value,
        "interior": res.interior,
        "message": res.message,
    }
    print(json.dumps(out, sort_keys=True))
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            json.dump(out, fh, sort_keys=True, indent=2)
            fh.write("\n")
    return 0


def cmd_heatmap(args) -> int:
    cfg = _base_config(args)
    se_grid = np.linspace(args.sigma_e[0] * 1e-6, args.sigma_e[1] * 1e-6, args.sigma_e_points)
    wz_grid = np.linspace(args.w_z[0], args.w_z[1], args.w_z_points)
    mat = heatmap(cfg, se_grid, wz_grid, metric=args.metric, regime=args.regime)
    path = args.out or "heatmap.csv"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("sigma_theta_e_urad\\w_z_m," + ",".join(f"{w:.12g}" for w in wz_grid) + "\n")
        for se, row in zip(se_grid, mat):
            fh.write(f"{se*1e6:.12g}," + ",".join(f"{v:.12g}" for v in row) + "\n")
    print(f"wrote {path} ({mat.shape[0]}x{mat.shape[1]})")
    return 0


def cmd_mc_tables(args) -> int:
    n = _samples(args) or 5_000_000
    deg = np.arange(1.0, 12.0)
    mom_path = (args.out or "mrr_tables") + "_moments.csv"
    sec_path = (args.out or "mrr_tables") + "_sectors.csv"
    with open(mom_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("sigma_deg,mu,sd\n")
        for d in deg:
            s = sample_hmrr(math.radians(d), n, seed=args.seed)
            fh.write(f"{d:g},{s.mean():.6g},{s.std():.6g}\n")
    with open(sec_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("sigma_deg," + ",".join(f"B{i}" for i in range(1, 9)) + "\n")
        for d in (1.0, 3.0, 5.0, 7.0, 9.0, 11.0):
            s = sample_hmrr(math.radians(d), n, seed=args.seed)
            model = fit_sector_model(s, 8)
            fh.write(f"{d:g}," + ",".join(f"{b:.6g}" for b in model.B) + "\n")
    print(f"wrote {mom_path} and {sec_path} ({n} samples per row)")
    return 0


def _report(result: ExperimentResult) -> None:
    print(f"rows: {len(result.rows)}")
    for e in result.errors:
        print(f"error: {e}", file=sys.stderr)
    for f in result.flags:
        print(f"flag: {f}", file=sys.stderr)
    if result.spec.output_path:
        print(f"wrote {result.spec.output_path}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="mrrlink",
        description="Retroreflector UAV-to-ground optical link: closed-form "
                    "channel statistics, Monte-Carlo simulation and sweeps.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a sweep described by a config file")
    p.add_argument("spec_file")
    _add_common(p)
    p.set_defaults(fn=cmd_run)

    p = sub.add_parser("recipe", help="run a named figure recipe")
    p.add_argument("name", nargs="?", default="")
    p.add_argument("--list", action="store_true", help="list recipe names")
    _add_common(p)
    p.set_defaults(fn=cmd_recipe)

    p = sub.add_parser("optimize", help="optimal divergence angle")
    p.add_argument("--objective", choices=("outage", "ber"), default="outage")
    p.add_argument("--bracket", type=float, nargs=2, default=(0.1, 2.0),
                   metavar=("LO_MRAD", "HI_MRAD"))
    p.add_argument("--regime", choices=("weak", "strong"), default=None)
    _add_common(p)
    p.set_defaults(fn=cmd_optimize)

    p = sub.add_parser("heatmap", help="outage over tracking jitter x beamwidth")
    p.add_argument("--metric", choices=("outage", "ber"), default="outage")
    p.add_argument("--sigma-e", type=float, nargs=2, default=(50.0, 400.0),
                   metavar=("LO_URAD", "HI_URAD"), dest="sigma_e")
    p.add_argument("--sigma-e-points", type=int, default=8, dest="sigma_e_points")
    p.add_argument("--w-z", type=float, nargs=2, default=(0.1, 2.0),
                   metavar=("LO_M", "HI_M"), dest="w_z")
    p.add_argument("--w-z-points", type=int, default=20, dest="w_z_points")
    p.add_argument("--regime", choices=("weak", "strong"), default=None)
    _add_common(p)
    p.set_defaults(fn=cmd_heatmap)

    p = sub.add_parser("mc-tables", help="regenerate reflection-moment/sector tables")
    _add_common(p)
    p.set_defaults(fn=cmd_mc_tables)

    args = parser.parse_args(argv)
    return args.fn(args)


if __name__ == "__main__":
    sys.exit(main())
