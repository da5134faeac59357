"""Command-line front end: one subcommand per experiment.

Flag values override config-file values, which override defaults. With
--render the matching figures are drawn next to the delimited output,
through the separately installed metriclap-figures package.
"""

from __future__ import annotations

import argparse
import os
import sys

from . import experiments as exp

AUDIT_EXIT = {"pass": 0, "degenerate": 3, "assumption-1-violated": 4}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="metriclap",
        description="Graph-Laplacian experiments for metric oracles on the circle",
    )
    sub = parser.add_subparsers(dest="experiment", required=True)
    for name in exp.EXPERIMENTS:
        p = sub.add_parser(name, help=f"run the {name} experiment")
        p.add_argument("--config", help="flat key=value config file")
        p.add_argument("--seed", type=int, help="root seed")
        p.add_argument("--out", help="output directory")
        p.add_argument("--metric", help="metric oracle name")
        p.add_argument("--n", type=int, help="single sample size (replaces the ladder)")
        p.add_argument("--r", type=float, help="rotating-ball radius")
        p.add_argument("--alpha", type=float, help="bandwidth schedule slack")
        p.add_argument("--trials", type=int, help="repetition count")
        p.add_argument(
            "--render",
            action="store_true",
            help="also render figures (needs metriclap-figures)",
        )
    return parser


def resolve_config(args) -> exp.ExperimentConfig:
    overrides = {
        "experiment": args.experiment,
        "seed": args.seed,
        "output_dir": args.out,
        "metric": args.metric,
        "r": args.r,
        "alpha": args.alpha,
        "trials": args.trials,
    }
    if args.n is not None:
        overrides["n_ladder"] = (args.n,)
    overrides = {k: v for k, v in overrides.items() if v is not None}
    if args.config:
        return exp.parse_config(args.config, **overrides)
    return exp.config_from_mapping(overrides)


def _render(kind: str, inputs: list[str], out_path: str) -> None:
    try:
        from metriclap_figures.render import PlotSpec, render
    except ImportError:
        print(
            "figure rendering requires the metriclap-figures package",
            file=sys.stderr,
        )
        raise SystemExit(2)
    render(PlotSpec(inputs=tuple(inputs), kind=kind, output=out_path))
    print(out_path)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = resolve_config(args)
    out = exp.ensure_output_dir(cfg)

    if cfg.experiment == "distance-profile":
        thetas, columns = exp.run_distance_profile(cfg)
        path = os.path.join(out, "profile.csv")
        exp.write_profile_csv(path, thetas, columns)
        print(path)
        if args.render:
            _render("profile", [path], os.path.join(out, "profile.png"))
        return 0

    if cfg.experiment == "pointwise":
        records = exp.run_pointwise_convergence(cfg)
        path = os.path.join(out, f"pointwise_{cfg.metric}.csv")
        exp.write_convergence_csv(path, records, cfg.alpha, cfg.eps_override)
        print(path)
        if args.render:
            _render("convergence", [path], os.path.join(out, f"pointwise_{cfg.metric}.png"))
        return 0

    if cfg.experiment == "eigenmap":
        results = exp.run_eigenmap(cfg)
        paths = []
        for res in results:
            path = os.path.join(out, f"eigenmap_{cfg.metric}_n{res.n}.csv")
            exp.write_eigenmap_csv(path, res)
            paths.append(path)
            print(path)
        summary = os.path.join(out, f"eigenmap_{cfg.metric}_summary.json")
        exp.write_json(
            summary,
            {
                "metric": cfg.metric,
                "results": [
                    {"n": res.n, "eps_n": res.eps_n, "fidelity": res.fidelity}
                    for res in results
                ],
            },
        )
        print(summary)
        if args.render:
            for res, path in zip(results, paths):
                _render(
                    "eigenmap",
                    [path],
                    os.path.join(out, f"eigenmap_{cfg.metric}_n{res.n}.png"),
                )
        return 0

    if cfg.experiment == "radius-sweep":
        sweep = exp.run_radius_sweep(cfg)
        profile_path, pw_path, fid_path = exp.write_sweep_csvs(out, sweep, cfg)
        for path in (profile_path, pw_path, fid_path):
            print(path)
        if args.render:
            _render("profile", [profile_path], os.path.join(out, "sweep_profile.png"))
            _render("sweep", [fid_path], os.path.join(out, "sweep_fidelity.png"))
        return 0

    if cfg.experiment == "bias-bounds":
        reports, summary = exp.run_bias_bounds(cfg)
        path = os.path.join(out, "bias_bounds.json")
        exp.write_json(
            path,
            {
                "reports": [exp.bias_report_payload(rep) for rep in reports],
                **summary,
            },
        )
        print(path)
        return 0

    if cfg.experiment == "audit":
        result = exp.run_audit(cfg)
        path = os.path.join(out, f"audit_{cfg.metric}.json")
        exp.write_json(path, result)
        print(path)
        print(f"status: {result['status']}")
        return AUDIT_EXIT[result["status"]]

    raise AssertionError(f"unhandled experiment {cfg.experiment}")


if __name__ == "__main__":
    raise SystemExit(main())
