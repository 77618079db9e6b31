"""Command-line entry point: ``byzrank <subcommand> [--config FILE] [overrides]``."""

from __future__ import annotations

import argparse
import json
import logging
import sys

from . import harness
from .errors import RankingError
from .plots import write_figure_data


def _csv_floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _csv_ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def _csv_words(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON or YAML file whose keys mirror ExperimentConfig fields")
    p.add_argument("--n", type=int)
    p.add_argument("--k", type=int)
    p.add_argument("--bf", type=_csv_floats, help="comma-separated byzantine fractions")
    p.add_argument("--strategy", type=_csv_words, help="comma-separated strategy ids (fov, ov, ovp, rs, orf)")
    p.add_argument("--algo", type=_csv_words, help="comma-separated algorithms from rc, bsr, fbsr")
    p.add_argument("--trials", type=int)
    p.add_argument("--seed", type=int)
    p.add_argument("--out", help="CSV output path (stdout if omitted)")
    p.add_argument("--jobs", type=int, help="worker processes")
    p.add_argument("--plot-data", help="also write per-figure data (and an SVG) with this path prefix")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="byzrank", description="Byzantine-robust spectral ranking experiments")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    _add_common(sub.add_parser("synthetic", help="sweep the byzantine fraction on random graphs"))
    p = sub.add_parser("scaling", help="sweep n with k = n")
    _add_common(p)
    p.add_argument("--n-grid", type=_csv_ints)
    p = sub.add_parser("dataset", help="complete-ranking data (bundled corpus by default)")
    _add_common(p)
    p.add_argument("--path", help="ranking file; omit for the bundled corpus")
    p.add_argument("--sushi-format", action="store_true", help="input uses the Sushi .order layout")
    p = sub.add_parser("failure-demo", help="Rank-Centrality against opposite voters on skewed weights")
    _add_common(p)
    p.add_argument("--b", type=float)
    p.add_argument("--C", type=float, help="edge probability coefficient, p = C ln n / n")
    p = sub.add_parser("impossibility-demo", help="two instances with identical vote ledgers")
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--b", type=float, default=2.0)
    p.add_argument("--K", type=int, default=4)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    return parser


def _config(args) -> harness.ExperimentConfig:
    data = harness.load_config(args.config) if args.config else {}
    overrides = {"n": args.n, "k": args.k, "bf_grid": args.bf, "strategies": args.strategy,
                 "algorithms": args.algo, "trials": args.trials, "seed": args.seed, "out": args.out,
                 "jobs": args.jobs}
    if args.command == "scaling":
        overrides["n_grid"] = args.n_grid
    if args.command == "dataset":
        overrides["dataset"] = args.path
        if args.sushi_format:
            overrides["sushi_format"] = True
    data.update({k: v for k, v in overrides.items() if v is not None})
    if args.command == "scaling":
        return harness.scaling_config(**data)
    if args.command == "dataset":
        data.setdefault("strategies", ["opposite_random_flips"])
        data.setdefault("algorithms", ["rc", "bsr"])
        data.setdefault("bf_grid", [0.0, 0.1, 0.2, 0.3])
    return harness.ExperimentConfig.from_mapping(data)


def _run(args) -> int:
    if args.command == "impossibility-demo":
        report = harness.run_indistinguishability_demo(args.n, args.b, args.K, args.k, args.seed)
        print(json.dumps(report, indent=2))
        return 0
    if args.command == "failure-demo":
        cfg = _config(args)
        table = harness.run_failure_demo(n=cfg.n, b=args.b or 10.0, C=args.C or cfg.p_coef, k=cfg.k,
                                         bf_grid=cfg.bf_grid, trials=cfg.trials, seed=cfg.seed, K=cfg.K,
                                         out=cfg.out, jobs=cfg.jobs)
        summary = harness.failure_summary(table)
        print(f"pearson(rel_l2, bf) = {summary['pearson']:.4f}", file=sys.stderr)
    elif args.command == "synthetic":
        cfg = _config(args)
        table = harness.run_synthetic_sweep(cfg)
    elif args.command == "scaling":
        cfg = _config(args)
        table = harness.run_scaling_sweep(cfg)
    else:
        cfg = _config(args)
        table = harness.run_ranking_dataset(cfg.dataset, cfg)
    if not cfg.out:
        sys.stdout.write(table.to_csv())
    if args.plot_data:
        x = "n" if args.command == "scaling" else "byzantine_fraction"
        for path in write_figure_data(table, args.plot_data, x=x):
            print(f"wrote {path}", file=sys.stderr)
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return _run(args)
    except RankingError as exc:
        print(f"error: {harness.describe_error(exc)}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
