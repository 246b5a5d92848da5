"""Main entry point for the reachset experiment runner."""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional, Tuple

from reachset.config import ConfigLoader, ExperimentConfig
from reachset.errors import ConfigError, InfeasibleError, ReachsetError
from reachset.harness import ExperimentRunner, robustness_study, sweep
from reachset.minlp import export
from reachset.report import emit_report, emit_robustness, emit_sweep

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_INFEASIBLE = 2


def _int_list(text: str) -> List[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got '{text}'")


def _add_common(parser: argparse.ArgumentParser) -> None:
    """Flags shared by every subcommand; each one overrides the config file"""
    parser.add_argument("--config", type=str, help="Path to a config.json / .toml file")
    parser.add_argument(
        "--experiment",
        type=str,
        help="Experiment name in the config file (if not specified, runs all enabled ones)",
    )
    parser.add_argument("--case", choices=["fan", "bimodal", "file"], help="Uncertainty case")
    parser.add_argument("--samples", type=str, help="CSV sample file for --case file")
    parser.add_argument("--n-ds", dest="n_ds", type=int, help="Number of solving-stage samples")
    parser.add_argument("--n-sides", dest="n_sides", type=int, help="Polygon sides n")
    parser.add_argument("--grid", type=int, help="Grid nodes per axis N")
    parser.add_argument("--alpha", type=float, help="Confidence level in (0, 1]")
    parser.add_argument("--ns", dest="n_s", type=int, help="Representative cells per heuristic round")
    parser.add_argument("--np", dest="n_p", type=int, help="Heuristic rounds")
    parser.add_argument("--eps", type=float, help="Strictness margin of the n-gon constraints")
    parser.add_argument("--coeff-bound", dest="coeff_bound", type=float, help="Box on |a_k|, |b_k|")
    parser.add_argument("--budget", type=float, help="Optimal search budget in seconds")
    parser.add_argument(
        "--round-budget", dest="round_budget", type=float, help="Budget per heuristic round"
    )
    parser.add_argument("--seed", type=int, help="Master seed")
    parser.add_argument("--n-test", dest="n_test", type=int, help="Fresh samples for the ratio test")
    parser.add_argument(
        "--enclose", choices=["level-set", "samples"], help="What the bounding box encloses"
    )
    parser.add_argument("--out", type=str, help="Output directory (default: <output_path>/<name>)")
    parser.add_argument(
        "--engine", help="Optimal engine: search (default), auto, or a MINLP solver such as scip"
    )
    parser.add_argument("--verbose", "-v", action="store_true", help="Debug logging")


def parse_args(argv: Optional[List[str]] = None) -> argparse.Namespace:
    """Parse command line arguments"""
    parser = argparse.ArgumentParser(
        description="Estimate probabilistic reachable sets as minimal convex polygons"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Solve and test one or more experiments")
    _add_common(run)

    robust = sub.add_parser("robustness", help="Heuristic robustness against the reference polygon")
    _add_common(robust)
    robust.add_argument("--ns-list", dest="ns_list", type=_int_list, help="e.g. 50,60,70,80,90")
    robust.add_argument("--repeats", type=int, help="Heuristic runs per n_s")
    robust.add_argument(
        "--same-seeds",
        action="store_true",
        help="Repeat every run with the same seed (zero-variance check)",
    )

    sw = sub.add_parser("sweep", help="Re-run an experiment over values of one parameter")
    _add_common(sw)
    sw.add_argument(
        "--parameter", required=True, choices=["n_sides", "grid", "alpha", "n_s"]
    )
    sw.add_argument("--values", required=True, type=str, help="Comma-separated values")

    exporter = sub.add_parser("export-model", help="Write the mixed-integer model to a file")
    _add_common(exporter)
    exporter.add_argument(
        "--format",
        dest="model_format",
        choices=["txt", "gms", "nl", "lp"],
        default="txt",
        help="Plain-text dump or a solver format written by Pyomo (default: txt)",
    )

    return parser.parse_args(argv)


OVERRIDE_KEYS = (
    "case", "samples", "n_ds", "n_sides", "grid", "alpha", "n_s", "n_p", "eps",
    "coeff_bound", "budget", "round_budget", "seed", "n_test", "enclose", "engine",
)


def load_configs(args: argparse.Namespace) -> Tuple[List[ExperimentConfig], str]:
    """Experiments selected by --config / --experiment with the flags applied"""
    overrides = {key: getattr(args, key, None) for key in OVERRIDE_KEYS}
    for key in ("ns_list", "repeats"):
        overrides[key] = getattr(args, key, None)

    if not args.config:
        return [ExperimentConfig().with_overrides(**overrides)], "./results"

    loader = ConfigLoader(args.config)
    if args.experiment:
        configs = [loader.find(args.experiment)]
    else:
        configs = loader.load_experiments()
        if not configs:
            raise ConfigError(f"no experiments defined in {args.config}")
    return [cfg.with_overrides(**overrides) for cfg in configs], loader.output_path


def _out_dir(args: argparse.Namespace, output_path: str, name: str) -> Path:
    return Path(args.out) if args.out else Path(output_path) / name


def cmd_run(args: argparse.Namespace) -> int:
    configs, output_path = load_configs(args)
    runner = ExperimentRunner(output_path=output_path)

    if len(configs) == 1 and (args.experiment or not args.config):
        reports = [runner.run_experiment(configs[0])]
        out = _out_dir(args, output_path, configs[0].name)
        emit_report(reports[0], out)
        print(f"\n{'=' * 60}")
        print(f"✓ Run complete! Report saved to: {out}")
        print(f"{'=' * 60}\n")
    else:
        if args.out:
            runner.output_path = Path(args.out)
        reports = runner.run_all(configs)

    failed = [f"{r.config.name}/{m}" for r in reports for m in r.infeasible]
    if failed:
        print(f"✗ Infeasible: {', '.join(failed)}")
        return EXIT_INFEASIBLE
    return EXIT_OK


def cmd_robustness(args: argparse.Namespace) -> int:
    configs, output_path = load_configs(args)
    cfg = configs[0]
    print(f"\n{'=' * 60}")
    print(f"Robustness study: {cfg.name} (n_s in {cfg.ns_list}, {cfg.repeats} repeats)")
    print(f"{'=' * 60}\n")
    study = robustness_study(cfg, distinct_seeds=not args.same_seeds)
    for row in study.rows:
        print(
            f"  n_s={row.n_s:>4}: Jaccard mean {row.mean_jaccard}, var {row.var_jaccard}, "
            f"time {row.mean_time}"
        )
    out = _out_dir(args, output_path, f"{cfg.name}-robustness")
    emit_robustness(study, out)
    print(f"\n✓ Robustness study saved to: {out}\n")
    return EXIT_OK


def cmd_sweep(args: argparse.Namespace) -> int:
    configs, output_path = load_configs(args)
    cfg = configs[0]
    cast = float if args.parameter == "alpha" else int
    try:
        values = [cast(v) for v in args.values.split(",") if v.strip()]
    except ValueError:
        print(f"✗ Error: cannot parse --values '{args.values}'")
        return EXIT_ERROR
    result = sweep(cfg, args.parameter, values, ExperimentRunner(output_path=output_path))
    out = _out_dir(args, output_path, f"{cfg.name}-sweep-{args.parameter}")
    emit_sweep(result, out)
    print(f"\n✓ Sweep saved to: {out}\n")
    infeasible = any(r.infeasible for r in result.reports)
    return EXIT_INFEASIBLE if infeasible else EXIT_OK


def cmd_export(args: argparse.Namespace) -> int:
    configs, output_path = load_configs(args)
    cfg = configs[0]
    ctx = ExperimentRunner(solvers=[]).prepare(cfg)
    suffix = ".model.txt" if args.model_format == "txt" else f".{args.model_format}"
    path = Path(args.out) if args.out else Path(output_path) / f"{cfg.name}{suffix}"
    export(ctx.model, path)
    print(f"✓ Model exported to: {path}")
    return EXIT_OK


COMMANDS = {
    "run": cmd_run,
    "robustness": cmd_robustness,
    "sweep": cmd_sweep,
    "export-model": cmd_export,
}


def main(argv: Optional[List[str]] = None) -> int:
    """Main function; returns the process exit code"""
    args = parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )

    try:
        code = COMMANDS[args.command](args)
    except InfeasibleError as e:
        print(f"✗ {e}")
        code = EXIT_INFEASIBLE
    except ReachsetError as e:
        print(f"✗ Error: {e}")
        code = EXIT_ERROR
    except OSError as e:
        print(f"✗ Error: {e}")
        code = EXIT_ERROR
    return code


if __name__ == "__main__":
    sys.exit(main())
