"""Experiment orchestration: solve each case with every method, then test it."""

import logging
import platform
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy

from reachset import __version__, geometry
from reachset.config import ExperimentConfig
from reachset.distributions import (
    Sampler,
    bimodal_sampler,
    bootstrap_sampler,
    derive_seeds,
    fan_sampler,
    load_samples,
)
from reachset.errors import ConfigError, InfeasibleError
from reachset.kde import WEIGHT_TOL, estimate
from reachset.models import LinePolygon, PolySolution, SampleSet, WeightedGrid
from reachset.polyopt import build_model, solve_heuristic, solve_optimal
from reachset.report import emit_report
from reachset.solvers import (
    PolygonSolver,
    SolveContext,
    default_solvers,
    heuristic_settings,
    optimal_settings,
)

logger = logging.getLogger(__name__)

TIMING_KEYS = ("time_s", "solve_time_s", "environment", "times", "mean_time", "var_time")

# n_s used by the grid-size comparison for the grid sizes it reports
SCALED_NS = {10: 20, 20: 70, 30: 160, 40: 280}
SWEEP_PARAMETERS = ("n_sides", "grid", "alpha", "n_s")


def environment_stamp() -> Dict:
    return {
        "reachset": __version__,
        "python": sys.version.split()[0],
        "numpy": np.__version__,
        "scipy": scipy.__version__,
        "platform": platform.platform(),
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }


def _seeds(cfg: ExperimentConfig) -> Tuple[int, int, int, int]:
    """(data, solve, test, robustness) seeds of an experiment"""
    data, solve, test, robust = derive_seeds(cfg.seed, 4)
    return data, solve, test, robust


def case_samples(cfg: ExperimentConfig) -> Tuple[SampleSet, Sampler]:
    """Solving-stage samples and the generator for the testing stage"""
    data_seed = _seeds(cfg)[0]
    if cfg.case == "fan":
        sampler = fan_sampler(cfg.fan)
    elif cfg.case == "bimodal":
        sampler = bimodal_sampler(cfg.bimodal)
    elif cfg.case == "file":
        samples = load_samples(cfg.samples)
        return samples, bootstrap_sampler(samples)
    else:
        raise ConfigError(f"unknown case '{cfg.case}'")
    return sampler(cfg.n_ds, data_seed), sampler


def ratio_test(poly: LinePolygon, sampler: Sampler, n_test: int, seed: int) -> float:
    """Fraction of n_test fresh samples inside the polygon"""
    if n_test < 1:
        raise ConfigError(f"n_test must be >= 1, got {n_test}")
    fresh = sampler(n_test, seed)
    return float(np.mean(geometry.contains_points(poly, fresh.points, tol=0.0)))


@dataclass
class MethodResult:
    method: str
    solution: PolySolution
    ratio: Optional[float] = None

    def to_dict(self) -> Dict:
        return {
            "status": self.solution.status,
            "ratio": None if self.ratio is None else float(self.ratio),
            "area_m2": float(self.solution.area),
            "time_s": float(self.solution.solve_time),
            "solution": self.solution.to_dict(),
        }


@dataclass
class ExperimentReport:
    """Per-method ratio, area and time of one experiment"""

    config: ExperimentConfig
    samples: SampleSet
    wg: WeightedGrid
    results: Dict[str, MethodResult] = field(default_factory=dict)
    flags: List[str] = field(default_factory=list)
    environment: Dict = field(default_factory=dict)

    @property
    def infeasible(self) -> List[str]:
        return [name for name, r in self.results.items() if not r.solution.feasible]

    def to_dict(self) -> Dict:
        grid = self.wg.grid
        return {
            "name": self.config.name,
            "config": self.config.to_dict(),
            "kde": {
                "N": grid.N,
                "x_range": [float(grid.xs[0]), float(grid.xs[-1])],
                "y_range": [float(grid.ys[0]), float(grid.ys[-1])],
                "bandwidth": [float(h) for h in self.wg.bandwidth],
            },
            "methods": {name: r.to_dict() for name, r in self.results.items()},
            "flags": list(self.flags),
            "environment": dict(self.environment),
        }


class ExperimentRunner:
    """Runs experiments through the solving and testing stages"""

    def __init__(
        self,
        output_path: str = "./results",
        solvers: Optional[List[PolygonSolver]] = None,
    ):
        self.output_path = Path(output_path)
        self.solvers: List[PolygonSolver] = solvers if solvers is not None else default_solvers()

    def prepare(self, cfg: ExperimentConfig, samples: Optional[SampleSet] = None) -> SolveContext:
        if samples is None:
            samples, _ = case_samples(cfg)
        wg = estimate(samples, cfg.grid, cfg.pad)
        model = build_model(wg, cfg.n_sides, cfg.alpha, cfg.eps, cfg.coeff_bound)
        return SolveContext(cfg=cfg, samples=samples, wg=wg, model=model, seed=_seeds(cfg)[1])

    def run_experiment(self, cfg: ExperimentConfig) -> ExperimentReport:
        """Solving stage for every requested method, then the testing stage"""
        cfg.validate()
        print(f"\n[{cfg.name}]")
        print(f"{'─' * 60}")
        print(f"  → Drawing {cfg.n_ds} samples ({cfg.case}) and estimating the density...")
        samples, sampler = case_samples(cfg)
        ctx = self.prepare(cfg, samples)
        test_seed = _seeds(cfg)[2]

        report = ExperimentReport(
            config=cfg, samples=ctx.samples, wg=ctx.wg, environment=environment_stamp()
        )
        for solver in self.solvers:
            if not solver.can_solve(ctx):
                continue
            print(f"  → Solving with {solver.name}...")
            sol = solver.solve(ctx)
            result = MethodResult(method=solver.name, solution=sol)
            if sol.feasible:
                result.ratio = ratio_test(sol.polygon, sampler, cfg.n_test, test_seed)
                print(
                    f"    ✓ ratio {result.ratio:.1%}, area {sol.area:.1f} m², "
                    f"time {sol.solve_time:.3f} s"
                )
                if sol.coverage_full < cfg.alpha - WEIGHT_TOL:
                    report.flags.append(f"{solver.name}: full-grid coverage below alpha")
            else:
                print(f"    ✗ {solver.name} infeasible: {sol.message}")
            report.results[solver.name] = result
        return report

    def run_all(
        self, configs: Sequence[ExperimentConfig], emit: bool = True
    ) -> List[ExperimentReport]:
        """Run every enabled experiment, or only the ones flagged 'only'

        With emit, each report is written to output_path/<experiment name>.
        """
        if not configs:
            print("No experiments to run")
            return []

        only = [cfg for cfg in configs if cfg.only]
        run_list = [cfg for cfg in (only or configs) if cfg.enabled]
        label = "'only' experiment(s)" if only else "experiment(s)"
        print(f"\n{'=' * 60}")
        print(f"Running {len(run_list)} {label} (out of {len(configs)} total)")
        print(f"{'=' * 60}\n")
        reports = []
        for cfg in run_list:
            report = self.run_experiment(cfg)
            if emit:
                emit_report(report, self.output_path / cfg.name)
            reports.append(report)

        print(f"\n{'=' * 60}")
        print(f"Experiments complete! Reports saved to: {self.output_path}")
        print(f"{'=' * 60}\n")
        return reports


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    return ExperimentRunner().run_experiment(cfg)


# ============================================================================
# Robustness study
# ============================================================================


def _variance(values: List[float]) -> float:
    # identical runs must report exactly zero, which np.var does not guarantee
    if max(values) == min(values):
        return 0.0
    return float(np.var(values))


@dataclass
class RobustnessRow:
    """Heuristic runs at one n_s compared with the reference polygon"""

    n_s: int
    seeds: List[int]
    jaccard: List[float] = field(default_factory=list)
    times: List[float] = field(default_factory=list)
    infeasible: int = 0

    @staticmethod
    def _stat(values: List[float], fn) -> Optional[float]:
        return float(fn(values)) if values else None

    @property
    def mean_jaccard(self) -> Optional[float]:
        return self._stat(self.jaccard, np.mean)

    @property
    def var_jaccard(self) -> Optional[float]:
        return self._stat(self.jaccard, _variance)

    @property
    def mean_time(self) -> Optional[float]:
        return self._stat(self.times, np.mean)

    @property
    def var_time(self) -> Optional[float]:
        return self._stat(self.times, _variance)

    def to_dict(self) -> Dict:
        return {
            "n_s": int(self.n_s),
            "seeds": [int(s) for s in self.seeds],
            "jaccard": [float(v) for v in self.jaccard],
            "times": [float(v) for v in self.times],
            "infeasible": int(self.infeasible),
            "mean_jaccard": self.mean_jaccard,
            "var_jaccard": self.var_jaccard,
            "mean_time": self.mean_time,
            "var_time": self.var_time,
        }


@dataclass
class RobustnessReport:
    config: ExperimentConfig
    reference: PolySolution
    rows: List[RobustnessRow]
    distinct_seeds: bool = True
    environment: Dict = field(default_factory=dict)

    def to_dict(self) -> Dict:
        return {
            "name": self.config.name,
            "config": self.config.to_dict(),
            "reference": self.reference.to_dict(),
            "distinct_seeds": self.distinct_seeds,
            "rows": [row.to_dict() for row in self.rows],
            "environment": dict(self.environment),
        }


def robustness_study(
    cfg: ExperimentConfig,
    n_s_list: Optional[Sequence[int]] = None,
    repeats: Optional[int] = None,
    distinct_seeds: bool = True,
) -> RobustnessReport:
    """Jaccard distance of repeated heuristic runs to one reference polygon"""
    n_s_list = list(n_s_list if n_s_list is not None else cfg.ns_list)
    repeats = repeats if repeats is not None else cfg.repeats
    if repeats < 2:
        raise ConfigError(f"repeats must be >= 2, got {repeats}")

    ctx = ExperimentRunner(solvers=[]).prepare(cfg)
    reference = solve_optimal(
        ctx.model,
        budget=cfg.budget,
        seed=ctx.seed,
        settings=optimal_settings(cfg),
        engine=cfg.engine,
    )
    if not reference.feasible:
        raise InfeasibleError(f"reference polygon infeasible: {reference.message}")
    logger.info("reference polygon: area %.1f m^2 (%s)", reference.area, reference.status)

    base_seed = _seeds(cfg)[3]
    rows = []
    for n_s in n_s_list:
        seeds = derive_seeds(base_seed + int(n_s), repeats) if distinct_seeds else [base_seed] * repeats
        row = RobustnessRow(n_s=int(n_s), seeds=seeds)
        for seed in seeds:
            sol = solve_heuristic(
                ctx.model,
                n_s=int(n_s),
                n_p=cfg.n_p,
                budget_per_round=cfg.round_budget,
                seed=seed,
                settings=heuristic_settings(cfg, int(n_s)),
            )
            if not sol.feasible:
                row.infeasible += 1
                continue
            row.jaccard.append(geometry.jaccard(sol.vertices, reference.vertices))
            row.times.append(sol.solve_time)
        logger.info("n_s=%d: mean Jaccard %s over %d runs", n_s, row.mean_jaccard, len(row.jaccard))
        rows.append(row)

    return RobustnessReport(
        config=cfg,
        reference=reference,
        rows=rows,
        distinct_seeds=distinct_seeds,
        environment=environment_stamp(),
    )


# ============================================================================
# Parameter sweeps
# ============================================================================


@dataclass
class SweepReport:
    parameter: str
    values: List
    reports: List[ExperimentReport]

    def rows(self) -> List[Dict]:
        out = []
        for value, report in zip(self.values, self.reports):
            for method, result in report.results.items():
                out.append(
                    {
                        "parameter": self.parameter,
                        "value": value,
                        "method": method,
                        "status": result.solution.status,
                        "ratio": result.ratio,
                        "area_m2": float(result.solution.area),
                        "time_s": float(result.solution.solve_time),
                    }
                )
        return out

    def to_dict(self) -> Dict:
        return {
            "parameter": self.parameter,
            "values": list(self.values),
            "rows": self.rows(),
            "experiments": [r.to_dict() for r in self.reports],
        }


def scaled_ns(grid: int) -> int:
    """Representative-sample count that keeps the sampled fraction of the grid fixed"""
    return SCALED_NS.get(grid, max(1, round(0.175 * grid * grid)))


def sweep(
    cfg: ExperimentConfig,
    parameter: str,
    values: Sequence,
    runner: Optional[ExperimentRunner] = None,
) -> SweepReport:
    """Re-run the experiment once per value of one parameter"""
    if parameter not in SWEEP_PARAMETERS:
        raise ConfigError(
            f"sweep parameter must be one of {', '.join(SWEEP_PARAMETERS)}, got '{parameter}'"
        )
    if not values:
        raise ConfigError("sweep needs at least one value")
    runner = runner or ExperimentRunner()
    reports = []
    for value in values:
        overrides = {parameter: value}
        if parameter == "grid":
            overrides["n_s"] = scaled_ns(int(value))
        run_cfg = cfg.with_overrides(name=f"{cfg.name}-{parameter}-{value}", **overrides)
        reports.append(runner.run_experiment(run_cfg))
    return SweepReport(parameter=parameter, values=list(values), reports=reports)


def strip_timing(data):
    """Copy of a report dict without timing and environment fields"""
    if isinstance(data, dict):
        return {k: strip_timing(v) for k, v in data.items() if k not in TIMING_KEYS}
    if isinstance(data, list):
        return [strip_timing(v) for v in data]
    return data
