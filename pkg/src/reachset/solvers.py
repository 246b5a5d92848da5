"""Polygon solvers for the different fitting methods."""

import dataclasses
import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Optional

from reachset.config import ExperimentConfig
from reachset.models import PolyModel, PolySolution, SampleSet, WeightedGrid
from reachset.polyopt import (
    HEURISTIC_SETTINGS,
    OPTIMAL_SETTINGS,
    SearchSettings,
    bounding_box,
    solve_heuristic,
    solve_optimal,
)

logger = logging.getLogger(__name__)


def optimal_settings(cfg: ExperimentConfig) -> SearchSettings:
    return dataclasses.replace(OPTIMAL_SETTINGS, **cfg.search)


def heuristic_settings(cfg: ExperimentConfig, n_s: Optional[int] = None) -> SearchSettings:
    """Round settings; one round over every grid cell runs as the optimal search"""
    n_s = cfg.n_s if n_s is None else n_s
    if cfg.n_p == 1 and n_s == cfg.grid ** 2:
        return optimal_settings(cfg)
    return dataclasses.replace(HEURISTIC_SETTINGS, **cfg.search)


@dataclass
class SolveContext:
    """Everything the solving stage of one experiment has produced so far"""

    cfg: ExperimentConfig
    samples: SampleSet
    wg: WeightedGrid
    model: PolyModel
    seed: int


class PolygonSolver(ABC):
    """Abstract base class for polygon solvers"""

    name: str = ""

    @abstractmethod
    def can_solve(self, ctx: SolveContext) -> bool:
        """Check if this solver is requested and applicable"""
        pass

    @abstractmethod
    def solve(self, ctx: SolveContext) -> PolySolution:
        """Fit the polygon; infeasibility is reported through the status"""
        pass


class OptimalSolver(PolygonSolver):
    """Budget-bounded search on the full grid model"""

    name = "optimal"

    def can_solve(self, ctx: SolveContext) -> bool:
        return self.name in ctx.cfg.methods

    def solve(self, ctx: SolveContext) -> PolySolution:
        return solve_optimal(
            ctx.model,
            budget=ctx.cfg.budget,
            seed=ctx.seed,
            settings=optimal_settings(ctx.cfg),
            engine=ctx.cfg.engine,
        )


class HeuristicSolver(PolygonSolver):
    """Weighted-sampling rounds on reduced models"""

    name = "heuristic"

    def can_solve(self, ctx: SolveContext) -> bool:
        if self.name not in ctx.cfg.methods:
            return False
        positive = int((ctx.wg.w > 0).sum())
        if ctx.cfg.n_s > positive:
            logger.warning("n_s=%d exceeds the %d positive-weight cells", ctx.cfg.n_s, positive)
            return False
        return True

    def solve(self, ctx: SolveContext) -> PolySolution:
        return solve_heuristic(
            ctx.model,
            n_s=ctx.cfg.n_s,
            n_p=ctx.cfg.n_p,
            budget_per_round=ctx.cfg.round_budget,
            seed=ctx.seed,
            settings=heuristic_settings(ctx.cfg),
        )


class BoundingBoxSolver(PolygonSolver):
    """Axis-aligned box baseline"""

    name = "bbox"

    def can_solve(self, ctx: SolveContext) -> bool:
        return self.name in ctx.cfg.methods

    def solve(self, ctx: SolveContext) -> PolySolution:
        return bounding_box(
            ctx.wg,
            ctx.cfg.alpha,
            enclose=ctx.cfg.enclose,
            samples=ctx.samples,
            eps=ctx.cfg.eps,
        )


def default_solvers() -> list:
    return [OptimalSolver(), HeuristicSolver(), BoundingBoxSolver()]
