"""reachset - probabilistic reachable sets as minimal-area convex polygons."""

__version__ = "0.1.0"

from reachset.config import ConfigLoader, ExperimentConfig
from reachset.harness import (
    ExperimentReport,
    ExperimentRunner,
    ratio_test,
    robustness_study,
    run_experiment,
    sweep,
)
from reachset.kde import confidence_region, estimate, fft_kde
from reachset.minlp import build_pyomo_model, export
from reachset.models import AnchoredLine, LinePolygon, PolySolution, SampleSet, WeightedGrid
from reachset.polyopt import (
    bounding_box,
    build_model,
    evaluate,
    implied_assignment,
    solve_heuristic,
    solve_optimal,
)

__all__ = [
    "AnchoredLine",
    "ConfigLoader",
    "ExperimentConfig",
    "ExperimentReport",
    "ExperimentRunner",
    "LinePolygon",
    "PolySolution",
    "SampleSet",
    "WeightedGrid",
    "bounding_box",
    "build_model",
    "build_pyomo_model",
    "confidence_region",
    "estimate",
    "evaluate",
    "export",
    "fft_kde",
    "implied_assignment",
    "ratio_test",
    "robustness_study",
    "run_experiment",
    "solve_heuristic",
    "solve_optimal",
    "sweep",
]
