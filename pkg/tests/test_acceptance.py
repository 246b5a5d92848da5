"""Case-study reproductions at full size; run with `pytest -m slow`."""

from pathlib import Path

import numpy as np
import pytest

from reachset.config import ConfigLoader, ExperimentConfig
from reachset.distributions import derive_seeds
from reachset.harness import ExperimentRunner, robustness_study

pytestmark = pytest.mark.slow

CONFIG = Path(__file__).resolve().parents[1] / "config.json"


@pytest.fixture(scope="module")
def loader():
    return ConfigLoader(str(CONFIG))


@pytest.fixture(scope="module")
def fan_report(loader):
    return ExperimentRunner().run_experiment(loader.find("case1-fan"))


@pytest.fixture(scope="module")
def bimodal_report(loader):
    return ExperimentRunner().run_experiment(loader.find("case2-bimodal"))


def test_fan_heuristic_ratio_and_area(fan_report):
    heuristic = fan_report.results["heuristic"]
    bbox = fan_report.results["bbox"]
    assert 0.87 <= heuristic.ratio <= 0.95
    assert bbox.ratio > heuristic.ratio
    assert heuristic.solution.area <= 0.75 * bbox.solution.area


def test_fan_optimal_area(fan_report):
    optimal = fan_report.results["optimal"]
    bbox = fan_report.results["bbox"]
    assert 1500.0 <= optimal.solution.area <= 2300.0
    assert optimal.solution.area <= 0.75 * bbox.solution.area
    assert optimal.solution.coverage_full >= 0.9 - 1e-12


def test_fan_bounding_box_area(fan_report):
    assert 2700.0 <= fan_report.results["bbox"].solution.area <= 3800.0


def test_bimodal_heuristic(bimodal_report):
    heuristic = bimodal_report.results["heuristic"]
    bbox = bimodal_report.results["bbox"]
    assert 0.87 <= heuristic.ratio <= 0.95
    assert heuristic.solution.area <= 0.75 * bbox.solution.area


def test_reachable_set_covers_fresh_samples(loader):
    report = ExperimentRunner().run_experiment(loader.find("case1-fan-reachable"))
    assert report.infeasible == []
    for result in report.results.values():
        assert result.ratio >= 0.995


def test_more_sides_never_grow_the_polygon(loader):
    base = loader.find("case1-fan").with_overrides(methods=["optimal"], n_test=1000)
    runner = ExperimentRunner()
    medians = []
    for n in (3, 4, 5):
        areas = []
        for seed in derive_seeds(11, 10):
            report = runner.run_experiment(base.with_overrides(n_sides=n, seed=seed))
            areas.append(report.results["optimal"].solution.area)
        medians.append(float(np.median(areas)))
    assert medians[1] <= 1.05 * medians[0]
    assert medians[2] <= 1.05 * medians[1]


def test_heuristic_converges_to_reference(loader):
    cfg = loader.find("case1-fan")
    study = robustness_study(cfg, n_s_list=[50, 60, 70, 80, 90], repeats=10)
    means = [row.mean_jaccard for row in study.rows]
    assert all(m is not None for m in means)
    assert means[-1] <= 0.20
    assert means[-1] <= means[0] + 0.02


def test_repeated_seed_has_zero_variance():
    cfg = ExperimentConfig(name="fan")
    study = robustness_study(cfg, n_s_list=[70], repeats=3, distinct_seeds=False)
    assert study.rows[0].var_jaccard == 0.0


@pytest.mark.parametrize("report", ["fan_report", "bimodal_report"])
def test_heuristic_is_fast(report, request):
    results = request.getfixturevalue(report).results
    heuristic = results["heuristic"].solution.solve_time
    assert heuristic <= 5.0
    assert heuristic < 0.6 * results["optimal"].solution.solve_time


def test_robustness_time_grows_with_ns(loader):
    cfg = loader.find("case1-fan")
    study = robustness_study(cfg, n_s_list=[50, 90], repeats=5)
    first, last = (row.mean_time for row in study.rows)
    assert 0 < first < last
    assert last <= 5.0
