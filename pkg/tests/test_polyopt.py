import dataclasses
import itertools
import math

import numpy as np
import pytest

from reachset import geometry
from reachset.distributions import sample_fan
from reachset.errors import AlphaError, ModelError, SamplingError
from reachset.kde import estimate, fft_kde, naive_kde
from reachset.models import AnchoredLine, CaseIParams, Grid2D, LinePolygon, SampleSet
from reachset.polyopt import (
    STATUS_BASELINE,
    STATUS_HEURISTIC,
    STATUS_INFEASIBLE,
    STATUS_OPTIMAL,
    SearchSettings,
    aes_select,
    bounding_box,
    box_polygon,
    build_model,
    build_reduced_model,
    evaluate,
    full_coverage,
    implied_assignment,
    linking_satisfied,
    renormalize,
    solve_heuristic,
    solve_optimal,
    weighted_sample,
)

QUICK = SearchSettings(n_starts=2, max_iter=150)


def polygon_from_angles(anchor, phi, d) -> LinePolygon:
    phi, d = np.asarray(phi, dtype=float), np.asarray(d, dtype=float)
    return LinePolygon.from_coefficients(anchor, np.cos(phi) / d, np.sin(phi) / d)


def assert_sound(sol, model):
    """Every returned polygon is valid, holds the anchor and reaches alpha"""
    assert sol.feasible
    assert geometry.validate_ngon(sol.polygon.lines, model.eps).ok
    assert geometry.contains(sol.polygon, model.anchor_pt)
    assert sol.coverage >= model.alpha - 1e-12
    assert evaluate(sol.polygon, model).feasible


@pytest.fixture(scope="module")
def fan_model(fan_wg):
    return build_model(fan_wg, 4, 0.9)


# ============================================================================
# Model
# ============================================================================


def test_uniform_weights_anchor_at_first_cell(make_wg):
    model = build_model(make_wg(np.ones((6, 6))), 4, 0.9)
    assert model.anchor_idx == (0, 0)
    assert model.anchor_pt == (0.0, 0.0)


def test_anchor_matches_direct_density_maximum(fan_samples, fan_wg, fan_model):
    naive = naive_kde(fan_samples, fan_wg.grid, *fan_wg.bandwidth)
    i, j = fan_model.anchor_idx
    # binning flattens the peak, so only require the anchor in the dense core
    assert naive[i, j] >= 0.8 * naive.max()


@pytest.mark.parametrize("n, alpha, error", [(2, 0.9, ModelError), (4, 0.0, AlphaError), (4, 1.2, AlphaError)])
def test_build_model_rejects_parameters(make_wg, n, alpha, error):
    with pytest.raises(error):
        build_model(make_wg(np.ones((4, 4))), n, alpha)


def test_big_m_bounds_every_affine_form(fan_model):
    rng = np.random.default_rng(0)
    cb = fan_model.coeff_bound
    offsets = fan_model.points - np.asarray(fan_model.anchor_pt)
    coeffs = rng.uniform(-cb, cb, size=(10_000, 2))
    forms = offsets @ coeffs.T - 1.0
    assert np.all(forms <= fan_model.big_m1[:, None])
    assert np.all(-forms <= fan_model.big_m2[:, None] - fan_model.eps)


def test_reduced_model_orders_cells(make_wg, blob):
    wg = make_wg(blob(5))
    cells = np.array([[4, 4], [2, 2], [0, 1]])
    model = build_reduced_model(wg, cells, np.array([0.2, 0.5, 0.3]), 3, 0.8)
    assert model.cells.tolist() == [[0, 1], [2, 2], [4, 4]]
    assert model.weights.tolist() == [0.3, 0.5, 0.2]
    assert model.anchor_idx == (2, 2)
    assert not model.is_full


# ============================================================================
# Implied binaries and evaluation
# ============================================================================


def centered_3x3(make_wg):
    w = np.ones((3, 3))
    w[1, 1] = 5.0
    axis = np.array([-1.0, 0.0, 1.0])
    return build_model(make_wg(w, axis, axis), 4, 0.5)


def test_implied_assignment_square(make_wg):
    model = centered_3x3(make_wg)
    assert model.anchor_pt == (0.0, 0.0)
    small = polygon_from_angles((0.0, 0.0), np.arange(4) * np.pi / 2, [0.5] * 4)
    z = implied_assignment(small, model).z.reshape(3, 3)
    expected = np.zeros((3, 3), dtype=bool)
    expected[1, 1] = True
    assert np.array_equal(z, expected)

    large = polygon_from_angles((0.0, 0.0), np.arange(4) * np.pi / 2, [1.5] * 4)
    assert implied_assignment(large, model).z.all()


def test_implied_assignment_matches_affine_forms(fan_model):
    poly = polygon_from_angles(fan_model.anchor_pt, 0.3 + np.arange(4) * np.pi / 2, [20.0, 15.0, 25.0, 18.0])
    assignment = implied_assignment(poly, fan_model)
    forms = geometry.affine_forms(poly, fan_model.points)
    assert np.array_equal(assignment.l, forms <= 0)
    assert np.array_equal(assignment.z, np.all(forms <= 0, axis=1))
    anchor_row = np.flatnonzero((fan_model.cells == fan_model.anchor_idx).all(axis=1))[0]
    assert assignment.z[anchor_row]


def test_shrinking_polygon_shrinks_inside_set(fan_model):
    rng = np.random.default_rng(4)
    phi = 0.2 + np.arange(4) * np.pi / 2
    d = np.array([40.0, 35.0, 45.0, 30.0])
    previous = implied_assignment(polygon_from_angles(fan_model.anchor_pt, phi, d), fan_model).z
    for _ in range(10):
        d = d * rng.uniform(0.6, 0.95, 4)
        current = implied_assignment(polygon_from_angles(fan_model.anchor_pt, phi, d), fan_model).z
        assert np.all(current <= previous)
        previous = current


def random_triangle(rng: np.random.Generator):
    while True:
        phi = np.sort(rng.uniform(0, 2 * np.pi, 3))
        gaps = np.diff(np.r_[phi, phi[0] + 2 * np.pi])
        if gaps.max() < np.pi - 0.05:
            return phi, rng.uniform(0.3, 3.0, 3)


def test_linking_rows_force_the_implied_assignment(make_wg):
    rng = np.random.default_rng(11)
    combos = np.array(list(itertools.product([0, 1], repeat=4)))
    checked = 0
    while checked < 100:
        wg = make_wg(rng.uniform(0.1, 1.0, (3, 3)))
        model = build_model(wg, 3, 0.5, coeff_bound=10.0)
        phi, d = random_triangle(rng)
        poly = polygon_from_angles(model.anchor_pt, phi, d)
        if not geometry.validate_ngon(poly.lines, model.eps).ok:
            continue
        forms = geometry.affine_forms(poly, model.points)
        # no integer point exists while a form sits strictly between 0 and eps
        if np.any((forms > 0) & (forms < model.eps)):
            continue
        checked += 1
        m = model.size
        l = np.broadcast_to(combos[:, None, :3], (16, m, 3))
        z = np.broadcast_to(combos[:, None, 3], (16, m))
        ok = linking_satisfied(model, poly, l, z)
        assert np.all(ok.sum(axis=0) == 1)
        implied = implied_assignment(poly, model)
        chosen = combos[np.argmax(ok, axis=0)]
        assert np.array_equal(chosen[:, :3].astype(bool), implied.l)
        assert np.array_equal(chosen[:, 3].astype(bool), implied.z)


def test_evaluate_whole_grid(fan_model):
    N = fan_model.wg.grid.N
    huge = polygon_from_angles(fan_model.anchor_pt, np.arange(4) * np.pi / 2, [500.0] * 4)
    result = evaluate(huge, fan_model)
    assert result.feasible
    assert result.objective == N * N
    assert result.coverage == pytest.approx(1.0, abs=1e-12)


def test_evaluate_anchor_only(fan_model):
    grid = fan_model.wg.grid
    tiny = polygon_from_angles(
        fan_model.anchor_pt, np.arange(4) * np.pi / 2, [0.25 * grid.dx, 0.25 * grid.dy] * 2
    )
    result = evaluate(tiny, fan_model)
    assert result.objective == 1
    assert not result.feasible


def test_evaluate_invalid_lines_is_infeasible(fan_model):
    lines = [AnchoredLine(1.0, 0.0), AnchoredLine(1.0, 0.0), AnchoredLine(0.0, 1.0)]
    assert not evaluate(lines, fan_model).feasible


# ============================================================================
# Optimal search
# ============================================================================


def test_solve_optimal_is_sound_and_deterministic(fan_model):
    first = solve_optimal(fan_model, budget=60.0, seed=3, settings=QUICK)
    second = solve_optimal(fan_model, budget=60.0, seed=3, settings=QUICK)
    assert first.status == STATUS_OPTIMAL
    assert_sound(first, fan_model)
    assert first.coverage <= 1.0 + 1e-12
    assert first.objective == second.objective
    assert first.area == second.area
    assert np.array_equal(first.polygon.a, second.polygon.a)
    assert first.coverage_full == first.coverage


def test_solve_optimal_full_confidence_keeps_all_mass(fan_wg):
    model = build_model(fan_wg, 4, 1.0)
    sol = solve_optimal(model, budget=60.0, seed=1, settings=QUICK)
    assert_sound(sol, model)
    heavy = model.weights > 2e-12
    inside = geometry.contains_points(sol.polygon, model.points)
    assert np.all(inside[heavy])


def test_solve_optimal_beats_bounding_box(fan_wg, fan_model):
    sol = solve_optimal(fan_model, budget=60.0, seed=2, settings=QUICK)
    box = bounding_box(fan_wg, 0.9)
    assert sol.area < box.area


def test_search_without_starts_reports_infeasible(make_wg, blob):
    wg = make_wg(blob(6))
    sol = solve_optimal(build_model(wg, 3, 0.9), budget=60.0, seed=0, settings=SearchSettings(n_starts=0))
    assert sol.status == STATUS_INFEASIBLE
    assert not sol.feasible
    assert sol.message


LATTICE_DIRECTIONS = np.arange(8) * np.pi / 4


def lattice_optimum(model) -> int:
    """Fewest cells over triangles with normals on 8 directions and distances at cell projections"""
    offsets = model.points - np.asarray(model.anchor_pt)
    w = model.weights
    best = None
    for combo in itertools.combinations(range(8), 3):
        phi = LATTICE_DIRECTIONS[list(combo)]
        gaps = np.diff(np.r_[phi, phi[0] + 2 * np.pi])
        if gaps.max() > np.pi - 1e-9:
            continue
        proj = offsets @ np.vstack([np.cos(phi), np.sin(phi)])
        inside = []
        for k in range(3):
            levels = np.unique(proj[:, k][proj[:, k] > 1e-9]) + 1e-9
            inside.append(proj[:, k][:, None] <= levels[None, :])
        z = inside[0][:, :, None, None] & inside[1][:, None, :, None] & inside[2][:, None, None, :]
        coverage = np.tensordot(w, z, axes=1)
        counts = z.sum(axis=0)
        ok = coverage >= model.alpha - 1e-12
        if ok.any():
            found = int(counts[ok].min())
            best = found if best is None else min(best, found)
    return best


def test_tiny_instances_match_lattice_oracle(make_wg):
    rng = np.random.default_rng(2025)
    ii, jj = np.meshgrid(np.arange(5), np.arange(5), indexing="ij")
    for _ in range(20):
        cx, cy = rng.uniform(1.5, 2.5, 2)
        sigma = rng.uniform(0.6, 1.2)
        w = np.exp(-0.5 * ((ii - cx) ** 2 + (jj - cy) ** 2) / sigma**2)
        model = build_model(make_wg(w), 3, 0.8)
        oracle = lattice_optimum(model)
        sol = solve_optimal(model, budget=30.0, seed=int(rng.integers(1000)))
        assert_sound(sol, model)
        assert sol.objective <= oracle + 1


# ============================================================================
# Weighted sampling heuristic
# ============================================================================


def test_aes_prefers_heavy_cell_at_weight_ratio():
    rng = np.random.default_rng(123)
    weights = np.array([0.9, 0.1])
    trials = 100_000
    heavy = sum(int(aes_select(weights, 1, rng)[0] == 0) for _ in range(trials))
    assert heavy / trials == pytest.approx(0.9, abs=0.01)


def test_aes_puts_zero_weights_last():
    rng = np.random.default_rng(0)
    chosen = aes_select(np.array([0.0, 1.0, 0.0, 2.0]), 2, rng)
    assert set(chosen.tolist()) == {1, 3}
    with pytest.raises(SamplingError):
        aes_select(np.array([0.0, 1.0, 0.0, 2.0]), 3, rng)


def test_weighted_sample_all_positive_cells(make_wg):
    w = np.array([[0.0, 1.0], [2.0, 3.0]])
    cells, w_s = weighted_sample(make_wg(w), 3, seed=5)
    assert {tuple(c) for c in cells} == {(0, 1), (1, 0), (1, 1)}
    assert w_s.sum() == pytest.approx(1.0)


def test_weighted_sample_is_deterministic(fan_wg):
    a_cells, a_w = weighted_sample(fan_wg, 70, seed=9)
    b_cells, b_w = weighted_sample(fan_wg, 70, seed=9)
    assert np.array_equal(a_cells, b_cells)
    assert np.array_equal(a_w, b_w)
    assert len({tuple(c) for c in a_cells}) == 70


@pytest.mark.parametrize(
    "w_s, expected",
    [
        ([0.2, 0.3], [0.45, 0.55]),
        ([0.25, 0.75], [0.25, 0.75]),
        ([0.001, 0.9], [0.0505, 0.9495]),
    ],
)
def test_renormalize(w_s, expected):
    out = renormalize(np.array(w_s), len(w_s))
    assert out == pytest.approx(expected, abs=1e-12)
    assert out.sum() == pytest.approx(1.0, abs=1e-12)


def test_renormalize_length_mismatch():
    with pytest.raises(SamplingError):
        renormalize(np.array([0.5, 0.5]), 3)


def test_heuristic_reports_full_grid_coverage(fan_model):
    sol = solve_heuristic(fan_model, n_s=70, n_p=3, budget_per_round=30.0, seed=4, settings=QUICK)
    assert sol.status == STATUS_HEURISTIC
    assert sol.feasible
    assert geometry.validate_ngon(sol.polygon.lines, fan_model.eps).ok
    assert sol.coverage >= 0.9 - 1e-12
    count, coverage = full_coverage(sol.polygon, fan_model.wg)
    assert sol.coverage_full == pytest.approx(coverage)
    assert sol.extra["objective_full"] == count
    assert sol.extra["n_s"] == 70 and sol.extra["n_p"] == 3
    assert 0 <= sol.extra["round"] < 3
    assert sol.extra["generalization_gap"] == (coverage < 0.9 - 1e-12)


def test_heuristic_on_every_cell_equals_optimal(make_wg, blob):
    model = build_model(make_wg(blob(8)), 4, 0.9)
    heuristic = solve_heuristic(model, n_s=64, n_p=1, budget_per_round=1e6, seed=5)
    optimal = solve_optimal(model, budget=1e6, seed=5)
    assert heuristic.status == STATUS_HEURISTIC
    assert heuristic.objective == optimal.objective
    assert heuristic.area == pytest.approx(optimal.area, rel=1e-9)
    assert heuristic.polygon.a == pytest.approx(optimal.polygon.a, rel=1e-9)
    assert heuristic.polygon.b == pytest.approx(optimal.polygon.b, rel=1e-9)


def test_heuristic_needs_rounds(fan_model):
    with pytest.raises(ModelError):
        solve_heuristic(fan_model, n_s=70, n_p=0)


# ============================================================================
# Bounding box
# ============================================================================


def test_box_of_single_cell_region(make_wg):
    w = np.full((5, 5), 0.05 / 24)
    w[2, 2] = 0.95
    sol = bounding_box(make_wg(w), 0.9)
    assert sol.status == STATUS_BASELINE
    assert sol.n == 4
    assert sol.polygon.anchor == (2.0, 2.0)
    assert sol.area == pytest.approx(1.0)
    assert sol.objective == 1
    assert sol.coverage == pytest.approx(0.95)
    assert sol.extra == {"enclose": "level-set"}


def test_box_with_full_confidence_contains_positive_cells(fan_wg):
    sol = bounding_box(fan_wg, 1.0)
    points = fan_wg.grid.coords(fan_wg.grid.cells())
    positive = fan_wg.w.ravel() > 0
    assert np.all(geometry.contains_points(sol.polygon, points[positive]))


def test_box_around_samples(fan_samples, fan_wg):
    sol = bounding_box(fan_wg, 0.9, enclose="samples", samples=fan_samples)
    assert np.all(geometry.contains_points(sol.polygon, fan_samples.points, tol=1e-9))
    assert sol.extra == {"enclose": "samples"}


def test_box_needs_samples_for_sample_mode(fan_wg):
    with pytest.raises(ModelError):
        bounding_box(fan_wg, 0.9, enclose="samples")


def test_box_polygon_lines_are_valid():
    poly = box_polygon(-1.0, 3.0, -2.0, 2.0, (0.0, 0.0), 1e-6)
    assert geometry.validate_ngon(poly.lines).ok
    assert geometry.area(geometry.vertices(poly)) == pytest.approx(16.0)
    with pytest.raises(ModelError):
        box_polygon(0.0, 1.0, 0.0, 1.0, (2.0, 0.5), 1e-6)


def test_box_polygon_matches_anchor_and_sample_mean():
    samples = SampleSet([[0.0, 0.0], [4.0, 0.0], [4.0, 2.0], [0.0, 2.0]])
    axis = np.linspace(-1.0, 5.0, 7)
    wg = fft_kde(samples, Grid2D(axis, axis.copy()), 1.0, 1.0)
    sol = bounding_box(wg, 0.9, enclose="samples", samples=samples)
    assert sol.polygon.anchor == (2.0, 1.0)
    # half a grid cell beyond the extreme samples on every side
    assert sol.area == pytest.approx(5.0 * 3.0)
    assert math.isclose(sol.coverage, sol.coverage_full)


def test_box_around_samples_with_zero_range(fan_wg):
    grid = fan_wg.grid
    x0, y0 = grid.xs[8] + 0.3 * grid.dx, grid.ys[11] - 0.2 * grid.dy
    point = bounding_box(fan_wg, 0.9, enclose="samples", samples=SampleSet([[x0, y0]] * 4))
    assert point.polygon.anchor == pytest.approx((x0, y0))
    assert point.area == pytest.approx(grid.dx * grid.dy)

    row = SampleSet([[x0, y0], [x0 + 3 * grid.dx, y0]])
    sol = bounding_box(fan_wg, 0.9, enclose="samples", samples=row)
    assert sol.area == pytest.approx(4 * grid.dx * grid.dy)
    assert np.all(geometry.contains_points(sol.polygon, row.points))


# ============================================================================
# Coordinate scale
# ============================================================================


@pytest.fixture(scope="module")
def scaled_fan_model(fan_samples):
    # a power of two keeps every rescaled coordinate exact
    return build_model(estimate(SampleSet(fan_samples.points * 64.0), 20), 4, 0.9)


def test_scaled_samples_give_the_same_weights(fan_model, scaled_fan_model):
    assert np.array_equal(scaled_fan_model.weights, fan_model.weights)
    assert scaled_fan_model.coeff_bound == pytest.approx(fan_model.coeff_bound / 64.0, rel=1e-12)


def test_optimal_area_scales_with_the_coordinates(fan_model, scaled_fan_model):
    base = solve_optimal(fan_model, budget=1e6, seed=3, settings=QUICK)
    scaled = solve_optimal(scaled_fan_model, budget=1e6, seed=3, settings=QUICK)
    assert base.status == scaled.status == STATUS_OPTIMAL
    assert scaled.objective == base.objective
    assert scaled.area == pytest.approx(64.0 ** 2 * base.area, rel=1e-9)
    assert_sound(scaled, scaled_fan_model)


def test_heuristic_area_scales_with_the_coordinates(fan_model, scaled_fan_model):
    base = solve_heuristic(fan_model, n_s=70, n_p=2, budget_per_round=1e6, seed=8, settings=QUICK)
    scaled = solve_heuristic(
        scaled_fan_model, n_s=70, n_p=2, budget_per_round=1e6, seed=8, settings=QUICK
    )
    assert base.feasible and scaled.feasible
    assert scaled.area == pytest.approx(64.0 ** 2 * base.area, rel=1e-9)


def test_box_area_scales_with_the_coordinates(fan_wg, scaled_fan_model):
    base = bounding_box(fan_wg, 0.9)
    scaled = bounding_box(scaled_fan_model.wg, 0.9)
    assert scaled.area == pytest.approx(64.0 ** 2 * base.area, rel=1e-9)
    assert scaled.objective == base.objective


def test_minute_long_step_is_solvable():
    # one minute at ~190 km/h spreads the samples over several kilometres
    params = dataclasses.replace(CaseIParams.default(), dt=60.0)
    wg = estimate(sample_fan(params, 1000, 7), 20)
    model = build_model(wg, 4, 0.9)
    box = bounding_box(wg, 0.9)
    assert box.area > 1e6
    optimal = solve_optimal(model, budget=1e6, seed=0, settings=QUICK)
    assert_sound(optimal, model)
    assert optimal.area < box.area
    heuristic = solve_heuristic(model, n_s=70, n_p=2, budget_per_round=1e6, seed=0, settings=QUICK)
    assert heuristic.feasible
    assert geometry.validate_ngon(heuristic.polygon.lines, model.eps).ok
