"""Minimal n-gon covering probability mass alpha on a weighted grid.

The mixed-integer model has continuous line coefficients (a_k, b_k), binaries
l[c, k] (cell c on the inner side of line k) and z[c] (cell c inside the
polygon). The big-M rows and the logic rows pin every binary to the sign of an
affine form, so for fixed lines the binaries are implied and the model reduces
to a search over 2n continuous coefficients: minimise the number of cells
inside, subject to covered weight >= alpha and a valid n-gon.

The search parameterises line k by its normal angle phi_k and its distance d_k
from the anchor (a_k = cos(phi_k) / d_k, b_k = sin(phi_k) / d_k). For fixed
angles of the other lines the best d_k is exact: the smallest distance at which
the covered weight still reaches alpha. Multi-start simulated annealing over
the angles, with these exact distance updates, explores the rest.

solve_optimal can hand the full program to a global MINLP solver through
reachset.minlp instead; the search remains the fallback when none is installed.
"""

import logging
import math
import time
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from reachset import geometry, minlp
from reachset.distributions import derive_seeds
from reachset.errors import AlphaError, ModelError, SamplingError
from reachset.kde import WEIGHT_TOL, confidence_region
from reachset.models import (
    AnchoredLine,
    Assignment,
    LinePolygon,
    PolyModel,
    PolySolution,
    SampleSet,
    WeightedGrid,
)

logger = logging.getLogger(__name__)

STATUS_OPTIMAL = "optimal-budget"
STATUS_HEURISTIC = "heuristic"
STATUS_BASELINE = "baseline"
STATUS_INFEASIBLE = "infeasible"

ENGINE_SEARCH = "search"
ENGINE_AUTO = "auto"


@dataclass(frozen=True)
class SearchSettings:
    """Knobs of the multi-start annealing search

    Temperatures are in units of grid cells; steps are angles in radians.
    Each start runs max_iter moves plus iter_per_cell moves per model cell.
    """

    n_starts: int = 8
    max_iter: int = 600
    iter_per_cell: float = 0.0
    step: float = 0.35
    step_min: float = 0.01
    temperature: float = 2.0
    temperature_min: float = 0.02
    area_weight: float = 0.1
    polish_sweeps: int = 4

    def iterations(self, cells: int) -> int:
        return self.max_iter + int(round(self.iter_per_cell * cells))


OPTIMAL_SETTINGS = SearchSettings(n_starts=12, max_iter=1500)
HEURISTIC_SETTINGS = SearchSettings(n_starts=3, max_iter=100, iter_per_cell=2.0)


# ============================================================================
# Model
# ============================================================================


def default_coeff_bound(wg: WeightedGrid, anchor_pt: Tuple[float, float]) -> float:
    """4 / (shortest distance from the anchor to the grid boundary)"""
    grid = wg.grid
    dist = min(
        anchor_pt[0] - grid.xs[0],
        grid.xs[-1] - anchor_pt[0],
        anchor_pt[1] - grid.ys[0],
        grid.ys[-1] - anchor_pt[1],
    )
    dist = max(dist, 0.5 * min(abs(grid.dx), abs(grid.dy)))
    return 4.0 / dist


def build_reduced_model(
    wg: WeightedGrid,
    cells: np.ndarray,
    weights: np.ndarray,
    n: int,
    alpha: float,
    eps: float = geometry.DEFAULT_EPS,
    coeff_bound: Optional[float] = None,
) -> PolyModel:
    """Model over an arbitrary subset of grid cells with the given weights"""
    if n < 3:
        raise ModelError(f"polygon needs n >= 3 sides, got {n}")
    if not 0 < alpha <= 1:
        raise AlphaError(f"alpha must lie in (0, 1], got {alpha}")
    if eps <= 0:
        raise ModelError(f"eps must be positive, got {eps}")
    cells = np.asarray(cells, dtype=int).reshape(-1, 2)
    weights = np.asarray(weights, dtype=float).ravel()
    if cells.shape[0] == 0 or cells.shape[0] != weights.size:
        raise ModelError("cells and weights must be nonempty and aligned")

    # canonical lexicographic cell order; argmax then breaks ties the same way
    order = np.lexsort((cells[:, 1], cells[:, 0]))
    cells, weights = cells[order], weights[order]
    top = int(np.argmax(weights))
    anchor_idx = (int(cells[top, 0]), int(cells[top, 1]))
    anchor_pt = wg.grid.point(*anchor_idx)

    if coeff_bound is None:
        coeff_bound = default_coeff_bound(wg, anchor_pt)
    if coeff_bound <= 0:
        raise ModelError(f"coeff_bound must be positive, got {coeff_bound}")

    offsets = wg.grid.coords(cells) - np.asarray(anchor_pt)
    big_m = coeff_bound * np.abs(offsets).sum(axis=1) + 1.0 + eps
    return PolyModel(
        wg=wg,
        cells=cells,
        weights=weights,
        n=int(n),
        alpha=float(alpha),
        anchor_idx=anchor_idx,
        anchor_pt=anchor_pt,
        big_m1=big_m,
        big_m2=big_m.copy(),
        eps=float(eps),
        coeff_bound=float(coeff_bound),
    )


def build_model(
    wg: WeightedGrid,
    n: int,
    alpha: float,
    eps: float = geometry.DEFAULT_EPS,
    coeff_bound: Optional[float] = None,
) -> PolyModel:
    """Full model over every grid cell, anchored at the heaviest cell"""
    return build_reduced_model(wg, wg.grid.cells(), wg.w.ravel(), n, alpha, eps, coeff_bound)


def _as_polygon(lines: Union[LinePolygon, Sequence[AnchoredLine]], model: PolyModel) -> LinePolygon:
    if isinstance(lines, LinePolygon):
        return lines
    return LinePolygon(anchor=model.anchor_pt, lines=list(lines), eps=model.eps)


def implied_assignment(
    lines: Union[LinePolygon, Sequence[AnchoredLine]], model: PolyModel
) -> Assignment:
    """The integer (l, z) forced by the big-M and logic rows for these lines"""
    poly = _as_polygon(lines, model)
    geometry.require_valid(poly)
    inner = geometry.affine_forms(poly, model.points) <= 0
    return Assignment(l=inner, z=inner.all(axis=1))


def linking_satisfied(
    model: PolyModel,
    lines: Union[LinePolygon, Sequence[AnchoredLine]],
    l: np.ndarray,
    z: np.ndarray,
) -> np.ndarray:
    """Per-cell truth of the big-M rows and the l/z logic rows

    l has shape (..., cells, n) and z shape (..., cells); leading axes broadcast,
    which lets callers test many candidate assignments at once.
    """
    poly = _as_polygon(lines, model)
    form = geometry.affine_forms(poly, model.points)
    l = np.asarray(l, dtype=float)
    z = np.asarray(z, dtype=float)
    m1 = model.big_m1[:, None]
    m2 = model.big_m2[:, None]
    lab1 = form <= m1 * (1 - l)
    lab2 = -form <= m2 * l - model.eps
    total = l.sum(axis=-1)
    zl1 = total >= model.n * z
    zl2 = total <= (model.n - 1) + z
    return lab1.all(axis=-1) & lab2.all(axis=-1) & zl1 & zl2


class Evaluation(NamedTuple):
    feasible: bool
    objective: int
    coverage: float


def evaluate(lines: Union[LinePolygon, Sequence[AnchoredLine]], model: PolyModel) -> Evaluation:
    """Feasibility, inside-count objective and covered weight of a line set"""
    poly = _as_polygon(lines, model)
    valid = geometry.validate_ngon(poly.lines, model.eps).ok
    z = geometry.contains_points(poly, model.points)
    coverage = float(model.weights[z].sum())
    feasible = valid and coverage >= model.alpha - WEIGHT_TOL
    return Evaluation(feasible=feasible, objective=int(z.sum()), coverage=coverage)


def full_coverage(poly: LinePolygon, wg: WeightedGrid) -> Tuple[int, float]:
    """Inside-count and covered weight over every cell of the grid"""
    grid = wg.grid
    z = geometry.contains_points(poly, grid.coords(grid.cells()))
    return int(z.sum()), float(wg.w.ravel()[z].sum())


# ============================================================================
# Continuous search engine
# ============================================================================


@dataclass
class _Candidate:
    phi: np.ndarray
    d: np.ndarray
    count: int
    coverage: float
    area: float

    def key(self) -> Tuple[int, float]:
        return (self.count, self.area)


class _PolygonSearch:
    """Annealing over line angles with exact distance updates"""

    def __init__(self, model: PolyModel, settings: SearchSettings):
        self.model = model
        self.settings = settings
        self.n = model.n
        self.anchor = model.anchor_pt
        self.offsets = model.points - np.asarray(model.anchor_pt)
        self.weights = model.weights
        self.target = model.alpha - WEIGHT_TOL
        grid = model.wg.grid
        self.cell_area = abs(grid.dx * grid.dy)
        self.margin = 1e-9 * grid.diagonal
        self.d_min = 1.0 / model.coeff_bound
        self.support_pad = 0.01 * min(abs(grid.dx), abs(grid.dy))

    def coefficients(self, phi: np.ndarray, d: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        return np.cos(phi) / d, np.sin(phi) / d

    def projections(self, phi: np.ndarray) -> np.ndarray:
        return self.offsets @ np.vstack([np.cos(phi), np.sin(phi)])

    def valid(self, phi: np.ndarray, d: np.ndarray) -> bool:
        a, b = self.coefficients(phi, d)
        return geometry.is_valid(a, b, self.model.eps)

    def tightest(self, k: int, proj: np.ndarray, d: np.ndarray) -> Optional[float]:
        """Smallest d_k keeping covered weight >= alpha with the other lines fixed"""
        outside = proj > d[None, :]
        others_in = (outside.sum(axis=1) - outside[:, k]) == 0
        cand = np.flatnonzero(others_in)
        if self.weights[cand].sum() < self.target:
            return None
        t = proj[cand, k]
        order = np.argsort(t, kind="stable")
        cumulative = np.cumsum(self.weights[cand][order])
        idx = min(int(np.searchsorted(cumulative, self.target)), order.size - 1)
        t_req = t[order[idx]]
        return max(t_req + 1e-9 * abs(t_req) + self.margin, self.d_min)

    def measure(self, phi: np.ndarray, d: np.ndarray) -> Optional[_Candidate]:
        if not self.valid(phi, d):
            return None
        proj = self.projections(phi)
        z = np.all(proj <= d[None, :], axis=1)
        coverage = float(self.weights[z].sum())
        if coverage < self.target:
            return None
        a, b = self.coefficients(phi, d)
        area = geometry.signed_area(geometry.vertex_array(self.anchor, a, b))
        return _Candidate(phi=phi, d=d, count=int(z.sum()), coverage=coverage, area=area)

    def energy(self, cand: _Candidate) -> float:
        return cand.count + self.settings.area_weight * cand.area / self.cell_area

    def tighten(self, k: int, phi: np.ndarray, d: np.ndarray, proj: np.ndarray) -> Optional[np.ndarray]:
        """Move line k to its tightest distance, backing off if the n-gon breaks"""
        new = self.tightest(k, proj, d)
        if new is None:
            return None
        old = d[k]
        candidate = d.copy()
        candidate[k] = new
        if new >= old:
            return candidate
        for trial in (new, 0.5 * (new + old), 0.25 * new + 0.75 * old):
            candidate[k] = trial
            if self.valid(phi, candidate):
                return candidate
        return d

    def polish(self, phi: np.ndarray, d: np.ndarray, sweeps: Optional[int] = None) -> Optional[np.ndarray]:
        proj = self.projections(phi)
        for _ in range(sweeps or self.settings.polish_sweeps):
            before = d.copy()
            for k in range(self.n):
                d = self.tighten(k, phi, d, proj)
                if d is None:
                    return None
            if np.allclose(before, d, rtol=1e-12, atol=0):
                break
        return d

    def initial(self, start: int, rng: np.random.Generator) -> Optional[_Candidate]:
        """Support lines of the heaviest cells at n spread directions"""
        order = np.lexsort((self.model.cells[:, 1], self.model.cells[:, 0], -self.weights))
        cumulative = np.cumsum(self.weights[order])
        count = min(int(np.searchsorted(cumulative, self.target)) + 1, order.size)
        region = self.offsets[order[:count]]

        spacing = 2 * math.pi / self.n
        phi = spacing * np.arange(self.n)
        if start > 0:
            phi = phi + rng.uniform(0, spacing) + rng.normal(0, 0.15 * spacing, self.n)
            phi = np.sort(phi)

        support = (region @ np.vstack([np.cos(phi), np.sin(phi)])).max(axis=0)
        pad = self.support_pad
        for _ in range(4):
            d = np.maximum(support + pad, self.d_min)
            if self.valid(phi, d):
                break
            pad *= 10
        else:
            return None

        polished = self.polish(phi, d)
        if polished is None:
            return None
        return self.measure(phi, polished)

    def propose(self, cur: _Candidate, rng: np.random.Generator, step: float) -> Optional[_Candidate]:
        phi, d = cur.phi.copy(), cur.d.copy()
        k = int(rng.integers(self.n))
        move = rng.random()
        if move < 0.6:
            phi[k] += rng.normal(0, step)
            d = self.tighten(k, phi, d, self.projections(phi))
        elif move < 0.85:
            d[k] *= 1 + rng.uniform(0.05, 0.5)
            d = self.polish(phi, d, sweeps=1)
        else:
            shift = rng.normal(0, step)
            phi[k] += shift
            phi[(k + 1) % self.n] += shift
            d = self.polish(phi, d, sweeps=1)
        if d is None:
            return None
        return self.measure(phi, d)

    def run_start(
        self, start: int, rng: np.random.Generator, deadline: float
    ) -> Optional[_Candidate]:
        cur = self.initial(start, rng)
        if cur is None:
            return None
        best = cur
        s = self.settings
        total = s.iterations(self.model.size)
        for it in range(total):
            if time.perf_counter() > deadline:
                logger.debug("start %d stopped at iteration %d (budget)", start, it)
                break
            frac = it / max(total - 1, 1)
            temp = s.temperature * (s.temperature_min / s.temperature) ** frac
            step = s.step * (s.step_min / s.step) ** frac
            cand = self.propose(cur, rng, step)
            if cand is None:
                continue
            delta = self.energy(cand) - self.energy(cur)
            if delta <= 0 or rng.random() < math.exp(-delta / temp):
                cur = cand
                if cur.key() < best.key():
                    best = cur
        final = self.polish(best.phi, best.d.copy())
        if final is not None:
            refined = self.measure(best.phi, final)
            if refined is not None and refined.key() <= best.key():
                best = refined
        return best

    def solve(self, seed: int, budget: float) -> Tuple[Optional[_Candidate], int]:
        deadline = time.perf_counter() + budget
        best: Optional[_Candidate] = None
        tried = 0
        for start, start_seed in enumerate(derive_seeds(seed, self.settings.n_starts)):
            if start > 0 and time.perf_counter() > deadline:
                logger.warning("budget exhausted after %d of %d starts", start, self.settings.n_starts)
                break
            tried += 1
            found = self.run_start(start, np.random.default_rng(start_seed), deadline)
            if found is not None and (best is None or found.key() < best.key()):
                best = found
        return best, tried

    def polygon(self, cand: _Candidate) -> LinePolygon:
        a, b = self.coefficients(cand.phi, cand.d)
        return LinePolygon.from_coefficients(self.anchor, a, b, eps=self.model.eps)


def _infeasible(model: PolyModel, started: float, seed: Optional[int], message: str) -> PolySolution:
    logger.warning("no feasible polygon: %s", message)
    return PolySolution(
        status=STATUS_INFEASIBLE,
        n=model.n,
        alpha=model.alpha,
        solve_time=time.perf_counter() - started,
        seed=seed,
        message=message,
    )


def _finish(
    model: PolyModel,
    poly: LinePolygon,
    status: str,
    started: float,
    seed: Optional[int],
) -> PolySolution:
    """Re-evaluate a polygon on its model and package the solution"""
    result = evaluate(poly, model)
    if not result.feasible or not geometry.contains(poly, model.anchor_pt):
        return _infeasible(model, started, seed, "candidate failed re-evaluation")
    chain = geometry.vertices(poly)
    _, cov_full = full_coverage(poly, model.wg) if not model.is_full else (0, result.coverage)
    return PolySolution(
        status=status,
        n=model.n,
        alpha=model.alpha,
        polygon=poly,
        assignment=implied_assignment(poly, model),
        vertices=chain,
        objective=result.objective,
        coverage=result.coverage,
        coverage_full=cov_full,
        area=geometry.area(chain),
        solve_time=time.perf_counter() - started,
        seed=seed,
    )


def _search(
    model: PolyModel, budget: float, seed: int, settings: SearchSettings, status: str
) -> PolySolution:
    started = time.perf_counter()
    search = _PolygonSearch(model, settings)
    best, tried = search.solve(seed, budget)
    if best is None:
        return _infeasible(
            model, started, seed, f"no valid polygon with coverage >= {model.alpha} in {tried} starts"
        )
    return _finish(model, search.polygon(best), status, started, seed)


def _exact(model: PolyModel, solver: str, budget: float, seed: int) -> PolySolution:
    started = time.perf_counter()
    found = minlp.solve_minlp(model, solver, time_limit=budget)
    if found is None:
        return _infeasible(model, started, seed, f"{solver} found no polygon")
    poly = LinePolygon.from_coefficients(model.anchor_pt, found.a, found.b, eps=model.eps)
    sol = _finish(model, poly, STATUS_OPTIMAL, started, seed)
    sol.extra = {"engine": solver, "termination": found.termination, "proven": found.proven}
    return sol


def solve_optimal(
    model: PolyModel,
    budget: float = 60.0,
    seed: int = 0,
    settings: SearchSettings = OPTIMAL_SETTINGS,
    engine: str = ENGINE_SEARCH,
) -> PolySolution:
    """Best polygon within the time budget

    engine is "search" for the multi-start search, "auto" for the first
    installed global MINLP solver, or a Pyomo solver name. A solver that
    returns nothing usable falls back to the search.
    """
    if engine != ENGINE_SEARCH:
        solver = minlp.find_global_solver() if engine == ENGINE_AUTO else engine
        if solver is None:
            logger.info("no global MINLP solver installed, using the search")
        else:
            sol = _exact(model, solver, budget, seed)
            if sol.feasible:
                logger.info(
                    "%s: %d cells, coverage %.4f, area %.1f m^2 in %.2fs",
                    solver, sol.objective, sol.coverage, sol.area, sol.solve_time,
                )
                return sol
            logger.warning("%s gave no usable polygon (%s), using the search", solver, sol.message)

    sol = _search(model, budget, seed, settings, STATUS_OPTIMAL)
    if sol.feasible:
        sol.extra = {"engine": ENGINE_SEARCH}
        logger.info(
            "optimal-budget: %d cells, coverage %.4f, area %.1f m^2 in %.2fs",
            sol.objective, sol.coverage, sol.area, sol.solve_time,
        )
    return sol


# ============================================================================
# Weighted sampling heuristic
# ============================================================================


def aes_select(weights: np.ndarray, n_s: int, rng: np.random.Generator) -> np.ndarray:
    """Positions of the n_s largest keys u^(1/w), zero weights last

    Keys are compared through log(u) / w, which orders them identically and
    does not underflow for small weights.
    """
    weights = np.asarray(weights, dtype=float).ravel()
    positive = weights > 0
    available = int(positive.sum())
    if n_s < 1 or n_s > available:
        raise SamplingError(f"n_s must lie in [1, {available}] (positive-weight cells), got {n_s}")
    u = 1.0 - rng.random(weights.size)
    keys = np.full(weights.size, -np.inf)
    keys[positive] = np.log(u[positive]) / weights[positive]
    return np.argsort(-keys, kind="stable")[:n_s]


def weighted_sample(wg: WeightedGrid, n_s: int, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    """n_s representative cells drawn without replacement by weight"""
    w = wg.w.ravel()
    chosen = aes_select(w, n_s, np.random.default_rng(seed))
    return wg.grid.cells()[chosen], w[chosen]


def renormalize(w_s: np.ndarray, n_s: int) -> np.ndarray:
    """Spread the missing mass evenly: w + (1 - sum(w)) / n_s"""
    w_s = np.asarray(w_s, dtype=float)
    if w_s.size != n_s:
        raise SamplingError(f"expected {n_s} weights, got {w_s.size}")
    out = w_s + (1.0 - w_s.sum()) / n_s
    assert np.all(out >= 0), "renormalized weights must be nonnegative"
    return out


def solve_heuristic(
    model: PolyModel,
    n_s: int,
    n_p: int = 10,
    budget_per_round: float = 10.0,
    seed: int = 0,
    settings: Optional[SearchSettings] = None,
) -> PolySolution:
    """Smallest-area polygon over n_p reduced models built from weighted samples

    A single round that samples every cell is the full model, so it is solved
    exactly like solve_optimal (same seed, OPTIMAL_SETTINGS unless settings
    are given) and returns the same polygon.
    """
    if n_p < 1:
        raise ModelError(f"n_p must be >= 1, got {n_p}")
    exhaustive = (
        n_p == 1 and model.is_full and n_s == model.size and bool(np.all(model.weights > 0))
    )
    if settings is None:
        settings = OPTIMAL_SETTINGS if exhaustive else HEURISTIC_SETTINGS
    started = time.perf_counter()
    best: Optional[PolySolution] = None
    best_round = -1
    feasible_rounds = 0

    for r, round_seed in enumerate(derive_seeds(seed, n_p)):
        if exhaustive:
            sol = _search(model, budget_per_round, seed, settings, STATUS_HEURISTIC)
        else:
            sample_seed, search_seed = derive_seeds(round_seed, 2)
            cells, w_s = weighted_sample(model.wg, n_s, sample_seed)
            reduced = build_reduced_model(
                model.wg, cells, renormalize(w_s, n_s), model.n, model.alpha, model.eps, model.coeff_bound
            )
            sol = _search(reduced, budget_per_round, search_seed, settings, STATUS_HEURISTIC)
        if not sol.feasible:
            logger.debug("round %d infeasible: %s", r, sol.message)
            continue
        feasible_rounds += 1
        if best is None or sol.area < best.area:
            best, best_round = sol, r

    elapsed = time.perf_counter() - started
    if best is None:
        return _infeasible(model, started, seed, f"all {n_p} heuristic rounds infeasible")

    objective_full, coverage_full = full_coverage(best.polygon, model.wg)
    best.coverage_full = coverage_full
    best.solve_time = elapsed
    best.seed = seed
    best.extra = {
        "round": best_round,
        "feasible_rounds": feasible_rounds,
        "n_s": int(n_s),
        "n_p": int(n_p),
        "objective_full": objective_full,
        "generalization_gap": coverage_full < model.alpha - WEIGHT_TOL,
    }
    if coverage_full < model.alpha - WEIGHT_TOL:
        logger.warning(
            "heuristic polygon covers %.4f of the full grid (alpha %.3f)", coverage_full, model.alpha
        )
    return best


# ============================================================================
# Bounding-box baseline
# ============================================================================


def box_polygon(
    x_lo: float, x_hi: float, y_lo: float, y_hi: float, anchor: Tuple[float, float], eps: float
) -> LinePolygon:
    """Axis-aligned rectangle as four anchored lines (right, top, left, bottom)"""
    cx, cy = anchor
    if not (x_lo < cx < x_hi and y_lo < cy < y_hi):
        raise ModelError("box anchor must lie strictly inside the box")
    lines = [
        AnchoredLine(1.0 / (x_hi - cx), 0.0),
        AnchoredLine(0.0, 1.0 / (y_hi - cy)),
        AnchoredLine(-1.0 / (cx - x_lo), 0.0),
        AnchoredLine(0.0, -1.0 / (cy - y_lo)),
    ]
    return LinePolygon(anchor=(float(cx), float(cy)), lines=lines, eps=eps)


def bounding_box(
    wg: WeightedGrid,
    alpha: float,
    enclose: str = "level-set",
    samples: Optional[SampleSet] = None,
    eps: float = geometry.DEFAULT_EPS,
) -> PolySolution:
    """Axis-aligned box around the alpha confidence region (or the raw samples)"""
    started = time.perf_counter()
    grid = wg.grid
    # boxes cover whole cells, which also keeps a zero-range axis open
    half = np.array([abs(grid.dx), abs(grid.dy)]) / 2
    if enclose == "samples":
        if samples is None or samples.count == 0:
            raise ModelError("enclose='samples' needs the samples")
        x_lo, y_lo = samples.points.min(axis=0) - half
        x_hi, y_hi = samples.points.max(axis=0) + half
        anchor = tuple(samples.points.mean(axis=0))
    elif enclose == "level-set":
        region = confidence_region(wg, alpha)
        if region.size == 0:
            raise ModelError("confidence region is empty")
        coords = grid.coords(region.indices)
        x_lo, y_lo = coords.min(axis=0) - half
        x_hi, y_hi = coords.max(axis=0) + half
        w = wg.w[region.indices[:, 0], region.indices[:, 1]]
        anchor = tuple(np.average(coords, axis=0, weights=w))
    else:
        raise ModelError(f"unknown enclose mode {enclose!r}")

    poly = box_polygon(x_lo, x_hi, y_lo, y_hi, anchor, eps)
    chain = geometry.vertices(poly)
    points = grid.coords(grid.cells())
    inner = geometry.affine_forms(poly, points) <= 0
    z = inner.all(axis=1)
    coverage = float(wg.w.ravel()[z].sum())
    return PolySolution(
        status=STATUS_BASELINE,
        n=4,
        alpha=alpha,
        polygon=poly,
        assignment=Assignment(l=inner, z=z),
        vertices=chain,
        objective=int(z.sum()),
        coverage=coverage,
        coverage_full=coverage,
        area=geometry.area(chain),
        solve_time=time.perf_counter() - started,
        extra={"enclose": enclose},
    )
