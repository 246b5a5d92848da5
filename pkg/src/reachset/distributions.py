"""Seeded sample generators for the case-study uncertainties and sample files."""

import csv
import logging
import math
from functools import partial
from pathlib import Path
from typing import Callable, List, Union

import numpy as np
from scipy import special, stats

from reachset.errors import (
    DegenerateTruncationError,
    InvalidIntervalError,
    InvalidMixtureError,
    SampleFileError,
    SamplingError,
)
from reachset.models import BimodalParams, CaseIParams, Mixture1D, SampleSet, TruncGauss

logger = logging.getLogger(__name__)

Sampler = Callable[[int, int], SampleSet]

KMH_TO_MS = 1000.0 / 3600.0


def _check_count(count: int) -> None:
    if int(count) != count or count < 1:
        raise SamplingError(f"sample count must be a positive integer, got {count}")


def _interval_mass(dist: TruncGauss) -> float:
    """Parent Gaussian mass on [lo, hi], computed on the far tail for accuracy"""
    a = (dist.lo - dist.mu) / dist.sigma
    b = (dist.hi - dist.mu) / dist.sigma
    if a >= 0:
        return float(special.ndtr(-a) - special.ndtr(-b))
    return float(special.ndtr(b) - special.ndtr(a))


def sample_trunc_gauss(dist: TruncGauss, count: int, seed: int) -> np.ndarray:
    """Inverse-CDF draws from a truncated Gaussian, all inside [lo, hi]"""
    _check_count(count)
    if not dist.lo < dist.hi:
        raise InvalidIntervalError(
            f"truncation interval [{dist.lo}, {dist.hi}] is empty"
        )
    if dist.sigma < 0:
        raise InvalidIntervalError(f"sigma must be >= 0, got {dist.sigma}")

    if dist.sigma == 0:
        if not dist.lo <= dist.mu <= dist.hi:
            raise DegenerateTruncationError(
                f"point mass at {dist.mu} lies outside [{dist.lo}, {dist.hi}]"
            )
        return np.full(count, float(dist.mu))

    if _interval_mass(dist) <= 0.0:
        raise DegenerateTruncationError(
            f"N({dist.mu}, {dist.sigma}^2) has no mass on [{dist.lo}, {dist.hi}]"
        )

    rng = np.random.default_rng(seed)
    u = rng.uniform(size=count)
    a = (dist.lo - dist.mu) / dist.sigma
    b = (dist.hi - dist.mu) / dist.sigma
    values = stats.truncnorm.ppf(u, a, b, loc=dist.mu, scale=dist.sigma)
    return np.clip(values, dist.lo, dist.hi)


def sample_fan(params: CaseIParams, count: int, seed: int) -> SampleSet:
    """Positions after one step of the constant speed/heading kinematic model"""
    if params.dt <= 0:
        raise SamplingError(f"dt must be positive, got {params.dt}")
    speed_seed, heading_seed = derive_seeds(seed, 2)
    speed = sample_trunc_gauss(params.speed, count, speed_seed) * KMH_TO_MS
    heading = np.deg2rad(sample_trunc_gauss(params.heading, count, heading_seed))

    step = speed * params.dt
    x = params.prev_pos[0] + np.cos(heading) * step
    y = params.prev_pos[1] + np.sin(heading) * step
    return SampleSet(np.column_stack([x, y]))


def _check_mixture(mix: Mixture1D, axis: str) -> None:
    weights = np.asarray(mix.weights, dtype=float)
    if len(mix.weights) != 2 or len(mix.means) != 2 or len(mix.sigmas) != 2:
        raise InvalidMixtureError(f"{axis}-marginal needs exactly two components")
    if np.any(weights <= 0) or np.any(weights >= 1):
        raise InvalidMixtureError(f"{axis}-marginal weights must lie in (0, 1)")
    if not math.isclose(weights.sum(), 1.0, abs_tol=1e-9):
        raise InvalidMixtureError(
            f"{axis}-marginal weights sum to {weights.sum():.6g}, expected 1"
        )
    if min(mix.sigmas) < 0:
        raise InvalidMixtureError(f"{axis}-marginal sigmas must be >= 0")


def _sample_mixture(mix: Mixture1D, count: int, rng: np.random.Generator) -> np.ndarray:
    second = rng.uniform(size=count) >= mix.weights[0]
    noise = rng.standard_normal(count)
    means = np.where(second, mix.means[1], mix.means[0])
    sigmas = np.where(second, mix.sigmas[1], mix.sigmas[0])
    return means + sigmas * noise


def sample_bimodal(params: BimodalParams, count: int, seed: int) -> SampleSet:
    """Independent draws from the two-component x- and y-marginals"""
    _check_count(count)
    _check_mixture(params.x, "x")
    _check_mixture(params.y, "y")
    x_seed, y_seed = derive_seeds(seed, 2)
    x = _sample_mixture(params.x, count, np.random.default_rng(x_seed))
    y = _sample_mixture(params.y, count, np.random.default_rng(y_seed))
    return SampleSet(np.column_stack([x, y]))


def derive_seeds(seed: int, count: int) -> List[int]:
    """Independent child seeds; the k-th child does not depend on count"""
    state = np.random.SeedSequence(int(seed)).generate_state(count, dtype=np.uint64)
    return [int(s) for s in state]


# ============================================================================
# Sample files
# ============================================================================


def load_samples(path: Union[str, Path]) -> SampleSet:
    """Read a CSV file with header `x,y`, one point per row, order preserved"""
    path = Path(path)
    if not path.is_file():
        raise SampleFileError(f"sample file '{path}' not found")

    points = []
    with open(path, "r", newline="") as f:
        reader = csv.reader(f)
        header = next(reader, None)
        if header is None:
            raise SampleFileError(f"sample file '{path}' is empty")
        if [h.strip().lower() for h in header] != ["x", "y"]:
            raise SampleFileError(f"expected header 'x,y', got {','.join(header)!r}", 1)

        for row in reader:
            line = reader.line_num
            if not row or all(not cell.strip() for cell in row):
                continue
            if len(row) != 2:
                raise SampleFileError(f"expected 2 columns, got {len(row)}", line)
            try:
                x, y = float(row[0]), float(row[1])
            except ValueError:
                raise SampleFileError(f"cannot parse {','.join(row)!r}", line)
            if not (math.isfinite(x) and math.isfinite(y)):
                raise SampleFileError(f"non-finite coordinate {','.join(row)!r}", line)
            points.append((x, y))

    if not points:
        raise SampleFileError(f"sample file '{path}' has no data rows")
    logger.debug("Loaded %d samples from %s", len(points), path)
    return SampleSet(np.array(points))


def save_samples(samples: SampleSet, path: Union[str, Path]) -> Path:
    """Write samples in the format read by load_samples (exact float repr)"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["x", "y"])
        for x, y in samples.points:
            writer.writerow([repr(float(x)), repr(float(y))])
    return path


# ============================================================================
# Samplers for the testing stage
# ============================================================================


def fan_sampler(params: CaseIParams) -> Sampler:
    return partial(sample_fan, params)


def bimodal_sampler(params: BimodalParams) -> Sampler:
    return partial(sample_bimodal, params)


def bootstrap_sampler(samples: SampleSet) -> Sampler:
    """Resample the given points with replacement"""

    def draw(count: int, seed: int) -> SampleSet:
        _check_count(count)
        rng = np.random.default_rng(seed)
        rows = rng.integers(0, samples.count, size=count)
        return SampleSet(samples.points[rows])

    return draw
