"""Binned FFT kernel density estimation on a regular 2D grid.

Samples are linearly binned onto the grid nodes and the bin counts are
convolved with a separable Gaussian kernel sampled at the node offsets. The
convolution runs through a zero-padded real FFT, so the result equals the
direct double sum over binned masses up to roundoff.
"""

import csv
import logging
import math
from pathlib import Path
from typing import Tuple, Union

import numpy as np
from scipy import fft

from reachset.errors import (
    AlphaError,
    BandwidthError,
    DegenerateBandwidthError,
    GridError,
)
from reachset.models import ConfidenceRegion, Grid2D, SampleSet, WeightedGrid

logger = logging.getLogger(__name__)

DEFAULT_PAD = 0.05
MIN_ABS_PAD = 1e-6
WEIGHT_TOL = 1e-12


def build_grid(samples: SampleSet, N: int, pad: float = DEFAULT_PAD) -> Grid2D:
    """Axis-aligned N x N grid over the samples, widened by pad * range per axis"""
    if N < 2:
        raise GridError(f"grid needs N >= 2 nodes per axis, got {N}")
    if samples.count < 1:
        raise GridError("cannot build a grid without samples")
    if pad < 0:
        raise GridError(f"pad must be >= 0, got {pad}")

    lo = samples.points.min(axis=0)
    hi = samples.points.max(axis=0)
    span = hi - lo
    margin = np.where(span > 0, pad * span, MIN_ABS_PAD)
    lo, hi = lo - margin, hi + margin
    return Grid2D.from_bounds(lo[0], hi[0], lo[1], hi[1], N)


def bandwidth(samples: SampleSet) -> Tuple[float, float]:
    """Silverman's per-axis rule h = 1.06 * std * count^(-1/5)"""
    if samples.count < 2:
        raise DegenerateBandwidthError(
            f"bandwidth needs at least 2 samples, got {samples.count}"
        )
    std = samples.points.std(axis=0, ddof=1)
    if np.any(std <= 0):
        axis = "x" if std[0] <= 0 else "y"
        raise DegenerateBandwidthError(f"zero variance along {axis}")
    factor = 1.06 * samples.count ** (-0.2)
    return float(factor * std[0]), float(factor * std[1])


def _check_grid(grid: Grid2D) -> None:
    if grid.N < 2 or grid.ys.size != grid.N:
        raise GridError("grid must be N x N with N >= 2")
    for name, axis in (("x", grid.xs), ("y", grid.ys)):
        steps = np.diff(axis)
        if np.any(steps <= 0):
            raise GridError(f"{name} coordinates must be strictly increasing")
        if np.max(np.abs(steps - steps[0])) > 1e-9 * abs(steps[0]) + 1e-12 * np.max(
            np.abs(axis)
        ):
            raise GridError(f"{name} coordinates are not equally spaced")


def linear_binning(samples: SampleSet, grid: Grid2D) -> np.ndarray:
    """Spread every sample over its four surrounding nodes (bilinear weights)"""
    counts = np.zeros((grid.N, grid.N))
    indices = []
    fractions = []
    for coords, axis, step in (
        (samples.x, grid.xs, grid.dx),
        (samples.y, grid.ys, grid.dy),
    ):
        t = (coords - axis[0]) / step
        if np.any(t < -1e-9) or np.any(t > grid.N - 1 + 1e-9):
            raise GridError("samples fall outside the grid")
        i0 = np.clip(np.floor(t).astype(int), 0, grid.N - 2)
        indices.append(i0)
        fractions.append(np.clip(t - i0, 0.0, 1.0))

    (ix, iy), (fx, fy) = indices, fractions
    np.add.at(counts, (ix, iy), (1 - fx) * (1 - fy))
    np.add.at(counts, (ix + 1, iy), fx * (1 - fy))
    np.add.at(counts, (ix, iy + 1), (1 - fx) * fy)
    np.add.at(counts, (ix + 1, iy + 1), fx * fy)
    return counts


def _kernel_1d(N: int, step: float, h: float, size: int) -> np.ndarray:
    """Gaussian density at offsets 0..N-1 and their negatives, wrapped into size"""
    offsets = np.arange(N) * step
    values = np.exp(-0.5 * (offsets / h) ** 2) / (math.sqrt(2 * math.pi) * h)
    kernel = np.zeros(size)
    kernel[:N] = values
    kernel[size - N + 1 :] = values[1:][::-1]
    return kernel


def fft_kde(samples: SampleSet, grid: Grid2D, hx: float, hy: float) -> WeightedGrid:
    """Gaussian KDE on the grid nodes via zero-padded FFT convolution"""
    if not (hx > 0 and hy > 0):
        raise BandwidthError(f"bandwidths must be positive, got ({hx}, {hy})")
    _check_grid(grid)

    counts = linear_binning(samples, grid)
    N = grid.N
    # 2N - 1 keeps the circular convolution free of wrap-around on the crop
    size = fft.next_fast_len(2 * N - 1, real=True)
    kx = _kernel_1d(N, grid.dx, hx, size)
    ky = _kernel_1d(N, grid.dy, hy, size)

    spectrum = fft.rfft2(counts, s=(size, size))
    spectrum *= fft.fft(kx)[:, None] * fft.rfft(ky)[None, :]
    density = fft.irfft2(spectrum, s=(size, size))[:N, :N] / samples.count
    z_kde = np.clip(density, 0.0, None)

    total = z_kde.sum()
    if total <= 0:
        raise BandwidthError("density vanished on the grid; bandwidth too small")
    w = z_kde / total
    logger.debug("FFT-KDE on %dx%d grid, h=(%.4g, %.4g)", N, N, hx, hy)
    return WeightedGrid(grid=grid, z_kde=z_kde, w=w, bandwidth=(hx, hy))


def naive_kde(samples: SampleSet, grid: Grid2D, hx: float, hy: float) -> np.ndarray:
    """Direct O(N^2 * count) Gaussian-product KDE at the grid nodes"""
    if not (hx > 0 and hy > 0):
        raise BandwidthError(f"bandwidths must be positive, got ({hx}, {hy})")
    gx = np.exp(-0.5 * ((grid.xs[:, None] - samples.x[None, :]) / hx) ** 2)
    gy = np.exp(-0.5 * ((grid.ys[:, None] - samples.y[None, :]) / hy) ** 2)
    norm = 2 * math.pi * hx * hy * samples.count
    return gx @ gy.T / norm


def estimate(
    samples: SampleSet, N: int, pad: float = DEFAULT_PAD
) -> WeightedGrid:
    """Grid, Silverman bandwidth and FFT-KDE in one call"""
    grid = build_grid(samples, N, pad)
    hx, hy = bandwidth(samples)
    return fft_kde(samples, grid, hx, hy)


def confidence_region(wg: WeightedGrid, alpha: float) -> ConfidenceRegion:
    """Heaviest cells first until the cumulative weight reaches alpha"""
    if not 0 < alpha <= 1:
        raise AlphaError(f"alpha must lie in (0, 1], got {alpha}")
    cells = wg.grid.cells()
    w = wg.w.ravel()

    if alpha >= 1:
        keep = w > 0
        return ConfidenceRegion(
            indices=cells[keep], total_weight=float(w[keep].sum()), alpha=alpha
        )

    # lexsort keys run last-to-first: weight descending, then i, then j
    order = np.lexsort((cells[:, 1], cells[:, 0], -w))
    cumulative = np.cumsum(w[order])
    count = int(np.searchsorted(cumulative, alpha - WEIGHT_TOL)) + 1
    # roundoff may leave the tolerance match just short of alpha
    while count < order.size and cumulative[count - 1] < alpha:
        count += 1
    count = min(count, order.size)
    chosen = order[:count]
    return ConfidenceRegion(
        indices=cells[chosen], total_weight=float(cumulative[count - 1]), alpha=alpha
    )


def write_weighted_grid(wg: WeightedGrid, path: Union[str, Path]) -> Path:
    """CSV dump with columns i,j,x,y,z_kde,w, one row per cell"""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["i", "j", "x", "y", "z_kde", "w"])
        for i, j in wg.grid.cells():
            writer.writerow(
                [
                    int(i),
                    int(j),
                    repr(float(wg.grid.xs[i])),
                    repr(float(wg.grid.ys[j])),
                    repr(float(wg.z_kde[i, j])),
                    repr(float(wg.w[i, j])),
                ]
            )
    return path
