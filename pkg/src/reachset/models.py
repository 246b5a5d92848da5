"""Data models shared across the reachset modules."""

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

Point = Tuple[float, float]


# ============================================================================
# Uncertainty parameters and samples
# ============================================================================


@dataclass(frozen=True)
class TruncGauss:
    """Gaussian N(mu, sigma^2) truncated to [lo, hi]"""

    mu: float
    sigma: float
    lo: float
    hi: float

    @classmethod
    def from_dict(cls, data: Dict) -> "TruncGauss":
        return cls(
            mu=float(data["mu"]),
            sigma=float(data["sigma"]),
            lo=float(data["lo"]),
            hi=float(data["hi"]),
        )

    def to_dict(self) -> Dict:
        return {"mu": self.mu, "sigma": self.sigma, "lo": self.lo, "hi": self.hi}


@dataclass(frozen=True)
class CaseIParams:
    """Kinematic one-step model: speed in km/h, heading in degrees, dt in seconds"""

    speed: TruncGauss
    heading: TruncGauss
    dt: float = 1.0
    prev_pos: Point = (0.0, 0.0)

    @classmethod
    def default(cls) -> "CaseIParams":
        return cls(
            speed=TruncGauss(mu=190.0, sigma=5.0, lo=165.0, hi=220.0),
            heading=TruncGauss(mu=10.0, sigma=30.0, lo=-50.0, hi=70.0),
            dt=1.0,
            prev_pos=(0.0, 0.0),
        )

    @classmethod
    def from_dict(cls, data: Dict) -> "CaseIParams":
        base = cls.default()
        return cls(
            speed=TruncGauss.from_dict(data["speed"]) if "speed" in data else base.speed,
            heading=(
                TruncGauss.from_dict(data["heading"])
                if "heading" in data
                else base.heading
            ),
            dt=float(data.get("dt", base.dt)),
            prev_pos=tuple(data.get("prev_pos", base.prev_pos)),
        )

    def to_dict(self) -> Dict:
        return {
            "speed": self.speed.to_dict(),
            "heading": self.heading.to_dict(),
            "dt": self.dt,
            "prev_pos": list(self.prev_pos),
        }


@dataclass(frozen=True)
class Mixture1D:
    """Two-component 1D Gaussian mixture"""

    weights: Tuple[float, float]
    means: Tuple[float, float]
    sigmas: Tuple[float, float]

    @classmethod
    def from_dict(cls, data: Dict) -> "Mixture1D":
        return cls(
            weights=tuple(float(v) for v in data["weights"]),
            means=tuple(float(v) for v in data["means"]),
            sigmas=tuple(float(v) for v in data["sigmas"]),
        )

    def to_dict(self) -> Dict:
        return {
            "weights": list(self.weights),
            "means": list(self.means),
            "sigmas": list(self.sigmas),
        }


@dataclass(frozen=True)
class BimodalParams:
    """Independent bimodal x- and y-marginals"""

    x: Mixture1D
    y: Mixture1D

    @classmethod
    def default(cls) -> "BimodalParams":
        # Modes six sigmas apart on both axes; unequal weights make the joint
        # mass concentrate on three of the four product clusters.
        return cls(
            x=Mixture1D(weights=(0.8, 0.2), means=(0.0, 30.0), sigmas=(5.0, 5.0)),
            y=Mixture1D(weights=(0.8, 0.2), means=(0.0, 24.0), sigmas=(4.0, 4.0)),
        )

    @classmethod
    def from_dict(cls, data: Dict) -> "BimodalParams":
        base = cls.default()
        return cls(
            x=Mixture1D.from_dict(data["x"]) if "x" in data else base.x,
            y=Mixture1D.from_dict(data["y"]) if "y" in data else base.y,
        )

    def to_dict(self) -> Dict:
        return {"x": self.x.to_dict(), "y": self.y.to_dict()}


@dataclass(eq=False)
class SampleSet:
    """2D state samples in meters, shape (count, 2)"""

    points: np.ndarray

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float).reshape(-1, 2)

    @property
    def count(self) -> int:
        return int(self.points.shape[0])

    @property
    def x(self) -> np.ndarray:
        return self.points[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.points[:, 1]

    def __len__(self) -> int:
        return self.count


# ============================================================================
# Density grid
# ============================================================================


@dataclass(eq=False)
class Grid2D:
    """N x N grid of node coordinates; cell (i, j) sits at (xs[i], ys[j])"""

    xs: np.ndarray
    ys: np.ndarray

    def __post_init__(self):
        self.xs = np.asarray(self.xs, dtype=float)
        self.ys = np.asarray(self.ys, dtype=float)

    @classmethod
    def from_bounds(
        cls, x_min: float, x_max: float, y_min: float, y_max: float, N: int
    ) -> "Grid2D":
        return cls(xs=np.linspace(x_min, x_max, N), ys=np.linspace(y_min, y_max, N))

    @property
    def N(self) -> int:
        return int(self.xs.size)

    @property
    def dx(self) -> float:
        return float(self.xs[1] - self.xs[0])

    @property
    def dy(self) -> float:
        return float(self.ys[1] - self.ys[0])

    @property
    def diagonal(self) -> float:
        return float(np.hypot(self.xs[-1] - self.xs[0], self.ys[-1] - self.ys[0]))

    def point(self, i: int, j: int) -> Point:
        return (float(self.xs[i]), float(self.ys[j]))

    def cells(self) -> np.ndarray:
        """All (i, j) index pairs in lexicographic order, shape (N*N, 2)"""
        ii, jj = np.meshgrid(np.arange(self.N), np.arange(self.N), indexing="ij")
        return np.column_stack([ii.ravel(), jj.ravel()])

    def coords(self, cells: np.ndarray) -> np.ndarray:
        cells = np.asarray(cells, dtype=int).reshape(-1, 2)
        return np.column_stack([self.xs[cells[:, 0]], self.ys[cells[:, 1]]])


@dataclass(eq=False)
class WeightedGrid:
    """KDE density on a grid plus its normalized weights"""

    grid: Grid2D
    z_kde: np.ndarray
    w: np.ndarray
    bandwidth: Tuple[float, float] = (0.0, 0.0)


@dataclass(eq=False)
class ConfidenceRegion:
    """Smallest heaviest-first set of cells reaching weight alpha"""

    indices: np.ndarray
    total_weight: float
    alpha: float

    @property
    def size(self) -> int:
        return int(self.indices.shape[0])

    def as_set(self) -> set:
        return {(int(i), int(j)) for i, j in self.indices}


# ============================================================================
# Lines and polygons
# ============================================================================


@dataclass(frozen=True)
class AnchoredLine:
    """Line a*(x - x0) + b*(y - y0) - 1 = 0 relative to an anchor (x0, y0)"""

    a: float
    b: float


@dataclass(eq=False)
class LinePolygon:
    """Candidate convex region: intersection of the inner sides of its lines"""

    anchor: Point
    lines: List[AnchoredLine]
    eps: float = 1e-6

    @property
    def n(self) -> int:
        return len(self.lines)

    @property
    def a(self) -> np.ndarray:
        return np.array([line.a for line in self.lines], dtype=float)

    @property
    def b(self) -> np.ndarray:
        return np.array([line.b for line in self.lines], dtype=float)

    @classmethod
    def from_coefficients(
        cls, anchor: Point, a: np.ndarray, b: np.ndarray, eps: float = 1e-6
    ) -> "LinePolygon":
        lines = [AnchoredLine(float(ak), float(bk)) for ak, bk in zip(a, b)]
        return cls(anchor=(float(anchor[0]), float(anchor[1])), lines=lines, eps=eps)


@dataclass(eq=False)
class VertexChain:
    """Ordered polygon vertices (V_12, V_23, ..., V_n1), shape (n, 2)"""

    vertices: np.ndarray

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float).reshape(-1, 2)

    def __len__(self) -> int:
        return int(self.vertices.shape[0])

    @property
    def is_empty(self) -> bool:
        return len(self) == 0

    def closed(self) -> List[Point]:
        pts = [tuple(map(float, v)) for v in self.vertices]
        return pts + pts[:1]


# ============================================================================
# Optimization model and solutions
# ============================================================================


@dataclass(eq=False)
class PolyModel:
    """Polygon-fitting model over a set of weighted grid cells

    The full model uses every cell of the grid; the heuristic builds reduced
    models over sampled cells. Per-cell arrays (points, weights, big-M bounds)
    are aligned with `cells`.
    """

    wg: WeightedGrid
    cells: np.ndarray
    weights: np.ndarray
    n: int
    alpha: float
    anchor_idx: Tuple[int, int]
    anchor_pt: Point
    big_m1: np.ndarray
    big_m2: np.ndarray
    eps: float
    coeff_bound: float

    @property
    def points(self) -> np.ndarray:
        return self.wg.grid.coords(self.cells)

    @property
    def size(self) -> int:
        return int(self.cells.shape[0])

    @property
    def is_full(self) -> bool:
        return self.size == self.wg.grid.N ** 2

    @property
    def row_margin(self) -> float:
        """Strictness of the determinant and vertex rows, eps scaled to the coefficient box"""
        return self.eps * self.coeff_bound ** 2

    @property
    def anchor_position(self) -> int:
        """Index of the anchor cell in `cells`"""
        hit = np.flatnonzero((self.cells == np.asarray(self.anchor_idx)).all(axis=1))
        return int(hit[0])


@dataclass(eq=False)
class Assignment:
    """Binary indicators per model cell: l[c, k] and z[c] = AND_k l[c, k]"""

    l: np.ndarray
    z: np.ndarray


@dataclass(eq=False)
class PolySolution:
    """Result of one polygon solver"""

    status: str
    n: int
    alpha: float
    polygon: Optional[LinePolygon] = None
    assignment: Optional[Assignment] = None
    vertices: Optional[VertexChain] = None
    objective: int = 0
    coverage: float = 0.0
    coverage_full: float = 0.0
    area: float = 0.0
    solve_time: float = 0.0
    seed: Optional[int] = None
    message: str = ""
    extra: Dict = field(default_factory=dict)

    @property
    def feasible(self) -> bool:
        return self.status != "infeasible"

    def to_dict(self) -> Dict:
        """JSON-ready view following the PolySolution schema"""
        data = {
            "status": self.status,
            "n": int(self.n),
            "alpha": float(self.alpha),
            "lines": [],
            "anchor": None,
            "vertices": [],
            "objective": int(self.objective),
            "coverage_reduced": float(self.coverage),
            "coverage_full": float(self.coverage_full),
            "area_m2": float(self.area),
            "solve_time_s": float(self.solve_time),
            "seed": None if self.seed is None else int(self.seed),
            "message": self.message,
        }
        if self.polygon is not None:
            data["lines"] = [[line.a, line.b] for line in self.polygon.lines]
            data["anchor"] = list(self.polygon.anchor)
        if self.vertices is not None:
            data["vertices"] = self.vertices.vertices.tolist()
        data.update(self.extra)
        return data
