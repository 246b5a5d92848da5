"""Anchored-line polygons: validity constraints, vertices, containment, area,
clipping and the enclosure / non-degeneration checks on vertex chains.

A line k is a_k*(x - x0) + b_k*(y - y0) - 1 = 0 for an anchor (x0, y0); its
inner side is where the affine form is <= 0, so the anchor is always strictly
inside. Lines are taken in cyclic order and j = i+1 (mod n) denotes the
successor of i. Indices in reports are zero-based.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, Hashable, List, Optional, Sequence, Tuple

import numpy as np

from reachset.errors import (
    DegeneratePolygonError,
    InvalidPolygonError,
    ParallelLinesError,
)
from reachset.models import AnchoredLine, LinePolygon, Point, VertexChain

DEFAULT_EPS = 1e-6
COLLINEAR_TOL = 1e-9


# ============================================================================
# Line pairs
# ============================================================================


def pair_det(li: AnchoredLine, lj: AnchoredLine) -> float:
    """D_ij = a_i * b_j - b_i * a_j"""
    return li.a * lj.b - li.b * lj.a


def intersect(li: AnchoredLine, lj: AnchoredLine, anchor: Point) -> Point:
    """Unique intersection point V_ij of two anchored lines"""
    det = pair_det(li, lj)
    if det == 0:
        raise ParallelLinesError(f"lines ({li.a}, {li.b}) and ({lj.a}, {lj.b}) are parallel")
    return (
        anchor[0] - (li.b - lj.b) / det,
        anchor[1] + (li.a - lj.a) / det,
    )


# ============================================================================
# n-gon validity
# ============================================================================


@dataclass
class ValidityReport:
    """Outcome of validate_ngon

    det_violations holds pairs (i, j) with D_ij below the threshold;
    vertex_violations holds triples (i, j, k) whose vertex V_ij is not strictly
    inside line k. threshold is eps scaled by the squared coefficient size.
    """

    ok: bool
    n: int
    eps: float
    threshold: float = math.nan
    det_violations: List[Tuple[int, int]] = field(default_factory=list)
    vertex_violations: List[Tuple[int, int, int]] = field(default_factory=list)
    min_det: float = math.nan
    max_vertex_form: float = math.nan
    reason: str = ""

    @property
    def violations(self) -> List[Tuple]:
        return [(i, j, None) for i, j in self.det_violations] + list(
            self.vertex_violations
        )

    def __bool__(self) -> bool:
        return self.ok


def constraint_values(a: np.ndarray, b: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Left-hand sides of the pairwise-determinant and vertex-inside systems

    Returns (det, form) with det[i] = D_{i,i+1} and
    form[i, k] = -a_k (b_i - b_j) + b_k (a_i - a_j) - D_ij for j = i+1;
    entries with k in {i, j} are NaN.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    n = a.size
    a_next = np.roll(a, -1)
    b_next = np.roll(b, -1)
    det = a * b_next - b * a_next
    form = (
        -np.outer(b - b_next, a) + np.outer(a - a_next, b) - det[:, None]
    )
    rows = np.arange(n)
    form[rows, rows] = np.nan
    form[rows, (rows + 1) % n] = np.nan
    return det, form


def strictness(a: np.ndarray, b: np.ndarray, eps: float = DEFAULT_EPS) -> float:
    """Margin for the determinant and vertex systems of the lines (a, b)

    Both systems are quadratic in the coefficients, which carry units of
    1/length, so eps is scaled by the squared largest coefficient. Rescaling
    all coordinates by k leaves validity unchanged.
    """
    scale = max(float(np.max(np.abs(a))), float(np.max(np.abs(b))))
    return eps * scale ** 2


def is_valid(a: np.ndarray, b: np.ndarray, eps: float = DEFAULT_EPS) -> bool:
    """Boolean form of validate_ngon on raw coefficient arrays"""
    if np.size(a) < 3:
        return False
    margin = strictness(a, b, eps)
    det, form = constraint_values(a, b)
    if np.any(det < margin):
        return False
    return bool(np.nanmax(form) <= -margin)


def validate_ngon(lines: Sequence[AnchoredLine], eps: float = DEFAULT_EPS) -> ValidityReport:
    """Check the constraint system that makes the lines an n-sided convex polygon"""
    n = len(lines)
    if n < 3:
        return ValidityReport(ok=False, n=n, eps=eps, reason="need at least 3 lines")
    a = np.array([line.a for line in lines], dtype=float)
    b = np.array([line.b for line in lines], dtype=float)
    if np.any(a ** 2 + b ** 2 <= 0):
        return ValidityReport(ok=False, n=n, eps=eps, reason="line with a = b = 0")

    margin = strictness(a, b, eps)
    det, form = constraint_values(a, b)
    det_bad = [(int(i), int((i + 1) % n)) for i in np.flatnonzero(det < margin)]
    vertex_bad = [
        (int(i), int((i + 1) % n), int(k))
        for i, k in zip(*np.nonzero(np.nan_to_num(form, nan=-np.inf) > -margin))
    ]
    ok = not det_bad and not vertex_bad
    return ValidityReport(
        ok=ok,
        n=n,
        eps=eps,
        threshold=margin,
        det_violations=det_bad,
        vertex_violations=vertex_bad,
        min_det=float(det.min()),
        max_vertex_form=float(np.nanmax(form)),
        reason="" if ok else "constraint violations",
    )


def canonicalize(lines: Sequence[AnchoredLine]) -> List[AnchoredLine]:
    """Lines sorted anticlockwise by the polar angle of their normal (a, b)"""
    return sorted(lines, key=lambda line: math.atan2(line.b, line.a))


def require_valid(poly: LinePolygon) -> None:
    report = validate_ngon(poly.lines, poly.eps)
    if not report.ok:
        raise InvalidPolygonError(
            f"lines do not form a valid {report.n}-gon: {report.reason}",
            report.violations,
        )


# ============================================================================
# Polygon measures
# ============================================================================


def vertex_array(anchor: Point, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Vertices V_{i,i+1} for every i, shape (n, 2); no validity check"""
    a_next = np.roll(a, -1)
    b_next = np.roll(b, -1)
    det = a * b_next - b * a_next
    return np.column_stack(
        [anchor[0] - (b - b_next) / det, anchor[1] + (a - a_next) / det]
    )


def vertices(poly: LinePolygon) -> VertexChain:
    """Vertex chain (V_12, V_23, ..., V_n1) of a valid polygon"""
    require_valid(poly)
    return VertexChain(vertex_array(poly.anchor, poly.a, poly.b))


def affine_forms(poly: LinePolygon, points: np.ndarray) -> np.ndarray:
    """a_k (x - x0) + b_k (y - y0) - 1 for every point and line, shape (m, n)"""
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    offsets = points - np.asarray(poly.anchor, dtype=float)
    return offsets @ np.vstack([poly.a, poly.b]) - 1.0


def contains(poly: LinePolygon, p: Point, tol: float = 0.0) -> bool:
    return bool(np.all(affine_forms(poly, np.asarray(p))[0] <= tol))


def contains_points(poly: LinePolygon, points: np.ndarray, tol: float = 0.0) -> np.ndarray:
    """Vectorised contains over an (m, 2) array"""
    return np.all(affine_forms(poly, points) <= tol, axis=1)


def signed_area(points: np.ndarray) -> float:
    x, y = points[:, 0], points[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def area(chain: VertexChain) -> float:
    """Shoelace area; positive for anticlockwise chains"""
    if len(chain) < 3:
        raise DegeneratePolygonError(f"area needs >= 3 vertices, got {len(chain)}")
    return signed_area(chain.vertices)


def is_convex(chain: VertexChain) -> bool:
    """True iff every turn of the closed chain is strictly anticlockwise"""
    pts = chain.vertices
    if len(pts) < 3:
        return False
    edges = np.roll(pts, -1, axis=0) - pts
    nxt = np.roll(edges, -1, axis=0)
    cross = edges[:, 0] * nxt[:, 1] - edges[:, 1] * nxt[:, 0]
    return bool(np.all(cross > 0))


# ============================================================================
# Clipping and Jaccard distance
# ============================================================================


def _cross(o: Point, p: Point, q: Point) -> float:
    return (p[0] - o[0]) * (q[1] - o[1]) - (p[1] - o[1]) * (q[0] - o[0])


def _cut(cp1: Point, cp2: Point, s: Point, e: Point) -> Point:
    dx, dy = cp2[0] - cp1[0], cp2[1] - cp1[1]
    num = dx * (s[1] - cp1[1]) - dy * (s[0] - cp1[0])
    den = dx * (e[1] - s[1]) - dy * (e[0] - s[0])
    t = -num / den
    return (s[0] + t * (e[0] - s[0]), s[1] + t * (e[1] - s[1]))


def _dedupe(points: List[Point], tol: float) -> List[Point]:
    out: List[Point] = []
    for p in points:
        if not out or math.dist(p, out[-1]) > tol:
            out.append(p)
    while len(out) > 1 and math.dist(out[0], out[-1]) <= tol:
        out.pop()
    return out


def clip(p1: VertexChain, p2: VertexChain) -> VertexChain:
    """Intersection of two convex anticlockwise polygons (Sutherland-Hodgman)"""
    empty = VertexChain(np.empty((0, 2)))
    if p1.is_empty or p2.is_empty:
        return empty

    output = [tuple(map(float, v)) for v in p1.vertices]
    clip_pts = [tuple(map(float, v)) for v in p2.vertices]
    scale = max(np.ptp(p1.vertices, axis=0).max(), np.ptp(p2.vertices, axis=0).max())

    cp1 = clip_pts[-1]
    for cp2 in clip_pts:
        if not output:
            return empty
        candidates, output = output, []
        s = candidates[-1]
        for e in candidates:
            if _cross(cp1, cp2, e) >= 0:
                if _cross(cp1, cp2, s) < 0:
                    output.append(_cut(cp1, cp2, s, e))
                output.append(e)
            elif _cross(cp1, cp2, s) >= 0:
                output.append(_cut(cp1, cp2, s, e))
            s = e
        cp1 = cp2

    output = _dedupe(output, 1e-12 * scale)
    if len(output) < 3:
        return empty
    result = np.array(output)
    if abs(signed_area(result)) <= 1e-12 * scale * scale:
        return empty
    return VertexChain(result)


def jaccard(p1: VertexChain, p2: VertexChain) -> float:
    """1 - |A n B| / |A u B| for convex polygons"""
    area1 = abs(area(p1))
    area2 = abs(area(p2))
    if area1 <= 0 or area2 <= 0:
        raise DegeneratePolygonError("jaccard distance needs polygons with positive area")
    overlap = clip(p1, p2)
    inter = 0.0 if overlap.is_empty else abs(area(overlap))
    union = area1 + area2 - inter
    return float(min(max(1.0 - inter / union, 0.0), 1.0))


# ============================================================================
# Enclosure and non-degeneration of vertex chains
# ============================================================================


def check_formally_enclosed(symbols: Sequence[Hashable]) -> bool:
    """At least three different symbols, none repeated except first == last"""
    if len(symbols) < 2 or symbols[0] != symbols[-1]:
        return False
    body = list(symbols[:-1])
    return len(set(body)) == len(body) and len(body) >= 3


def _diameter(points: np.ndarray) -> float:
    if len(points) < 2:
        return 0.0
    return float(np.max(np.linalg.norm(points[:, None, :] - points[None, :, :], axis=-1)))


def _symbolize(points: np.ndarray, tol: float) -> List[int]:
    """Label points so that coincident points share a label"""
    reps: List[np.ndarray] = []
    labels = []
    for p in points:
        for idx, r in enumerate(reps):
            if np.linalg.norm(p - r) <= tol:
                labels.append(idx)
                break
        else:
            reps.append(p)
            labels.append(len(reps) - 1)
    return labels


def _on_segment(p: np.ndarray, q: np.ndarray, r: np.ndarray, diam: float) -> bool:
    """r lies on the closed segment pq, with collinearity measured in diam units"""
    d = q - p
    v = r - p
    if abs(d[0] * v[1] - d[1] * v[0]) / (diam * diam) > COLLINEAR_TOL:
        return False
    t = float(np.dot(v, d))
    return -COLLINEAR_TOL * diam * diam <= t <= float(np.dot(d, d)) + COLLINEAR_TOL * diam * diam


def check_enclosed(chain: Sequence[Point]) -> bool:
    """Digraph enclosure of a point sequence

    Holds iff the sequence is closed, has at least three distinct points, repeats
    no point except first == last, and no point lies on an edge it does not end.
    """
    pts = np.asarray(chain, dtype=float).reshape(-1, 2)
    if len(pts) < 2:
        return False
    diam = _diameter(pts)
    if diam <= 0:
        return False
    labels = _symbolize(pts, COLLINEAR_TOL * diam)
    if not check_formally_enclosed(labels):
        return False

    distinct = pts[:-1]
    for t in range(len(distinct)):
        p, q = pts[t], pts[t + 1]
        for s, r in enumerate(distinct):
            if s in (t, (t + 1) % len(distinct)):
                continue
            if _on_segment(p, q, r, diam):
                return False
    return True


def check_nondegenerate(chain: Sequence[Point], n: int) -> bool:
    """Exactly n distinct points and no three consecutive ones collinear"""
    pts = np.asarray(chain, dtype=float).reshape(-1, 2)
    if len(pts) < 2:
        return False
    diam = _diameter(pts)
    if diam <= 0 or np.linalg.norm(pts[0] - pts[-1]) > COLLINEAR_TOL * diam:
        return False
    body = pts[:-1]
    if len(set(_symbolize(body, COLLINEAR_TOL * diam))) != n or len(body) != n:
        return False
    for t in range(n):
        prev, cur, nxt = body[t - 1], body[t], body[(t + 1) % n]
        if abs(_cross(tuple(prev), tuple(cur), tuple(nxt))) / (diam * diam) <= COLLINEAR_TOL:
            return False
    return True


# ============================================================================
# Serialization
# ============================================================================


def polygon_to_dict(poly: LinePolygon, chain: Optional[VertexChain] = None) -> Dict:
    if chain is None:
        chain = vertices(poly)
    return {
        "anchor": [float(poly.anchor[0]), float(poly.anchor[1])],
        "lines": [[float(line.a), float(line.b)] for line in poly.lines],
        "vertices": chain.vertices.tolist(),
        "area": area(chain),
    }


def polygon_from_dict(data: Dict, eps: float = DEFAULT_EPS) -> LinePolygon:
    anchor = tuple(float(v) for v in data["anchor"])
    lines = [AnchoredLine(float(a), float(b)) for a, b in data["lines"]]
    return LinePolygon(anchor=anchor, lines=lines, eps=eps)
