"""Geometry of the probability simplex.

Points of the simplex over ``k`` symbols are plain 1-d numpy arrays of
length ``k``. This module covers validity checks, boundary intercepts of
rays, quantized directions, closed curves in the simplex and their
polygonal approximations, and one-sided Hausdorff distances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .errors import DegeneratePair, DimensionMismatch, ZeroMass

SIMPLEX_TOL = 1e-12
BOUNDARY_TOL = 1e-10


def as_point(coords: Sequence[float], tol: float = SIMPLEX_TOL) -> np.ndarray:
    """Return ``coords`` as a float array, raising if it is not in the simplex."""
    p = np.asarray(coords, dtype=float)
    if p.ndim != 1 or p.size < 1:
        raise ValueError("a simplex point is a nonempty 1-d vector")
    if not is_valid_point(p, tol):
        raise ValueError(f"not a point of the simplex: {p.tolist()}")
    return p


def is_valid_point(p: np.ndarray, tol: float = SIMPLEX_TOL) -> bool:
    p = np.asarray(p, dtype=float)
    return bool(
        np.all(np.isfinite(p)) and p.min() >= -tol and abs(p.sum() - 1.0) <= tol
    )


def on_boundary(p: np.ndarray, tol: float = BOUNDARY_TOL) -> bool:
    """True when some coordinate of ``p`` is zero up to ``tol``."""
    return bool(np.min(p) <= tol)


def vertex(k: int, i: int) -> np.ndarray:
    """The unit vector ``e_i`` with 1-based index ``i``."""
    e = np.zeros(k)
    e[i - 1] = 1.0
    return e


@dataclass(frozen=True)
class BoundaryIntercept:
    """Where the ray from ``p_old`` through ``p_new`` leaves the simplex.

    ``gamma`` is the ray parameter of ``p_star``. When the target already
    lies on the boundary, ``on_boundary`` is set, ``p_star`` is the target
    itself and ``gamma`` is 1.
    """

    gamma: float
    p_star: np.ndarray
    on_boundary: bool = False


def boundary_intercept(p_old: np.ndarray, p_new: np.ndarray) -> BoundaryIntercept:
    """Intersect the ray ``p_old + gamma (p_new - p_old)`` with the boundary.

    >>> b = boundary_intercept(np.full(3, 1 / 3), np.array([0.5, 0.25, 0.25]))
    >>> round(b.gamma, 12), b.p_star.round(12).tolist()
    (4.0, [1.0, 0.0, 0.0])
    """
    p_old = np.asarray(p_old, dtype=float)
    p_new = np.asarray(p_new, dtype=float)
    if p_old.shape != p_new.shape:
        raise DimensionMismatch(f"{p_old.shape} vs {p_new.shape}")
    if np.array_equal(p_old, p_new):
        raise DegeneratePair("p_old and p_new coincide")
    if on_boundary(p_new):
        return BoundaryIntercept(1.0, p_new.copy(), True)
    # only coordinates that shrink along the ray can hit zero
    shrinking = p_old > p_new
    gammas = p_old[shrinking] / (p_old[shrinking] - p_new[shrinking])
    gammas = gammas[gammas > 0]
    if gammas.size == 0:
        raise DegeneratePair("direction does not leave the simplex")
    gamma = float(gammas.min())
    p_star = gamma * (p_new - p_old) + p_old
    return BoundaryIntercept(gamma, p_star, False)


def round_half_up(y: np.ndarray) -> np.ndarray:
    """Nearest integer with ties going up, i.e. ``floor(y + 1/2)``.

    Unlike ``np.round`` this never rounds half to even.

    >>> round_half_up(np.array([2.5, 3.5, -0.5])).tolist()
    [3.0, 4.0, 0.0]
    """
    return np.floor(np.asarray(y, dtype=float) + 0.5)


@dataclass(frozen=True)
class QuantizedDirection:
    iota: np.ndarray
    T: int
    T_tilde: int
    p_tilde: np.ndarray
    p_hat: np.ndarray


def quantize_direction(p_star: np.ndarray, T: int) -> QuantizedDirection:
    """Round ``T * p_star`` to integer symbol counts.

    >>> q = quantize_direction(np.array([0.4, 0.35, 0.25]), 10)
    >>> q.iota.tolist(), q.T_tilde
    ([4, 4, 3], 11)
    """
    if T < 1:
        raise ValueError("T must be at least 1")
    p_star = np.asarray(p_star, dtype=float)
    iota = round_half_up(T * p_star).astype(np.int64)
    iota = np.maximum(iota, 0)
    T_tilde = int(iota.sum())
    if T_tilde == 0:
        raise ZeroMass(f"direction {p_star.tolist()} rounds to zero at T={T}")
    return QuantizedDirection(iota, int(T), T_tilde, iota / T, iota / T_tilde)


# ---------------------------------------------------------------- curves


class Curve:
    """A closed curve ``c: [0, 1] -> simplex`` with ``c(0) == c(1)``."""

    k: int

    def __call__(self, s: np.ndarray | float) -> np.ndarray:
        raise NotImplementedError

    def to_json(self) -> dict[str, Any]:
        raise NotImplementedError


@dataclass(frozen=True)
class Lemniscate(Curve):
    """Lemniscate of Bernoulli inside the 2-simplex.

    With ``t = 2 pi s`` the first two coordinates are
    ``center + scale * 2 cos t / (1 + sin^2 t)`` and
    ``center + scale * 2 sin t cos t / (1 + sin^2 t)``; the third closes
    the sum to one.
    """

    center: float = 1 / 3
    scale: float = 1 / 12
    k: int = field(default=3, init=False)

    def __call__(self, s):
        t = 2 * np.pi * np.asarray(s, dtype=float)
        d = 1 + np.sin(t) ** 2
        z1 = self.center + self.scale * 2 * np.cos(t) / d
        z2 = self.center + self.scale * 2 * np.sin(t) * np.cos(t) / d
        return np.stack([z1, z2, 1 - z1 - z2], axis=-1)

    def to_json(self):
        return {
            "parametric": {
                "name": "lemniscate3",
                "center": self.center,
                "scale": self.scale,
            }
        }


class PolygonCurve(Curve):
    """Closed polygon through ``vertices``, parametrized by arclength.

    A trailing vertex equal to the first is treated as the explicit
    closing copy and dropped.
    """

    def __init__(self, vertices: Sequence[Sequence[float]]):
        pts = np.array([as_point(v) for v in vertices], dtype=float)
        if len(pts) == 0:
            raise ValueError("polygon needs at least one vertex")
        if len(pts) > 1 and np.array_equal(pts[0], pts[-1]):
            pts = pts[:-1]
        self.vertices = pts
        self.k = pts.shape[1]
        closed = np.vstack([pts, pts[:1]])
        self.edge_lengths = np.linalg.norm(np.diff(closed, axis=0), axis=1)
        self.length = float(self.edge_lengths.sum())

    def __call__(self, s):
        s = np.asarray(s, dtype=float)
        flat = np.atleast_1d(s) % 1.0
        m = len(self.vertices)
        if self.length == 0:
            out = np.repeat(self.vertices[:1], flat.size, axis=0)
        else:
            cum = np.concatenate([[0.0], np.cumsum(self.edge_lengths)])
            arc = flat * self.length
            idx = np.clip(np.searchsorted(cum, arc, side="right") - 1, 0, m - 1)
            lengths = self.edge_lengths[idx]
            frac = np.divide(
                arc - cum[idx], lengths, out=np.zeros_like(arc), where=lengths > 0
            )
            start = self.vertices[idx]
            end = self.vertices[(idx + 1) % m]
            out = start + frac[:, None] * (end - start)
        return out.reshape(s.shape + (self.k,))

    def to_json(self):
        return {"polygon": self.vertices.tolist()}

    def __repr__(self):
        return f"PolygonCurve({self.vertices.tolist()})"


def curve_from_json(obj: dict[str, Any]) -> Curve:
    """Build a curve from ``{"polygon": [...]}`` or ``{"parametric": {...}}``."""
    if "polygon" in obj:
        return PolygonCurve(obj["polygon"])
    if "parametric" in obj:
        params = dict(obj["parametric"])
        name = params.pop("name", None)
        if name != "lemniscate3":
            raise ValueError(f"unknown parametric curve {name!r}")
        return Lemniscate(**params)
    raise ValueError("curve JSON needs a 'polygon' or 'parametric' key")


def _split_extra(lengths: np.ndarray, extra: int) -> np.ndarray:
    """Share ``extra`` points among edges proportionally (largest remainder)."""
    total = lengths.sum()
    if extra == 0 or total == 0:
        out = np.zeros(len(lengths), dtype=int)
        out[0] += extra
        return out
    quota = extra * lengths / total
    out = np.floor(quota).astype(int)
    rest = extra - out.sum()
    order = np.argsort(-(quota - out), kind="stable")
    out[order[:rest]] += 1
    return out


def polygonal_approximation(curve: Curve, V: int) -> np.ndarray:
    """Return the ``V + 1`` points ``c(v / V)``, ``v = 0..V``, as rows.

    For a polygon with ``m <= V`` vertices the vertices are kept and the
    remaining ``V - m`` points are spread over the edges in proportion to
    their length, evenly spaced inside each edge. With fewer slots than
    vertices the polygon is sampled uniformly by arclength.
    """
    if V < 2:
        raise ValueError("V must be at least 2")
    if not isinstance(curve, PolygonCurve):
        return curve(np.arange(V + 1) / V)
    m = len(curve.vertices)
    if m > V or curve.length == 0:
        pts = curve(np.arange(V + 1) / V)
        pts[-1] = pts[0]
        return pts
    per_edge = _split_extra(curve.edge_lengths, V - m)
    rows = []
    for i, extra in enumerate(per_edge):
        a, b = curve.vertices[i], curve.vertices[(i + 1) % m]
        fracs = np.arange(extra + 1) / (extra + 1)
        rows.append(a + fracs[:, None] * (b - a))
    rows.append(curve.vertices[:1])
    return np.vstack(rows)


def curve_length(points: np.ndarray) -> float:
    """Sum of Euclidean segment lengths along a polyline."""
    pts = np.asarray(points, dtype=float)
    if len(pts) < 2:
        raise ValueError("a polyline needs at least two points")
    return float(np.linalg.norm(np.diff(pts, axis=0), axis=1).sum())


def dense_sample(curve: Curve, n: int = 100_000) -> np.ndarray:
    return curve(np.arange(n + 1) / n)


# ------------------------------------------------------------- distances


def point_segment_distances(
    points: np.ndarray, a: np.ndarray, b: np.ndarray
) -> np.ndarray:
    """Distances from each row of ``points`` to each segment ``[a_j, b_j]``.

    Returns an array of shape ``(len(points), len(a))``.
    """
    points = np.atleast_2d(points)
    d = b - a
    dd = np.einsum("ij,ij->i", d, d)
    rel = points[:, None, :] - a[None, :, :]
    t = np.einsum("pij,ij->pi", rel, d)
    t = np.divide(t, dd, out=np.zeros_like(t), where=dd > 0)
    t = np.clip(t, 0.0, 1.0)
    closest = a[None, :, :] + t[:, :, None] * d[None, :, :]
    return np.linalg.norm(points[:, None, :] - closest, axis=2)


def hausdorff_distance(
    A: np.ndarray, B: np.ndarray, *, polyline: bool = False, chunk: int = 2048
) -> float:
    """One-sided distance ``max_{a in A} min_{b in B} |a - b|``.

    With ``polyline=True`` the rows of ``B`` are joined into a polyline and
    distances are taken to its segments instead of its vertices.

    >>> round(hausdorff_distance([[1.0, 0.0]], [[0.0, 1.0]]), 12)
    1.414213562373
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if A.size == 0 or B.size == 0:
        raise ValueError("point sets must be nonempty")
    if A.shape[1] != B.shape[1]:
        raise DimensionMismatch(f"{A.shape[1]} vs {B.shape[1]}")
    use_segments = polyline and len(B) > 1
    worst = 0.0
    for lo in range(0, len(A), chunk):
        block = A[lo : lo + chunk]
        if use_segments:
            dist = point_segment_distances(block, B[:-1], B[1:])
        else:
            dist = np.linalg.norm(block[:, None, :] - B[None, :, :], axis=2)
        worst = max(worst, float(dist.min(axis=1).max()))
    return worst


def nearest_distances(points: np.ndarray, cloud: np.ndarray) -> np.ndarray:
    """Distance from each point to its nearest neighbour in ``cloud``."""
    from scipy.spatial import cKDTree

    dist, _ = cKDTree(cloud).query(np.atleast_2d(points))
    return dist


# ----------------------------------------------------- 2-simplex drawing


_SQRT3_2 = math.sqrt(3) / 2


def ternary_xy(p: np.ndarray) -> np.ndarray:
    """Planar coordinates of points of the 2-simplex.

    ``e1 -> (0, 0)``, ``e2 -> (1, 0)``, ``e3 -> (1/2, sqrt(3)/2)``.
    """
    p = np.asarray(p, dtype=float)
    x = p[..., 1] + 0.5 * p[..., 2]
    y = _SQRT3_2 * p[..., 2]
    return np.stack([x, y], axis=-1)


SIMPLEX_AREA_2D = _SQRT3_2 / 2


def _discard_interior(pts: np.ndarray) -> np.ndarray:
    # drop points strictly inside the octagon of extreme points in eight
    # directions; they cannot be hull vertices
    dirs = np.array([[1, 0], [1, 1], [0, 1], [-1, 1], [-1, 0], [-1, -1], [0, -1], [1, -1]])
    ext = pts[np.argmax(pts @ dirs.T, axis=0)]
    ext = np.array([p for i, p in enumerate(ext) if i == 0 or not np.array_equal(p, ext[i - 1])])
    if len(ext) > 1 and np.array_equal(ext[0], ext[-1]):
        ext = ext[:-1]
    if len(ext) < 3:
        return pts
    inside = np.ones(len(pts), dtype=bool)
    for a, b in zip(ext, np.roll(ext, -1, axis=0)):
        cross = (b[0] - a[0]) * (pts[:, 1] - a[1]) - (b[1] - a[1]) * (pts[:, 0] - a[0])
        inside &= cross > 0
    return pts[~inside]


def convex_hull_2d(points: np.ndarray) -> np.ndarray:
    """Andrew's monotone chain; returns hull vertices counter-clockwise."""
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(pts) > 64:
        pts = _discard_interior(pts)
    pts = np.unique(pts, axis=0)
    if len(pts) <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in pts[::-1]:
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return np.array(lower[:-1] + upper[:-1])


def polygon_area(poly: np.ndarray) -> float:
    """Shoelace area of a simple polygon given by its vertices in order."""
    poly = np.asarray(poly, dtype=float)
    if len(poly) < 3:
        return 0.0
    x, y = poly[:, 0], poly[:, 1]
    return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))
