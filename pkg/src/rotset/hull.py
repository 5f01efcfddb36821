"""Planar convex hulls, support functions and half-plane polygons."""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np

DEDUP_TOL = 1e-12
_EPS = np.finfo(float).eps


def orient(a, b, c) -> int:
    """Sign of the cross product (b - a) x (c - a), exact for double inputs.

    The float determinant is trusted when it clears a forward error bound;
    otherwise the sign is recomputed in rational arithmetic.
    """
    t1 = (b[0] - a[0]) * (c[1] - a[1])
    t2 = (b[1] - a[1]) * (c[0] - a[0])
    det = t1 - t2
    bound = 8 * _EPS * (abs(t1) + abs(t2))
    if det > bound:
        return 1
    if det < -bound:
        return -1
    ax, ay, bx, by, cx, cy = (Fraction(float(v)) for v in (a[0], a[1], b[0], b[1], c[0], c[1]))
    exact = (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)
    return (exact > 0) - (exact < 0)


def _dedup(points):
    out = []
    for p in points:
        if out and abs(p[0] - out[-1][0]) <= DEDUP_TOL and abs(p[1] - out[-1][1]) <= DEDUP_TOL:
            continue
        out.append(p)
    return out


def convex_hull(points) -> list[tuple[float, float]]:
    """Monotone-chain hull, counterclockwise, strictly convex.

    Degenerate inputs give one vertex (all points equal) or two (collinear).
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    pts = pts[np.all(np.isfinite(pts), axis=1)]
    if len(pts) == 0:
        return []
    order = np.lexsort((pts[:, 1], pts[:, 0]))
    pts = _dedup([(float(x), float(y)) for x, y in pts[order]])
    if len(pts) <= 2:
        return pts

    def half(seq):
        chain = []
        for p in seq:
            while len(chain) >= 2 and orient(chain[-2], chain[-1], p) <= 0:
                chain.pop()
            chain.append(p)
        return chain

    lower = half(pts)
    upper = half(reversed(pts))
    hull = lower[:-1] + upper[:-1]
    if len(hull) == 2 and hull[0] == hull[1]:
        return hull[:1]
    return hull


def directions(k: int) -> np.ndarray:
    theta = 2.0 * np.pi * np.arange(k) / k
    return theta


def unit(theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    return np.stack([np.cos(theta), np.sin(theta)], axis=-1)


def support(vertices, theta) -> np.ndarray:
    """h(theta) = max over vertices of <v, u(theta)>."""
    v = np.asarray(vertices, dtype=float).reshape(-1, 2)
    return np.max(unit(theta) @ v.T, axis=-1)


def polygon_area(vertices) -> float:
    v = np.asarray(vertices, dtype=float).reshape(-1, 2)
    if len(v) < 3:
        return 0.0
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def _segment_distance(p, a, b) -> float:
    p, a, b = (np.asarray(t, dtype=float) for t in (p, a, b))
    ab = b - a
    denom = float(ab @ ab)
    t = 0.0 if denom == 0 else min(1.0, max(0.0, float((p - a) @ ab) / denom))
    return float(np.linalg.norm(p - (a + t * ab)))


def distance_to_hull(vertices, p) -> float:
    """Euclidean distance from ``p`` to a convex hull given by its ccw vertices."""
    v = [tuple(map(float, q)) for q in vertices]
    p = (float(p[0]), float(p[1]))
    if not v:
        return math.inf
    if len(v) == 1:
        return math.hypot(p[0] - v[0][0], p[1] - v[0][1])
    if len(v) == 2:
        return _segment_distance(p, v[0], v[1])
    inside = all(orient(v[i], v[(i + 1) % len(v)], p) >= 0 for i in range(len(v)))
    if inside:
        return 0.0
    return min(_segment_distance(p, v[i], v[(i + 1) % len(v)]) for i in range(len(v)))


def hausdorff(a_vertices, b_vertices) -> float:
    """Hausdorff distance between two convex hulls (attained at vertices)."""
    d1 = max((distance_to_hull(b_vertices, p) for p in a_vertices), default=math.inf)
    d2 = max((distance_to_hull(a_vertices, p) for p in b_vertices), default=math.inf)
    return max(d1, d2)


def clip_halfplanes(thetas, values, box: float = 1e3) -> list[tuple[float, float]]:
    """Polygon ``{v : <v, u(theta_j)> <= values_j for all j}`` (Sutherland-Hodgman).

    Returns the hull of the clipped vertices; empty when the constraints are
    inconsistent.
    """
    poly = [(-box, -box), (box, -box), (box, box), (-box, box)]
    for (ux, uy), h in zip(unit(thetas), values):
        if not math.isfinite(h):
            if h < 0:
                return []
            continue
        out = []
        n = len(poly)
        for i in range(n):
            p, q = poly[i], poly[(i + 1) % n]
            fp = ux * p[0] + uy * p[1] - h
            fq = ux * q[0] + uy * q[1] - h
            if fp <= 0:
                out.append(p)
            if (fp < 0 < fq) or (fq < 0 < fp):
                t = fp / (fp - fq)
                out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
        poly = out
        if not poly:
            return []
    # clipping at nearly concurrent lines leaves vertex clusters ~1e-12 wide
    merged = []
    for p in poly:
        if not merged or math.hypot(p[0] - merged[-1][0], p[1] - merged[-1][1]) > 1e-9:
            merged.append(p)
    if len(merged) > 1 and math.hypot(merged[0][0] - merged[-1][0], merged[0][1] - merged[-1][1]) <= 1e-9:
        merged.pop()
    return convex_hull(merged)


def ball_polygon(center, radius: float, num_points: int) -> np.ndarray:
    theta = 2.0 * np.pi * np.arange(num_points) / num_points
    return np.asarray(center, dtype=float) + radius * unit(theta)
