"""Periodic orbits with a prescribed rational rotation vector.

A target (p/q, r/q) is reduced to a fixed-point problem for
G = F^q - (p, r): a fixed point z of G has F^q(z) = z + (p, r), so its
projection is periodic for the torus map with rotation vector (p/q, r/q).
Fixed points of G are located by quadtree subdivision of the unit square;
survivors are certified either by a nonzero winding number (isolated zeros)
or by a small residual after local least-squares refinement (which is what
covers whole circles of fixed points, where the index is zero).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .torus import LiftMap, as_points, power_shift, project

DEFAULT_DEPTH = 8
DEFAULT_TOL = 1e-9


@dataclass(frozen=True)
class RationalVector:
    """(p/q, r/q) with q >= 1 and gcd(p, q, r) = 1 (reduced on construction)."""

    p: int
    q: int
    r: int

    def __post_init__(self):
        p, q, r = (int(v) for v in (self.p, self.q, self.r))
        if (p, q, r) != (self.p, self.q, self.r):
            raise ValueError("p, q, r must be integers")
        if q == 0:
            raise ValueError("q must be nonzero")
        if q < 0:
            p, q, r = -p, -q, -r
        g = math.gcd(math.gcd(abs(p), q), abs(r))
        object.__setattr__(self, "p", p // g)
        object.__setattr__(self, "q", q // g)
        object.__setattr__(self, "r", r // g)

    @classmethod
    def from_fractions(cls, a, b) -> "RationalVector":
        a, b = Fraction(a), Fraction(b)
        q = a.denominator * b.denominator // math.gcd(a.denominator, b.denominator)
        return cls(int(a * q), q, int(b * q))

    @classmethod
    def parse(cls, text: str) -> "RationalVector":
        """Parse ``"a,b"`` where a and b are integers or fractions like ``1/3``."""
        parts = [t.strip() for t in str(text).split(",")]
        if len(parts) != 2 or not all(parts):
            raise ValueError(f"expected two comma-separated rationals, got {text!r}")
        try:
            a, b = (Fraction(t) for t in parts)
        except (ValueError, ZeroDivisionError):
            raise ValueError(f"cannot parse rational vector {text!r}") from None
        return cls.from_fractions(a, b)

    @property
    def lattice(self) -> tuple[int, int]:
        return (self.p, self.r)

    def vector(self) -> np.ndarray:
        return np.array([self.p / self.q, self.r / self.q])

    def __str__(self):
        return f"{Fraction(self.p, self.q)},{Fraction(self.r, self.q)}"

    def as_json(self) -> dict:
        return {"p": self.p, "q": self.q, "r": self.r, "vector": self.vector().tolist()}


def reduce_to_fixed_point_problem(F: LiftMap, nu: RationalVector) -> LiftMap:
    """G = F^q - (p, r); fixed points of G have rotation vector nu under F."""
    return power_shift(F, nu.q, (nu.p, nu.r))


# --- winding numbers ----------------------------------------------------------

def _boundary(boxes, samples_per_edge: int) -> np.ndarray:
    """Counterclockwise boundary samples, shape (K, 4 * samples_per_edge, 2)."""
    b = np.asarray(boxes, dtype=float).reshape(-1, 4)
    x0, y0, x1, y1 = (b[:, k, None] for k in range(4))
    t = np.arange(samples_per_edge)[None, :] / samples_per_edge
    one = np.ones_like(t)
    xs = np.concatenate([x0 + t * (x1 - x0), x1 * one, x1 - t * (x1 - x0), x0 * one], axis=1)
    ys = np.concatenate([y0 * one, y0 + t * (y1 - y0), y1 * one, y1 - t * (y1 - y0)], axis=1)
    return np.stack([xs, ys], axis=-1)


def winding_numbers(G: LiftMap, boxes, samples_per_edge: int = 16) -> list:
    """Vectorised :func:`winding_number` over many boxes."""
    if samples_per_edge < 8:
        raise ValueError("samples_per_edge must be >= 8")
    v = G.displacement(_boundary(boxes, samples_per_edge))
    w = np.roll(v, -1, axis=1)
    cross = v[..., 0] * w[..., 1] - v[..., 1] * w[..., 0]
    dot = np.sum(v * w, axis=-1)
    dtheta = np.arctan2(cross, dot)
    bad = (np.min(np.linalg.norm(v, axis=-1), axis=1) < 1e-12) | (np.max(np.abs(dtheta), axis=1) > math.pi / 2)
    turns = np.rint(dtheta.sum(axis=1) / (2.0 * math.pi)).astype(int)
    return [None if b else int(t) for b, t in zip(bad, turns)]


def winding_number(G: LiftMap, box, samples_per_edge: int = 16):
    """Turns of x -> G(x) - x around the boundary of ``box = (x0, y0, x1, y1)``.

    Returns None (indeterminate) when the field nearly vanishes on the
    boundary or consecutive samples turn by more than pi/2.
    """
    return winding_numbers(G, [box], samples_per_edge)[0]


# --- fixed point search ---------------------------------------------------------

@dataclass
class FixedPointCandidate:
    box: tuple
    certificate: dict  # {"index": k} or {"residual": r}
    refined_point: np.ndarray
    residual: float
    continuum: bool = False
    certified: bool = False

    @property
    def kind(self) -> str:
        return "index" if "index" in self.certificate else "residual"

    def as_json(self) -> dict:
        return {
            "box": [float(b) for b in self.box],
            "certificate": {k: (int(v) if k == "index" else float(v)) for k, v in self.certificate.items()},
            "refined_point": [float(c) for c in self.refined_point],
            "residual": float(self.residual),
            "continuum": self.continuum,
            "certified": self.certified,
        }


def lipschitz_estimate(G: LiftMap, samples: int = 64) -> float:
    """Sampled bound on the local variation of the displacement of G."""
    t = (np.arange(samples + 1)) / samples
    X, Y = np.meshgrid(t, t, indexing="ij")
    d = G.displacement(np.stack([X, Y], axis=-1))
    gx = np.linalg.norm(np.diff(d, axis=0), axis=-1).max() * samples
    gy = np.linalg.norm(np.diff(d, axis=1), axis=-1).max() * samples
    return 1.5 * float(max(gx, gy)) + 1e-12


_OFFSETS = np.array([(a, b) for a in (0.0, 0.5, 1.0) for b in (0.0, 0.5, 1.0)])


def _refine(G: LiftMap, x0: np.ndarray, lo: np.ndarray, hi: np.ndarray, iters: int = 80):
    """Damped Gauss-Newton on |G(x) - x|^2 for many boxes at once, clamped to boxes."""
    x = x0.copy()
    f = G.displacement(x)
    r = np.linalg.norm(f, axis=1)
    mu = np.full(len(x), 1e-3)
    h = 1e-7
    eye = np.eye(2)
    for _ in range(iters):
        active = r > 0
        if not active.any():
            break
        J = np.empty((len(x), 2, 2))
        for k in range(2):
            e = np.zeros(2)
            e[k] = h
            J[:, :, k] = (G.displacement(x + e) - G.displacement(x - e)) / (2 * h)
        JT = np.transpose(J, (0, 2, 1))
        A = JT @ J + mu[:, None, None] * eye
        g = (JT @ f[:, :, None])[:, :, 0]
        step = -np.linalg.solve(A, g[:, :, None])[:, :, 0]
        trial = np.clip(x + step, lo, hi)
        ft = G.displacement(trial)
        rt = np.linalg.norm(ft, axis=1)
        ok = (rt < r) & active
        x[ok], f[ok], r[ok] = trial[ok], ft[ok], rt[ok]
        mu = np.where(ok, mu * 0.3, mu * 10.0)
        mu = np.clip(mu, 1e-15, 1e15)
    return x, r


def _torus_dist(a, b) -> np.ndarray:
    d = np.abs(project(np.asarray(a) - np.asarray(b)))
    d = np.minimum(d, 1.0 - d)
    return np.hypot(d[..., 0], d[..., 1])


def locate_fixed_points(G: LiftMap, depth: int = DEFAULT_DEPTH, residual_tol: float = DEFAULT_TOL,
                        samples_per_edge: int = 16) -> list[FixedPointCandidate]:
    """Quadtree search for fixed points of G in the unit square.

    An empty list means nothing was found at this depth, not that G has no
    fixed point.  When the displacement vanishes (to ``residual_tol``) on a
    whole sample grid the square is reported as one continuum candidate.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    grid = np.linspace(0.0, 1.0, 33)
    X, Y = np.meshgrid(grid, grid, indexing="ij")
    pts = np.stack([X.ravel(), Y.ravel()], axis=1)
    res = np.linalg.norm(G.displacement(pts), axis=1)
    if res.max() <= residual_tol:
        c = np.array([0.5, 0.5])
        r = float(np.linalg.norm(G.displacement(c)))
        return [FixedPointCandidate((0.0, 0.0, 1.0, 1.0), {"residual": float(res.max())}, c, r,
                                    continuum=True)]
    L = lipschitz_estimate(G)
    ij = np.zeros((1, 2), dtype=np.int64)
    for level in range(depth + 1):
        size = 0.5 ** level
        corners = ij * size
        samples = corners[:, None, :] + size * _OFFSETS[None, :, :]
        r = np.linalg.norm(G.displacement(samples), axis=-1)
        keep = r.min(axis=1) <= math.sqrt(2.0) * size * L
        ij, samples, r = ij[keep], samples[keep], r[keep]
        if len(ij) == 0:
            return []
        if level < depth:
            kids = ij[:, None, :] * 2 + np.array([(0, 0), (0, 1), (1, 0), (1, 1)])[None]
            ij = kids.reshape(-1, 2)
    size = 0.5 ** depth
    order = np.lexsort((ij[:, 1], ij[:, 0]))
    ij, samples, r = ij[order], samples[order], r[order]
    lo = ij * size
    hi = lo + size
    start = samples[np.arange(len(ij)), np.argmin(r, axis=1)]
    refined, resid = _refine(G, start, lo, hi)
    boxes = np.concatenate([lo, hi], axis=1)
    index = winding_numbers(G, boxes, samples_per_edge)
    # isolated zeros on box edges: retry on same-size boxes centred at the refined points
    retry = [k for k in range(len(ij)) if not index[k]]
    if retry:
        z = refined[retry]
        centred = np.concatenate([z - size / 2, z + size / 2], axis=1)
        for k, box, idx in zip(retry, centred, winding_numbers(G, centred, samples_per_edge)):
            if idx:
                boxes[k], index[k] = box, idx
    certified_ks = [k for k in range(len(ij)) if index[k]]
    fine = winding_numbers(G, boxes[certified_ks], 2 * samples_per_edge) if certified_ks else []
    stable = dict(zip(certified_ks, (f == index[k] for k, f in zip(certified_ks, fine))))
    cands = []
    for k in range(len(ij)):
        box = tuple(float(b) for b in boxes[k])
        if index[k]:
            cands.append(FixedPointCandidate(box, {"index": index[k]}, refined[k], float(resid[k]),
                                             certified=stable[k]))
        elif resid[k] <= residual_tol:
            cands.append(FixedPointCandidate(box, {"residual": float(resid[k])}, refined[k],
                                             float(resid[k])))
    return _merge(cands, 0.5 * size)


def _merge(cands, radius):
    """Drop candidates within ``radius`` (torus distance) of a better one."""
    ranked = sorted(range(len(cands)), key=lambda k: (cands[k].kind != "index", cands[k].residual, k))
    kept, pts = [], np.empty((0, 2))
    for k in ranked:
        z = np.asarray(cands[k].refined_point)
        if len(pts) == 0 or np.all(_torus_dist(pts, z) >= radius):
            kept.append(k)
            pts = np.vstack([pts, z])
    return [cands[k] for k in sorted(kept)]


# --- realization ------------------------------------------------------------------

@dataclass
class PeriodicOrbitReport:
    point: np.ndarray  # torus point
    lift: np.ndarray
    period: int
    rotation_vector: np.ndarray
    target: RationalVector
    minimal: bool
    residual: float
    certificate: dict = field(default_factory=dict)
    certified: bool = False
    continuum: bool = False
    orbit: list = field(default_factory=list)

    def as_json(self) -> dict:
        return {
            "point": [float(c) for c in self.point],
            "lift": [float(c) for c in self.lift],
            "period": int(self.period),
            "rotation_vector": [float(c) for c in self.rotation_vector],
            "target": self.target.as_json(),
            "minimal": bool(self.minimal),
            "residual": float(self.residual),
            "certificate": {k: (int(v) if k == "index" else float(v)) for k, v in self.certificate.items()},
            "certified": bool(self.certified),
            "continuum": bool(self.continuum),
            "orbit": [[float(a), float(b)] for a, b in self.orbit],
        }


def _divisors(q: int) -> list[int]:
    return [d for d in range(1, q + 1) if q % d == 0]


def minimal_period(F: LiftMap, z, q: int, tol: float) -> int:
    """Least divisor d of q with F^d(z) - z within ``tol`` of a lattice vector."""
    z = as_points(z)
    x = z.copy()
    done = 0
    for d in _divisors(q):
        x = F.iterate(x, d - done)
        done = d
        off = x - z
        if np.linalg.norm(off - np.round(off)) <= tol:
            return d
    return q


def verify_orbit(F: LiftMap, z, nu: RationalVector) -> float:
    """|F^q(z) - z - (p, r)| by direct iteration of F."""
    z = as_points(z)
    return float(np.linalg.norm(F.iterate(z, nu.q) - z - np.array(nu.lattice, dtype=float)))


def realize_rational_vector(F: LiftMap, nu: RationalVector, depth: int = DEFAULT_DEPTH,
                            residual_tol: float = DEFAULT_TOL):
    """Find z with F^q(z) = z + (p, r) (to ``residual_tol``) and report its orbit.

    Candidates are tried best first (index-certified, then smallest
    residual); the first whose direct replay passes is reported.  Returns
    None when no candidate passes.
    """
    G = reduce_to_fixed_point_problem(F, nu)
    cands = locate_fixed_points(G, depth, residual_tol)
    cands.sort(key=lambda c: (c.kind != "index", c.residual))
    for c in cands:
        z = np.asarray(c.refined_point, dtype=float)
        res = verify_orbit(F, z, nu)
        if res > residual_tol:
            continue
        period = minimal_period(F, z, nu.q, max(1e-6, 10 * residual_tol))
        xs = [z]
        for _ in range(nu.q - 1):
            xs.append(F(xs[-1]))
        rot = (F.iterate(z, nu.q) - z) / nu.q
        return PeriodicOrbitReport(
            point=project(z), lift=z, period=period, rotation_vector=rot, target=nu,
            minimal=(period == nu.q), residual=res, certificate=dict(c.certificate),
            certified=c.certified, continuum=c.continuum,
            orbit=[tuple(project(x)) for x in xs],
        )
    return None
