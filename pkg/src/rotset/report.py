"""Run configuration, experiment drivers, JSON reports and SVG plots."""

from __future__ import annotations

import dataclasses
import json
import math
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone

import numpy as np

from . import chains, estimators, hull as hl, periodic
from .torus import LiftMap, MapSpecError, parse_map

SCHEMA = "rotset/1"
STOCHASTIC = {"estimate", "verify-theorem"}


class ConfigError(ValueError):
    """Bad or incomplete run configuration (CLI exit code 2)."""


@dataclass
class RunConfig:
    command: str = ""
    map: str = ""
    mode: str = "sample"
    N: int = 64
    epsilon: float = 0.05
    n: int = 1000
    num_points: int = 1000
    num_samples: int = 100_000
    seed: int | None = None
    depth: int = periodic.DEFAULT_DEPTH
    tol: float = periodic.DEFAULT_TOL
    directions: int = estimators.DEFAULT_DIRECTIONS
    max_len: int = 50
    vector: str | None = None
    keps: float | None = None
    membership_tol: float = 1e-3
    start: list | None = None
    target_cell: list | None = None
    target_disp: list | None = None
    periodic: bool = False
    svg: str | None = None
    output_dir: str | None = None

    @classmethod
    def merged(cls, file_values: dict | None = None, flags: dict | None = None) -> "RunConfig":
        """Defaults, then config-file values, then explicit flags (flags win)."""
        names = {f.name for f in dataclasses.fields(cls)}
        values = {}
        for source in (file_values or {}, flags or {}):
            for k, v in source.items():
                k = k.replace("-", "_")
                if k not in names:
                    raise ConfigError(f"unknown configuration key {k!r}")
                if v is not None:
                    values[k] = v
        cfg = cls(**values)
        cfg.validate()
        return cfg

    def validate(self):
        if not self.map:
            raise ConfigError("a map specification is required (--map)")
        checks = [
            (self.N >= 2, "grid N must be >= 2"),
            (self.epsilon > 0, "epsilon must be > 0"),
            (self.n >= 1, "n must be >= 1"),
            (self.num_points >= 1, "num_points must be >= 1"),
            (self.num_samples >= 2, "num_samples must be >= 2"),
            (self.depth >= 1, "depth must be >= 1"),
            (self.tol > 0, "tol must be > 0"),
            (self.directions >= 3, "directions must be >= 3"),
            (self.max_len >= 1, "max_len must be >= 1"),
            (self.keps is None or self.keps >= 0, "keps must be >= 0"),
            (self.mode in ("sample", "graph", "mean"), f"unknown mode {self.mode!r}"),
        ]
        for ok, msg in checks:
            if not ok:
                raise ConfigError(msg)
        if self.command in STOCHASTIC and self.seed is None:
            raise ConfigError(f"{self.command} needs an explicit --seed")

    def as_json(self) -> dict:
        return dataclasses.asdict(self)


def _vec(v):
    return [float(v[0]), float(v[1])]


def base_report(cfg: RunConfig, estimator: str) -> dict:
    return {
        "schema": SCHEMA,
        "map": cfg.map,
        "estimator": estimator,
        "params": {k: v for k, v in cfg.as_json().items() if k not in ("map", "seed", "svg", "output_dir")},
        "seed": cfg.seed,
        "config": cfg.as_json(),
        "result": {},
        "diagnostics": {},
        "timestamp": datetime.now(timezone.utc).isoformat(),
    }


def dumps(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, allow_nan=True)


def canonical(report: dict) -> str:
    """Serialized report without the timestamp, for reproducibility checks."""
    return dumps({k: v for k, v in report.items() if k != "timestamp"})


def load_map(spec: str) -> LiftMap:
    try:
        return parse_map(spec)
    except MapSpecError as exc:
        raise ConfigError(str(exc)) from None


# --- SVG ----------------------------------------------------------------------

def svg_plot(points=None, inner=None, outer=None, marks=None, size: int = 800) -> str:
    """Scatter of rotation vectors with hull and outer polygon overlays."""
    layers = [np.asarray(a, dtype=float).reshape(-1, 2) for a in (points, inner, outer, marks) if a is not None and len(a)]
    allpts = np.concatenate(layers) if layers else np.zeros((1, 2))
    lo, hi = allpts.min(axis=0), allpts.max(axis=0)
    span = max(float(np.max(hi - lo)), 1e-3)
    mid = (lo + hi) / 2
    lo = mid - 0.55 * span
    scale = size / (1.1 * span)

    def xy(p):
        return (float((p[0] - lo[0]) * scale), float(size - (p[1] - lo[1]) * scale))

    def poly(vs, colour, width):
        vs = list(vs)
        if not vs:
            return ""
        vs = vs + vs[:1]
        coords = " ".join("%.3f,%.3f" % xy(p) for p in vs)
        return f'<polyline points="{coords}" fill="none" stroke="{colour}" stroke-width="{width}"/>'

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {size} {size}" width="{size}" height="{size}">',
           f'<rect x="0" y="0" width="{size}" height="{size}" fill="white"/>']
    if outer is not None:
        out.append(poly(outer, "#c0392b", 1.5))
    if points is not None:
        for p in np.asarray(points, dtype=float).reshape(-1, 2):
            cx, cy = xy(p)
            out.append(f'<circle cx="{cx:.3f}" cy="{cy:.3f}" r="1.5" fill="#2c3e50"/>')
    if inner is not None:
        out.append(poly(inner, "#2980b9", 2))
    if marks is not None:
        for p in np.asarray(marks, dtype=float).reshape(-1, 2):
            cx, cy = xy(p)
            out.append(f'<circle cx="{cx:.3f}" cy="{cy:.3f}" r="4" fill="none" stroke="#27ae60" stroke-width="2"/>')
    out.append("</svg>")
    return "\n".join(s for s in out if s) + "\n"


# --- commands -------------------------------------------------------------------

def containment(inner: estimators.RotationSetEstimate, outer: estimators.RotationSetEstimate,
                slack: float) -> dict:
    """Largest violation of the outer half-planes by inner hull vertices."""
    u = hl.unit(outer.thetas())
    h = outer.support_values()
    verts = np.asarray(inner.hull_vertices, dtype=float).reshape(-1, 2)
    excess = float(np.max(verts @ u.T - h[None, :])) if len(verts) else -math.inf
    return {"max_excess": excess, "slack": slack, "contained": excess <= slack,
            "contained_without_slack": excess <= 1e-12}


def cmd_estimate(cfg: RunConfig):
    F = load_map(cfg.map)
    rep = base_report(cfg, cfg.mode)
    svg = None
    if cfg.mode == "mean":
        m = estimators.mean_rotation_vector(F, cfg.num_samples, cfg.seed)
        rep["result"] = {"vector": _vec(m.vector), "standard_error": _vec(m.standard_error),
                         "sample_count": m.sample_count}
        return rep, 0, svg
    inner = estimators.sample_rotation_set(F, cfg.num_points, cfg.n, cfg.seed, cfg.directions)
    rep["result"] = {"hull_vertices": inner.as_json()["hull_vertices"], "support": inner.as_json()["support"]}
    rep["diagnostics"] = dict(inner.diagnostics)
    outer = None
    if cfg.mode == "graph":
        G = chains.build_chain_graph(F, cfg.N, cfg.epsilon)
        outer = chains.rotation_set_outer(G, cfg.directions)
        rep["diagnostics"]["graph"] = G.summary()
        if outer is None:
            rep["result"]["outer"] = None
            rep["diagnostics"]["outer"] = "graph has no cycles"
        else:
            rep["result"]["outer"] = outer.as_json()
            rep["diagnostics"]["containment"] = containment(inner, outer, G.slack)
    svg = svg_plot(inner.samples, inner.hull_vertices, outer.hull_vertices if outer else None)
    return rep, 0, svg


def cmd_chain(cfg: RunConfig):
    F = load_map(cfg.map)
    G = chains.build_chain_graph(F, cfg.N, cfg.epsilon)
    rep = base_report(cfg, "periodic-chain" if cfg.periodic else "chain-to-target")
    rep["diagnostics"]["graph"] = G.summary()
    if cfg.periodic:
        ch = chains.find_periodic_chain(G, cfg.max_len)
    else:
        start = cfg.start if cfg.start is not None else [0.0, 0.0]
        target = cfg.target_cell if cfg.target_cell is not None else start
        disp = cfg.target_disp if cfg.target_disp is not None else [0, 0]
        s, t = G.grid.cell_of(start), G.grid.cell_of(target)
        ch = chains.find_chain_to_target(G, s, t, disp, cfg.max_len)
    if ch is None:
        rep["result"] = {"chain": None, "status": "absent"}
        return rep, 1, None
    res = chains.replay(F, ch)
    rep["result"] = {"chain": ch.as_json(), "status": "found",
                     "replay_residuals": [float(r) for r in res],
                     "max_replay_residual": float(res.max()) if len(res) else 0.0,
                     "sound": bool(np.all(res < G.slack))}
    return rep, 0, None


def cmd_realize(cfg: RunConfig):
    F = load_map(cfg.map)
    nu = parse_vector(cfg.vector)
    rep = base_report(cfg, "realize")
    orbit = periodic.realize_rational_vector(F, nu, cfg.depth, cfg.tol)
    rep["result"] = {"target": nu.as_json(), "orbit": orbit.as_json() if orbit else None,
                     "status": "found" if orbit else "absent"}
    return rep, (0 if orbit else 1), None


def parse_vector(text):
    if not text:
        raise ConfigError("a rational vector is required (--vector p/q,r/q)")
    try:
        return periodic.RationalVector.parse(text)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


@dataclass
class VerifyTheoremReport:
    map: str
    nu: periodic.RationalVector
    inner: estimators.RotationSetEstimate
    outer: estimators.RotationSetEstimate | None
    mean: estimators.MeanRotationResult
    membership: str
    distance: float
    orbit: periodic.PeriodicOrbitReport | None
    passed: bool
    keps: dict | None = None
    reasons: list = field(default_factory=list)

    def as_json(self) -> dict:
        return {
            "map": self.map,
            "nu": self.nu.as_json(),
            "inner": self.inner.as_json(),
            "outer": self.outer.as_json() if self.outer else None,
            "mean": {"vector": _vec(self.mean.vector), "standard_error": _vec(self.mean.standard_error),
                     "sample_count": self.mean.sample_count},
            "membership": {"verdict": self.membership, "distance": self.distance, "keps": self.keps},
            "orbit": self.orbit.as_json() if self.orbit else None,
            "pass": self.passed,
            "reasons": list(self.reasons),
        }


def verify_theorem(F: LiftMap, spec: str, nu: periodic.RationalVector, cfg: RunConfig) -> VerifyTheoremReport:
    """Rotation-set evidence for ``nu`` followed by an attempt to realize it by a periodic orbit."""
    inner = estimators.sample_rotation_set(F, cfg.num_points, cfg.n, cfg.seed, cfg.directions)
    G = chains.build_chain_graph(F, cfg.N, cfg.epsilon)
    outer = chains.rotation_set_outer(G, cfg.directions)
    mean = estimators.mean_rotation_vector(F, cfg.num_samples, cfg.seed)
    target = nu.vector()
    dist = hl.distance_to_hull(inner.hull_vertices, target)
    verdict = "inside-inner-hull" if dist <= cfg.membership_tol else "outside-inner-hull"
    keps = None
    if cfg.keps is not None:
        K = estimators.hull_with_ball(inner, mean.vector, cfg.keps)
        interior = len(K.hull_vertices) >= 3 and all(
            hl.orient(K.hull_vertices[i], K.hull_vertices[(i + 1) % len(K.hull_vertices)], target) > 0
            for i in range(len(K.hull_vertices)))
        keps = {"epsilon": cfg.keps, "hull_vertices": [_vec(v) for v in K.hull_vertices],
                "in_interior": bool(interior)}
    reasons = []
    orbit = None
    if verdict != "inside-inner-hull":
        reasons.append(f"target lies {dist:.3g} outside the sampled rotation set")
    else:
        orbit = periodic.realize_rational_vector(F, nu, cfg.depth, cfg.tol)
        if orbit is None:
            reasons.append("no periodic orbit found")
        elif orbit.period != nu.q:
            reasons.append(f"orbit period {orbit.period} differs from q={nu.q}")
    passed = not reasons
    return VerifyTheoremReport(spec, nu, inner, outer, mean, verdict, float(dist), orbit, passed, keps, reasons)


def cmd_verify_theorem(cfg: RunConfig):
    F = load_map(cfg.map)
    nu = parse_vector(cfg.vector)
    vt = verify_theorem(F, cfg.map, nu, cfg)
    rep = base_report(cfg, "verify-theorem")
    rep["result"] = vt.as_json()
    marks = [vt.nu.vector()]
    svg = svg_plot(vt.inner.samples, vt.inner.hull_vertices, vt.outer.hull_vertices if vt.outer else None, marks)
    return rep, (0 if vt.passed else 1), svg


COMMANDS = {
    "estimate": cmd_estimate,
    "chain": cmd_chain,
    "realize": cmd_realize,
    "verify-theorem": cmd_verify_theorem,
}


def run(cfg: RunConfig):
    """Dispatch a configured command; returns ``(report, exit_code, svg_text)``."""
    return COMMANDS[cfg.command](cfg)


def write_outputs(cfg: RunConfig, report: dict, svg: str | None) -> None:
    if cfg.output_dir:
        os.makedirs(cfg.output_dir, exist_ok=True)
        with open(os.path.join(cfg.output_dir, f"{cfg.command}.json"), "w") as fh:
            fh.write(dumps(report))
        if svg:
            with open(os.path.join(cfg.output_dir, f"{cfg.command}.svg"), "w") as fh:
                fh.write(svg)
    if cfg.svg and svg:
        with open(cfg.svg, "w") as fh:
            fh.write(svg)
