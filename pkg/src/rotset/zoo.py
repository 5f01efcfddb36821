"""Concrete area-preserving lifts with known rotation behaviour."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .torus import Compose, HShear, LiftMap, Translate, VShear


def translation(v) -> LiftMap:
    return Translate(v[0], v[1])


def sine_shear_h(alpha: float, beta: float) -> LiftMap:
    return HShear(alpha, beta)


def sine_shear_v(gamma: float, delta: float) -> LiftMap:
    return VShear(gamma, delta)


def two_shear(alpha: float, beta: float, gamma: float, delta: float) -> LiftMap:
    """Vertical sine shear applied after a horizontal one."""
    return Compose(VShear(gamma, delta), HShear(alpha, beta))


@dataclass(frozen=True)
class ZooEntry:
    name: str
    constructor: str
    params: tuple
    expected_rotation_set: dict | None = None
    area_preserving: bool = True
    notes: str = ""

    def build(self) -> LiftMap:
        return _CONSTRUCTORS[self.constructor](*self.params)

    def as_json(self) -> dict:
        return {
            "name": self.name,
            "params": {"constructor": self.constructor, "values": list(self.params)},
            "expected_rotation_set": self.expected_rotation_set,
        }


_CONSTRUCTORS = {
    "translation": lambda vx, vy: translation((vx, vy)),
    "sine_shear_h": sine_shear_h,
    "sine_shear_v": sine_shear_v,
    "two_shear": two_shear,
}


def point_set(v):
    return {"kind": "point", "value": [float(v[0]), float(v[1])]}


def segment_set(a, b):
    return {"kind": "segment", "endpoints": [[float(a[0]), float(a[1])], [float(b[0]), float(b[1])]]}


def shear_h_rotation_set(alpha, beta):
    a = abs(alpha)
    return segment_set((beta - a, 0.0), (beta + a, 0.0)) if a else point_set((beta, 0.0))


def shear_v_rotation_set(gamma, delta):
    g = abs(gamma)
    return segment_set((0.0, delta - g), (0.0, delta + g)) if g else point_set((0.0, delta))


def _entries():
    s2 = math.sqrt(2.0)
    yield ZooEntry("identity", "translation", (0.0, 0.0), point_set((0, 0)),
                   notes="every point fixed")
    yield ZooEntry("translation_half_quarter", "translation", (0.5, 0.25), point_set((0.5, 0.25)),
                   notes="every point has period 4")
    yield ZooEntry("translation_irrational", "translation", (s2 - 1.0, 0.0), point_set((s2 - 1.0, 0.0)),
                   notes="rotation set contains no rational vector")
    yield ZooEntry("translation_band", "translation", (0.3 + s2 / 10.0, 0.0),
                   point_set((0.3 + s2 / 10.0, 0.0)),
                   notes="fixed-point free; no periodic chains at small epsilon")
    yield ZooEntry("translation_half_sqrt2", "translation", (s2 / 2.0, 0.0), point_set((s2 / 2.0, 0.0)))
    yield ZooEntry("sine_shear_h", "sine_shear_h", (0.25, 0.5), shear_h_rotation_set(0.25, 0.5),
                   notes="row y rotates rigidly by 0.5 + 0.25 sin(2 pi y)")
    yield ZooEntry("sine_shear_v", "sine_shear_v", (0.25, 0.5), shear_v_rotation_set(0.25, 0.5),
                   notes="column x rotates rigidly by 0.5 + 0.25 sin(2 pi x)")
    yield ZooEntry("two_shear", "two_shear", (0.3, 0.0, 0.3, 0.0), None,
                   notes="two-dimensional rotation set containing the origin in its interior")
    yield ZooEntry("two_shear_drift", "two_shear", (0.3, 0.2, 0.3, 0.1), None,
                   notes="mean rotation vector (0.2, 0.1)")


ZOO: dict[str, ZooEntry] = {e.name: e for e in _entries()}

# numeric-argument constructors reachable from the map mini-language
CONSTRUCTORS = {
    "translation": (lambda vx, vy: translation((vx, vy)), 2),
    "sine_shear_h": (sine_shear_h, 2),
    "sine_shear_v": (sine_shear_v, 2),
    "two_shear": (two_shear, 4),
}


def zoo_list() -> list[dict]:
    return [e.as_json() for e in ZOO.values()]


def get(name: str) -> ZooEntry:
    try:
        return ZOO[name]
    except KeyError:
        raise KeyError(f"no zoo entry named {name!r}; known: {', '.join(ZOO)}") from None
