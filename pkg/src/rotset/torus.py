"""Lifts of torus maps homotopic to the identity.

A lift is an expression tree built from a small set of primitives
(translations, sine shears) closed under composition, integer powers and
lattice shifts.  Every node knows its displacement function
``phi(x) = F(x) - x``, which is periodic under integer translations, so
equivariance ``F(x + m) = F(x) + m`` holds by construction.

Points are numpy arrays whose last axis has length 2; a single point may
be passed as any length-2 sequence.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Callable

import numpy as np

TWO_PI = 2.0 * math.pi


class MapSpecError(ValueError):
    """Raised for malformed map specifications or map parameters."""


def as_points(x) -> np.ndarray:
    pts = np.asarray(x, dtype=float)
    if pts.shape[-1:] != (2,):
        raise ValueError(f"points must have a trailing axis of length 2, got shape {pts.shape}")
    return pts


def frac(x):
    """Reduce into [0, 1); values that round up to 1.0 snap to 0.0."""
    r = np.asarray(x, dtype=float) - np.floor(x)
    return np.where(r >= 1.0, 0.0, r)


def project(x) -> np.ndarray:
    """Covering projection R^2 -> T^2 (coordinates in [0, 1))."""
    return frac(as_points(x))


def lift_near(t, anchor) -> np.ndarray:
    """Lift of the torus point ``t`` lying in ``[anchor, anchor + 1)`` coordinatewise."""
    t = project(t)
    anchor = as_points(anchor)
    return anchor + frac(t - anchor)


class LiftMap:
    """Base class for integer-equivariant planar maps.

    Subclasses implement :meth:`displacement`; evaluation is
    ``x + displacement(x)``.  Instances are immutable and safe to share
    between threads.
    """

    def displacement(self, x) -> np.ndarray:
        raise NotImplementedError

    def __call__(self, x) -> np.ndarray:
        x = as_points(x)
        return x + self.displacement(x)

    def spec(self) -> str:
        """Mini-language form; ``parse_map(F.spec())`` rebuilds an equal map."""
        raise NotImplementedError

    def __str__(self):
        return self.spec()

    # algebra
    def after(self, other: "LiftMap") -> "LiftMap":
        return Compose(self, other)

    def __matmul__(self, other: "LiftMap") -> "LiftMap":
        return Compose(self, other)

    def __pow__(self, q: int) -> "LiftMap":
        return Power(self, q)

    def iterate(self, x, n: int) -> np.ndarray:
        x = as_points(x)
        for _ in range(n):
            x = self(x)
        return x


def _real(v, name):
    try:
        v = float(v)
    except (TypeError, ValueError):
        raise MapSpecError(f"{name} must be a real number, got {v!r}") from None
    if not math.isfinite(v):
        raise MapSpecError(f"{name} must be finite, got {v!r}")
    return v


def _fmt(v: float) -> str:
    return repr(float(v))


@dataclass(frozen=True)
class Translate(LiftMap):
    vx: float
    vy: float

    def __post_init__(self):
        object.__setattr__(self, "vx", _real(self.vx, "vx"))
        object.__setattr__(self, "vy", _real(self.vy, "vy"))

    def displacement(self, x):
        x = as_points(x)
        out = np.empty_like(x)
        out[..., 0] = self.vx
        out[..., 1] = self.vy
        return out

    def spec(self):
        return f"translate({_fmt(self.vx)},{_fmt(self.vy)})"


@dataclass(frozen=True)
class HShear(LiftMap):
    """(x, y) -> (x + beta + alpha sin(2 pi y), y)."""

    alpha: float
    beta: float

    def __post_init__(self):
        object.__setattr__(self, "alpha", _real(self.alpha, "alpha"))
        object.__setattr__(self, "beta", _real(self.beta, "beta"))

    def displacement(self, x):
        x = as_points(x)
        out = np.zeros_like(x)
        out[..., 0] = self.beta + self.alpha * np.sin(TWO_PI * frac(x[..., 1]))
        return out

    def spec(self):
        return f"hshear({_fmt(self.alpha)},{_fmt(self.beta)})"


@dataclass(frozen=True)
class VShear(LiftMap):
    """(x, y) -> (x, y + delta + gamma sin(2 pi x))."""

    gamma: float
    delta: float

    def __post_init__(self):
        object.__setattr__(self, "gamma", _real(self.gamma, "gamma"))
        object.__setattr__(self, "delta", _real(self.delta, "delta"))

    def displacement(self, x):
        x = as_points(x)
        out = np.zeros_like(x)
        out[..., 1] = self.delta + self.gamma * np.sin(TWO_PI * frac(x[..., 0]))
        return out

    def spec(self):
        return f"vshear({_fmt(self.gamma)},{_fmt(self.delta)})"


@dataclass(frozen=True)
class Compose(LiftMap):
    """``outer`` after ``inner``."""

    outer: LiftMap
    inner: LiftMap

    def __post_init__(self):
        if not isinstance(self.outer, LiftMap) or not isinstance(self.inner, LiftMap):
            raise MapSpecError("compose expects two maps")

    def displacement(self, x):
        x = as_points(x)
        d = self.inner.displacement(x)
        return d + self.outer.displacement(x + d)

    def spec(self):
        return f"compose({self.outer.spec()},{self.inner.spec()})"


@dataclass(frozen=True)
class Power(LiftMap):
    base: LiftMap
    q: int

    def __post_init__(self):
        if not isinstance(self.base, LiftMap):
            raise MapSpecError("pow expects a map")
        if isinstance(self.q, bool) or int(self.q) != self.q:
            raise MapSpecError(f"power must be an integer, got {self.q!r}")
        object.__setattr__(self, "q", int(self.q))
        if self.q < 0:
            raise MapSpecError("negative powers are not supported (no inverses of shears in the tree)")

    def displacement(self, x):
        x = as_points(x)
        total = np.zeros_like(x)
        for _ in range(self.q):
            d = self.base.displacement(x)
            total = total + d
            x = x + d
        return total

    def spec(self):
        return f"pow({self.base.spec()},{self.q})"


@dataclass(frozen=True)
class Shift(LiftMap):
    """``base + (m, n)`` for an integer vector (m, n)."""

    base: LiftMap
    m: int
    n: int

    def __post_init__(self):
        if not isinstance(self.base, LiftMap):
            raise MapSpecError("shift expects a map")
        for name in ("m", "n"):
            v = getattr(self, name)
            if isinstance(v, bool) or int(v) != v:
                raise MapSpecError(f"shift components must be integers, got {v!r}")
            object.__setattr__(self, name, int(v))

    def displacement(self, x):
        d = self.base.displacement(x)
        return d + np.array([self.m, self.n], dtype=float)

    def spec(self):
        return f"shift({self.base.spec()},{self.m},{self.n})"


class ExternalMap(LiftMap):
    """Wraps a user-supplied vectorised displacement function.

    Equivariance cannot be guaranteed for arbitrary code, so it is checked
    statistically at construction: the displacement must agree with itself
    under random integer translations at ``checks`` random points.
    """

    def __init__(self, displacement: Callable[[np.ndarray], np.ndarray], name: str = "external",
                 checks: int = 256, tol: float = 1e-9, seed: int = 0):
        self._disp = displacement
        self.name = name
        rng = np.random.default_rng(seed)
        x = rng.uniform(-5.0, 5.0, size=(checks, 2))
        m = rng.integers(-10, 11, size=(checks, 2)).astype(float)
        a = np.asarray(displacement(x), dtype=float)
        b = np.asarray(displacement(x + m), dtype=float)
        if a.shape != x.shape or not np.all(np.isfinite(a)):
            raise MapSpecError(f"{name}: displacement must return finite values of shape (k, 2)")
        err = float(np.max(np.abs(a - b)))
        if err > tol:
            raise MapSpecError(f"{name}: displacement is not Z^2-periodic (max error {err:.3g})")

    def displacement(self, x):
        x = as_points(x)
        flat = np.asarray(self._disp(x.reshape(-1, 2)), dtype=float)
        return flat.reshape(x.shape)

    def spec(self):
        raise MapSpecError(f"{self.name} has no mini-language form")


def identity() -> LiftMap:
    return Translate(0.0, 0.0)


def power_shift(F: LiftMap, q: int, w=(0, 0)) -> LiftMap:
    """G(x) = F^q(x) - w."""
    if isinstance(q, bool) or int(q) != q or q < 1:
        raise MapSpecError(f"q must be a positive integer, got {q!r}")
    m, n = (int(w[0]), int(w[1]))
    G = F if q == 1 else Power(F, int(q))
    if m == 0 and n == 0:
        return G
    return Shift(G, -m, -n)


def evaluate(F: LiftMap, x) -> np.ndarray:
    return F(x)


def displacement(F: LiftMap, x) -> np.ndarray:
    return F.displacement(x)


# --- mini-language -------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(?P<num>[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<punct>[(),]))")

_ARITY = {"translate": 2, "hshear": 2, "vshear": 2, "compose": 2, "pow": 2, "shift": 3}


def _tokenize(text: str):
    pos, out = 0, []
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise MapSpecError(f"unexpected character at position {pos} in {text!r}")
        kind = m.lastgroup
        out.append((kind, m.group(kind)))
        pos = m.end()
    return out


def parse_map(text: str, names: dict | None = None) -> LiftMap:
    """Parse the map mini-language.

    Grammar::

        map  := translate(r, r) | hshear(r, r) | vshear(r, r)
              | compose(map, map) | pow(map, int) | shift(map, int, int)
              | NAME | NAME(r, ...)

    ``NAME`` is looked up in ``names`` (the zoo by default); a zoo
    constructor such as ``sine_shear_h(0.25, 0.5)`` takes numeric arguments.
    """
    if not isinstance(text, str) or not text.strip():
        raise MapSpecError("empty map specification")
    if names is None:
        from .zoo import ZOO
        names = {k: e.build() for k, e in ZOO.items()}
    toks = _tokenize(text)
    pos = 0

    def peek():
        return toks[pos] if pos < len(toks) else (None, None)

    def expect(val):
        nonlocal pos
        kind, v = peek()
        if v != val:
            raise MapSpecError(f"expected {val!r} in {text!r}, got {v!r}")
        pos += 1

    def number():
        nonlocal pos
        kind, v = peek()
        if kind != "num":
            raise MapSpecError(f"expected a number in {text!r}, got {v!r}")
        pos += 1
        return v

    def integer():
        v = number()
        f = float(v)
        if f != int(f):
            raise MapSpecError(f"expected an integer in {text!r}, got {v}")
        return int(f)

    def node():
        nonlocal pos
        kind, v = peek()
        if kind != "name":
            raise MapSpecError(f"expected a map in {text!r}, got {v!r}")
        pos += 1
        if v not in _ARITY:
            if peek()[1] == "(":
                return zoo_call(v)
            if v not in names:
                raise MapSpecError(f"unknown map name {v!r}")
            return names[v]
        expect("(")
        if v in ("translate", "hshear", "vshear"):
            a = number()
            expect(",")
            b = number()
            expect(")")
            return {"translate": Translate, "hshear": HShear, "vshear": VShear}[v](float(a), float(b))
        inner = node()
        expect(",")
        if v == "compose":
            other = node()
            expect(")")
            return Compose(inner, other)
        if v == "pow":
            q = integer()
            expect(")")
            return Power(inner, q)
        m = integer()
        expect(",")
        n = integer()
        expect(")")
        return Shift(inner, m, n)

    def zoo_call(v):
        from .zoo import CONSTRUCTORS
        if v not in CONSTRUCTORS:
            raise MapSpecError(f"unknown map constructor {v!r}")
        fn, arity = CONSTRUCTORS[v]
        expect("(")
        args = [float(number())]
        while peek()[1] == ",":
            expect(",")
            args.append(float(number()))
        expect(")")
        if len(args) != arity:
            raise MapSpecError(f"{v} takes {arity} arguments, got {len(args)}")
        return fn(*args)

    result = node()
    if pos != len(toks):
        raise MapSpecError(f"trailing input in {text!r}")
    return result
