"""Grid digraphs of epsilon-transitions and chain searches on them.

Cells of an N x N grid on the torus are numbered ``i * N + j`` for the cell
``[i/N, (i+1)/N) x [j/N, (j+1)/N)``.  An edge ``c -> c'`` with lattice
vector ``w`` means ``|F(center(c)) - (center(c') + w)| < epsilon``; chains in
this graph are therefore genuine (epsilon + h sqrt 2)-chains of the torus map
through cell centers, and the sum of the ``w`` along a chain is the lattice
displacement of its lift.
"""

from __future__ import annotations

import json
import math
import struct
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations

import numpy as np

from . import graphs
from . import hull as hl
from .estimators import DEFAULT_DIRECTIONS, GRAPH, RotationSetEstimate
from .torus import LiftMap, MapSpecError
from .workers import worker_count

MAGIC = b"RSGD"
_HEADER = struct.Struct("<4sIdI")
_EDGE_DTYPE = np.dtype([("src", "<u4"), ("dst", "<u4"), ("dx", "<i2"), ("dy", "<i2")])


@dataclass(frozen=True)
class Grid:
    N: int

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 2:
            raise ValueError(f"grid resolution must be an integer >= 2, got {self.N!r}")

    @property
    def h(self) -> float:
        return 1.0 / self.N

    @property
    def size(self) -> int:
        return self.N * self.N

    def cell_id(self, i: int, j: int) -> int:
        return (i % self.N) * self.N + (j % self.N)

    def cell_of(self, p) -> int:
        i = int(math.floor(float(p[0]) * self.N)) % self.N
        j = int(math.floor(float(p[1]) * self.N)) % self.N
        return i * self.N + j

    def index(self, cell: int) -> tuple[int, int]:
        return divmod(int(cell), self.N)

    def centers(self, cells=None) -> np.ndarray:
        cells = np.arange(self.size) if cells is None else np.asarray(cells)
        i, j = np.divmod(cells, self.N)
        return np.stack([(i + 0.5) / self.N, (j + 0.5) / self.N], axis=-1)


@dataclass
class GridDigraph:
    grid: Grid
    epsilon: float
    src: np.ndarray
    dst: np.ndarray
    disp: np.ndarray  # (E, 2) int64
    indptr: np.ndarray
    map_spec: str = ""

    @property
    def N(self) -> int:
        return self.grid.N

    @property
    def num_cells(self) -> int:
        return self.grid.size

    @property
    def num_edges(self) -> int:
        return len(self.src)

    @property
    def slack(self) -> float:
        """epsilon' = epsilon + h sqrt 2, the chain quality guaranteed for the true map."""
        return self.epsilon + self.grid.h * math.sqrt(2.0)

    def out_edges(self, cell: int):
        a, b = self.indptr[cell], self.indptr[cell + 1]
        return [(int(self.dst[e]), (int(self.disp[e, 0]), int(self.disp[e, 1]))) for e in range(a, b)]

    def out_degree(self) -> np.ndarray:
        return np.diff(self.indptr)

    def edge_set(self) -> set:
        return set(zip(self.src.tolist(), self.dst.tolist(), self.disp[:, 0].tolist(), self.disp[:, 1].tolist()))

    def max_step(self) -> int:
        return int(np.max(np.abs(self.disp))) if self.num_edges else 0

    def summary(self) -> dict:
        deg = self.out_degree()
        return {
            "schema": "rotset/1",
            "map": self.map_spec,
            "N": self.N,
            "epsilon": self.epsilon,
            "slack": self.slack,
            "cells": self.num_cells,
            "edges": self.num_edges,
            "min_out_degree": int(deg.min()),
            "max_out_degree": int(deg.max()),
            "max_step": self.max_step(),
        }


def _edges_for_cells(F: LiftMap, grid: Grid, epsilon: float, cells: np.ndarray):
    N = grid.N
    u = F(grid.centers(cells)) * N - 0.5  # image in cell-index units
    r = epsilon * N
    R = int(math.ceil(r)) + 1
    off = np.arange(-R, R + 2)
    base = np.floor(u).astype(np.int64)
    I = base[:, 0, None, None] + off[None, :, None]
    J = base[:, 1, None, None] + off[None, None, :]
    d2 = (u[:, 0, None, None] - I) ** 2 + (u[:, 1, None, None] - J) ** 2
    mask = d2 < r * r
    k, a, b = np.nonzero(mask)
    I, J = I[k, a, 0], J[k, 0, b]
    src = cells[k]
    dst = (I % N) * N + (J % N)
    disp = np.stack([I // N, J // N], axis=-1)
    return src, dst, disp, d2[k, a, b]


def build_chain_graph(F: LiftMap, N: int, epsilon: float, chunk: int = 512) -> GridDigraph:
    """Grid digraph of epsilon-transitions between cell centers.

    Each image ``F(center(c))`` is compared against the lifted centers
    ``center(c') + w``; the nearest lift of every target cell within
    ``epsilon`` gives one edge.
    """
    if not epsilon > 0:
        raise ValueError(f"epsilon must be > 0, got {epsilon!r}")
    grid = Grid(int(N))
    cells = np.arange(grid.size)
    parts = [cells[i:i + chunk] for i in range(0, len(cells), chunk)]
    work = lambda c: _edges_for_cells(F, grid, float(epsilon), c)
    workers = min(worker_count(), len(parts))
    if workers > 1:
        with ThreadPoolExecutor(workers) as ex:
            results = list(ex.map(work, parts))
    else:
        results = [work(c) for c in parts]
    src = np.concatenate([r[0] for r in results])
    dst = np.concatenate([r[1] for r in results])
    disp = np.concatenate([r[2] for r in results]).reshape(-1, 2)
    d2 = np.concatenate([r[3] for r in results])
    # keep the nearest lift per (src, dst); only matters once epsilon >= 1/2
    order = np.lexsort((disp[:, 1], disp[:, 0], d2, dst, src))
    src, dst, disp = src[order], dst[order], disp[order]
    first = np.ones(len(src), dtype=bool)
    first[1:] = (src[1:] != src[:-1]) | (dst[1:] != dst[:-1])
    src, dst, disp = src[first], dst[first], disp[first]
    order = np.lexsort((disp[:, 1], disp[:, 0], dst, src))
    src, dst, disp = src[order], dst[order], disp[order].astype(np.int64)
    indptr = np.searchsorted(src, np.arange(grid.size + 1))
    try:
        spec = F.spec()
    except MapSpecError:
        spec = ""  # plug-in maps have no mini-language form
    return GridDigraph(grid, float(epsilon), src, dst, disp, indptr, spec)


# --- chains ----------------------------------------------------------------

@dataclass(frozen=True)
class Chain:
    cells: tuple
    steps: tuple  # per-step lattice vectors
    epsilon: float
    N: int

    def __post_init__(self):
        if len(self.cells) != len(self.steps) + 1:
            raise ValueError("a chain has one more cell than steps")

    @property
    def length(self) -> int:
        return len(self.steps)

    @property
    def displacement(self) -> tuple[int, int]:
        return (sum(s[0] for s in self.steps), sum(s[1] for s in self.steps))

    @property
    def start(self) -> int:
        return self.cells[0]

    @property
    def end(self) -> int:
        return self.cells[-1]

    @property
    def slack(self) -> float:
        return self.epsilon + math.sqrt(2.0) / self.N

    def is_periodic(self) -> bool:
        return self.length > 0 and self.start == self.end and self.displacement == (0, 0)

    def lifted_points(self) -> np.ndarray:
        """Lift of the chain starting at the first cell center."""
        grid = Grid(self.N)
        c = grid.centers(list(self.cells))
        offs = np.zeros((len(self.cells), 2))
        if self.steps:
            offs[1:] = np.cumsum(np.asarray(self.steps, dtype=float), axis=0)
        return c + offs

    def as_json(self) -> dict:
        return {
            "cells": [int(c) for c in self.cells],
            "steps": [[int(a), int(b)] for a, b in self.steps],
            "displacement": list(self.displacement),
            "length": self.length,
            "epsilon": self.epsilon,
            "N": self.N,
            "slack": self.slack,
        }


def single_cell_chain(cell: int, G: GridDigraph) -> Chain:
    return Chain((int(cell),), (), G.epsilon, G.N)


def replay(F: LiftMap, chain: Chain) -> np.ndarray:
    """Per-step residuals |F(z_i) - (z_{i+1} + w_i)| at cell centers."""
    if chain.length == 0:
        return np.zeros(0)
    grid = Grid(chain.N)
    z = grid.centers(list(chain.cells))
    w = np.asarray(chain.steps, dtype=float)
    return np.linalg.norm(F(z[:-1]) - (z[1:] + w), axis=1)


def translate_concat(a: Chain, b: Chain) -> Chain:
    """Follow ``a`` by the translate of ``b`` that starts where ``a`` ends."""
    if a.end != b.start:
        raise ValueError(f"cannot concatenate: chain ends in cell {a.end}, next starts in {b.start}")
    if a.N != b.N:
        raise ValueError("chains live on different grids")
    return Chain(a.cells + b.cells[1:], a.steps + b.steps, max(a.epsilon, b.epsilon), a.N)


def repeat_chain(chain: Chain, times: int) -> Chain:
    out = Chain(chain.cells[:1], (), chain.epsilon, chain.N)
    for _ in range(times):
        out = translate_concat(out, chain)
    return out


def combine_chains(chains, weights) -> Chain:
    """Concatenate ``weights[i]`` copies of each loop ``chains[i]`` in turn.

    All chains must start and end in the same cell; the result has
    displacement ``sum weights[i] * w_i``.
    """
    if not chains:
        raise ValueError("no chains to combine")
    out = Chain(chains[0].cells[:1], (), chains[0].epsilon, chains[0].N)
    for ch, a in zip(chains, weights):
        if a < 0:
            raise ValueError("weights must be nonnegative")
        out = translate_concat(out, repeat_chain(ch, int(a)))
    return out


# --- breadth-first search over (cell, displacement) -------------------------

def _bfs(G: GridDigraph, start: int, max_len: int, accept, target_disp=None,
         allowed: np.ndarray | None = None, window: int | None = None):
    """Level-synchronous BFS from ``(start, (0, 0))``.

    ``accept(cells, dx, dy)`` flags candidate states that end the search;
    the first accepted state in key order at the smallest level wins.  When
    ``target_disp`` is given, states that cannot reach it in the remaining
    steps are dropped.  Returns the chain or None.
    """
    step = max(G.max_step(), 1)
    D = int(math.ceil(max_len * step)) if window is None else int(window)
    W = 2 * D + 1
    cells = np.array([start], dtype=np.int64)
    dx = np.zeros(1, dtype=np.int64)
    dy = np.zeros(1, dtype=np.int64)
    keys = (cells * W + D) * W + D
    visited = keys.copy()
    levels = []  # (parent index, edge index) per level
    deg = G.out_degree()
    for level in range(1, max_len + 1):
        counts = deg[cells]
        total = int(counts.sum())
        if total == 0:
            return None
        parent = np.repeat(np.arange(len(cells)), counts)
        offsets = np.cumsum(counts) - counts
        edge = G.indptr[cells][parent] + (np.arange(total) - offsets[parent])
        nc = G.dst[edge]
        ndx = dx[parent] + G.disp[edge, 0]
        ndy = dy[parent] + G.disp[edge, 1]
        keep = (np.abs(ndx) <= D) & (np.abs(ndy) <= D)
        if allowed is not None:
            keep &= allowed[nc]
        if target_disp is not None:
            rem = (max_len - level) * step
            keep &= (np.abs(target_disp[0] - ndx) <= rem) & (np.abs(target_disp[1] - ndy) <= rem)
        parent, edge, nc, ndx, ndy = parent[keep], edge[keep], nc[keep], ndx[keep], ndy[keep]
        nkeys = (nc * W + (ndx + D)) * W + (ndy + D)
        hit = accept(nc, ndx, ndy)
        if hit.any():
            idx = np.flatnonzero(hit)
            best = idx[np.argmin(nkeys[idx])]
            # among equal keys the first generated (smallest parent key) wins
            best = idx[nkeys[idx] == nkeys[best]][0]
            levels.append((parent, edge))
            return _reconstruct(G, start, levels, int(best))
        fresh = ~np.isin(nkeys, visited)
        nkeys, parent, edge, nc, ndx, ndy = (a[fresh] for a in (nkeys, parent, edge, nc, ndx, ndy))
        nkeys, first = np.unique(nkeys, return_index=True)
        if len(nkeys) == 0:
            return None
        parent, edge = parent[first], edge[first]
        cells, dx, dy = nc[first], ndx[first], ndy[first]
        visited = np.union1d(visited, nkeys)
        levels.append((parent, edge))
    return None


def _reconstruct(G: GridDigraph, start: int, levels, idx: int) -> Chain:
    edges = []
    for parent, edge in reversed(levels):
        edges.append(int(edge[idx]))
        idx = int(parent[idx])
    edges.reverse()
    cells = [int(start)] + [int(G.dst[e]) for e in edges]
    steps = [(int(G.disp[e, 0]), int(G.disp[e, 1])) for e in edges]
    return Chain(tuple(cells), tuple(steps), G.epsilon, G.N)


def find_chain_to_target(G: GridDigraph, start: int, target_cell: int, target_disp, max_len: int):
    """Shortest chain from ``start`` to ``target_cell`` with lattice displacement ``target_disp``.

    Returns None when no such chain of length <= max_len exists (within the
    displacement window ``max_len * max_step``, which never truncates a
    chain of that length).
    """
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    tx, ty = int(target_disp[0]), int(target_disp[1])
    if start == target_cell and (tx, ty) == (0, 0):
        return single_cell_chain(start, G)
    step = G.max_step()
    if max(abs(tx), abs(ty)) > max_len * step:
        return None
    return _bfs(G, int(start), max_len,
                lambda c, x, y: (c == target_cell) & (x == tx) & (y == ty),
                target_disp=(tx, ty))


def _zero_cycle_excluded(G: GridDigraph, comp_nodes, src, dst, disp) -> bool:
    """True when some axis direction has negative maximum cycle mean on the component."""
    for u in ((1, 0), (-1, 0), (0, 1), (0, -1)):
        w = disp @ np.array(u, dtype=float)
        val = graphs.howard(len(comp_nodes), src, dst, w)[0]
        if val < -1e-9:
            return True
    return False


def find_periodic_chain(G: GridDigraph, max_len: int):
    """Shortest closed chain with zero lattice displacement, or None.

    Zero-displacement self-loops are checked first.  Components whose cycles
    all drift strictly to one side (negative maximum cycle mean along an axis)
    cannot carry such a chain at any length and are skipped; the others are
    searched from each start cell over cells with larger id.
    """
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    loops = np.flatnonzero((G.src == G.dst) & (G.disp[:, 0] == 0) & (G.disp[:, 1] == 0))
    if len(loops):
        c = int(G.src[loops].min())
        return Chain((c, c), ((0, 0),), G.epsilon, G.N)
    best = None
    for comp in graphs.cyclic_components(G.num_cells, G.src, G.dst):
        comp = np.asarray(comp)
        inside = np.zeros(G.num_cells, dtype=bool)
        inside[comp] = True
        emask = inside[G.src] & inside[G.dst]
        relabel = np.full(G.num_cells, -1, dtype=np.int64)
        relabel[comp] = np.arange(len(comp))
        if _zero_cycle_excluded(G, comp, relabel[G.src[emask]], relabel[G.dst[emask]], G.disp[emask]):
            continue
        for s in comp:
            budget = max_len if best is None else best.length - 1
            if budget < 1:
                break
            allowed = inside & (np.arange(G.num_cells) >= s)
            ch = _bfs(G, int(s), budget, lambda c, x, y, s=s: (c == s) & (x == 0) & (y == 0),
                      target_disp=(0, 0), allowed=allowed)
            if ch is not None and (best is None or ch.length < best.length):
                best = ch
    return best


def find_return_chain(G: GridDigraph, start: int, direction, delta: float, max_len: int):
    """Shortest chain from ``start`` back to ``start`` with nonzero displacement w
    satisfying |w/|w| - u/|u|| < delta, where u is ``direction``."""
    u = np.asarray(direction, dtype=float)
    u = u / np.linalg.norm(u)

    def accept(c, x, y):
        norm = np.hypot(x, y)
        ok = (c == start) & (norm > 0)
        with np.errstate(invalid="ignore", divide="ignore"):
            err = np.hypot(x / norm - u[0], y / norm - u[1])
        return ok & (err < delta)

    return _bfs(G, int(start), max_len, accept)


# --- Steinitz combinations ------------------------------------------------

@dataclass(frozen=True)
class SteinitzCombination:
    weights: tuple
    vectors: tuple

    def total(self) -> tuple[int, int]:
        return (sum(a * v[0] for a, v in zip(self.weights, self.vectors)),
                sum(a * v[1] for a, v in zip(self.weights, self.vectors)))


def steinitz_combination(vectors):
    """Positive integer weights A_i with sum A_i w_i = 0, or None.

    Solves min sum A_i subject to sum A_i w_i = 0, A_i >= 1 exactly over the
    rationals (with A_i = 1 + B_i the LP has two equality rows, so an optimum
    sits on a basis of at most two columns; all such bases are enumerated),
    then clears denominators.
    """
    vecs = [(int(v[0]), int(v[1])) for v in vectors]
    if not vecs:
        raise ValueError("need at least one vector")
    bx = -sum(v[0] for v in vecs)
    by = -sum(v[1] for v in vecs)
    best = None  # (objective, subset, values)

    def consider(obj, subset, vals):
        nonlocal best
        if best is None or (obj, subset) < (best[0], best[1]):
            best = (obj, subset, vals)

    if bx == 0 and by == 0:
        consider(Fraction(0), (), ())
    for i, (x, y) in enumerate(vecs):
        if (x, y) == (0, 0):
            continue
        if x * by - y * bx != 0:
            continue
        t = Fraction(bx, x) if x else Fraction(by, y)
        if t >= 0:
            consider(t, (i,), (t,))
    for i, j in combinations(range(len(vecs)), 2):
        (a, c), (b, d) = vecs[i], vecs[j]
        det = a * d - b * c
        if det == 0:
            continue
        ti = Fraction(bx * d - b * by, det)
        tj = Fraction(a * by - c * bx, det)
        if ti >= 0 and tj >= 0:
            consider(ti + tj, (i, j), (ti, tj))
    if best is None:
        return None
    A = [Fraction(1)] * len(vecs)
    for k, t in zip(best[1], best[2]):
        A[k] += t
    lcm = 1
    for a in A:
        lcm = lcm * a.denominator // math.gcd(lcm, a.denominator)
    ints = [int(a * lcm) for a in A]
    g = 0
    for a in ints:
        g = math.gcd(g, a)
    ints = [a // g for a in ints]
    combo = SteinitzCombination(tuple(ints), tuple(vecs))
    assert combo.total() == (0, 0)
    return combo


def steinitz_periodic_chain(G: GridDigraph, start: int, directions, delta: float, max_len: int):
    """Periodic chain assembled from loops at ``start`` drifting along ``directions``.

    One loop is found per direction; if the origin is a positive combination
    of their displacements the loops are concatenated with the Steinitz
    weights, giving a closed chain with zero displacement.  Returns
    ``(chain, loops, combination)`` or None.
    """
    loops = []
    for u in directions:
        ch = find_return_chain(G, start, u, delta, max_len)
        if ch is None:
            return None
        loops.append(ch)
    combo = steinitz_combination([ch.displacement for ch in loops])
    if combo is None:
        return None
    return combine_chains(loops, combo.weights), loops, combo


# --- outer approximation ----------------------------------------------------

def rotation_set_outer(G: GridDigraph, directions: int = DEFAULT_DIRECTIONS,
                       method: str = "auto") -> RotationSetEstimate | None:
    """Half-plane polygon from directional maximum cycle means of the displacement.

    Every cycle of the graph has mean displacement inside the polygon; the
    true rotation set lies within ``G.slack`` of it in every direction.
    Returns None when the graph has no cycle.
    """
    if directions < 3:
        raise ValueError("need at least 3 directions")
    m, keep, s, d, _ = graphs.restrict_to_cycles(G.num_cells, G.src, G.dst)
    if m == 0:
        return None
    thetas = hl.directions(directions)
    disp = G.disp[keep].astype(float)
    values = []
    for u in hl.unit(thetas):
        values.append(graphs._mcm(m, s, d, disp @ u, method))
    poly = hl.clip_halfplanes(thetas, np.asarray(values) + 1e-12)
    return RotationSetEstimate(
        hull_vertices=poly,
        support=list(zip(thetas.tolist(), [float(v) for v in values])),
        kind=GRAPH,
        slack=G.slack,
        diagnostics={"N": G.N, "epsilon": G.epsilon, "cyclic_cells": int(m),
                     "cyclic_edges": int(len(s))},
    )


# --- binary export ----------------------------------------------------------

def write_graph(G: GridDigraph, path) -> None:
    """Binary adjacency: header (magic, N, epsilon, edge count) then edge records."""
    rec = np.empty(G.num_edges, dtype=_EDGE_DTYPE)
    rec["src"], rec["dst"] = G.src, G.dst
    if G.num_edges and np.max(np.abs(G.disp)) > np.iinfo(np.int16).max:
        raise OverflowError("displacement does not fit in 16 bits")
    rec["dx"], rec["dy"] = G.disp[:, 0], G.disp[:, 1]
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, G.N, G.epsilon, G.num_edges))
        fh.write(rec.tobytes())


def read_graph(path) -> GridDigraph:
    with open(path, "rb") as fh:
        head = fh.read(_HEADER.size)
        magic, N, eps, count = _HEADER.unpack(head)
        if magic != MAGIC:
            raise ValueError(f"{path}: not a grid digraph file")
        rec = np.frombuffer(fh.read(count * _EDGE_DTYPE.itemsize), dtype=_EDGE_DTYPE)
    if len(rec) != count:
        raise ValueError(f"{path}: truncated edge table")
    grid = Grid(N)
    src = rec["src"].astype(np.int64)
    dst = rec["dst"].astype(np.int64)
    disp = np.stack([rec["dx"], rec["dy"]], axis=-1).astype(np.int64)
    return GridDigraph(grid, eps, src, dst, disp, np.searchsorted(src, np.arange(grid.size + 1)))


def write_summary(G: GridDigraph, path) -> None:
    with open(path, "w") as fh:
        json.dump(G.summary(), fh, indent=2, sort_keys=True)
