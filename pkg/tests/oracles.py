"""Brute-force reference implementations used by the tests."""

from fractions import Fraction
from itertools import permutations


def simple_cycles(n, edges):
    """All simple cycles as edge-index lists (exhaustive; small graphs only)."""
    out = {}
    for k, (u, v, _) in enumerate(edges):
        out.setdefault(u, []).append(k)
    cycles = []

    def walk(start, node, used_nodes, path):
        for k in out.get(node, []):
            v = edges[k][1]
            if v == start:
                cycles.append(path + [k])
            elif v > start and v not in used_nodes:
                walk(start, v, used_nodes | {v}, path + [k])

    for s in range(n):
        walk(s, s, {s}, [])
    return cycles


def brute_max_cycle_mean(n, edges):
    best = None
    for cyc in simple_cycles(n, edges):
        m = Fraction(sum(edges[k][2] for k in cyc), len(cyc))
        if best is None or m > best:
            best = m
    return best


def reach(n, edges):
    adj = [set() for _ in range(n)]
    for u, v, *_ in edges:
        adj[u].add(v)
    R = []
    for s in range(n):
        seen, stack = {s}, [s]
        while stack:
            for v in adj[stack.pop()]:
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        R.append(seen)
    return R


def brute_scc(n, edges):
    R = reach(n, edges)
    comps = {frozenset(v for v in range(n) if v in R[u] and u in R[v]) for u in range(n)}
    return comps


def origin_interior(vectors):
    """True when (0,0) is interior to the hull of integer vectors (exact).

    The origin fails to be interior iff some d != 0 has <v, d> <= 0 for all v;
    the cone of such d is spanned by normals of the vectors themselves.
    """
    pts = [v for v in set(vectors) if v != (0, 0)]
    if not pts:
        return False
    for p in pts:
        for d in ((-p[1], p[0]), (p[1], -p[0])):
            if all(d[0] * v[0] + d[1] * v[1] <= 0 for v in pts):
                return False
    return True


def all_in_closed_halfplane(vectors, normal):
    return all(normal[0] * v[0] + normal[1] * v[1] >= 0 for v in vectors)
