"""Directed-graph algorithms: strongly connected components and maximum cycle means.

Graphs are given as edge arrays ``(src, dst, weight)`` over nodes ``0..n-1``.
"""

from __future__ import annotations

import math
from fractions import Fraction

import numpy as np


def csr(n: int, src, dst):
    """Edge order sorted by (src, dst) and the matching row pointer."""
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    order = np.lexsort((dst, src))
    indptr = np.searchsorted(src[order], np.arange(n + 1))
    return order, indptr


def tarjan_scc(n: int, indptr, indices) -> list[list[int]]:
    """Tarjan's algorithm, iterative; components come out in reverse topological order."""
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: list[int] = []
    comps: list[list[int]] = []
    counter = 0
    indptr = np.asarray(indptr).tolist()
    indices = np.asarray(indices).tolist()
    for root in range(n):
        if index[root] != -1:
            continue
        work = [(root, indptr[root])]
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        while work:
            v, i = work[-1]
            end = indptr[v + 1]
            while i < end:
                w = indices[i]
                i += 1
                if index[w] == -1:
                    work[-1] = (v, i)
                    index[w] = low[w] = counter
                    counter += 1
                    stack.append(w)
                    on_stack[w] = True
                    work.append((w, indptr[w]))
                    break
                if on_stack[w] and index[w] < low[v]:
                    low[v] = index[w]
            else:
                work.pop()
                if work:
                    u = work[-1][0]
                    if low[v] < low[u]:
                        low[u] = low[v]
                if low[v] == index[v]:
                    comp = []
                    while True:
                        w = stack.pop()
                        on_stack[w] = False
                        comp.append(w)
                        if w == v:
                            break
                    comps.append(sorted(comp))
    return comps


def cyclic_components(n: int, src, dst) -> list[list[int]]:
    """SCCs that carry at least one cycle (size > 1 or a self-loop)."""
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    order, indptr = csr(n, src, dst)
    comps = tarjan_scc(n, indptr, dst[order])
    loops = set(src[src == dst].tolist())
    return [c for c in comps if len(c) > 1 or c[0] in loops]


def karp(n: int, edges) -> float | None:
    """Maximum cycle mean of a strongly connected graph by Karp's recurrence.

    ``edges`` is a list of ``(u, v, w)``; weights may be ints or Fractions,
    in which case the answer is exact.  Returns None when there is no cycle.
    """
    if n == 0 or not edges:
        return None
    NEG = None
    incoming = [[] for _ in range(n)]
    for u, v, w in edges:
        incoming[v].append((u, w))
    D = [[NEG] * n for _ in range(n + 1)]
    D[0][0] = 0
    for k in range(1, n + 1):
        prev, cur = D[k - 1], D[k]
        for v in range(n):
            best = NEG
            for u, w in incoming[v]:
                if prev[u] is not NEG:
                    cand = prev[u] + w
                    if best is NEG or cand > best:
                        best = cand
            cur[v] = best
    result = None
    for v in range(n):
        if D[n][v] is NEG:
            continue
        worst = None
        for k in range(n):
            if D[k][v] is NEG:
                continue
            diff = D[n][v] - D[k][v]
            val = diff / (n - k) if isinstance(diff, float) else Fraction(diff) / (n - k)
            if worst is None or val < worst:
                worst = val
        if worst is not None and (result is None or worst > result):
            result = worst
    return result


def max_cycle_mean_karp(n: int, edges):
    """Maximum cycle mean over all SCCs using Karp per component."""
    if not edges:
        return None
    src = [e[0] for e in edges]
    dst = [e[1] for e in edges]
    best = None
    for comp in cyclic_components(n, src, dst):
        local = {v: i for i, v in enumerate(comp)}
        sub = [(local[u], local[v], w) for u, v, w in edges if u in local and v in local]
        val = karp(len(comp), sub)
        if val is not None and (best is None or val > best):
            best = val
    return best


def _first_argmax(values, starts, rows, idx):
    """Per-row maximum and the first edge index attaining it (edges sorted by row)."""
    best = np.maximum.reduceat(values, starts)
    hit = np.where(values >= best[rows], idx, len(values))
    return best, np.minimum.reduceat(hit, starts)


def _evaluate_policy(succ, cost):
    """Cycle means (gain) and relative values (bias) of a functional graph."""
    n = len(succ)
    K = max(1, math.ceil(math.log2(n))) + 1
    P = succ.copy()
    for _ in range(K):
        P = P[P]
    on_cycle = np.zeros(n, dtype=bool)
    on_cycle[P] = True
    M = np.arange(n)
    Q = succ.copy()
    for _ in range(K):
        M = np.minimum(M, M[Q])
        Q = Q[Q]
    label = M[P]
    lengths = np.bincount(label[on_cycle], minlength=n)
    sums = np.bincount(label[on_cycle], weights=cost[on_cycle], minlength=n)
    with np.errstate(invalid="ignore", divide="ignore"):
        gain_by_label = sums / lengths
    gain = gain_by_label[label]
    roots = np.unique(label)
    nxt = succ.copy()
    nxt[roots] = roots
    acc = cost - gain
    acc[roots] = 0.0
    for _ in range(K):
        acc = acc + acc[nxt]
        nxt = nxt[nxt]
    return gain, acc, label


def howard_numpy(n: int, src, dst, weight, tol: float = 1e-10, max_iter: int = 10_000,
           start_policy=None, return_policy: bool = False, presorted: bool = False):
    """Maximum cycle mean by Howard's policy iteration (vectorised numpy).

    Every node must have an outgoing edge.  Returns ``(value, cycle)`` where
    ``cycle`` lists the nodes of an optimal cycle.  ``start_policy`` (one
    chosen edge per node, as returned with ``return_policy=True``) warm-starts
    the iteration; edges are indexed in (src, dst) sorted order, which the
    caller may promise with ``presorted``.
    """
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    weight = np.asarray(weight, dtype=float)
    if presorted:
        indptr = np.searchsorted(src, np.arange(n + 1))
    else:
        order, indptr = csr(n, src, dst)
        src, dst, weight = src[order], dst[order], weight[order]
    if np.any(indptr[1:] == indptr[:-1]):
        raise ValueError("howard requires out-degree >= 1 at every node")
    starts = indptr[:-1]
    idx = np.arange(len(src))
    if start_policy is None:
        _, policy = _first_argmax(weight, starts, src, idx)
    else:
        policy = np.asarray(start_policy, dtype=np.int64)
    for _ in range(max_iter):
        succ, cost = dst[policy], weight[policy]
        gain, bias, label = _evaluate_policy(succ, cost)
        cand = gain[dst]
        best, arg = _first_argmax(cand, starts, src, idx)
        better = best > gain + tol
        if better.any():
            policy = np.where(better, arg, policy)
            continue
        val = weight + bias[dst]
        if gain.max() - gain.min() > tol:
            val[np.abs(cand - gain[src]) > tol] = -np.inf
        best, arg = _first_argmax(val, starts, src, idx)
        better = best - gain > bias + tol
        if better.any():
            policy = np.where(better, arg, policy)
            continue
        top = int(np.argmax(gain))
        root = int(label[top])
        cycle = [root]
        v = int(succ[root])
        while v != root:
            cycle.append(v)
            v = int(succ[v])
        if return_policy:
            return float(gain[top]), cycle, policy
        return float(gain[top]), cycle
    raise RuntimeError("policy iteration did not converge")


try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None


if numba is not None:
    @numba.njit(cache=True)
    def _howard_kernel(n, indptr, dst, weight, policy, tol, max_iter):
        gain = np.zeros(n)
        bias = np.zeros(n)
        mark = np.empty(n, dtype=np.int64)
        done = np.empty(n, dtype=np.bool_)
        stack = np.empty(n, dtype=np.int64)
        for it in range(max_iter):
            mark[:] = -1
            done[:] = False
            for v in range(n):
                if done[v]:
                    continue
                top = 0
                u = v
                while mark[u] == -1:
                    mark[u] = v
                    stack[top] = u
                    top += 1
                    u = dst[policy[u]]
                if mark[u] == v and not done[u]:
                    total = 0.0
                    length = 0
                    x = u
                    while True:
                        total += weight[policy[x]]
                        length += 1
                        x = dst[policy[x]]
                        if x == u:
                            break
                    g = total / length
                    gain[u] = g
                    bias[u] = 0.0
                    done[u] = True
                for k in range(top - 1, -1, -1):
                    x = stack[k]
                    if done[x]:
                        continue
                    y = dst[policy[x]]
                    gain[x] = gain[y]
                    bias[x] = weight[policy[x]] - gain[y] + bias[y]
                    done[x] = True
            changed = False
            for v in range(n):
                best = gain[v]
                arg = -1
                for e in range(indptr[v], indptr[v + 1]):
                    if gain[dst[e]] > best + tol:
                        best = gain[dst[e]]
                        arg = e
                if arg >= 0:
                    policy[v] = arg
                    changed = True
            if changed:
                continue
            for v in range(n):
                best = bias[v]
                arg = -1
                for e in range(indptr[v], indptr[v + 1]):
                    y = dst[e]
                    if abs(gain[y] - gain[v]) <= tol:
                        val = weight[e] - gain[v] + bias[y]
                        if val > best + tol:
                            best = val
                            arg = e
                if arg >= 0:
                    policy[v] = arg
                    changed = True
            if not changed:
                return gain, it + 1
        return gain, -1


def howard(n: int, src, dst, weight, tol: float = 1e-10, max_iter: int = 10_000,
           presorted: bool = False):
    """Maximum cycle mean by Howard's policy iteration.

    Every node must have an outgoing edge.  Returns ``(value, cycle)`` where
    ``cycle`` lists the nodes of an optimal cycle.  Uses a compiled kernel
    when numba is available, else :func:`howard_numpy`.
    """
    if numba is None:
        return howard_numpy(n, src, dst, weight, tol, max_iter, presorted=presorted)
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    weight = np.asarray(weight, dtype=float)
    if presorted:
        indptr = np.searchsorted(src, np.arange(n + 1))
    else:
        order, indptr = csr(n, src, dst)
        src, dst, weight = src[order], dst[order], weight[order]
    if np.any(indptr[1:] == indptr[:-1]):
        raise ValueError("howard requires out-degree >= 1 at every node")
    _, policy = _first_argmax(weight, indptr[:-1], src, np.arange(len(src)))
    policy = np.ascontiguousarray(policy, dtype=np.int64)
    gain, iters = _howard_kernel(n, indptr, dst, weight, policy, tol, max_iter)
    if iters < 0:
        raise RuntimeError("policy iteration did not converge")
    top = int(np.argmax(gain))
    # walk the final policy from the best node until it closes a cycle
    seen = {}
    v = top
    while v not in seen:
        seen[v] = len(seen)
        v = int(dst[policy[v]])
    order_ = sorted(seen, key=seen.get)
    cycle = order_[seen[v]:]
    return float(gain[top]), cycle


KARP_BUDGET = 200_000


def restrict_to_cycles(n: int, src, dst):
    """Edges internal to cyclic SCCs, relabelled onto ``0..m-1``.

    Returns ``(m, keep, s, d, nodes)`` where ``keep`` masks the original
    edges and ``nodes`` maps new labels back to old ones.
    """
    src = np.asarray(src, dtype=np.int64)
    dst = np.asarray(dst, dtype=np.int64)
    comp_of = np.full(n, -1, dtype=np.int64)
    for i, c in enumerate(cyclic_components(n, src, dst)):
        comp_of[c] = i
    keep = (comp_of[src] >= 0) & (comp_of[src] == comp_of[dst])
    nodes = np.flatnonzero(comp_of >= 0)
    relabel = np.full(n, -1, dtype=np.int64)
    relabel[nodes] = np.arange(len(nodes))
    return len(nodes), keep, relabel[src[keep]], relabel[dst[keep]], nodes


def max_cycle_mean(n: int, src, dst, weight, method: str = "auto"):
    """Maximum cycle mean over the whole graph (None if acyclic).

    ``method`` is "karp", "howard" or "auto" (Karp when nodes x edges of the
    cyclic part is within ``KARP_BUDGET``).
    """
    m, keep, s, d, _ = restrict_to_cycles(n, src, dst)
    if m == 0:
        return None
    w = np.asarray(weight, dtype=float)[keep]
    return _mcm(m, s, d, w, method)


def _mcm(m, s, d, w, method):
    if method == "auto":
        method = "karp" if m * len(s) <= KARP_BUDGET else "howard"
    if method == "karp":
        return float(max_cycle_mean_karp(m, list(zip(s.tolist(), d.tolist(), w.tolist()))))
    if method == "howard":
        return howard(m, s, d, w)[0]
    raise ValueError(f"unknown method {method!r}")
