import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rotset import chains, hull as hl, zoo
from rotset.estimators import sample_rotation_set
from rotset.torus import identity, power_shift

from conftest import zoo_maps
from oracles import all_in_closed_halfplane, origin_interior


def assert_sound(F, ch):
    res = chains.replay(F, ch)
    assert np.all(res < ch.slack)
    assert ch.displacement == tuple(np.sum(np.asarray(ch.steps, dtype=int).reshape(-1, 2), axis=0))


@pytest.fixture(scope="module")
def shear_graph():
    return chains.build_chain_graph(zoo.sine_shear_h(0.25, 0.5), 64, 0.1)


def test_grid_cells():
    g = chains.Grid(8)
    assert g.cell_of((0.0, 0.0)) == 0
    assert g.cell_of((0.99, 0.0)) == g.cell_id(7, 0)
    assert g.cell_of((1.01, -0.01)) == g.cell_id(0, 7)
    assert np.allclose(g.centers([g.cell_id(2, 3)]), [[2.5 / 8, 3.5 / 8]])


def test_identity_graph_neighbours():
    N = 16
    G = chains.build_chain_graph(identity(), N, 2.0 / N)
    assert np.all(G.out_degree() == 9)
    assert np.all(G.disp[G.src == G.dst] == 0)
    # interior cells step with no lattice vector; across the seam a unit step is recorded
    assert {d for _, d in G.out_edges(G.grid.cell_id(5, 5))} == {(0, 0)}
    assert (-1, 0) in {d for _, d in G.out_edges(G.grid.cell_id(0, 5))}


def test_unit_translation_graph():
    N = 16
    G = chains.build_chain_graph(zoo.translation((1, 0)), N, 1.0 / N)
    assert G.num_edges == N * N
    assert np.array_equal(G.src, G.dst)
    assert np.all(G.disp == [1, 0])


def test_edge_count_bound():
    N, eps = 16, 0.1
    G = chains.build_chain_graph(zoo.sine_shear_h(0.25, 0.5), N, eps)
    h = 1.0 / N
    per_image = (2 * math.ceil((eps + h) / h) + 1) ** 2
    assert 0 < G.num_edges <= N * N * per_image


def test_invalid_epsilon():
    with pytest.raises(ValueError):
        chains.build_chain_graph(identity(), 8, 0.0)


@pytest.mark.parametrize("e1,e2", [(0.02, 0.05), (0.05, 0.11)])
def test_epsilon_monotone(e1, e2):
    F = zoo.get("two_shear").build()
    G1 = chains.build_chain_graph(F, 24, e1)
    G2 = chains.build_chain_graph(F, 24, e2)
    assert G1.edge_set() <= G2.edge_set()
    o1 = chains.rotation_set_outer(G1, 16)
    o2 = chains.rotation_set_outer(G2, 16)
    assert np.all(o1.support_values() <= o2.support_values() + 1e-12)


def test_translation_chain_length():
    N = 16
    G = chains.build_chain_graph(zoo.translation((1, 0)), N, 1.0 / N)
    c = G.grid.cell_of((0, 0))
    for k in (1, 3, 5):
        ch = chains.find_chain_to_target(G, c, c, (k, 0), 10)
        assert ch.length == k and ch.displacement == (k, 0)


def test_identity_has_no_drift_chain():
    G = chains.build_chain_graph(identity(), 16, 2.0 / 16)
    # each step moves at most one cell, so a unit drift needs a full lap of 16 steps
    assert chains.find_chain_to_target(G, 0, 0, (1, 0), 15) is None
    lap = chains.find_chain_to_target(G, 0, 0, (1, 0), 16)
    assert lap.length == 16
    assert_sound(identity(), lap)
    trivial = chains.find_chain_to_target(G, 0, 0, (0, 0), 30)
    assert trivial.length == 0


def test_shear_return_chain(shear_graph):
    F = zoo.sine_shear_h(0.25, 0.5)
    G = shear_graph
    for p, expect in (((0.0, 0.0), 5), ((0.0, 0.25), 4)):
        c = G.grid.cell_of(p)
        ch = chains.find_chain_to_target(G, c, c, (3, 0), 12)
        assert ch is not None and ch.displacement == (3, 0)
        assert ch.start == c and ch.end == c
        assert ch.length == expect
        assert_sound(F, ch)


def test_concatenation_ledger(shear_graph):
    G = shear_graph
    c = G.grid.cell_of((0.0, 0.25))
    a = chains.find_chain_to_target(G, c, c, (3, 0), 12)
    assert chains.translate_concat(a, a).displacement == (6, 0)
    one = chains.single_cell_chain(c, G)
    assert chains.translate_concat(a, one) == a
    assert chains.translate_concat(one, a) == a
    b = chains.find_chain_to_target(G, c, c, (2, 0), 12)
    combo = chains.combine_chains([a, b], [2, 3])
    assert combo.displacement == (12, 0)
    assert_sound(zoo.sine_shear_h(0.25, 0.5), combo)
    with pytest.raises(ValueError):
        chains.translate_concat(a, chains.single_cell_chain(c + 1, G))


def test_steinitz_examples():
    assert chains.steinitz_combination([(1, 0), (0, 1), (-1, -1)]).weights == (1, 1, 1)
    assert chains.steinitz_combination([(2, 1), (-1, 0), (0, -1)]).weights == (1, 2, 1)
    assert chains.steinitz_combination([(1, 0), (2, 0)]) is None


vec = st.tuples(st.integers(-5, 5), st.integers(-5, 5))


@given(st.lists(vec, min_size=3, max_size=6))
def test_steinitz_property(vs):
    combo = chains.steinitz_combination(vs)
    if origin_interior(vs):
        assert combo is not None
    if combo is not None:
        assert all(isinstance(a, int) and a >= 1 for a in combo.weights)
        assert combo.total() == (0, 0)
    if any(all_in_closed_halfplane(vs, d) and any(d[0] * v[0] + d[1] * v[1] > 0 for v in vs)
           for d in [(1, 0), (0, 1), (-1, 0), (0, -1)]):
        assert combo is None


def test_steinitz_periodic_chain(shear_graph):
    # identity with a wide epsilon moves freely across the seam in every direction
    G = chains.build_chain_graph(identity(), 16, 0.13)
    res = chains.steinitz_periodic_chain(G, 0, [(1, 0), (0, 1), (-1, -1)], 0.5, 40)
    assert res is not None
    ch, loops, combo = res
    assert ch.is_periodic()
    assert_sound(identity(), ch)


def test_periodic_chain_identity():
    G = chains.build_chain_graph(identity(), 16, 2.0 / 16)
    ch = chains.find_periodic_chain(G, 5)
    assert ch.length == 1 and ch.displacement == (0, 0)


def test_periodic_chain_reduced_translation():
    G = chains.build_chain_graph(power_shift(zoo.translation((0.5, 0.25)), 4, (2, 1)), 16, 1.0 / 16)
    ch = chains.find_periodic_chain(G, 3)
    assert ch.length == 1 and ch.displacement == (0, 0)


def test_periodic_chain_absent_for_irrational_band():
    F = zoo.get("translation_band").build()
    G = chains.build_chain_graph(F, 64, 0.02)
    assert G.slack < 0.05
    assert chains.find_periodic_chain(G, 50) is None


def _random_cycles(G, count, seed):
    """Cycles found by random walks (loop erased at the first repeated cell)."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        node, seen, path = int(rng.integers(G.num_cells)), {}, []
        while node not in seen:
            seen[node] = len(path)
            k = int(rng.integers(G.indptr[node], G.indptr[node + 1]))
            path.append(k)
            node = int(G.dst[k])
        out.append(path[seen[node]:])
    return out


def test_displacement_band_on_cycles():
    F = zoo.sine_shear_h(0.25, 0.5)
    G = chains.build_chain_graph(F, 32, 0.08)
    centers = G.grid.centers()
    for cyc in _random_cycles(G, 300, seed=5):
        net = np.sum(G.disp[cyc], axis=0)
        true = np.sum(F.displacement(centers[G.src[cyc]]), axis=0)
        assert np.linalg.norm(net - true) <= len(cyc) * G.slack + 1e-12


def test_outer_examples():
    t = chains.rotation_set_outer(chains.build_chain_graph(zoo.translation((0.5, 0.25)), 16, 1 / 16), 32)
    assert hl.hausdorff(t.hull_vertices, [(0.5, 0.25)]) <= t.slack
    i = chains.rotation_set_outer(chains.build_chain_graph(identity(), 16, 1 / 16), 32)
    assert hl.hausdorff(i.hull_vertices, [(0, 0)]) <= i.slack
    with pytest.raises(ValueError):
        chains.rotation_set_outer(chains.build_chain_graph(identity(), 4, 0.3), 2)


def test_outer_none_when_acyclic():
    # a strong shift within a tiny epsilon links no cell back to itself
    empty = chains.GridDigraph(chains.Grid(4), 0.1, np.zeros(0, np.int64), np.zeros(0, np.int64),
                               np.zeros((0, 2), np.int64), np.zeros(17, np.int64))
    assert chains.rotation_set_outer(empty, 8) is None


@pytest.mark.parametrize("name,F", zoo_maps())
def test_containment_on_zoo(name, F):
    G = chains.build_chain_graph(F, 64, 0.05)
    outer = chains.rotation_set_outer(G, 32)
    inner = sample_rotation_set(F, 200, 200, seed=1, num_directions=32)
    u = hl.unit(outer.thetas())
    excess = np.max(np.asarray(inner.hull_vertices) @ u.T - outer.support_values()[None, :])
    assert excess <= G.slack


def test_binary_round_trip(tmp_path, shear_graph):
    G = chains.build_chain_graph(zoo.get("two_shear_drift").build(), 16, 0.07)
    path = tmp_path / "g.rsgd"
    chains.write_graph(G, path)
    raw = path.read_bytes()
    assert raw[:4] == b"RSGD"
    H = chains.read_graph(path)
    assert H.N == G.N and H.epsilon == G.epsilon
    assert np.array_equal(H.src, G.src) and np.array_equal(H.dst, G.dst) and np.array_equal(H.disp, G.disp)
    assert np.array_equal(H.indptr, G.indptr)
    chains.write_summary(G, tmp_path / "g.json")
    bad = tmp_path / "bad.rsgd"
    bad.write_bytes(b"XXXX" + raw[4:])
    with pytest.raises(ValueError):
        chains.read_graph(bad)


def test_bfs_tie_break_deterministic(shear_graph):
    c = shear_graph.grid.cell_of((0.0, 0.0))
    a = chains.find_chain_to_target(shear_graph, c, c, (3, 0), 12)
    b = chains.find_chain_to_target(shear_graph, c, c, (3, 0), 12)
    assert a == b
