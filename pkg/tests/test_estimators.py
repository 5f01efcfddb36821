import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rotset import estimators as est
from rotset import hull as hl
from rotset import zoo
from rotset.torus import HShear, VShear, identity

from conftest import zoo_maps

MAPS = zoo_maps()


@given(k=st.integers(0, len(MAPS) - 1), x=st.floats(-3, 3), y=st.floats(-3, 3), n=st.integers(1, 200))
def test_telescoping(k, x, y, n):
    F = MAPS[k][1]
    r = est.birkhoff_rotation_vector(F, (x, y), n)
    assert r.telescoping_error <= 1e-9


def test_birkhoff_examples():
    v = (0.5, 0.25)
    for n in (1, 7, 100):
        assert np.allclose(est.birkhoff_rotation_vector(zoo.translation(v), (0.3, 0.9), n).vector, v,
                           atol=1e-14)
    r = est.birkhoff_rotation_vector(zoo.sine_shear_h(0.25, 0.5), (0, 0.25), 100)
    assert np.allclose(r.vector, (0.75, 0), atol=1e-12)
    assert np.all(est.birkhoff_rotation_vector(identity(), (0.4, 0.4), 10).vector == 0)
    with pytest.raises(ValueError):
        est.birkhoff_rotation_vector(identity(), (0, 0), 0)


def test_torus_birkhoff_average_matches_on_rigid_rows():
    F = zoo.sine_shear_h(0.25, 0.5)
    assert np.allclose(est.birkhoff_average(F, (0.2, 0.1), 300),
                       (0.5 + 0.25 * math.sin(2 * math.pi * 0.1), 0), atol=1e-12)


def test_translation_hull_is_single_vertex():
    e = est.sample_rotation_set(zoo.translation((0.5, 0.25)), 50, 20, seed=0)
    assert len(e.hull_vertices) == 1
    assert np.allclose(e.hull_vertices[0], (0.5, 0.25))
    assert e.kind == est.SAMPLED


def test_shear_hull_near_segment():
    e = est.sample_rotation_set(zoo.sine_shear_h(0.25, 0.5), 1000, 1000, seed=4)
    assert hl.hausdorff(e.hull_vertices, [(0.25, 0), (0.75, 0)]) < 0.05
    assert len(e.samples) == 1000


def test_hull_validity_and_monotonicity():
    F = zoo.get("two_shear").build()
    small = est.sample_rotation_set(F, 200, 100, seed=9)
    big = est.sample_rotation_set(F, 400, 100, seed=9)
    assert np.array_equal(big.samples[:200], small.samples)
    for p in big.samples:
        assert hl.distance_to_hull(big.hull_vertices, p) <= 1e-12
    for v in small.hull_vertices:
        assert hl.distance_to_hull(big.hull_vertices, v) <= 1e-12


def test_sampling_independent_of_thread_count(monkeypatch):
    F = zoo.get("two_shear_drift").build()
    monkeypatch.setenv("ROTSET_THREADS", "1")
    a = est.sample_rotation_set(F, 600, 50, seed=3)
    monkeypatch.setenv("ROTSET_THREADS", "4")
    b = est.sample_rotation_set(F, 600, 50, seed=3)
    assert np.array_equal(a.samples, b.samples)
    assert a.hull_vertices == b.hull_vertices


def test_mean_rotation_vector_examples():
    t = est.mean_rotation_vector(zoo.translation((0.3, -0.2)), 1000, seed=1)
    assert np.array_equal(t.vector, [0.3, -0.2])
    assert np.all(t.standard_error == 0)
    m = est.mean_rotation_vector(zoo.sine_shear_h(0.25, 0.5), 100_000, seed=1)
    assert abs(m.vector[0] - 0.5) <= 3 * m.standard_error[0]
    assert m.vector[1] == 0
    d = est.mean_rotation_vector(zoo.two_shear(0.3, 0.2, 0.3, 0.1), 100_000, seed=2)
    assert np.all(np.abs(d.vector - (0.2, 0.1)) <= 3 * d.standard_error)
    with pytest.raises(ValueError):
        est.mean_rotation_vector(identity(), 1, seed=0)


@pytest.mark.parametrize("name,F", MAPS)
def test_mean_in_inflated_hull(name, F):
    e = est.sample_rotation_set(F, 300, 300, seed=5)
    m = est.mean_rotation_vector(F, 20_000, seed=5)
    slack = 3 * float(np.linalg.norm(m.standard_error)) + 1e-9
    assert hl.distance_to_hull(e.hull_vertices, m.vector) <= slack + 0.02


def test_additivity():
    r = est.check_additivity(HShear(0.25, 0.5), VShear(0.3, 0.1), 100_000, seed=11)
    assert r.passed
    t = est.check_additivity(zoo.translation((0.5, 0.25)), zoo.translation((0.125, -0.75)), 1000, seed=0)
    assert t.discrepancy == 0.0
    v = (0.37, -0.21)
    inv = est.check_additivity(zoo.translation(v), zoo.translation((-v[0], -v[1])), 1000, seed=0)
    assert np.allclose(inv.composite.vector, 0, atol=1e-15)


def test_hull_with_ball():
    seg = est.RotationSetEstimate([(0.25, 0.0), (0.75, 0.0)], [], est.SAMPLED)
    same = est.hull_with_ball(seg, (0.5, 0.0), 0.0)
    assert sorted(same.hull_vertices) == [(0.25, 0.0), (0.75, 0.0)]
    stadium = est.hull_with_ball(seg, (0.5, 0.0), 0.1)
    assert hl.polygon_area(stadium.hull_vertices) > 0
    assert hl.distance_to_hull(stadium.hull_vertices, (0.5, 0.09)) == 0
    with pytest.raises(ValueError):
        est.hull_with_ball(seg, (0, 0), -1)


def test_estimate_contains_and_json():
    e = est.sample_rotation_set(zoo.translation((0.5, 0.25)), 5, 5, seed=0)
    assert e.contains((0.5, 0.25))
    assert not e.contains((0.5, 0.3))
    js = e.as_json()
    assert js["kind"] == est.SAMPLED and len(js["support"]) == est.DEFAULT_DIRECTIONS
