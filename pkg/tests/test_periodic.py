import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rotset import periodic as pf
from rotset import zoo
from rotset.estimators import birkhoff_rotation_vector
from rotset.periodic import RationalVector
from rotset.torus import identity

SHEAR = zoo.sine_shear_h(0.25, 0.5)


def test_rational_vector_reduction():
    nu = RationalVector(2, 4, 1)
    assert (nu.p, nu.q, nu.r) == (2, 4, 1)
    assert RationalVector(2, 4, 2) == RationalVector(1, 2, 1)
    assert RationalVector(1, -3, 0) == RationalVector(-1, 3, 0)
    assert RationalVector.parse("1/3, 0") == RationalVector(1, 3, 0)
    assert RationalVector.parse("1/2,1/4") == RationalVector(2, 4, 1)
    assert str(RationalVector.parse("3/4,0")) == "3/4,0"
    for bad in ("1/0,0", "x", "1,2,3", ""):
        with pytest.raises(ValueError):
            RationalVector.parse(bad)
    with pytest.raises(ValueError):
        RationalVector(1, 0, 0)


@given(st.integers(-20, 20), st.integers(1, 20), st.integers(-20, 20))
def test_rational_vector_is_reduced(p, q, r):
    nu = RationalVector(p, q, r)
    assert math.gcd(math.gcd(abs(nu.p), nu.q), abs(nu.r)) == 1
    assert nu.p * q == p * nu.q and nu.r * q == r * nu.q


def test_reduction_examples(rng):
    G = pf.reduce_to_fixed_point_problem(zoo.translation((0.5, 0.25)), RationalVector(2, 4, 1))
    x = rng.random((100, 2))
    assert np.max(np.abs(G(x) - x)) <= 1e-12
    F = zoo.two_shear(0.3, 0.2, 0.3, 0.1)
    assert pf.reduce_to_fixed_point_problem(F, RationalVector(0, 1, 0)) is F


@pytest.mark.parametrize("nu,y", [((1, 2, 0), 0.0), ((3, 4, 0), 0.25)])
def test_reduced_map_rotation_on_fixed_rows(nu, y):
    G = pf.reduce_to_fixed_point_problem(SHEAR, RationalVector(*nu))
    r = birkhoff_rotation_vector(G, (0.3, y), 50)
    assert np.allclose(r.vector, 0, atol=1e-9)


def test_winding_examples():
    G = zoo.translation((0.1, 0))
    assert pf.winding_number(G, (0.2, 0.2, 0.4, 0.4)) == 0
    # two_shear(0.3,0,0.3,0) has a nondegenerate zero of the displacement at the origin
    T = zoo.two_shear(0.3, 0, 0.3, 0)
    assert pf.winding_number(T, (-0.1, -0.1, 0.1, 0.1)) in (-1, 1)
    assert pf.winding_number(T, (0.0, -0.1, 0.2, 0.1)) is None
    with pytest.raises(ValueError):
        pf.winding_number(T, (0, 0, 1, 1), samples_per_edge=4)


@given(st.floats(-0.5, 0.5), st.floats(-0.5, 0.5), st.floats(0.02, 0.3))
def test_winding_refinement_invariance(cx, cy, half):
    T = zoo.two_shear(0.3, 0, 0.3, 0)
    box = (cx - half, cy - half, cx + half, cy + half)
    w = pf.winding_number(T, box, 16)
    if w is not None:
        w2 = pf.winding_number(T, box, 32)
        assert w2 is None or w2 == w


def test_identity_is_continuum():
    c = pf.locate_fixed_points(identity(), 6)
    assert len(c) == 1 and c[0].continuum and c[0].kind == "residual"
    assert c[0].residual == 0


def test_fixed_point_free():
    assert pf.locate_fixed_points(zoo.translation((0.1, 0)), 8) == []


def test_fixed_row_detected():
    depth = 8
    G = pf.reduce_to_fixed_point_problem(SHEAR, RationalVector(3, 4, 0))
    cands = pf.locate_fixed_points(G, depth)
    size = 2.0 ** -depth
    on_row = [c for c in cands if c.kind == "residual" and c.box[1] <= 0.25 + 1e-12 and c.box[3] >= 0.25 - 1e-12]
    assert len(on_row) >= math.ceil(2 ** depth / 2)
    for c in cands:
        assert abs(c.refined_point[1] - 0.25) <= size


def test_index_certificates_on_isolated_zeros():
    cands = pf.locate_fixed_points(zoo.two_shear(0.3, 0, 0.3, 0), 6)
    pts = {(round(float(c.refined_point[0]), 6) % 1, round(float(c.refined_point[1]), 6) % 1) for c in cands}
    assert pts == {(0.0, 0.0), (0.5, 0.0), (0.0, 0.5), (0.5, 0.5)}
    assert all(c.kind == "index" and c.certified for c in cands)


def test_realize_translation():
    rep = pf.realize_rational_vector(zoo.translation((0.5, 0.25)), RationalVector(2, 4, 1))
    assert rep.period == 4 and rep.minimal
    assert np.allclose(rep.rotation_vector, (0.5, 0.25), atol=1e-12)
    assert rep.continuum


@pytest.mark.parametrize("nu,q,rows", [((1, 2, 0), 2, (0.0, 0.5)),
                                       ((1, 3, 0), 3, (0.5 + math.asin(2 / 3) / (2 * math.pi),
                                                       1 - math.asin(2 / 3) / (2 * math.pi))),
                                       ((3, 4, 0), 4, (0.25,))])
def test_realize_shear(nu, q, rows):
    target = RationalVector(*nu)
    rep = pf.realize_rational_vector(SHEAR, target)
    assert rep is not None
    assert rep.period == q and rep.minimal
    assert min(abs(rep.point[1] - y) for y in rows) < 1e-6
    assert pf.verify_orbit(SHEAR, rep.lift, target) <= 1e-9
    assert np.allclose(rep.rotation_vector, target.vector(), atol=1e-9 / q)
    assert len(rep.orbit) == q
    # q prime: not a fixed point of F itself
    if q in (2, 3):
        assert np.linalg.norm(SHEAR(rep.lift) - rep.lift - np.round(SHEAR(rep.lift) - rep.lift)) > 1e-6


def test_realize_outside_is_absent():
    assert pf.realize_rational_vector(SHEAR, RationalVector(1, 1, 0)) is None


def test_minimal_period_detects_divisor():
    F = zoo.translation((0.5, 0.0))
    assert pf.minimal_period(F, (0.1, 0.1), 4, 1e-9) == 2
    assert pf.minimal_period(identity(), (0.1, 0.1), 6, 1e-9) == 1


def test_report_json():
    rep = pf.realize_rational_vector(SHEAR, RationalVector(1, 2, 0))
    js = rep.as_json()
    assert js["period"] == 2 and js["target"] == {"p": 1, "q": 2, "r": 0, "vector": [0.5, 0.0]}
    assert js["certificate"]
    assert js["certified"] in (True, False)
