import itertools
import math

import numpy as np
import pytest
from scipy import stats

from jensen_cert.bodies import BodySpec, generate, halfspace_vertices, regular_simplex_vertices
from jensen_cert.certifier import h_max
from jensen_cert.errors import DimensionMismatch, InvalidSpec, OriginNotInterior
from jensen_cert.geometry import build_body
from jensen_cert.integrate import (
    Affine,
    MaxAffine,
    Quadratic,
    eval_convex,
    hh_gap,
    integrate_body,
    integrate_boundary,
    lemma_check,
    lemma_sides,
    radial_sample,
    random_affine,
    random_max_affine,
    random_quadratic,
    subtract_affine,
    supporting_affine,
    supporting_affine_at_origin,
)

UNIT = build_body(list(itertools.product([0.0, 1.0], repeat=2)))
SQUARE = build_body(list(itertools.product([-1.0, 1.0], repeat=2)))
CUBE = build_body(list(itertools.product([-1.0, 1.0], repeat=3)))
ABS_X = MaxAffine([[1.0, 0.0], [-1.0, 0.0]], [0.0, 0.0])


def test_eval_examples():
    assert eval_convex(Affine([1, 2], 3), [1, 1]) == pytest.approx(6.0)
    assert eval_convex(ABS_X, [0.7, 0]) == pytest.approx(0.7)
    assert eval_convex(ABS_X, [-0.7, 0]) == pytest.approx(0.7)
    assert eval_convex(Quadratic(np.eye(2), [0, 0], 0), [3, 4]) == pytest.approx(25.0)
    with pytest.raises(DimensionMismatch):
        eval_convex(Affine([1, 2], 0), [1, 2, 3])


def test_function_validation():
    with pytest.raises(InvalidSpec):
        Quadratic([[1.0, 0.0], [0.0, -1.0]], [0, 0])
    with pytest.raises(InvalidSpec):
        Quadratic([[1.0, 2.0], [0.0, 1.0]], [0, 0])
    with pytest.raises(InvalidSpec):
        MaxAffine(np.zeros((0, 2)), [])
    # semidefinite is fine
    Quadratic([[1.0, 1.0], [1.0, 1.0]], [0, 0])


def test_supporting_affine_examples():
    g = supporting_affine_at_origin(Quadratic(np.eye(2), [1, 0], 2))
    np.testing.assert_array_equal(g.w, [1, 0])
    assert g.b == 2

    g = supporting_affine_at_origin(ABS_X)
    np.testing.assert_array_equal(g.w, [1, 0])
    assert g.b == 0
    reduced = subtract_affine(ABS_X, g)
    pts = np.random.default_rng(0).uniform(-1, 1, (100, 2))
    np.testing.assert_allclose(reduced(pts), np.abs(pts[:, 0]) - pts[:, 0])

    f = Affine([1.0, -2.0], 4.0)
    assert supporting_affine_at_origin(f) is f
    assert np.all(subtract_affine(f, f)(pts) == 0)


@pytest.mark.parametrize("family", ["quadratic", "max_affine"])
def test_subtraction_soundness(family):
    rng = np.random.default_rng(5)
    for body in (CUBE, generate(BodySpec("tangent-polytope", {"dim": 3, "seed": 2}))):
        for _ in range(5):
            f = random_quadratic(3, rng) if family == "quadratic" else random_max_affine(body, rng)
            g = supporting_affine_at_origin(f)
            reduced = subtract_affine(f, g)
            assert reduced(np.zeros(3)) == 0.0 or abs(reduced(np.zeros(3))) <= 1e-15
            pts = radial_sample(body, None, rng, 10_000)
            assert np.all(reduced(pts) >= -1e-12 * (1 + np.abs(f(pts))))


def test_supporting_affine_elsewhere():
    f = Quadratic(np.eye(2), [0, 0], 0)
    g = supporting_affine(f, [1.0, 2.0])
    assert g([1.0, 2.0]) == pytest.approx(5.0)
    np.testing.assert_allclose(g.w, [2, 4])


def test_body_integral_examples():
    est = integrate_body(UNIT, Quadratic(np.eye(2), [0, 0], 0))
    assert est.method == "exact_simplex" and est.stderr == 0
    assert est.value == pytest.approx(2 / 3, rel=1e-14)

    est = integrate_body(SQUARE, Affine([5, -2], 7))
    assert est.value == pytest.approx(28.0, rel=1e-14)

    # int over [-1,1]^2 of |x1| = 2 * int_{-1}^{1} |x| dx = 2
    est = integrate_body(SQUARE, ABS_X, mc_samples=10**6, seed=1)
    assert est.method == "monte_carlo" and est.samples == 10**6
    assert abs(est.value - 2.0) <= 3 * est.stderr


def test_boundary_integral_examples():
    est = integrate_boundary(UNIT, Quadratic(np.eye(2), [0, 0], 0))
    assert est.value == pytest.approx(10 / 3, rel=1e-14)

    body = generate(BodySpec("tangent-polytope", {"dim": 3, "seed": 3}))
    est = integrate_boundary(body, Affine(np.zeros(3), 2.5))
    assert est.value == pytest.approx(2.5 * body.surface_area, rel=1e-13)

    est = integrate_boundary(SQUARE, ABS_X, mc_samples=10**6, seed=2)
    assert abs(est.value - 6.0) <= 3 * est.stderr


def test_degree_two_rule_against_closed_forms():
    # int over [0,a]x[0,b]x[0,c] of x^2 = a^3 b c / 3, of x*y = a^2 b^2 c / 4
    a, b, c = 2.0, 3.0, 0.5
    box = build_body(list(itertools.product([0, a], [0, b], [0, c])))
    Q = np.zeros((3, 3))
    Q[0, 0] = 1.0
    assert integrate_body(box, Quadratic(Q, np.zeros(3))).value == pytest.approx(a**3 * b * c / 3)
    Q = np.array([[0, 0.5, 0], [0.5, 0, 0], [0, 0, 0]]) + np.eye(3)
    value = integrate_body(box, Quadratic(Q, np.zeros(3))).value
    expected = a * b * c * (a**2 + b**2 + c**2) / 3 + a**2 * b**2 * c / 4
    assert value == pytest.approx(expected, rel=1e-13)


def test_exact_matches_monte_carlo():
    rng = np.random.default_rng(8)
    bodies = [
        CUBE,
        generate(BodySpec("simplex", {"dim": 3, "regular": False})),
        generate(BodySpec("tangent-polytope", {"dim": 4, "seed": 0})),
        generate(BodySpec("random-symmetric", {"dim": 2, "points": 6, "seed": 1})),
    ]
    for i, body in enumerate(bodies):
        for f in (random_affine(body.dim, rng), random_quadratic(body.dim, rng)):
            for integrate in (integrate_body, integrate_boundary):
                exact = integrate(body, f)
                mc = integrate(body, f, 100_000, seed=i, method="mc")
                assert abs(mc.value - exact.value) <= 4 * mc.stderr


def test_hh_gap_examples():
    gap, err = hh_gap(UNIT, Quadratic(np.eye(2), [0, 0], 0))
    assert err == 0 and gap == pytest.approx(1 / 6, rel=1e-13)

    body = generate(BodySpec("cross-polytope", {"dim": 3}))
    gap, err = hh_gap(body, Affine([0.3, -1.0, 2.0], 5.0))
    assert err == 0 and abs(gap) <= 1e-12

    abs_x1 = MaxAffine([[1.0, 0, 0], [-1.0, 0, 0]], [0.0, 0.0])
    gap, err = hh_gap(CUBE, abs_x1, mc_samples=10**6, seed=4)
    # body average 1/2, boundary average (2*4*1 + 4*4*(1/2)) / 24 = 2/3
    assert abs(gap - 1 / 6) <= 3 * err
    assert gap > 5 * err


def test_lemma_examples():
    q = Quadratic(np.eye(2), [0, 0], 0)
    sides = lemma_sides(SQUARE, q)
    assert sides.body_integral == pytest.approx(8 / 3, rel=1e-13)
    assert sides.boundary_term == pytest.approx(32 / 9, rel=1e-13)
    assert sides.holds and lemma_check(SQUARE, q)

    sides = lemma_sides(SQUARE, Affine([1, 2], 3))
    assert sides.body_integral == 0 and sides.boundary_term == 0 and sides.holds

    tri = build_body(regular_simplex_vertices(2, 1.0))
    sides = lemma_sides(tri, Quadratic(np.eye(2), [0, 0], 0), tri.body_centroid)
    # polar moment of the equilateral triangle with side sqrt 3: area * side^2 / 12
    assert sides.body_integral == pytest.approx(3 * math.sqrt(3) / 16, rel=1e-9)
    # each side at distance 1/2 contributes sqrt(3)/2; factor h_max/(d+1) = 1/6
    assert sides.boundary_term == pytest.approx(math.sqrt(3) / 4, rel=1e-9)
    assert sides.holds


def test_lemma_requires_interior_origin():
    with pytest.raises(OriginNotInterior):
        lemma_check(CUBE, Affine([1, 0, 0], 0), [2.0, 0, 0])


def test_radial_sample_square_moments():
    pts = radial_sample(SQUARE, None, np.random.default_rng(0), 10**6)
    assert np.all(np.abs(pts) <= 1 + 1e-12)
    np.testing.assert_allclose(pts.mean(axis=0), 0, atol=3 / math.sqrt(10**6))
    np.testing.assert_allclose(pts.std(axis=0), 1 / math.sqrt(3), rtol=1e-2)


def test_radial_sample_t_marginal():
    body = generate(BodySpec("tangent-polytope", {"dim": 3, "seed": 1}))
    _, t = radial_sample(body, [0.1, 0, 0], np.random.default_rng(2), 10**5, return_t=True)
    assert stats.kstest(t, lambda s: s**3).pvalue > 0.01


def sub_box_ratio(body, lo, hi):
    d = body.dim
    normals = np.vstack([body.normals, np.eye(d), -np.eye(d)])
    offsets = np.r_[body.offsets, hi, -np.asarray(lo)]
    piece = build_body(halfspace_vertices(normals, offsets))
    return piece.volume / body.volume


def test_radial_sample_sub_box_hits():
    body = generate(BodySpec("random-symmetric", {"dim": 3, "points": 7, "seed": 3}))
    lo, hi = np.array([-0.3, -0.2, -0.5]), np.array([0.6, 0.5, 0.4])
    ratio = sub_box_ratio(body, lo, hi)
    n = 10**5
    pts = radial_sample(body, body.vertices[0] * 0.5, np.random.default_rng(4), n)
    hits = np.all((pts >= lo) & (pts <= hi), axis=1).mean()
    assert abs(hits - ratio) <= 3 * math.sqrt(ratio * (1 - ratio) / n)


def test_monte_carlo_is_deterministic_and_worker_independent():
    f = random_max_affine(CUBE, np.random.default_rng(1))
    a = integrate_body(CUBE, f, 70_000, seed=9)
    b = integrate_body(CUBE, f, 70_000, seed=9, workers=4)
    c = integrate_body(CUBE, f, 70_000, seed=10)
    assert a == b
    assert a.value != c.value


def test_random_max_affine_pieces_are_active():
    rng = np.random.default_rng(6)
    f = random_max_affine(CUBE, rng)
    pts = radial_sample(CUBE, None, rng, 50_000)
    active = np.unique(np.argmax(f.pieces(pts), axis=1))
    assert len(active) == f.W.shape[0] >= 2


def test_forced_exact_on_max_affine_rejected():
    with pytest.raises(ValueError):
        integrate_body(SQUARE, ABS_X, method="exact")


def test_lemma_far_from_center():
    rng = np.random.default_rng(12)
    origin = np.array([0.95, -0.9, 0.0])
    assert h_max(CUBE, origin) == pytest.approx(1.95)
    for _ in range(5):
        assert lemma_check(CUBE, random_max_affine(CUBE, rng), origin, 50_000, seed=3)
        assert lemma_check(CUBE, random_quadratic(3, rng), origin)
