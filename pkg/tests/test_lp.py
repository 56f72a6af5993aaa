import numpy as np
import pytest
from scipy.optimize import linprog as scipy_linprog

from jensen_cert.bodies import BodySpec, generate
from jensen_cert.errors import LPFailure
from jensen_cert.lp import lexmin_linprog, linprog


def bounded_problem(rng):
    n = int(rng.integers(2, 6))
    m = int(rng.integers(n + 1, 40))
    A = rng.normal(size=(m, n))
    b = A @ rng.normal(size=n) + rng.uniform(0, 1, m)
    A = np.vstack([A, np.eye(n), -np.eye(n)])
    b = np.r_[b, np.full(2 * n, 5.0)]
    return rng.normal(size=n), A, b


@pytest.mark.parametrize("seed", range(30))
def test_matches_scipy(seed):
    c, A, b = bounded_problem(np.random.default_rng(seed))
    ours = linprog(c, A, b)
    ref = scipy_linprog(c, A_ub=A, b_ub=b, bounds=[(None, None)] * len(c), method="highs")
    assert ours.fun == pytest.approx(ref.fun, rel=1e-9, abs=1e-9)
    assert np.all(A @ ours.x <= b + 1e-9)


def test_infeasible_and_unbounded():
    with pytest.raises(LPFailure, match="infeasible"):
        linprog([1.0], [[1.0], [-1.0]], [-1.0, -1.0])
    with pytest.raises(LPFailure, match="unbounded"):
        linprog([-1.0, 0.0], [[0.0, 1.0]], [1.0])


def test_degenerate_vertex_terminates():
    # 25 constraints all tight at the optimal vertex (1, 1)
    ang = np.linspace(0, np.pi / 2, 25)
    A = np.column_stack([np.cos(ang), np.sin(ang)])
    res = linprog([-1.0, -1.0], A, A @ np.ones(2))
    assert res.fun == pytest.approx(-2.0, rel=1e-12)
    np.testing.assert_allclose(res.x, [1.0, 1.0], atol=1e-12)


def test_lexmin_picks_smallest_optimal_vertex():
    # maximise y on the square [0,2]^2: optimal edge y = 2, lexmin vertex (0, 2)
    A = np.array([[1.0, 0], [-1, 0], [0, 1], [0, -1]])
    b = np.array([2.0, 0, 2, 0])
    res = lexmin_linprog([0.0, -1.0], A, b)
    np.testing.assert_allclose(res.x, [0.0, 2.0], atol=1e-12)
    res = lexmin_linprog([0.0, -1.0], A, b, order=[0])
    np.testing.assert_allclose(res.x, [0.0, 2.0], atol=1e-12)



@pytest.mark.parametrize("seed", range(6))
def test_all_rows_tight_at_optimum(seed):
    # minimax height LP of a polytope circumscribed about a sphere: every row
    # is tight at the optimum, so the tableau is fully degenerate and roundoff
    # in the reduced costs must not be mistaken for an unbounded ray
    body = generate(BodySpec("tangent-polytope", {"dim": 3, "seed": seed, "inradius": 0.25}))
    A = np.hstack([-body.normals, -np.ones((len(body.facets), 1))])
    res = linprog([0, 0, 0, 1.0], A, -body.offsets)
    assert res.fun == pytest.approx(0.25, rel=1e-12)
    np.testing.assert_allclose(res.x[:3], 0, atol=1e-12)
