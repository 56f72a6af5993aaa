"""Dense two-phase simplex for the small LPs used by the certifier.

Problems have the form ``minimize c @ x  subject to  A @ x <= b`` with every
variable free.  Pivoting follows Bland's rule, so the solver is deterministic
and cannot cycle.  Intended sizes are a handful of variables and at most a
few hundred constraints.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LPFailure

PIVOT_TOL = 1e-9  # relative to the largest entry of the entering column
OPT_TOL = 1e-10
REFACTOR_EVERY = 20
FEAS_TOL = 1e-9
# right-hand sides are relaxed by this relative amount, in a fixed pattern, so
# that no vertex is degenerate; the exact solution is recovered afterwards
PERTURBATION = 1e-12


@dataclass(frozen=True)
class LPResult:
    x: np.ndarray
    fun: float
    iterations: int


def _pivot(t: np.ndarray, row: int, col: int) -> None:
    t[row] /= t[row, col]
    col_vals = t[:, col].copy()
    col_vals[row] = 0.0
    t -= np.outer(col_vals, t[row])
    t[:, col] = 0.0
    t[row, col] = 1.0


def _refactor(raw: np.ndarray, basis: list) -> np.ndarray:
    # rebuild the tableau for ``basis`` from the original rows, dropping drift
    m = raw.shape[0] - 1
    rows = np.linalg.solve(raw[:m, basis], raw[:m])
    return np.vstack([rows, raw[-1] - raw[-1, basis] @ rows])


def _run(t: np.ndarray, basis: list, allowed: np.ndarray, max_iter: int,
         raw: np.ndarray) -> int:
    """Minimise the objective in the last row of tableau ``t`` in place.

    The last row holds reduced costs, the last column the right-hand side.
    Only columns flagged in ``allowed`` may enter.  ``raw`` is the original
    tableau with an unreduced cost row, used to refactor.  Returns the pivot
    count.
    """
    m = t.shape[0] - 1
    fresh = True
    for it in range(max_iter):
        if it and it % REFACTOR_EVERY == 0:
            t[:] = _refactor(raw, basis)
            fresh = True
        cost = t[-1, :-1]
        # reduced costs are only meaningful relative to their column's size
        scale = np.maximum(1.0, np.abs(t[:m, :-1]).max(axis=0))
        entering = np.flatnonzero((cost < -OPT_TOL * scale) & allowed)
        if entering.size == 0:
            return it
        col = int(entering[0])
        column = t[:m, col]
        pos = column > PIVOT_TOL * scale[col]
        if not pos.any():
            if fresh:
                raise LPFailure("LP is unbounded")
            # possibly a spurious ray from accumulated roundoff; look again
            t[:] = _refactor(raw, basis)
            fresh = True
            continue
        ratios = np.full(m, np.inf)
        ratios[pos] = np.maximum(t[:m, -1][pos], 0.0) / column[pos]
        best = ratios.min()
        ties = np.flatnonzero(ratios <= best + 1e-12 * max(1.0, abs(best)))
        row = int(min(ties, key=lambda r: basis[r]))
        _pivot(t, row, col)
        basis[row] = col
        fresh = False
    raise LPFailure(f"simplex did not converge in {max_iter} iterations")


def linprog(c, A, b, max_iter: int = 50_000) -> LPResult:
    """Solve ``min c @ x  s.t.  A @ x <= b`` over free variables ``x``.

    Raises :class:`LPFailure` when the problem is infeasible or unbounded.
    """
    c = np.asarray(c, dtype=float)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    if c.shape != (n,) or b.shape != (m,):
        raise ValueError("inconsistent LP dimensions")

    # equilibrate rows; the feasible set is unchanged
    norms = np.abs(A).max(axis=1)
    norms[norms == 0] = 1.0
    A_s, b_s = A / norms[:, None], b / norms
    pattern = 0.5 + 0.5 * ((np.arange(m) * 0.6180339887498949) % 1.0)
    b_p = b_s + PERTURBATION * np.maximum(1.0, np.abs(b_s)) * pattern

    # columns: x+ (n), x- (n), slacks (m), artificials (one per negative rhs row)
    neg = np.flatnonzero(b_p < 0)
    n_art = len(neg)
    width = 2 * n + m + n_art
    t = np.zeros((m + 1, width + 1))
    t[:m, :n] = A_s
    t[:m, n : 2 * n] = -A_s
    t[:m, 2 * n : 2 * n + m] = np.eye(m)
    t[:m, -1] = b_p
    sign = np.ones(m)
    sign[neg] = -1.0
    t[:m] *= sign[:, None]
    basis = [2 * n + i for i in range(m)]
    for k, r in enumerate(neg):
        t[r, 2 * n + m + k] = 1.0
        basis[r] = 2 * n + m + k
    raw = t.copy()

    iters = 0
    if n_art:
        # phase 1: minimise the sum of artificials
        raw[-1, 2 * n + m : -1] = 1.0
        t[:] = _refactor(raw, basis)
        allowed = np.ones(width, dtype=bool)
        iters += _run(t, basis, allowed, max_iter, raw)
        if -t[-1, -1] > FEAS_TOL * max(1.0, np.abs(b_s).max()):
            raise LPFailure("LP is infeasible")
        # drive zero-level artificials out of the basis
        for r in range(m):
            if basis[r] >= 2 * n + m:
                row = np.abs(t[r, : 2 * n + m])
                col = int(np.argmax(row))
                if row[col] > PIVOT_TOL:
                    _pivot(t, r, col)
                    basis[r] = col

    allowed = np.zeros(width, dtype=bool)
    allowed[: 2 * n + m] = True
    raw[-1, :] = 0.0
    raw[-1, :n] = c
    raw[-1, n : 2 * n] = -c
    t[:] = _refactor(raw, basis)
    iters += _run(t, basis, allowed, max_iter, raw)

    x = _basic_solution(raw, basis, n, b_s * sign)
    if np.any(A_s @ x > b_s + FEAS_TOL * np.maximum(1.0, np.abs(b_s))):
        # the unperturbed basic point is not feasible; keep the perturbed one
        x = _basic_solution(raw, basis, n, t[:m, -1], solved=True)
    return LPResult(x=x, fun=float(c @ x), iterations=iters)


def _basic_solution(raw, basis, n, rhs, solved=False):
    m = raw.shape[0] - 1
    values = rhs if solved else np.linalg.solve(raw[:m, basis], rhs)
    z = np.zeros(raw.shape[1] - 1)
    z[basis] = values
    return z[:n] - z[n : 2 * n]


def lexmin_linprog(c, A, b, order=None, slack: float = 1e-10) -> LPResult:
    """Optimal point of ``min c @ x, A @ x <= b`` that is lexicographically smallest.

    Ties in the optimum are broken by minimising the coordinates in ``order``
    (default: natural order) one at a time, each time freezing the previous
    coordinate's value up to a relative ``slack``.
    """
    c = np.asarray(c, dtype=float)
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.asarray(b, dtype=float)
    n = len(c)
    res = linprog(c, A, b)
    rows, rhs = [c], [res.fun + slack * max(1.0, abs(res.fun))]
    total = res.iterations
    for j in range(n) if order is None else order:
        unit = np.zeros(n)
        unit[j] = 1.0
        step = linprog(unit, np.vstack([A, *rows]), np.concatenate([b, rhs]))
        total += step.iterations
        rows.append(unit)
        rhs.append(step.x[j] + slack * max(1.0, abs(step.x[j])))
        res = step
    x = _polish_vertex(A, b, res.x)
    return LPResult(x=x, fun=float(c @ x), iterations=total)


def _polish_vertex(A: np.ndarray, b: np.ndarray, x: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    # a lexicographic minimum is a vertex; re-solve its active rows exactly
    resid = b - A @ x
    active = resid <= tol * np.maximum(1.0, np.abs(b))
    if np.linalg.matrix_rank(A[active]) < A.shape[1]:
        return x
    refined = np.linalg.lstsq(A[active], b[active], rcond=None)[0]
    if np.all(A @ refined <= b + tol * np.maximum(1.0, np.abs(b))):
        return refined
    return x
