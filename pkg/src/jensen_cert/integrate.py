"""Integrals of convex test functions over a body and over its boundary.

Affine and quadratic functions are integrated exactly on the cached simplex
decompositions.  Maxima of affine functions are integrated by Monte Carlo:
body points are drawn in cone coordinates (a boundary point ``x`` and a
radial fraction ``t`` with density ``d * t**(d-1)``), boundary points
uniformly on the facet simplices.

Random numbers come from a 64-bit seed.  Samples are split into fixed-size
batches and batch ``k`` of stream ``s`` always uses the generator seeded by
``SeedSequence(seed, spawn_key=(s, k))``, so estimates do not depend on how
many workers evaluate the batches.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .certifier import cone_distances, h_max
from .errors import DimensionMismatch, InvalidSpec
from .geometry import ConvexBody

DEFAULT_SAMPLES = 100_000
BATCH_SIZE = 1 << 15
PSD_TOL = 1e-10

_BODY_STREAM = 0
_BOUNDARY_STREAM = 1


def _vec(a, name) -> np.ndarray:
    v = np.array(a, dtype=float)
    v.setflags(write=False)
    if not np.all(np.isfinite(v)):
        raise InvalidSpec(f"{name} has non-finite entries")
    return v


@dataclass(frozen=True, eq=False)
class Affine:
    w: np.ndarray
    b: float = 0.0
    kind = "affine"

    def __post_init__(self):
        object.__setattr__(self, "w", _vec(self.w, "w").reshape(-1))
        object.__setattr__(self, "b", float(self.b))

    @property
    def dim(self) -> int:
        return self.w.shape[0]

    def __call__(self, x):
        return np.asarray(x, dtype=float) @ self.w + self.b


@dataclass(frozen=True, eq=False)
class MaxAffine:
    """Pointwise maximum of the affine pieces ``W[k] @ x + b[k]``."""

    W: np.ndarray
    b: np.ndarray
    kind = "max_affine"

    def __post_init__(self):
        W = _vec(self.W, "W")
        W = W.reshape(1, -1) if W.ndim == 1 else W
        b = _vec(self.b, "b").reshape(-1)
        if W.ndim != 2 or W.shape[0] < 1 or b.shape != (W.shape[0],):
            raise InvalidSpec("MaxAffine needs k >= 1 pieces with matching offsets")
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "b", b)

    @property
    def dim(self) -> int:
        return self.W.shape[1]

    def pieces(self, x):
        return np.asarray(x, dtype=float) @ self.W.T + self.b

    def __call__(self, x):
        return self.pieces(x).max(axis=-1)


@dataclass(frozen=True, eq=False)
class Quadratic:
    """``x @ Q @ x + w @ x + b`` with ``Q`` symmetric positive semidefinite."""

    Q: np.ndarray
    w: np.ndarray
    b: float = 0.0
    kind = "quadratic"

    def __post_init__(self):
        Q = _vec(self.Q, "Q")
        w = _vec(self.w, "w").reshape(-1)
        d = w.shape[0]
        if Q.shape != (d, d) or not np.allclose(Q, Q.T, rtol=0, atol=1e-12 * (1 + np.abs(Q).max())):
            raise InvalidSpec("Q must be a symmetric d x d matrix")
        if np.linalg.eigvalsh(Q).min() < -PSD_TOL * np.linalg.norm(Q, 2):
            raise InvalidSpec("Q is not positive semidefinite")
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "w", w)
        object.__setattr__(self, "b", float(self.b))

    @property
    def dim(self) -> int:
        return self.w.shape[0]

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return np.einsum("...i,ij,...j->...", x, self.Q, x) + x @ self.w + self.b


def _check_dim(f, d: int) -> None:
    if f.dim != d:
        raise DimensionMismatch(f"function has dimension {f.dim}, expected {d}")


def eval_convex(f, x):
    x = np.asarray(x, dtype=float)
    _check_dim(f, x.shape[-1])
    return f(x)


def supporting_affine(f, at=None) -> Affine:
    """Affine ``g`` with ``g(at) = f(at)`` and ``g <= f`` everywhere.

    For several maximal pieces of a :class:`MaxAffine` the one with the
    smallest index is used.
    """
    p = np.zeros(f.dim) if at is None else np.asarray(at, dtype=float)
    _check_dim(f, p.shape[0])
    if isinstance(f, Affine):
        return f
    if isinstance(f, Quadratic):
        grad = 2 * f.Q @ p + f.w
        return Affine(grad, float(f(p) - grad @ p))
    if isinstance(f, MaxAffine):
        k = int(np.argmax(f.pieces(p)))
        return Affine(f.W[k], f.b[k])
    raise TypeError(f"unsupported function type {type(f).__name__}")


def supporting_affine_at_origin(f) -> Affine:
    return supporting_affine(f)


def subtract_affine(f, g: Affine):
    """``f - g``, staying inside the family of ``f``."""
    if isinstance(f, Affine):
        return Affine(f.w - g.w, f.b - g.b)
    if isinstance(f, Quadratic):
        return Quadratic(f.Q, f.w - g.w, f.b - g.b)
    if isinstance(f, MaxAffine):
        return MaxAffine(f.W - g.w, f.b - g.b)
    raise TypeError(f"unsupported function type {type(f).__name__}")


@dataclass(frozen=True)
class IntegralEstimate:
    value: float
    stderr: float
    method: str  # "exact_simplex" or "monte_carlo"
    samples: int


def _exact(f, simplices: np.ndarray, measures: np.ndarray) -> float:
    total = float(measures.sum())
    centroids = simplices.mean(axis=1)
    first = (measures[:, None] * centroids).sum(axis=0)
    if isinstance(f, Affine):
        return float(f.w @ first + f.b * total)
    # degree-2 rule on a k-simplex: int x x^T = mu / ((k+1)(k+2)) (sum v v^T + s s^T)
    k = simplices.shape[1] - 1
    s = simplices.sum(axis=1)
    second = np.einsum("n,nvi,nvj->ij", measures, simplices, simplices)
    second += np.einsum("n,ni,nj->ij", measures, s, s)
    second /= (k + 1) * (k + 2)
    return float(np.sum(f.Q * second) + f.w @ first + f.b * total)


def _rng(seed: int, stream: int, batch: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(stream, batch)))


def _uniform_in_simplices(simplices, idx, rng) -> np.ndarray:
    n_vert = simplices.shape[1]
    lam = rng.dirichlet(np.ones(n_vert), size=len(idx))
    return np.einsum("nv,nvi->ni", lam, simplices[idx])


def radial_sample(body: ConvexBody, origin=None, rng=None, n: int = 1, return_t: bool = False):
    """Uniform points of ``body`` drawn through cone coordinates around ``origin``.

    A boundary simplex is picked with probability proportional to the volume
    of its cone over ``origin``, a point ``x`` uniformly inside it, and a
    radial fraction ``t = U**(1/d)``; the sample is ``origin + t (x - origin)``.
    """
    rng = np.random.default_rng(rng)
    p = np.zeros(body.dim) if origin is None else np.asarray(origin, dtype=float)
    heights = cone_distances(body, p)
    weights = heights[body.boundary_facet] * body.boundary_measures
    idx = rng.choice(len(weights), size=n, p=weights / weights.sum())
    x = _uniform_in_simplices(body.boundary_simplices, idx, rng)
    t = rng.random(n) ** (1.0 / body.dim)
    pts = p + t[:, None] * (x - p)
    return (pts, t) if return_t else pts


def boundary_sample(body: ConvexBody, rng=None, n: int = 1) -> np.ndarray:
    """Points distributed uniformly on the boundary surface."""
    rng = np.random.default_rng(rng)
    w = body.boundary_measures
    idx = rng.choice(len(w), size=n, p=w / w.sum())
    return _uniform_in_simplices(body.boundary_simplices, idx, rng)


def _batch_moments(task):
    fn, draw, seed, stream, batch, size = task
    vals = fn(draw(_rng(seed, stream, batch), size))
    mean = float(vals.mean())
    return size, mean, float(((vals - mean) ** 2).sum())


def _mc_mean(fn, draw, n: int, seed: int, stream: int, workers: int = 1):
    """Mean and standard error of ``fn`` over ``n`` draws, batch by batch."""
    sizes = [BATCH_SIZE] * (n // BATCH_SIZE)
    if n % BATCH_SIZE:
        sizes.append(n % BATCH_SIZE)
    tasks = [(fn, draw, seed, stream, k, size) for k, size in enumerate(sizes)]
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(_batch_moments, tasks))
    else:
        parts = [_batch_moments(t) for t in tasks]
    # pairwise (Chan) combination in batch order
    count, mean, m2 = 0, 0.0, 0.0
    for size, bmean, bm2 in parts:
        delta = bmean - mean
        total = count + size
        mean += delta * size / total
        m2 += bm2 + delta**2 * count * size / total
        count = total
    var = m2 / (count - 1) if count > 1 else 0.0
    return mean, math.sqrt(var / count)


def _integrate(f, simplices, measures, draw, mc_samples, seed, stream, method, workers, anchor):
    total = float(measures.sum())
    if method not in ("auto", "exact", "mc"):
        raise ValueError(f"unknown method {method!r}")
    exact_ok = isinstance(f, (Affine, Quadratic))
    if method == "exact" and not exact_ok:
        raise ValueError("no exact rule for max-of-affine functions")
    if exact_ok and method != "mc":
        return IntegralEstimate(_exact(f, simplices, measures), 0.0, "exact_simplex", 0)
    if mc_samples < 2:
        raise ValueError("Monte Carlo needs at least two samples")
    base = 0.0
    if isinstance(f, MaxAffine):
        # control variate: the piece active at the anchor, integrated exactly
        g = supporting_affine(f, anchor)
        base = _exact(g, simplices, measures)
        f = subtract_affine(f, g)
    mean, err = _mc_mean(f, draw, mc_samples, seed, stream, workers)
    return IntegralEstimate(base + total * mean, total * err, "monte_carlo", int(mc_samples))


def integrate_body(body: ConvexBody, f, mc_samples: int = DEFAULT_SAMPLES, seed: int = 0,
                   method: str = "auto", workers: int = 1) -> IntegralEstimate:
    """Integral of ``f`` over the body (not normalised by the volume).

    ``method`` is ``"auto"`` (exact when available), ``"exact"`` or ``"mc"``;
    forcing ``"mc"`` on affine or quadratic functions exists for cross-checks.
    """
    _check_dim(f, body.dim)
    anchor = body.body_centroid

    def draw(rng, size):
        return radial_sample(body, anchor, rng, size)

    return _integrate(f, body.body_simplices, body.body_measures, draw, mc_samples, seed,
                      _BODY_STREAM, method, workers, anchor)


def integrate_boundary(body: ConvexBody, f, mc_samples: int = DEFAULT_SAMPLES, seed: int = 0,
                       method: str = "auto", workers: int = 1) -> IntegralEstimate:
    """Integral of ``f`` against surface measure on the boundary."""
    _check_dim(f, body.dim)

    def draw(rng, size):
        return boundary_sample(body, rng, size)

    return _integrate(f, body.boundary_simplices, body.boundary_measures, draw, mc_samples,
                      seed, _BOUNDARY_STREAM, method, workers, body.boundary_centroid)


def hh_gap(body: ConvexBody, f, mc_samples: int = DEFAULT_SAMPLES, seed: int = 0,
           method: str = "auto", workers: int = 1) -> tuple[float, float]:
    """Boundary average minus body average of ``f``, with its standard error."""
    inner = integrate_body(body, f, mc_samples, seed, method, workers)
    outer = integrate_boundary(body, f, mc_samples, seed, method, workers)
    gap = outer.value / body.surface_area - inner.value / body.volume
    err = math.hypot(outer.stderr / body.surface_area, inner.stderr / body.volume)
    return gap, err


@dataclass(frozen=True)
class LemmaSides:
    """Both sides of ``int_body h <= h_max / (d+1) * int_boundary h``.

    ``h`` is ``f`` minus its supporting affine at the origin, so it is
    nonnegative and vanishes there.
    """

    body_integral: float
    boundary_term: float
    stderr: float
    h_max: float

    @property
    def holds(self) -> bool:
        slack = 3 * self.stderr + 1e-9 * max(abs(self.body_integral), abs(self.boundary_term))
        return self.body_integral <= self.boundary_term + slack


def lemma_sides(body: ConvexBody, f, origin=None, mc_samples: int = DEFAULT_SAMPLES,
                seed: int = 0, workers: int = 1) -> LemmaSides:
    p = np.zeros(body.dim) if origin is None else np.asarray(origin, dtype=float)
    hm = h_max(body, p)
    reduced = subtract_affine(f, supporting_affine(f, p))
    inner = integrate_body(body, reduced, mc_samples, seed, workers=workers)
    outer = integrate_boundary(body, reduced, mc_samples, seed, workers=workers)
    factor = hm / (body.dim + 1)
    err = math.hypot(inner.stderr, factor * outer.stderr)
    return LemmaSides(inner.value, factor * outer.value, err, hm)


def lemma_check(body: ConvexBody, f, origin=None, mc_samples: int = DEFAULT_SAMPLES,
                seed: int = 0) -> bool:
    """Whether the radial-integration bound holds for ``f`` around ``origin``."""
    return lemma_sides(body, f, origin, mc_samples, seed).holds


def random_affine(d: int, rng) -> Affine:
    return Affine(rng.normal(size=d), rng.normal())


def random_quadratic(d: int, rng) -> Quadratic:
    a = rng.normal(size=(d, d))
    return Quadratic(a @ a.T / d, rng.normal(size=d), rng.normal())


def random_max_affine(body: ConvexBody, rng, max_pieces: int = 8) -> MaxAffine:
    """Tangent planes of a random strictly convex quadratic at body points.

    Every piece is the maximum near its own tangent point, so all pieces are
    active on a set of positive volume.
    """
    d = body.dim
    k = int(rng.integers(2, max_pieces + 1))
    a = rng.normal(size=(d, d))
    Q = a @ a.T / d + 0.1 * np.eye(d)
    w = rng.normal(size=d)
    pts = radial_sample(body, body.body_centroid, rng, k)
    W = 2 * pts @ Q + w
    b = np.einsum("ni,ij,nj->n", pts, Q, pts) + pts @ w - np.einsum("ni,ni->n", W, pts)
    return MaxAffine(W, b)


FAMILIES = ("affine", "quadratic", "max_affine")


def random_function(family: str, body: ConvexBody, rng):
    if family == "affine":
        return random_affine(body.dim, rng)
    if family == "quadratic":
        return random_quadratic(body.dim, rng)
    if family == "max_affine":
        return random_max_affine(body, rng)
    raise InvalidSpec(f"unknown function family {family!r}")
