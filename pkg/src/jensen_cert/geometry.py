"""Polytope geometry at machine precision.

Bodies are given by their vertices.  The facet structure is recovered by
brute force over all d-subsets of the vertices, which is slow asymptotically
but exact enough (and simple enough) for the desk-scale bodies this package
deals with.  Every facet is triangulated once, at construction, and the
resulting simplices are reused for measures, centroids, quadrature and
sampling.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateInput, DimensionMismatch, NonExtremeVertex, TooLarge

MIN_DIM = 2
MAX_DIM = 6
MAX_VERTICES = 64
SUBSET_BUDGET = 5_000_000
# coincidence tolerance, relative to the body diameter
GEO_REL_TOL = 1e-9

_CHUNK = 20_000


@dataclass(frozen=True, eq=False)
class Simplex:
    """Convex hull of k+1 affinely independent points in R^d."""

    vertices: np.ndarray

    def __post_init__(self):
        v = np.array(self.vertices, dtype=float)
        if v.ndim != 2 or v.shape[0] < 1 or v.shape[0] - 1 > v.shape[1]:
            raise DimensionMismatch(f"bad simplex vertex array of shape {v.shape}")
        v.setflags(write=False)
        object.__setattr__(self, "vertices", v)

    @property
    def dim(self) -> int:
        return self.vertices.shape[0] - 1

    @property
    def measure(self) -> float:
        return simplex_measure(self)

    @property
    def centroid(self) -> np.ndarray:
        return self.vertices.mean(axis=0)


@dataclass(frozen=True, eq=False)
class Facet:
    normal: np.ndarray
    offset: float
    vertex_indices: tuple
    measure: float
    centroid: np.ndarray
    # (n, d, d) stack of (d-1)-simplices partitioning the facet
    simplices: np.ndarray = field(repr=False)
    simplex_measures: np.ndarray = field(repr=False)


@dataclass(frozen=True, eq=False)
class ConvexBody:
    """Full-dimensional convex polytope with cached decompositions.

    ``boundary_simplices`` stacks every facet simplex (shape ``(S, d, d)``)
    and ``boundary_facet`` maps each of them to its facet.  ``body_simplices``
    are the d-simplices obtained by coning the boundary simplices from
    ``interior_point``.
    """

    dim: int
    vertices: np.ndarray
    facets: tuple
    volume: float
    surface_area: float
    body_centroid: np.ndarray
    boundary_centroid: np.ndarray
    interior_point: np.ndarray
    diameter: float
    boundary_simplices: np.ndarray = field(repr=False)
    boundary_measures: np.ndarray = field(repr=False)
    boundary_facet: np.ndarray = field(repr=False)
    body_simplices: np.ndarray = field(repr=False)
    body_measures: np.ndarray = field(repr=False)

    @property
    def eps_geo(self) -> float:
        return GEO_REL_TOL * self.diameter

    @property
    def normals(self) -> np.ndarray:
        return np.array([f.normal for f in self.facets])

    @property
    def offsets(self) -> np.ndarray:
        return np.array([f.offset for f in self.facets])

    def translated(self, shift) -> "ConvexBody":
        return build_body(self.vertices + np.asarray(shift, dtype=float))

    def scaled(self, factor: float) -> "ConvexBody":
        return build_body(self.vertices * float(factor))

    def contains(self, x, strict: bool = False) -> bool:
        slack = self.offsets - self.normals @ np.asarray(x, dtype=float)
        if strict:
            return bool(np.all(slack > self.eps_geo))
        return bool(np.all(slack >= -self.eps_geo))


def _frozen(a) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


def simplex_measure(s) -> float:
    """Lebesgue k-measure sqrt(det(E^T E)) / k! of a k-simplex in R^d.

    Accepts a :class:`Simplex` or a raw ``(k+1, d)`` vertex array.  Affinely
    dependent vertices give 0.
    """
    v = s.vertices if isinstance(s, Simplex) else np.asarray(s, dtype=float)
    return float(_simplex_measures(v[None])[0])


def _simplex_measures(v: np.ndarray) -> np.ndarray:
    """Vectorised k-measures for a ``(n, k+1, d)`` stack of simplices."""
    k = v.shape[1] - 1
    if k == 0:
        return np.ones(v.shape[0])
    e = v[:, 1:, :] - v[:, :1, :]
    gram = e @ np.swapaxes(e, 1, 2)
    det = np.linalg.det(gram)
    return np.sqrt(np.clip(det, 0.0, None)) / math.factorial(k)


def _diameter(x: np.ndarray) -> float:
    diff = x[:, None, :] - x[None, :, :]
    return float(np.sqrt((diff**2).sum(-1)).max())


def _candidate_normals(e: np.ndarray) -> np.ndarray:
    """Generalised cross products of the (d-1) edge rows in each ``e[i]``."""
    n, _, d = e.shape
    out = np.empty((n, d))
    cols = np.arange(d)
    for j in range(d):
        minor = e[:, :, cols != j]
        out[:, j] = (-1) ** j * (np.linalg.det(minor) if d > 1 else 1.0)
    return out


def _hull_planes(x: np.ndarray, tol: float) -> list:
    """Supporting hyperplanes of conv(x) through >= d points of x.

    ``x`` must already be centred and scaled to unit diameter.  Returns a list
    of ``(normal, offset, on_plane_indices)`` with outward unit normals, one
    entry per distinct facet.
    """
    n, d = x.shape
    n_subsets = math.comb(n, d)
    if n_subsets > SUBSET_BUDGET:
        raise TooLarge(f"C({n},{d}) = {n_subsets} exceeds the subset budget {SUBSET_BUDGET}")
    found = {}
    combos = itertools.combinations(range(n), d)
    while True:
        chunk = np.fromiter(
            itertools.chain.from_iterable(itertools.islice(combos, _CHUNK)), dtype=np.int64
        )
        if chunk.size == 0:
            break
        idx = chunk.reshape(-1, d)
        pts = x[idx]
        e = pts[:, 1:, :] - pts[:, :1, :]
        normals = _candidate_normals(e)
        norm = np.linalg.norm(normals, axis=1)
        edge_scale = np.prod(np.linalg.norm(e, axis=2), axis=1)
        ok = norm > 1e-10 * np.maximum(edge_scale, 1e-300)
        if not ok.any():
            continue
        normals = normals[ok] / norm[ok, None]
        offsets = np.einsum("ij,ij->i", normals, pts[ok, 0, :])
        side = x @ normals.T - offsets
        below = np.all(side <= tol, axis=0)
        above = np.all(side >= -tol, axis=0)
        for c in np.flatnonzero(below | above):
            key = tuple(np.flatnonzero(np.abs(side[:, c]) <= tol))
            if key not in found:
                found[key] = True
    planes = []
    centre = x.mean(axis=0)
    for key in found:
        on = x[list(key)]
        mid = on.mean(axis=0)
        normal = np.linalg.svd(on - mid)[2][-1]
        if normal @ (centre - mid) > 0:
            normal = -normal
        planes.append((normal, float(normal @ mid), key))
    return planes


def _hyperplane_basis(normal: np.ndarray) -> np.ndarray:
    """Orthonormal rows spanning the complement of ``normal``."""
    return np.linalg.svd(normal[None, :])[2][1:]


def _triangulate_indices(p: np.ndarray) -> list:
    """Index tuples of k-simplices partitioning conv(p), p of shape (m, k).

    All rows of ``p`` are assumed to be vertices of their hull.  Polygons are
    fanned from the first vertex in angular order; higher dimensional
    polytopes are split by pulling: the cone from vertex 0 over a
    triangulation of every facet not containing it.
    """
    m, k = p.shape
    if k == 1:
        return [(int(np.argmin(p[:, 0])), int(np.argmax(p[:, 0])))]
    if k == 2:
        rel = p - p.mean(axis=0)
        order = np.argsort(np.arctan2(rel[:, 1], rel[:, 0]), kind="stable")
        return [(int(order[0]), int(order[i]), int(order[i + 1])) for i in range(1, m - 1)]
    mid = p.mean(axis=0)
    scale = _diameter(p)
    q = (p - mid) / scale
    out = []
    for normal, _, on in _hull_planes(q, GEO_REL_TOL):
        if 0 in on:
            continue
        on = list(on)
        sub = (q[on] - q[on[0]]) @ _hyperplane_basis(normal).T
        for tri in _triangulate_indices(sub):
            out.append((0,) + tuple(on[i] for i in tri))
    return out


def _make_facet(x: np.ndarray, normal, offset, indices) -> Facet:
    pts = x[list(indices)]
    if len(indices) < x.shape[1]:
        raise DegenerateInput("facet has fewer than d vertices")
    proj = (pts - pts[0]) @ _hyperplane_basis(normal).T
    tris = _triangulate_indices(proj)
    simplices = pts[np.array(tris)]
    measures = _simplex_measures(simplices)
    keep = measures > 0
    simplices, measures = simplices[keep], measures[keep]
    total = float(measures.sum())
    if not total > 0:
        raise DegenerateInput("degenerate facet with zero measure")
    centroid = (measures[:, None] * simplices.mean(axis=1)).sum(axis=0) / total
    return Facet(
        normal=_frozen(normal),
        offset=float(offset),
        vertex_indices=tuple(int(i) for i in indices),
        measure=total,
        centroid=_frozen(centroid),
        simplices=_frozen(simplices),
        simplex_measures=_frozen(measures),
    )


def _check_points(vertices, dim=None) -> np.ndarray:
    x = np.array(vertices, dtype=float)
    if x.ndim != 2:
        raise DimensionMismatch("vertices must be a 2-D array of points")
    d = x.shape[1]
    if dim is not None and d != dim:
        raise DimensionMismatch(f"points have dimension {d}, expected {dim}")
    if not MIN_DIM <= d <= MAX_DIM:
        raise DimensionMismatch(f"dimension {d} outside supported range [{MIN_DIM}, {MAX_DIM}]")
    if not np.all(np.isfinite(x)):
        raise DegenerateInput("non-finite coordinates")
    if x.shape[0] > MAX_VERTICES:
        raise TooLarge(f"{x.shape[0]} points exceed the limit of {MAX_VERTICES}")
    if x.shape[0] < d + 1:
        raise DegenerateInput(f"need at least {d + 1} points in dimension {d}")
    if np.linalg.matrix_rank(x - x[0], tol=GEO_REL_TOL * _diameter(x)) < d:
        raise DegenerateInput("points are not full-dimensional")
    return x


def facet_enumeration(vertices, dim: int | None = None):
    """Facets of the convex hull of ``vertices``.

    Returns ``(facets, non_extreme)``: the facet list with outward unit
    normals, and the sorted indices of input points that are not extreme
    (interior points, points in the relative interior of a face, or
    duplicates).  Facet ``vertex_indices`` only reference extreme points.
    """
    x = _check_points(vertices, dim)
    n, d = x.shape
    mid = x.mean(axis=0)
    diam = _diameter(x)
    q = (x - mid) / diam
    planes = _hull_planes(q, GEO_REL_TOL)

    incident = [[] for _ in range(n)]
    for f, (_, _, on) in enumerate(planes):
        for i in on:
            incident[i].append(f)
    non_extreme = set()
    for i in range(n):
        dup = np.linalg.norm(q[:i] - q[i], axis=1) <= GEO_REL_TOL
        if dup.any():
            non_extreme.add(i)
            continue
        rows = np.array([planes[f][0] for f in incident[i]]).reshape(-1, d)
        if len(rows) < d or np.linalg.matrix_rank(rows, tol=1e-9) < d:
            non_extreme.add(i)

    facets = []
    for normal, offset, on in planes:
        on = tuple(i for i in on if i not in non_extreme)
        # refit on the original coordinates for full precision
        pts = x[list(on)]
        centre = pts.mean(axis=0)
        refit = np.linalg.svd(pts - centre)[2][-1]
        if refit @ normal < 0:
            refit = -refit
        facets.append(_make_facet(x, refit, float(refit @ centre), on))
    return facets, sorted(non_extreme)


def extreme_points(points) -> np.ndarray:
    """Rows of ``points`` that are vertices of their convex hull, in input order."""
    x = np.asarray(points, dtype=float)
    _, non_extreme = facet_enumeration(x)
    keep = np.setdiff1d(np.arange(len(x)), non_extreme)
    return x[keep]


def triangulate_facet(facet: Facet, body: ConvexBody | None = None) -> list:
    """(d-1)-simplices partitioning ``facet``.

    Triangulations are computed once when the facet is built; ``body`` is
    accepted for symmetry with the other per-facet operations.
    """
    return [Simplex(s) for s in facet.simplices]


def build_body(vertices) -> ConvexBody:
    """Assemble a :class:`ConvexBody` from its vertex list.

    Raises :class:`NonExtremeVertex` when any input point is not a vertex of
    the hull; use :func:`extreme_points` first to drop such points on purpose.
    """
    x = _check_points(vertices)
    facets, non_extreme = facet_enumeration(x)
    if non_extreme:
        raise NonExtremeVertex(non_extreme)
    d = x.shape[1]
    p = x.mean(axis=0)

    bnd = np.concatenate([f.simplices for f in facets])
    bnd_meas = np.concatenate([f.simplex_measures for f in facets])
    bnd_facet = np.concatenate([np.full(len(f.simplices), i) for i, f in enumerate(facets)])
    heights = np.array([f.offset - f.normal @ p for f in facets])
    if np.any(heights <= 0):
        raise DegenerateInput("vertex mean is not interior")

    areas = np.array([f.measure for f in facets])
    volume = float(heights @ areas / d)
    surface_area = float(areas.sum())
    if not volume > 0:
        raise DegenerateInput("body has zero volume")

    cones = np.concatenate([np.broadcast_to(p, (len(bnd), 1, d)), bnd], axis=1)
    cone_meas = heights[bnd_facet] * bnd_meas / d
    body_centroid = (cone_meas[:, None] * cones.mean(axis=1)).sum(axis=0) / cone_meas.sum()
    boundary_centroid = (bnd_meas[:, None] * bnd.mean(axis=1)).sum(axis=0) / surface_area

    return ConvexBody(
        dim=d,
        vertices=_frozen(x),
        facets=tuple(facets),
        volume=volume,
        surface_area=surface_area,
        body_centroid=_frozen(body_centroid),
        boundary_centroid=_frozen(boundary_centroid),
        interior_point=_frozen(p),
        diameter=_diameter(x),
        boundary_simplices=_frozen(bnd),
        boundary_measures=_frozen(bnd_meas),
        boundary_facet=np.asarray(bnd_facet, dtype=np.int64),
        body_simplices=_frozen(cones),
        body_measures=_frozen(cone_meas),
    )
