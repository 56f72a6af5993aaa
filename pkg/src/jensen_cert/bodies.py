"""Deterministic generators of test polytopes.

No general construction of Jensen candidates is known, so the generators
rely on symmetry: a body that is centrally symmetric, or whose symmetry group
fixes a single point, has its body and boundary centroids at that point.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidSpec, TooLarge
from .geometry import (
    GEO_REL_TOL,
    MAX_DIM,
    MIN_DIM,
    SUBSET_BUDGET,
    ConvexBody,
    build_body,
    extreme_points,
)

KINDS = (
    "cube",
    "box",
    "simplex",
    "cross-polytope",
    "regular-polygon",
    "tangent-polytope",
    "random-symmetric",
    "subdivided-sphere",
    "needle",
)


@dataclass(frozen=True)
class BodySpec:
    kind: str
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        kind = self.kind.lower().replace("_", "-")
        if kind not in KINDS:
            raise InvalidSpec(f"unknown body kind {self.kind!r}; expected one of {', '.join(KINDS)}")
        object.__setattr__(self, "kind", kind)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "params": dict(self.params)}


def _dim(params, default=None) -> int:
    d = params.get("dim", default)
    if d is None:
        raise InvalidSpec("missing parameter 'dim'")
    if int(d) != d or not MIN_DIM <= d <= MAX_DIM:
        raise InvalidSpec(f"dim must be an integer in [{MIN_DIM}, {MAX_DIM}], got {d}")
    return int(d)


def _positive(params, name, default) -> float:
    v = float(params.get(name, default))
    if not v > 0 or not math.isfinite(v):
        raise InvalidSpec(f"parameter {name!r} must be positive, got {v}")
    return v


def cube_vertices(d: int, half_width: float = 1.0) -> np.ndarray:
    return half_width * np.array(list(itertools.product((-1.0, 1.0), repeat=d)))


def box_vertices(half_widths) -> np.ndarray:
    h = np.asarray(half_widths, dtype=float)
    return np.array(list(itertools.product((-1.0, 1.0), repeat=len(h)))) * h


def regular_simplex_vertices(d: int, circumradius: float = 1.0) -> np.ndarray:
    """Regular d-simplex centred at 0; for d = 2 the first vertex points up."""
    # centred standard basis of R^(d+1), expressed in an orthonormal basis of the sum-zero plane
    e = np.eye(d + 1) - 1.0 / (d + 1)
    basis = np.linalg.svd(e)[2][:d]
    v = e @ basis.T
    if d == 2:
        ang = np.arctan2(v[0, 1], v[0, 0])
        rot = np.array([[np.cos(np.pi / 2 - ang), -np.sin(np.pi / 2 - ang)],
                        [np.sin(np.pi / 2 - ang), np.cos(np.pi / 2 - ang)]])
        v = v @ rot.T
    v *= circumradius / np.linalg.norm(v[0])
    return v


def corner_simplex_vertices(d: int, scale: float = 1.0) -> np.ndarray:
    return scale * np.vstack([np.zeros(d), np.eye(d)])


def cross_polytope_vertices(d: int, scale: float = 1.0) -> np.ndarray:
    return scale * np.vstack([np.eye(d), -np.eye(d)])


def regular_polygon_vertices(n: int, inradius: float = 1.0) -> np.ndarray:
    """Regular n-gon whose edge normals sit at angles 2 pi k / n."""
    ang = (2 * np.arange(n) + 1) * np.pi / n
    r = inradius / math.cos(math.pi / n)
    return r * np.column_stack([np.cos(ang), np.sin(ang)])


def _symmetric_normals(d: int, n_facets: int, rng) -> np.ndarray:
    while True:
        half = rng.normal(size=(n_facets // 2, d))
        half /= np.linalg.norm(half, axis=1, keepdims=True)
        # bounded iff the normals span R^d (they come in +- pairs)
        if np.linalg.matrix_rank(half) == d:
            return np.vstack([half, -half])


def halfspace_vertices(normals, offsets) -> np.ndarray:
    """Vertices of {x : normals @ x <= offsets} by brute force over d-subsets."""
    normals = np.asarray(normals, dtype=float)
    offsets = np.asarray(offsets, dtype=float)
    m, d = normals.shape
    if math.comb(m, d) > SUBSET_BUDGET:
        raise TooLarge(f"C({m},{d}) exceeds the subset budget")
    scale = float(np.abs(offsets).max())
    found = []
    for subset in itertools.combinations(range(m), d):
        sub = normals[list(subset)]
        if abs(np.linalg.det(sub)) < 1e-10:
            continue
        x = np.linalg.solve(sub, offsets[list(subset)])
        if np.all(normals @ x <= offsets + GEO_REL_TOL * scale):
            if not any(np.linalg.norm(x - y) <= GEO_REL_TOL * scale for y in found):
                found.append(x)
    return np.array(found)


def icosahedron_vertices() -> np.ndarray:
    phi = (1 + math.sqrt(5)) / 2
    pts = []
    for a, b in itertools.product((-1.0, 1.0), repeat=2):
        pts += [(0.0, a, b * phi), (a, b * phi, 0.0), (b * phi, 0.0, a)]
    v = np.array(pts)
    return v / np.linalg.norm(v, axis=1, keepdims=True)


def subdivided_sphere_vertices(level: int) -> np.ndarray:
    """Icosahedron with each edge midpoint added and pushed to the unit sphere, ``level`` times."""
    v = icosahedron_vertices()
    for _ in range(level):
        dist = np.linalg.norm(v[:, None] - v[None], axis=-1)
        edge = dist[dist > 0].min()
        i, j = np.nonzero(np.triu(np.abs(dist - edge) < 1e-9 * edge))
        mid = (v[i] + v[j]) / 2
        v = np.vstack([v, mid / np.linalg.norm(mid, axis=1, keepdims=True)])
    return v


def _vertices(spec: BodySpec) -> np.ndarray:
    p = spec.params
    kind = spec.kind
    if kind == "cube":
        return cube_vertices(_dim(p), _positive(p, "half_width", 1.0))
    if kind == "box":
        if "half_widths" not in p:
            raise InvalidSpec("box needs 'half_widths'")
        h = np.asarray(p["half_widths"], dtype=float)
        if not MIN_DIM <= len(h) <= MAX_DIM or np.any(h <= 0):
            raise InvalidSpec("box half_widths must be positive, 2 to 6 of them")
        return box_vertices(h)
    if kind == "simplex":
        d = _dim(p)
        if p.get("regular", True):
            return regular_simplex_vertices(d, _positive(p, "scale", 1.0))
        return corner_simplex_vertices(d, _positive(p, "scale", 1.0))
    if kind == "cross-polytope":
        return cross_polytope_vertices(_dim(p), _positive(p, "scale", 1.0))
    if kind == "regular-polygon":
        n = int(p.get("n", 0))
        if n < 3 or n > 64:
            raise InvalidSpec("regular-polygon needs 3 <= n <= 64")
        return regular_polygon_vertices(n, _positive(p, "inradius", 1.0))
    if kind == "tangent-polytope":
        d = _dim(p)
        n_facets = int(p.get("facets", 4 * d))
        if n_facets % 2 or n_facets < 2 * d:
            raise InvalidSpec("tangent-polytope needs an even facet count >= 2 * dim")
        rng = np.random.default_rng(int(p.get("seed", 0)))
        r = _positive(p, "inradius", 1.0)
        normals = _symmetric_normals(d, n_facets, rng)
        return halfspace_vertices(normals, np.full(n_facets, r))
    if kind == "random-symmetric":
        d = _dim(p)
        count = int(p.get("points", 2 * d))
        if count < d or 2 * count > 64:
            raise InvalidSpec("random-symmetric needs dim <= points <= 32")
        rng = np.random.default_rng(int(p.get("seed", 0)))
        pts = _positive(p, "scale", 1.0) * rng.normal(size=(count, d))
        return extreme_points(np.vstack([pts, -pts]))
    if kind == "subdivided-sphere":
        level = int(p.get("level", 1))
        if level not in (0, 1):
            raise InvalidSpec("subdivided-sphere supports level 0 or 1")
        v = subdivided_sphere_vertices(level)
        inradius = min(f.offset for f in build_body(v).facets)
        return v * _positive(p, "inradius", 1.0) / inradius
    if kind == "needle":
        d = _dim(p)
        length = _positive(p, "length", 10.0 * d)
        return np.array(list(itertools.product(*([(0.0, length)] + [(0.0, 1.0)] * (d - 1)))))
    raise InvalidSpec(f"unhandled kind {kind}")


def generate(spec: BodySpec) -> ConvexBody:
    """Build the body described by ``spec``; ``params['center']`` translates it."""
    v = _vertices(spec)
    if "center" in spec.params:
        shift = np.asarray(spec.params["center"], dtype=float)
        if shift.shape != (v.shape[1],):
            raise InvalidSpec("center has the wrong dimension")
        v = v + shift
    return build_body(v)


def is_centrally_symmetric(body: ConvexBody) -> bool:
    """Whether the vertex set is invariant under reflection through the centroid."""
    mirrored = 2 * body.body_centroid - body.vertices
    dist = np.linalg.norm(mirrored[:, None, :] - body.vertices[None, :, :], axis=-1)
    return bool(np.all(dist.min(axis=1) <= body.eps_geo))
