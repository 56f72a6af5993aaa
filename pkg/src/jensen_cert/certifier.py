"""Checkable sufficient conditions for the Jensen property of a polytope.

For an origin ``p`` inside a polytope, the cone-volume height of a facet is
``offset - normal @ p``: the distance from ``p`` to the facet hyperplane.
A Jensen candidate (body and boundary share their centroid) is a Jensen
domain as soon as some interior point has every facet height at most
``(d + 1) * volume / surface_area``.  Since heights depend on the origin,
:func:`certify` minimises the largest height over all interior points.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .errors import LPFailure, OriginNotInterior
from .geometry import ConvexBody, Facet
from .lp import linprog, lexmin_linprog

CANDIDATE_TOL = 1e-7
CERT_REL_TOL = 1e-8
# slack added to frozen LP levels and used to decide whether a level is forced,
# both relative to the body diameter
_LEVEL_SLACK = 1e-10
_FORCED_TOL = 1e-9
# smallest singular value of the frozen normals that pins the point down
_WELL_POSED = 1e-6


def _origin(body: ConvexBody, origin) -> np.ndarray:
    if origin is None:
        return np.zeros(body.dim)
    p = np.asarray(origin, dtype=float)
    if p.shape != (body.dim,):
        raise OriginNotInterior(f"origin has shape {p.shape}, body dimension is {body.dim}")
    return p


def cone_distances(body: ConvexBody, origin=None) -> np.ndarray:
    """Facet heights ``offset_i - normal_i @ origin`` for every facet."""
    p = _origin(body, origin)
    h = body.offsets - body.normals @ p
    if np.any(h <= body.eps_geo):
        raise OriginNotInterior(f"origin {p.tolist()} is not strictly inside the body")
    return h


def cone_distance(body: ConvexBody, facet: Facet, origin=None) -> float:
    """Distance from ``origin`` to the hyperplane of ``facet``."""
    cone_distances(body, origin)
    p = _origin(body, origin)
    return float(facet.offset - facet.normal @ p)


def h_max(body: ConvexBody, origin=None) -> float:
    """Largest facet height seen from ``origin``."""
    return float(cone_distances(body, origin).max())


def candidate_check(body: ConvexBody, tol: float = CANDIDATE_TOL) -> tuple[bool, float]:
    """Whether body and boundary centroids agree, with the diameter-scaled gap."""
    gap = float(np.linalg.norm(body.body_centroid - body.boundary_centroid) / body.diameter)
    return gap <= tol, gap


def _scaled_halfspaces(body: ConvexBody):
    # work around the vertex mean, in units of the diameter
    p = body.interior_point
    return body.normals, (body.offsets - body.normals @ p) / body.diameter, p


def chebyshev_center(body: ConvexBody) -> tuple[np.ndarray, float]:
    """Centre and radius of the largest inscribed ball.

    Among several optimal centres the lexicographically smallest is returned.
    """
    normals, s, p = _scaled_halfspaces(body)
    d = body.dim
    A = np.hstack([normals, np.ones((len(s), 1))])
    c = np.zeros(d + 1)
    c[-1] = -1.0
    res = lexmin_linprog(c, A, s, order=range(d))
    u, r = res.x[:d], res.x[d]
    if not r > 0:
        raise LPFailure("inscribed ball has non-positive radius")
    return p + body.diameter * u, float(r * body.diameter)


@dataclass(frozen=True)
class MinimaxResult:
    """Lexicographic minimiser of the facet heights.

    ``levels[i]`` is the height at which facet ``i`` was frozen; the first
    (largest) level equals ``h``.  ``interior`` is false when the minimiser
    lies on the boundary, so ``h`` is an infimum over interior origins.
    """

    center: np.ndarray
    h: float
    levels: np.ndarray
    interior: bool = True


def lexicographic_minimax(body: ConvexBody) -> MinimaxResult:
    """Minimise the largest facet height, then the next largest, and so on.

    Plain minimax optimisers are rarely unique (a long box can slide along its
    short axes), so heights that are forced at the current optimum are frozen
    and the remaining ones minimised again until the frozen normals span
    R^d.  The result is unique and, for symmetric bodies, is the centre of
    symmetry.  The search runs over the closed body: without the constraint
    that heights stay nonnegative the minimiser can leave the body.
    """
    normals, s, p = _scaled_halfspaces(body)
    m, d = normals.shape
    inside = np.hstack([normals, np.zeros((m, 1))])
    levels = np.full(m, np.nan)
    free = np.ones(m, dtype=bool)
    while free.any():
        fixed = ~free
        # variables (u, t): minimise t
        A = np.vstack([
            np.hstack([-normals[free], -np.ones((free.sum(), 1))]),
            np.hstack([-normals[fixed], np.zeros((fixed.sum(), 1))]),
            inside,
        ])
        b = np.concatenate([-s[free], levels[fixed] + _LEVEL_SLACK - s[fixed], s])
        cost = np.zeros(d + 1)
        cost[-1] = 1.0
        res = linprog(cost, A, b)
        u, t = res.x[:d], res.x[d]
        last = u

        # a free height is forced when no optimal point can lower it
        A_opt = np.vstack([-normals[free], -normals[fixed], normals])
        b_opt = np.concatenate([
            t + _LEVEL_SLACK - s[free], levels[fixed] + _LEVEL_SLACK - s[fixed], s
        ])
        slack = s - normals @ u
        forced = []
        for i in np.flatnonzero(free & (slack >= t - _FORCED_TOL)):
            low = linprog(-normals[i], A_opt, b_opt)
            if s[i] - normals[i] @ low.x >= t - _FORCED_TOL:
                forced.append(i)
        if not forced:
            raise LPFailure("minimax refinement made no progress")
        levels[forced] = t
        free[forced] = False
        frozen = normals[~free]
        if len(frozen) >= d and np.linalg.svd(frozen, compute_uv=False)[d - 1] >= _WELL_POSED:
            break

    fixed = ~free
    # the frozen equalities pin the point down; solving them removes the LP
    # slack, but only a polish that keeps every height in range is accepted
    polished = np.linalg.lstsq(normals[fixed], s[fixed] - levels[fixed], rcond=None)[0]
    u = last
    lp_heights, new_heights = s - normals @ last, s - normals @ polished
    if (new_heights.max() <= lp_heights.max() + _LEVEL_SLACK
            and new_heights.min() >= min(lp_heights.min(), 0.0) - _LEVEL_SLACK):
        u = polished
    center = p + body.diameter * u
    heights = body.offsets - body.normals @ center
    levels = np.where(fixed, levels * body.diameter, heights)
    return MinimaxResult(center=center, h=float(heights.max()), levels=levels,
                         interior=bool(np.all(heights > body.eps_geo)))


def optimal_translate(body: ConvexBody) -> tuple[np.ndarray, float]:
    """Interior point minimising the largest facet height, and that height.

    Raises :class:`LPFailure` when the minimum over the closed body is only
    reached on its boundary.
    """
    res = lexicographic_minimax(body)
    if not res.interior:
        raise LPFailure("optimal translate is not interior to the body")
    return res.center, res.h


@dataclass(frozen=True)
class CertificateReport:
    dim: int
    volume: float
    surface_area: float
    is_candidate: bool
    centroid_gap: float
    origin_used: tuple
    # false when h_max below is an infimum reached only on the boundary
    origin_interior: bool
    h_max: float
    bound: float
    ratio: float
    certified: bool
    strict: bool
    inscribed_center: tuple
    inscribed_radius: float
    tangent_identity_holds: bool
    # d * volume / surface_area: h_max at the incentre of a tangent body
    tangent_value: float
    candidate_tol: float

    def to_dict(self) -> dict:
        return asdict(self)


def certify(body: ConvexBody, tol: float = CANDIDATE_TOL) -> CertificateReport:
    """Run the candidate test and the facet-height test at the best translate."""
    d = body.dim
    is_candidate, gap = candidate_check(body, tol)
    # heights are affine in the origin, so an infimum reached on the boundary
    # is approached by interior origins and certifies just the same
    best = lexicographic_minimax(body)
    center, h = best.center, best.h
    bound = (d + 1) * body.volume / body.surface_area
    eps = CERT_REL_TOL * bound
    certified = is_candidate and h <= bound + eps
    strict = is_candidate and h < bound - eps

    cheb, radius = chebyshev_center(body)
    heights = cone_distances(body, cheb)
    tangent = bool(heights.max() - heights.min() <= body.eps_geo)

    return CertificateReport(
        dim=d,
        volume=body.volume,
        surface_area=body.surface_area,
        is_candidate=bool(is_candidate),
        centroid_gap=gap,
        origin_used=tuple(float(v) + 0.0 for v in center),
        origin_interior=best.interior,
        h_max=h,
        bound=bound,
        ratio=h / bound,
        certified=bool(certified),
        strict=bool(strict),
        inscribed_center=tuple(float(v) + 0.0 for v in cheb),
        inscribed_radius=radius,
        tangent_identity_holds=tangent,
        tangent_value=d * body.volume / body.surface_area,
        candidate_tol=tol,
    )


def shell_radius(d: int) -> float:
    """Outer radius (1 + 1/d)^(1/d) of the admissible spherical shell."""
    return (1.0 + 1.0 / d) ** (1.0 / d)


def shell_certify(body: ConvexBody) -> tuple[bool, float, float]:
    """Test whether the boundary lies in the shell 1 <= |x| <= (1 + 1/d)^(1/d).

    Returns ``(passed, inner, outer)`` where ``inner`` is the distance from
    the origin to the nearest facet hyperplane and ``outer`` the largest
    vertex norm.
    """
    inner = float(cone_distances(body).min())
    outer = float(np.linalg.norm(body.vertices, axis=1).max())
    eps = body.eps_geo
    return (inner >= 1 - eps and outer <= shell_radius(body.dim) + eps), inner, outer

