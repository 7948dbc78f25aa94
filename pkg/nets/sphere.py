"""Oriented hyperspheres, m-spheres, circles and the cross ratio."""
from dataclasses import dataclass
import logging

import numpy as np
from scipy.linalg import null_space

from .errors import (
    ComplexConfigurationError,
    DegenerateConfigurationError,
    DegenerateInputError,
    SingularParametrizationError,
    UsageError,
)
from .lorentz import DEFAULT_TOL, as_vector, euclid_norm2, inner, signature_matrix
from .spaceform import base_normal, base_point, check_radius, geodesic_point, tangent_basis

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SpacelikePlane:
    basis: np.ndarray  # rows are orthonormal spacelike vectors
    m: int

    def projector(self):
        """Lorentz-orthogonal projector onto the plane: sum_i s_i <s_i, .>."""
        J = signature_matrix(self.basis.shape[1])
        return self.basis.T @ self.basis @ J

    def same_plane(self, other, tol=1e-10):
        return bool(np.max(np.abs(self.projector() - other.projector())) <= tol)


@dataclass(frozen=True)
class CircleFrame:
    s: np.ndarray
    p: np.ndarray
    phat: np.ndarray

    def __post_init__(self):
        checks = (inner(self.s, self.p), inner(self.s, self.phat), inner(self.p, self.phat) - 1.0)
        if max(abs(float(c)) for c in checks) > 1e-10:
            raise UsageError("CircleFrame needs <s,p> = <s,phat> = 0 and <p,phat> = 1")


def sphere_from_contact(p, tangent_normal, h, tol=1e-8):
    """
    The sphere touching the hyperplane element (p, n) with mean curvature h.

    Args:
        p: point normalized in some Q_k
        tangent_normal: unit vector orthogonal to p and nk
        h: mean curvature <s, nk>

    Returns:
        ndarray: s = n + h p
    """
    p = as_vector(p)
    n = as_vector(tangent_normal)
    if abs(inner(n, n) - 1.0) > tol or abs(inner(n, p)) > tol:
        raise UsageError("tangent_normal must be a unit vector orthogonal to p")
    return n + h * p


def incidence(p, s):
    """<p, s>; zero iff the point lies on the sphere."""
    return inner(p, s)


def angle(s1, s2):
    """Cosine of the intersection angle, <s1, s2>."""
    return inner(s1, s2)


def sphere_from_center(center, radius, q, samples=None):
    """
    Sphere of geodesic radius around a center, fitted through sampled geodesic endpoints.

    The orientation is chosen so that the mean curvature <s, nk> is nonnegative.
    """
    check_radius(q, radius)
    center = as_vector(center)
    basis = tangent_basis(q, center)
    directions = list(basis) + [-b for b in basis]
    rng = np.random.default_rng(0)
    for _ in range(samples or q.dim + 2):
        d = rng.normal(size=q.dim) @ basis
        directions.append(d / np.sqrt(inner(d, d)))
    points = np.array([geodesic_point(q, center, d, radius) for d in directions])
    J = signature_matrix(center.shape[0])
    # rows (J p)^T: solve (J p) . s = <p, s> = 0 in the least-squares sense
    ns = null_space(points @ J, rcond=1e-9)
    if ns.shape[1] == 0:
        _, _, vh = np.linalg.svd(points @ J)
        s = vh[-1]
    else:
        s = ns[:, 0]
    norm2 = inner(s, s)
    if norm2 <= 0:
        raise DegenerateInputError("Fitted sphere vector is not spacelike")
    s = s / np.sqrt(norm2)
    if inner(s, q.nk) < 0:
        s = -s
    return s


def sphere_center_radius_flat(s):
    """
    Euclidean description of a sphere vector in the flat model.

    Returns:
        tuple: ('sphere', center, radius) or ('plane', unit normal, offset)
    """
    s = as_vector(s)
    n = s.shape[0] - 2
    h = inner(s, base_normal(n))
    x = s[:n]
    if abs(h) < 1e-12:
        # plane x . nu = offset with s = nu - offset n0
        offset = -float(inner(s, base_point(n)))
        return ('plane', x, offset)
    center = x / h
    return ('sphere', center, 1.0 / abs(h))


def pencil_contains(s, p, candidate, tol=1e-8):
    """
    True iff candidate lies in the parabolic pencil s + R p.
    """
    s = as_vector(s)
    p = as_vector(p)
    candidate = as_vector(candidate)
    if abs(inner(p, s)) > tol * np.sqrt(euclid_norm2(p)):
        raise UsageError("The pencil needs p on s")
    if abs(inner(candidate, p)) > tol * np.sqrt(euclid_norm2(p)):
        return False
    d = candidate - s
    lam = float(np.dot(d, p) / np.dot(p, p))
    rest = d - lam * p
    return bool(np.sqrt(euclid_norm2(rest)) <= tol * (1.0 + np.sqrt(euclid_norm2(candidate))))


def msphere_span(spheres, tol=DEFAULT_TOL):
    """
    Orthonormalize spheres into the spacelike plane of their common m-sphere.

    Raises:
        DegenerateInputError: if the span is not spacelike
    """
    vectors = [as_vector(s) for s in spheres]
    dim = vectors[0].shape[0]
    basis = []
    for v in vectors:
        w = v.copy()
        for b in basis:
            w = w - inner(w, b) * b
        q = inner(w, w)
        if q <= tol * max(1.0, euclid_norm2(v)):
            raise DegenerateInputError("Spheres do not span a spacelike plane (no common m-sphere)")
        basis.append(w / np.sqrt(q))
    n = dim - 2
    return SpacelikePlane(basis=np.array(basis), m=n - len(basis))


def circle_point(cf, g, gprime):
    """
    Point of the circle orthogonal to (s, p, phat) at parameter g.

    Returns:
        ndarray: (g s + p - g^2/2 phat) / g'
    """
    if gprime == 0:
        raise SingularParametrizationError("g' must be nonzero")
    return (g * cf.s + cf.p - 0.5 * g * g * cf.phat) / gprime


def cross_ratio(a, b, c, d, tol=1e-12):
    """
    Cross ratio sqrt(<a,b><c,d> / (<b,c><d,a>)) of four light-cone points.

    Broadcasts over leading axes; the principal nonnegative root is returned.
    """
    ab = inner(a, b)
    cd = inner(c, d)
    bc = inner(b, c)
    da = inner(d, a)
    denom = bc * da
    scale = np.sqrt(euclid_norm2(a) * euclid_norm2(b) * euclid_norm2(c) * euclid_norm2(d))
    if np.any(np.abs(denom) <= tol * scale):
        raise DegenerateConfigurationError("Cross ratio denominator vanishes (coincident points)")
    radicand = ab * cd / denom
    if np.any(radicand < -tol):
        raise ComplexConfigurationError("Cross ratio radicand is negative")
    return np.sqrt(np.clip(radicand, 0.0, None))
