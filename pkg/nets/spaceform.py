"""
Quadric models Q_k^n = {p in L : <p, nk> = 1} of the space forms.

All curvatures share one ambient basis with p0 = e_{n+1} + e_{n+2} and
n0 = (e_{n+1} - e_{n+2}) / 2, so moving between models is a rescaling of
light rays.
"""
from dataclasses import dataclass
import logging

import numpy as np

from .errors import DomainError, InfinityBoundaryError, UsageError
from .lorentz import DEFAULT_TOL, as_vector, euclid_norm2, inner, signature_matrix

logger = logging.getLogger(__name__)

# |<p, nk>| below this (relative to |p|) is treated as the infinity boundary
INFINITY_TOL = 1e-8


@dataclass(frozen=True)
class SpaceForm:
    nk: np.ndarray
    curvature: float
    dim: int

    def __post_init__(self):
        if not np.any(self.nk):
            raise UsageError("nk must be nonzero")
        if abs(self.curvature + float(inner(self.nk, self.nk))) > 1e-12 * max(1.0, abs(self.curvature)):
            raise UsageError("SpaceForm curvature does not match -<nk, nk>")

    @property
    def k(self):
        return self.curvature


def base_point(n):
    p0 = np.zeros(n + 2)
    p0[-2:] = 1.0
    return p0


def base_normal(n):
    n0 = np.zeros(n + 2)
    n0[-2] = 0.5
    n0[-1] = -0.5
    return n0


def standard_frame(n):
    """Pseudo-orthonormal frame (e_1, ..., e_n, p0, n0) as matrix columns."""
    frame = np.zeros((n + 2, n + 2))
    frame[:n, :n] = np.eye(n)
    frame[:, n] = base_point(n)
    frame[:, n + 1] = base_normal(n)
    return frame


def canonical_space_form(k, n):
    """
    Space form of curvature k in dimension n.

    Args:
        k: sectional curvature
        n: dimension (>= 2)

    Returns:
        SpaceForm: with nk = n0 - (k/2) p0
    """
    if n < 2:
        raise UsageError(f"Space forms need n >= 2, got {n}")
    nk = base_normal(n) - 0.5 * k * base_point(n)
    return SpaceForm(nk=nk, curvature=float(k), dim=int(n))


def embed_flat(x, q0=None):
    """
    Isometric embedding of R^n into Q_0: x + p0 - |x|^2/2 n0.

    Broadcasts over leading axes of x.
    """
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    if q0 is not None and (q0.dim != n or q0.curvature != 0.0):
        raise UsageError("embed_flat needs the flat model of matching dimension")
    out = np.zeros(x.shape[:-1] + (n + 2,))
    out[..., :n] = x
    out = out + base_point(n) - 0.5 * euclid_norm2(x)[..., None] * base_normal(n)
    return out


def to_euclidean(p):
    """Read off x from a point of the light cone, after normalizing into Q_0."""
    p = as_vector(p)
    n = p.shape[-1] - 2
    q0 = canonical_space_form(0.0, n)
    return stereographic(p, q0)[..., :n]


def stereographic(p, target):
    """
    Generalized stereographic projection: rescale the light ray into the target quadric.

    Raises:
        InfinityBoundaryError: if <p, nk> vanishes (asymptotic direction)
    """
    p = as_vector(p)
    scale = inner(p, target.nk)
    norm = np.sqrt(euclid_norm2(p))
    if np.any(np.abs(scale) < INFINITY_TOL * norm):
        raise InfinityBoundaryError("Point lies on the infinity boundary of the target model")
    return p / np.asarray(scale)[..., None]


def project_points(points, target_k):
    """Batch re-normalization of light-cone points into Q_{target_k}."""
    points = as_vector(points)
    target = canonical_space_form(target_k, points.shape[-1] - 2)
    return stereographic(points, target)


def hat_point(q, p):
    """The second null vector p^ = nk + (k/2) p paired with p (<p, p^> = 1)."""
    return q.nk + 0.5 * q.curvature * np.asarray(p, dtype=float)


def tangent_basis(q, p):
    """
    Orthonormal basis of T_p Q_k, i.e. of the spacelike complement of span(p, p^).

    Returns:
        ndarray: (n, n+2) array of basis vectors
    """
    p = as_vector(p)
    ph = hat_point(q, p)
    basis = []
    m = p.shape[0]
    for i in range(m):
        e = np.zeros(m)
        e[i] = 1.0
        v = e - inner(e, ph) * p - inner(e, p) * ph
        for b in basis:
            v = v - inner(v, b) * b
        norm2 = inner(v, v)
        if norm2 > 1e-8:
            basis.append(v / np.sqrt(norm2))
        if len(basis) == q.dim:
            break
    return np.array(basis)


def geodesic_point(q, p, s, t, tol=DEFAULT_TOL):
    """
    Point at arc length t along the geodesic through p in direction s.

    Args:
        q: SpaceForm
        p: point normalized in q
        s: unit tangent vector, <s, p> = <s, nk> = 0
        t: arc length (scalar or array)

    Returns:
        ndarray: the point p_t, normalized in q
    """
    p = as_vector(p)
    s = as_vector(s)
    if abs(inner(p, q.nk) - 1.0) > 1e-8:
        raise UsageError("geodesic_point needs p normalized in the space form")
    if abs(inner(s, s) - 1.0) > 1e-8 or abs(inner(s, p)) > 1e-8 or abs(inner(s, q.nk)) > 1e-8:
        raise UsageError("Direction s must be a unit vector tangent to Q_k at p")
    k = q.curvature
    t = np.asarray(t, dtype=float)
    tt = t[..., None]
    ph = hat_point(q, p)
    if k == 0.0:
        return tt * s + p - 0.5 * tt ** 2 * ph
    root = np.sqrt(abs(k))
    if k > 0:
        body = np.sin(root * tt) * s + np.cos(root * tt) * (0.5 * root * p + ph / root)
    else:
        body = np.sinh(root * tt) * s + np.cosh(root * tt) * (0.5 * root * p - ph / root)
    return -q.nk / k + body / root


def is_proper_isometry(F, q, tol=1e-10):
    """
    Check that F is a Lorentz transformation fixing nk.

    Returns:
        bool: True if F^T J F = J and F nk = nk within tol
    """
    F = np.asarray(F, dtype=float)
    m = q.nk.shape[0]
    if F.shape != (m, m):
        return False
    J = signature_matrix(m)
    if np.max(np.abs(F.T @ J @ F - J)) > tol:
        return False
    return bool(np.max(np.abs(F @ q.nk - q.nk)) <= tol)


def check_radius(q, radius):
    if radius <= 0:
        raise DomainError(f"Radius must be positive, got {radius}")
    if q.curvature > 0 and radius >= np.pi / np.sqrt(q.curvature) - 1e-12:
        raise DomainError(f"Radius {radius} exceeds the injectivity radius of Q_{q.curvature}")
