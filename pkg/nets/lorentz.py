"""Minkowski linear algebra on R^{n+2} with signature (+,...,+,-).

Vectors are plain float64 numpy arrays whose last axis holds the coordinates;
the timelike slot is the last coordinate. Every function broadcasts over
leading axes so grids of vectors can be handled without Python loops.
"""
from dataclasses import dataclass
import logging

import numpy as np

from .errors import DegenerateInputError, UsageError

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10

SPACELIKE = 'spacelike'
LIGHTLIKE = 'lightlike'
TIMELIKE = 'timelike'


def as_vector(v):
    """Coerce to a float64 array with at least three coordinates."""
    arr = np.asarray(v, dtype=float)
    if arr.ndim == 0 or arr.shape[-1] < 3:
        raise UsageError(f"Minkowski vectors need at least 3 coordinates, got shape {arr.shape}")
    return arr


def signature_matrix(m):
    """Diagonal Gram matrix J = diag(1,...,1,-1) of size m."""
    J = np.eye(m)
    J[-1, -1] = -1.0
    return J


def inner(u, v):
    """
    Lorentz scalar product, broadcasting over leading axes.

    Args:
        u: array (..., m)
        v: array (..., m)

    Returns:
        ndarray or float: sum_{i<m} u_i v_i - u_m v_m
    """
    u = as_vector(u)
    v = as_vector(v)
    if u.shape[-1] != v.shape[-1]:
        raise UsageError(f"Dimension mismatch: {u.shape[-1]} vs {v.shape[-1]}")
    return np.sum(u[..., :-1] * v[..., :-1], axis=-1) - u[..., -1] * v[..., -1]


def euclid_norm2(v):
    v = np.asarray(v, dtype=float)
    return np.sum(v * v, axis=-1)


@dataclass(frozen=True)
class CausalClass:
    tag: str
    tolerance: float


def classify(v, tol=DEFAULT_TOL):
    """
    Causal character of a vector; the lightlike band is relative to |v|^2.

    Returns:
        CausalClass: spacelike, lightlike or timelike
    """
    v = as_vector(v)
    scale = float(euclid_norm2(v))
    if scale == 0.0:
        raise DegenerateInputError("Cannot classify the zero vector")
    q = float(inner(v, v))
    if abs(q) <= tol * scale:
        return CausalClass(LIGHTLIKE, tol)
    return CausalClass(SPACELIKE if q > 0 else TIMELIKE, tol)


def frame_gram_target(m):
    """Gram matrix of a pseudo-orthonormal frame (s_1..s_{n-1}, s, f, fhat)."""
    G = np.eye(m)
    G[-2:, -2:] = [[0.0, 1.0], [1.0, 0.0]]
    return G


def frame_gram(F):
    """Gram matrix F^T J F of the columns, broadcasting over leading axes."""
    F = np.asarray(F, dtype=float)
    J = signature_matrix(F.shape[-1])
    return np.swapaxes(F, -1, -2) @ J @ F


def frame_inverse(F):
    """Inverse of pseudo-orthonormal frames: F^{-1} = G F^T J (G is an involution)."""
    F = np.asarray(F, dtype=float)
    m = F.shape[-1]
    return frame_gram_target(m) @ np.swapaxes(F, -1, -2) @ signature_matrix(m)


@dataclass
class PseudoFrame:
    """Columns (s_1, ..., s_{n-1}, s, f, fhat) stored as the columns of an m x m matrix."""
    columns: np.ndarray

    @property
    def gram(self):
        return frame_gram(self.columns)

    def residual(self):
        m = self.columns.shape[-1]
        return float(np.max(np.abs(self.gram - frame_gram_target(m))))

    @property
    def s(self):
        return self.columns[:, -3]

    @property
    def f(self):
        return self.columns[:, -2]

    @property
    def fhat(self):
        return self.columns[:, -1]


def _project_out(v, basis):
    for e in basis:
        v = v - inner(v, e) * e
    return v


def null_pair(a, b, tol=DEFAULT_TOL):
    """
    Split the Lorentzian plane span(a, b) into two null lines.

    Returns (f, fhat) with <f, fhat> = 1, f on the null line closest to a and
    scaled so that a = f + (multiple of fhat).
    """
    g = np.array([[inner(a, a), inner(a, b)], [inner(a, b), inner(b, b)]])
    scale = max(float(euclid_norm2(a)), float(euclid_norm2(b)))
    if np.linalg.det(g) >= -tol * scale * scale:
        raise DegenerateInputError("Null part of the spanning set is not a Lorentzian plane")
    evals, evecs = np.linalg.eigh(g)
    # eigh sorts ascending: evals[0] < 0 < evals[1]
    e_minus = (evecs[0, 0] * a + evecs[1, 0] * b) / np.sqrt(-evals[0])
    e_plus = (evecs[0, 1] * a + evecs[1, 1] * b) / np.sqrt(evals[1])
    candidates = (e_plus + e_minus, e_plus - e_minus)
    alignment = [abs(inner(c, a)) / np.sqrt(euclid_norm2(c)) for c in candidates]
    first = int(np.argmin(alignment))
    n_same, n_other = candidates[first], candidates[1 - first]
    alpha = inner(a, n_other) / inner(n_same, n_other)
    if abs(alpha) * np.sqrt(euclid_norm2(n_same)) <= tol * np.sqrt(scale):
        raise DegenerateInputError("Lightlike input has no component along its null line")
    f = alpha * n_same
    fhat = n_other / inner(f, n_other)
    return f, fhat


def pseudo_orthonormalize(spanning, tol=DEFAULT_TOL):
    """
    Build a pseudo-orthonormal frame, sphere part first.

    The first n-1 inputs are Gram-Schmidt orthonormalized (they must span a
    spacelike subspace). With m = n+2 inputs the next one seeds s and the last
    two seed (f, fhat); with m-1 inputs s is the unit normal of the rest.

    Args:
        spanning: sequence of vectors of dimension m = n + 2

    Returns:
        PseudoFrame: columns (s_1, ..., s_{n-1}, s, f, fhat)
    """
    vectors = [as_vector(v) for v in spanning]
    m = vectors[0].shape[-1]
    if any(v.shape != (m,) for v in vectors):
        raise UsageError("All spanning vectors must share one dimension")
    if len(vectors) not in (m, m - 1):
        raise UsageError(f"Expected {m} or {m - 1} spanning vectors, got {len(vectors)}")
    n = m - 2

    sphere_part = []
    for v in vectors[:n - 1]:
        w = _project_out(v, sphere_part)
        q = inner(w, w)
        if q <= tol * max(euclid_norm2(v), 1.0):
            raise DegenerateInputError("Sphere part of the spanning set is not spacelike of full rank")
        sphere_part.append(w / np.sqrt(q))

    if len(vectors) == m:
        w = _project_out(vectors[n - 1], sphere_part)
        q = inner(w, w)
        if q <= tol * max(euclid_norm2(vectors[n - 1]), 1.0):
            raise DegenerateInputError("Candidate for s is not spacelike after projection")
        s = w / np.sqrt(q)
        a = _project_out(vectors[n], sphere_part + [s])
        b = _project_out(vectors[n + 1], sphere_part + [s])
        f, fhat = null_pair(a, b, tol)
    else:
        a = _project_out(vectors[n - 1], sphere_part)
        b = _project_out(vectors[n], sphere_part)
        f, fhat = null_pair(a, b, tol)
        s = _unit_complement(sphere_part, f, fhat, tol)

    columns = np.column_stack(sphere_part + [s, f, fhat])
    frame = PseudoFrame(columns)
    residual = frame.residual()
    if residual > max(tol, 1e-8) * max(1.0, float(np.max(np.abs(columns))) ** 2):
        raise DegenerateInputError(f"Spanning set is too ill-conditioned (gram residual {residual:.3e})")
    return frame


def _unit_complement(sphere_part, f, fhat, tol):
    m = f.shape[0]
    best = None
    for i in range(m):
        e = np.zeros(m)
        e[i] = 1.0
        w = e - inner(e, fhat) * f - inner(e, f) * fhat
        w = _project_out(w, sphere_part)
        q = inner(w, w)
        if best is None or q > best[0]:
            best = (q, w)
    q, w = best
    if q <= tol:
        raise DegenerateInputError("No spacelike complement for s")
    s = w / np.sqrt(q)
    if np.linalg.det(np.column_stack(sphere_part + [s, f, fhat])) < 0:
        s = -s
    return s
