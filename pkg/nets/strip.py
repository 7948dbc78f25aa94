"""
Strips, adapted frames and their connection forms over a 2D parameter grid.

Frames are stored as arrays of shape (N1, N2, m, m) whose columns are
(s_1, ..., s_{n-1}, s, f, fhat); connection forms as arrays of shape
(2, N1, N2, m, m), one matrix Phi = F^{-1} dF per grid direction.
"""
from dataclasses import dataclass, field
import logging
from typing import Optional

import numpy as np

from .errors import ImmersionFailureError, UsageError
from .lorentz import euclid_norm2, frame_gram, frame_gram_target, frame_inverse, inner, signature_matrix
from .stencils import interior, matrix_wedge, max_interior, partial

logger = logging.getLogger(__name__)

S_ADAPTED = 's-adapted'
F_ADAPTED = 'f-adapted'


@dataclass(frozen=True)
class ParamGrid2:
    t1s: np.ndarray
    t2s: np.ndarray

    def __post_init__(self):
        for name, axis in (('t1s', self.t1s), ('t2s', self.t2s)):
            axis = np.asarray(axis, dtype=float)
            if axis.ndim != 1 or axis.size < 3:
                raise UsageError(f"{name} needs at least 3 samples")
            steps = np.diff(axis)
            if np.any(steps <= 0):
                raise UsageError(f"{name} must be strictly increasing")
            if np.max(np.abs(steps - steps[0])) > 1e-12 * max(1.0, abs(axis[-1] - axis[0])):
                raise UsageError(f"{name} must be uniformly spaced")

    @classmethod
    def uniform(cls, t1_span, t2_span, n1, n2):
        return cls(np.linspace(t1_span[0], t1_span[1], n1), np.linspace(t2_span[0], t2_span[1], n2))

    @property
    def shape(self):
        return (len(self.t1s), len(self.t2s))

    @property
    def h1(self):
        return float(self.t1s[1] - self.t1s[0])

    @property
    def h2(self):
        return float(self.t2s[1] - self.t2s[0])

    @property
    def spacing(self):
        return (self.h1, self.h2)

    def mesh(self):
        return np.meshgrid(self.t1s, self.t2s, indexing='ij')


@dataclass
class StripGrid:
    s: np.ndarray
    f: np.ndarray
    grid: ParamGrid2

    def __post_init__(self):
        self.s = np.asarray(self.s, dtype=float)
        self.f = np.asarray(self.f, dtype=float)
        if self.s.shape != self.f.shape or self.s.shape[:2] != self.grid.shape:
            raise UsageError("StripGrid arrays must have shape (N1, N2, m) matching the grid")

    def derivatives(self, which):
        values = self.s if which == 's' else self.f
        return np.stack([partial(values, h, axis) for axis, h in enumerate(self.grid.spacing)])


@dataclass
class FrameGrid:
    frames: np.ndarray
    grid: ParamGrid2
    mode: Optional[str] = None
    angles: Optional[np.ndarray] = None
    umbilic: Optional[np.ndarray] = None

    @property
    def m(self):
        return self.frames.shape[-1]

    @property
    def n(self):
        return self.m - 2

    def column(self, index):
        return self.frames[..., :, index]

    @property
    def s(self):
        return self.column(self.m - 3)

    @property
    def f(self):
        return self.column(self.m - 2)

    @property
    def fhat(self):
        return self.column(self.m - 1)

    def gram_residual(self):
        return float(np.max(np.abs(frame_gram(self.frames) - frame_gram_target(self.m))))


@dataclass
class ConnectionSample:
    """Phi per grid direction, shape (2, N1, N2, m, m)."""
    phi: np.ndarray
    grid: ParamGrid2
    extras: dict = field(default_factory=dict)

    @property
    def m(self):
        return self.phi.shape[-1]

    @property
    def n(self):
        return self.m - 2

    @property
    def omega(self):
        k = self.n - 1
        return self.phi[..., :k, :k]

    @property
    def eta(self):
        """Upper right block: rows s_i, columns (s, f, fhat), entries (-eta_i, phi_i, phihat_i)."""
        k = self.n - 1
        return self.phi[..., :k, k:]

    @property
    def eta_star(self):
        k = self.n - 1
        return -self.phi[..., k:, :k]

    @property
    def nu(self):
        k = self.n - 1
        return self.phi[..., k:, k:]

    @property
    def nu_s(self):
        """<ds, fhat>: f-coefficient of ds."""
        return self.phi[..., self.n, self.n - 1]

    @property
    def nu_f(self):
        """<df, fhat>."""
        return self.phi[..., self.n, self.n]

    @property
    def nu_hat_s(self):
        """<ds, f>: fhat-coefficient of ds."""
        return self.phi[..., self.n + 1, self.n - 1]

    def lie_algebra_residual(self, margin=1):
        G = frame_gram_target(self.m)
        defect = np.swapaxes(self.phi, -1, -2) @ G + G @ self.phi
        return max(max_interior(defect[0], margin), max_interior(defect[1], margin))


def envelope_residual(sg):
    """
    Strip conditions <s, f> = 0 and <s, df> = 0.

    Returns:
        tuple: (max |<s,f>|, max |<s, df>|) over interior nodes
    """
    if min(sg.grid.shape) < 3:
        raise UsageError("envelope_residual needs at least a 3x3 grid")
    incidence = inner(sg.s, sg.f)
    df = sg.derivatives('f')
    tangency = inner(sg.s[None], df)
    return max_interior(incidence), max(max_interior(tangency[0]), max_interior(tangency[1]))


def _split_lorentz_plane(w1, w2, f):
    """
    For stacks of Lorentzian planes span(w1, w2), return the null vector that
    pairs with f (<fhat, f> = 1), picking the null line away from f.
    """
    g = np.stack([
        np.stack([inner(w1, w1), inner(w1, w2)], axis=-1),
        np.stack([inner(w1, w2), inner(w2, w2)], axis=-1),
    ], axis=-2)
    evals, evecs = np.linalg.eigh(g)
    neg = np.sqrt(np.clip(-evals[..., 0], 1e-300, None))[..., None]
    pos = np.sqrt(np.clip(evals[..., 1], 1e-300, None))[..., None]
    e_minus = (evecs[..., 0, 0][..., None] * w1 + evecs[..., 1, 0][..., None] * w2) / neg
    e_plus = (evecs[..., 0, 1][..., None] * w1 + evecs[..., 1, 1][..., None] * w2) / pos
    c1 = e_plus + e_minus
    c2 = e_plus - e_minus
    a1 = np.abs(inner(c1, f)) / np.sqrt(euclid_norm2(c1))
    a2 = np.abs(inner(c2, f)) / np.sqrt(euclid_norm2(c2))
    n_other = np.where((a1 >= a2)[..., None], c1, c2)
    return n_other / inner(n_other, f)[..., None]


def complete_frames(s, f, tangents, grid, mode=None, tol=1e-10):
    """
    Pseudo-orthonormal frames (s_1, s_2, s, f, fhat) whose sphere part spans `tangents`.

    Args:
        s: (N1, N2, m) unit sphere vectors
        f: (N1, N2, m) light-cone points with <s, f> = 0
        tangents: (2, N1, N2, m) tangent vectors of the adapted map

    Returns:
        FrameGrid
    """
    m = s.shape[-1]
    J = signature_matrix(m)
    t_prime = tangents - inner(tangents, s[None])[..., None] * s[None]
    constraints = np.stack([s @ J, t_prime[0] @ J, t_prime[1] @ J], axis=-2)
    _, _, vh = np.linalg.svd(constraints)
    w1, w2 = vh[..., -2, :], vh[..., -1, :]
    fhat = _split_lorentz_plane(w1, w2, f)

    def project(v):
        return v - inner(v, fhat)[..., None] * f - inner(v, f)[..., None] * fhat

    columns = []
    for a in range(2):
        v = project(t_prime[a])
        for e in columns:
            v = v - inner(v, e)[..., None] * e
        norm2 = inner(v, v)
        scale = euclid_norm2(tangents[a])
        bad = norm2 <= tol * np.maximum(scale, 1e-300)
        if np.any(bad):
            node = np.argwhere(bad)[0]
            raise ImmersionFailureError("Tangent vectors lose rank", node=node)
        columns.append(v / np.sqrt(norm2)[..., None])
    frames = np.stack(columns + [s, f, fhat], axis=-1)
    return FrameGrid(frames=frames, grid=grid, mode=mode)


def adapt_frame(sg, mode=S_ADAPTED, tol=1e-10):
    """
    s-adapted or f-adapted frames of a strip.

    Args:
        sg: StripGrid
        mode: S_ADAPTED (tangents of s) or F_ADAPTED (tangents of f)

    Returns:
        FrameGrid: with nu_s = 0 (s-adapted) or nu_f = 0 (f-adapted) up to stencil error
    """
    if mode not in (S_ADAPTED, F_ADAPTED):
        raise UsageError(f"Unknown adaptation mode {mode!r}")
    tangents = sg.derivatives('s' if mode == S_ADAPTED else 'f')
    fg = complete_frames(sg.s, sg.f, tangents, sg.grid, mode=mode, tol=tol)
    logger.info(f"Built {mode} frames on a {sg.grid.shape} grid, gram residual {fg.gram_residual():.2e}")
    return fg


def connection(fg, tol=1e-8):
    """
    Connection form Phi = F^{-1} dF by central differences.

    Returns:
        ConnectionSample
    """
    residual = fg.gram_residual()
    if residual > tol:
        raise UsageError(f"Frame gram residual {residual:.3e} exceeds {tol:.1e}")
    inverse = frame_inverse(fg.frames)
    phi = np.stack([inverse @ partial(fg.frames, h, axis) for axis, h in enumerate(fg.grid.spacing)])
    return ConnectionSample(phi=phi, grid=fg.grid)


def curvature_form(cs):
    """(dPhi + Phi ^ Phi)(d1, d2) per node."""
    h1, h2 = cs.grid.spacing
    d_phi = partial(cs.phi[1], h1, 0) - partial(cs.phi[0], h2, 1)
    return d_phi + matrix_wedge(cs.phi, cs.phi)


def structure_residuals(cs, margin=2):
    """
    Gauss, Ricci and Codazzi residuals of the sampled connection.

    Returns:
        tuple: (gauss, ricci, codazzi) maxima over interior nodes
    """
    if min(cs.grid.shape) < 3:
        raise UsageError("structure_residuals needs at least a 3x3 grid")
    k = cs.n - 1
    curvature = curvature_form(cs)
    gauss = np.linalg.norm(curvature[..., :k, :k], axis=(-2, -1))
    ricci = np.linalg.norm(curvature[..., k:, k:], axis=(-2, -1))
    codazzi = np.linalg.norm(curvature[..., :k, k:], axis=(-2, -1))
    return max_interior(gauss, margin), max_interior(ricci, margin), max_interior(codazzi, margin)


def _shape_matrices(cs):
    """
    Per node 2x2 symmetric matrix relating the coframes of s and f.

    Returns the matrix and which coframe was inverted.
    """
    n = cs.n
    k = n - 1
    # C[a, i] = phi_i(d_a) (s_i-coefficient of df), D[a, i] = eta_i(d_a) = -(s_i-coefficient of ds)
    C = np.moveaxis(cs.phi[..., :k, n], 0, -2)
    D = -np.moveaxis(cs.phi[..., :k, n - 1], 0, -2)
    det_c = np.abs(np.linalg.det(C))
    det_d = np.abs(np.linalg.det(D))
    use_c = det_c >= det_d
    safe_c = np.where(use_c[..., None, None], C, np.eye(k))
    safe_d = np.where(use_c[..., None, None], np.eye(k), D)
    M = np.where(use_c[..., None, None], np.linalg.solve(safe_c, D), np.linalg.solve(safe_d, C))
    return 0.5 * (M + np.swapaxes(M, -1, -2)), C, D, use_c


def principal_frame(fg, umbilic_tol=1e-6):
    """
    Rotate the tangential columns so that the second fundamental form is diagonal.

    Umbilic nodes keep the angle of the previous node along the t1-sweep and
    are flagged.

    Returns:
        FrameGrid: with `angles` (rotation applied per node) and `umbilic` mask
    """
    if fg.n != 3:
        raise UsageError("principal_frame handles surfaces (n - 1 = 2) only")
    cs = connection(fg)
    M, _, _, _ = _shape_matrices(cs)
    a, b, c = M[..., 0, 0], M[..., 0, 1], M[..., 1, 1]
    spread = np.sqrt((a - c) ** 2 + 4.0 * b * b)
    size = np.abs(a) + np.abs(c) + np.abs(b)
    umbilic = spread <= umbilic_tol * np.maximum(size, 1e-300)
    theta0 = 0.5 * np.arctan2(2.0 * b, a - c)

    n1, n2 = fg.grid.shape
    angles = np.zeros((n1, n2))
    quarter = 0.5 * np.pi
    for j in range(n2):
        for i in range(n1):
            if i > 0:
                reference = angles[i - 1, j]
            elif j > 0:
                reference = angles[0, j - 1]
            else:
                reference = 0.0
            if umbilic[i, j]:
                angles[i, j] = reference
                continue
            shift = np.round((reference - theta0[i, j]) / quarter)
            angles[i, j] = theta0[i, j] + shift * quarter
    if np.any(umbilic):
        logger.warning(f"{int(np.sum(umbilic))} umbilic nodes while building principal frames")

    cos, sin = np.cos(angles)[..., None], np.sin(angles)[..., None]
    frames = fg.frames.copy()
    s1, s2 = fg.frames[..., :, 0], fg.frames[..., :, 1]
    frames[..., :, 0] = cos * s1 + sin * s2
    frames[..., :, 1] = -sin * s1 + cos * s2
    return FrameGrid(frames=frames, grid=fg.grid, mode=fg.mode, angles=angles, umbilic=umbilic)


def principal_directions(fg):
    """
    Angle in the (t1, t2) parameter plane of the direction mapped onto s_1.

    Returns:
        ndarray: angles in [0, pi) per node
    """
    cs = connection(fg)
    _, C, D, use_c = _shape_matrices(cs)
    coframe = np.where(use_c[..., None, None], C, D)
    # the direction v with (second coframe)(v) = 0
    second = coframe[..., :, 1]
    v1, v2 = second[..., 1], -second[..., 0]
    return np.mod(np.arctan2(v2, v1), np.pi)


def mixed_curvature_residual(fg, margin=1):
    """max |eta_1 ^ phi_1| over the grid; zero for principal framings."""
    cs = connection(fg)
    n = cs.n
    eta1 = -cs.phi[..., 0, n - 1]
    phi1 = cs.phi[..., 0, n]
    return max_interior(eta1[0] * phi1[1] - eta1[1] * phi1[0], margin)


def ribaucour_residual(cs, margin=1):
    """
    Flatness of the normal bundle of a sphere congruence, max |eta* ^ eta|.
    """
    form = matrix_wedge(cs.eta_star, cs.eta)
    norms = np.linalg.norm(form, axis=(-2, -1))
    return max_interior(norms, margin)


def normal_gauge(fg, lam):
    """Rescale (f, fhat) -> (e^lam f, e^-lam fhat); lam is fixed to 0 at the grid origin."""
    lam = np.asarray(lam, dtype=float)
    lam = lam - lam[0, 0]
    frames = fg.frames.copy()
    frames[..., :, -2] = np.exp(lam)[..., None] * fg.frames[..., :, -2]
    frames[..., :, -1] = np.exp(-lam)[..., None] * fg.frames[..., :, -1]
    return FrameGrid(frames=frames, grid=fg.grid, mode=fg.mode)


def interior_nodes(values, margin=1):
    return interior(values, margin)
