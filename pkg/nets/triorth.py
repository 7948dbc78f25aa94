"""
Triply orthogonal systems sampled on 3D grids.

Lamé functions l_i = |df/dt_i|, rotation coefficients
k_ij = -(1/(l_i l_j)) dl_j/dt_i and the sphere-curvature functions b_ij of a
light-cone valued net. b_ij is read off the partner point f̂ through
df̂ = sum b_ij n_i l_j dt_j, so it costs one stencil on top of the tangents.
Derivatives are nested second-order stencils; residuals involving k need a
margin of 2 and those involving derivatives of b a margin of 3 when the
tangents themselves are finite differences.
"""
from dataclasses import dataclass, field
from itertools import permutations
import logging
from typing import Optional

import numpy as np

from .errors import ImmersionFailureError, InconsistentGaugeError, NotTriplyOrthogonalError, UsageError
from .lorentz import euclid_norm2, inner
from .stencils import max_interior, partial

logger = logging.getLogger(__name__)

# (i, j, m) index triples of the three coordinate pairs
CYCLIC = ((0, 1, 2), (1, 2, 0), (2, 0, 1))
ORDERED = tuple(permutations(range(3), 3))


@dataclass
class NetGrid:
    """
    Light-cone valued map on a uniform 3D grid, f of shape (N1, N2, N3, m).

    ``tangents`` (3, N1, N2, N3, m) are exact coordinate derivatives when the
    net was synthesized; finite differences are used otherwise.
    """
    f: np.ndarray
    spacing: tuple
    origin: tuple = (0.0, 0.0, 0.0)
    tangents: Optional[np.ndarray] = None
    k: Optional[float] = None
    eps2: Optional[float] = None
    normals: Optional[np.ndarray] = None
    t: Optional[np.ndarray] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.f = np.asarray(self.f, dtype=float)
        if self.f.ndim != 4 or min(self.f.shape[:3]) < 5:
            raise UsageError(f"NetGrid needs shape (N1, N2, N3, m) with at least 5 nodes per axis, got {self.f.shape}")
        self.spacing = tuple(float(h) for h in self.spacing)
        self.origin = tuple(float(o) for o in self.origin)
        if len(self.spacing) != 3 or min(self.spacing) <= 0:
            raise UsageError("NetGrid spacing must be three positive numbers")
        null = np.abs(inner(self.f, self.f))
        if np.max(null / np.maximum(euclid_norm2(self.f), 1e-300)) > 1e-8:
            raise UsageError("NetGrid points are not lightlike")

    @property
    def shape(self):
        return self.f.shape[:3]

    @property
    def gauged(self):
        return self.k is not None and np.isfinite(self.k)

    def axis(self, a):
        return self.origin[a] + self.spacing[a] * np.arange(self.shape[a])

    def derivative(self, a):
        if self.tangents is not None:
            return self.tangents[a]
        return partial(self.f, self.spacing[a], a)


@dataclass
class LameData:
    """
    l: (3, N1, N2, N3); k and b: (3, 3, N1, N2, N3) with k[i, j] = k_ij
    (diagonal unused) and b[i, j] = b_ij. fhat holds the partner points.
    """
    l: np.ndarray
    k: np.ndarray
    b: np.ndarray
    spacing: tuple
    fhat: Optional[np.ndarray] = None

    def e(self, i, values):
        """Unit vector field (1/l_i) d/dt_i applied to a scalar field."""
        return partial(values, self.spacing[i], i) / self.l[i]

    def b_asymmetry(self, margin=2):
        return max(max_interior(self.b[i, j] - self.b[j, i], margin, 3) for i, j, _ in CYCLIC)


def _worst_node(values):
    return tuple(int(i) for i in np.unravel_index(int(np.argmax(values)), values.shape))


def orthogonality_residual(net):
    """max |<d_i f, d_j f>| / (l_i l_j) over all nodes and pairs i != j."""
    tangents = [net.derivative(a) for a in range(3)]
    lengths = [np.sqrt(np.clip(inner(t, t), 0.0, None)) for t in tangents]
    worst = 0.0
    for i, j, _ in CYCLIC:
        ratio = np.abs(inner(tangents[i], tangents[j])) / np.maximum(lengths[i] * lengths[j], 1e-300)
        worst = max(worst, float(np.max(ratio)))
    return worst


def lame_from_grid(net, tol=None):
    """
    Lamé functions, rotation coefficients and b_ij of a triply orthogonal net.

    Args:
        net: NetGrid
        tol: relative orthogonality tolerance (1e-6 with exact tangents, 5e-2 otherwise)

    Returns:
        LameData
    """
    if tol is None:
        tol = 1e-6 if net.tangents is not None else 5e-2
    tangents = [net.derivative(a) for a in range(3)]
    norms2 = np.stack([inner(t, t) for t in tangents])
    scale = float(np.max(np.abs(norms2)))
    if np.any(norms2 <= 1e-12 * max(scale, 1e-300)):
        axis, *node = np.unravel_index(int(np.argmin(norms2)), norms2.shape)
        raise ImmersionFailureError(f"Coordinate tangent d/dt_{axis + 1} vanishes", node=node)
    l = np.sqrt(norms2)

    for i, j, _ in CYCLIC:
        ratio = np.abs(inner(tangents[i], tangents[j])) / (l[i] * l[j])
        if np.max(ratio) > tol:
            raise NotTriplyOrthogonalError(
                f"Coordinate directions {i + 1} and {j + 1} are not orthogonal ({np.max(ratio):.3e})",
                node=_worst_node(ratio),
            )

    h = net.spacing
    k = np.zeros((3, 3) + l.shape[1:])
    for i, j, _ in ORDERED:
        k[i, j] = -partial(l[j], h[i], i) / (l[i] * l[j])

    fhat = _partner_points(net.f, tangents, norms2)
    b = np.zeros_like(k)
    for j in range(3):
        dfhat = partial(fhat, h[j], j)
        for i in range(3):
            b[i, j] = inner(dfhat, tangents[i]) / (l[i] * l[j])
    return LameData(l=l, k=k, b=b, spacing=h, fhat=fhat)


def _partner_points(f, tangents, norms2):
    """
    The lightlike f̂ with <f̂, f> = 1 orthogonal to every tangent.

    The timelike unit vector projected off the tangents lies in span{f, f̂};
    splitting it along f gives f̂ pointwise.
    """
    x = np.zeros(f.shape)
    x[..., -1] = 1.0
    for tangent, norm2 in zip(tangents, norms2):
        x -= (inner(x, tangent) / norm2)[..., None] * tangent
    c = inner(x, f)
    a = inner(x, x) / (2.0 * c)
    return (x - a[..., None] * f) / c[..., None]


def partner_points(net):
    """f̂ of every node of a net; see lame_from_grid."""
    tangents = [net.derivative(a) for a in range(3)]
    return _partner_points(net.f, tangents, [inner(t, t) for t in tangents])


def conformal_rescale(net, u, du):
    """
    The net e^u f with exact tangents e^u (d_i f + u_i f).

    Args:
        net: NetGrid
        u: weight over the grid (N1, N2, N3)
        du: its three coordinate derivatives

    Returns:
        NetGrid: no longer gauged into a space form
    """
    u = np.asarray(u, dtype=float)
    if u.shape != net.shape or len(du) != 3:
        raise UsageError(f"Weight must have shape {net.shape} with three derivatives")
    scale = np.exp(u)[..., None]
    tangents = np.stack([scale * (net.derivative(a) + np.asarray(du[a], dtype=float)[..., None] * net.f)
                         for a in range(3)])
    return NetGrid(f=scale * net.f, spacing=net.spacing, origin=net.origin, tangents=tangents,
                   eps2=net.eps2, meta=dict(net.meta))


def _curvature_sums(ld):
    """Sectional curvatures of the pairs (1,2), (2,3), (3,1) from the rotation coefficients."""
    k = ld.k
    sums = []
    for i, j, m in CYCLIC:
        sums.append(ld.e(i, k[i, j]) + ld.e(j, k[j, i]) - k[i, j] ** 2 - k[j, i] ** 2 - k[m, i] * k[m, j])
    return sums


def _mixed_term(ld, i, j, m):
    """e_i k_jm + k_im (k_ji - k_jm); equals b_ji and vanishes in a space form."""
    k = ld.k
    return ld.e(i, k[j, m]) + k[i, m] * (k[j, i] - k[j, m])


def lame_sphere_curvatures(ld):
    """
    b_ij from the rotation coefficients alone: b_ii + b_jj are the sectional
    curvatures and the off-diagonal entries the mixed terms. Two stencils deep
    against one for LameData.b; kept as a cross-check.
    """
    s12, s23, s31 = _curvature_sums(ld)
    b = np.zeros_like(ld.k)
    b[0, 0] = 0.5 * (s12 + s31 - s23)
    b[1, 1] = 0.5 * (s12 + s23 - s31)
    b[2, 2] = 0.5 * (s23 + s31 - s12)
    for i, j, m in ORDERED:
        b[j, i] = _mixed_term(ld, i, j, m)
    return b


def lame_residuals(ld, k, margin=2):
    """
    Residuals of Lamé's equations for a net in Q_k.

    Returns:
        tuple: three curvature residuals, then three mixed residuals (each the
        larger of the two equations differentiating along t_i)
    """
    curvature = [max_interior(s - k, margin, 3) for s in _curvature_sums(ld)]
    mixed = []
    for i, j, m in CYCLIC:
        forward = max_interior(_mixed_term(ld, i, j, m), margin, 3)
        backward = max_interior(_mixed_term(ld, i, m, j), margin, 3)
        mixed.append(max(forward, backward))
    return tuple(curvature + mixed)


def genlame_residuals(ld, margin=3):
    """
    Residuals of the third-order conformal flatness equations in b_ij.

    Returns:
        tuple: nine maxima; three symmetric-pair equations, then one per ordered pair
    """
    k, b = ld.k, ld.b
    out = []
    for i, j, m in CYCLIC:
        left = ld.e(i, b[j, m]) - k[j, m] * b[m, i] - k[i, m] * b[j, m]
        right = ld.e(m, b[j, i]) - k[j, i] * b[i, m] - k[m, i] * b[j, i]
        out.append(max_interior(left - right, margin, 3))
    for i, j, m in ((0, 1, 2), (1, 2, 0), (2, 0, 1), (1, 0, 2), (2, 1, 0), (0, 2, 1)):
        value = (ld.e(i, b[j, j]) - ld.e(j, b[j, i]) + k[i, j] * (b[i, i] - b[j, j])
                 + k[j, i] * (b[i, j] + b[j, i]) + k[m, j] * b[m, i])
        out.append(max_interior(value, margin, 3))
    return tuple(out)


def dupin_residual(net, margin=2):
    """
    Off-diagonal second fundamental form of the coordinate surfaces,
    max |<d_j d_m f, d_i f>| / (l_i l_j l_m).
    """
    tangents = [net.derivative(a) for a in range(3)]
    lengths = [np.sqrt(np.clip(inner(t, t), 0.0, None)) for t in tangents]
    if any(np.min(l) <= 0 for l in lengths):
        raise ImmersionFailureError("Coordinate tangent vanishes in dupin_residual")
    worst = 0.0
    for i, j, m in CYCLIC:
        mixed = 0.5 * (partial(tangents[m], net.spacing[j], j) + partial(tangents[j], net.spacing[m], m))
        value = inner(mixed, tangents[i]) / (lengths[i] * lengths[j] * lengths[m])
        worst = max(worst, max_interior(value, margin, 3))
    return worst


def curvature_sphere(net, ld, axis, direction):
    """
    Curvature sphere n + k f of the t_axis = const surfaces belonging to their
    t_direction curvature lines, n the unit normal d_axis f / l_axis.
    """
    if axis == direction or {axis, direction} - {0, 1, 2}:
        raise UsageError(f"Need two distinct axes out of 0, 1, 2, got {axis} and {direction}")
    normal = net.derivative(axis) / ld.l[axis][..., None]
    return normal + ld.k[axis, direction][..., None] * net.f


def channel_residuals(net, axis, ld=None, margin=2):
    """
    How far each curvature sphere of a coordinate family moves along its own
    curvature lines, max |d_j s_j| per in-surface direction j.

    Returns:
        dict: {direction: residual}
    """
    ld = ld or lame_from_grid(net)
    out = {}
    for direction in range(3):
        if direction == axis:
            continue
        sphere = curvature_sphere(net, ld, axis, direction)
        moved = partial(sphere, net.spacing[direction], direction)
        out[direction] = max_interior(np.sqrt(euclid_norm2(moved)), margin, 3)
    return out


def is_channel_family(net, axis, tol=5e-2, ld=None):
    """The t_axis surfaces are channel surfaces: one curvature sphere stays put along its lines."""
    residuals = channel_residuals(net, axis, ld)
    direction = min(residuals, key=residuals.get)
    logger.debug(f"Family {axis + 1}: curvature sphere along t_{direction + 1} moves by {residuals[direction]:.3e}")
    return residuals[direction] <= tol


def guichard_residual(ld, imaginary_axis):
    """
    max |l_a^2 + l_b^2 - l_c^2| where c is the axis carrying the imaginary unit.
    """
    if imaginary_axis not in (0, 1, 2):
        raise UsageError(f"imaginary_axis must be 0, 1 or 2, got {imaginary_axis}")
    squares = ld.l ** 2
    value = np.sum(squares, axis=0) - 2.0 * squares[imaginary_axis]
    return float(np.max(np.abs(value)))


def best_guichard(ld):
    """
    Try the three assignments of the imaginary unit.

    Returns:
        tuple: (axis, residual) with the smallest residual
    """
    residuals = [guichard_residual(ld, axis) for axis in range(3)]
    axis = int(np.argmin(residuals))
    return axis, residuals[axis]


def guichard_angle(ld, eps2, tol=1e-4):
    """
    The function w of a Guichard net gauged to l_3 = 1.

    For eps2 = +1: l_1 = cos w, l_2 = sin w; for eps2 = -1: l_1 = cosh w, l_2 = sinh w.

    Raises:
        InconsistentGaugeError: when the gauged Lamé functions violate l_1^2 + eps2 l_2^2 = 1
    """
    if eps2 not in (1, -1, 1.0, -1.0):
        raise UsageError(f"eps2 must be +1 or -1, got {eps2}")
    l1 = ld.l[0] / ld.l[2]
    l2 = ld.l[1] / ld.l[2]
    defect = np.abs(l1 ** 2 + eps2 * l2 ** 2 - 1.0)
    if np.max(defect) > tol:
        raise InconsistentGaugeError(
            f"Gauged Lamé functions do not admit the Guichard angle ({np.max(defect):.3e})",
            node=_worst_node(defect),
        )
    if eps2 > 0:
        w = np.arctan2(l2, l1)
        for axis in range(3):
            w = np.unwrap(w, axis=axis)
        return w
    return np.arcsinh(l2)


def w_split_residual(ld, eps2, margin=2):
    """
    Mixed derivatives d2w/dt1dt3 and d2w/dt2dt3; both vanish when w = u(t1, t2) + v(t3).

    Returns:
        tuple: (max |w_13|, max |w_23|)
    """
    w = guichard_angle(ld, eps2)
    h = ld.spacing
    w3 = partial(w, h[2], 2)
    return (max_interior(partial(w3, h[0], 0), margin, 3), max_interior(partial(w3, h[1], 1), margin, 3))
