"""
Analytic sample data: fixture nets, strips and circle congruences with known answers.
"""
import logging

import numpy as np
from scipy.linalg import expm

from .errors import UsageError
from .lorentz import frame_gram_target
from .spaceform import base_normal, embed_flat, standard_frame
from .strip import FrameGrid, ParamGrid2, StripGrid
from .triorth import NetGrid

logger = logging.getLogger(__name__)


def flat_tangent(x, dx):
    """Derivative of embed_flat(x) along dx: dx - (x . dx) n0."""
    x = np.asarray(x, dtype=float)
    dx = np.asarray(dx, dtype=float)
    n = x.shape[-1]
    out = np.zeros(x.shape[:-1] + (n + 2,))
    out[..., :n] = dx
    return out - np.sum(x * dx, axis=-1)[..., None] * base_normal(n)


def _axes(shape, spans):
    return [np.linspace(lo, hi, count) for (lo, hi), count in zip(spans, shape)]


def _flat_net(positions, jacobian, axes, **extra):
    spacing = tuple(float(axis[1] - axis[0]) for axis in axes)
    origin = tuple(float(axis[0]) for axis in axes)
    tangents = np.stack([flat_tangent(positions, jacobian[a]) for a in range(3)])
    return NetGrid(f=embed_flat(positions), spacing=spacing, origin=origin, tangents=tangents, k=0.0, **extra)


def cartesian_net(shape=(9, 9, 9), spans=((0.0, 1.0), (0.0, 1.0), (0.0, 1.0)), stretch=None, exact=True):
    """
    Coordinate net of R^3 in Q_0, optionally with x_1 = stretch(t_1).

    Args:
        stretch: pair (phi, dphi) of callables reparametrizing the first axis

    Returns:
        NetGrid
    """
    axes = _axes(shape, spans)
    t1, t2, t3 = np.meshgrid(*axes, indexing='ij')
    x1, dx1 = (t1, np.ones_like(t1)) if stretch is None else (stretch[0](t1), stretch[1](t1))
    positions = np.stack([x1, t2, t3], axis=-1)
    zero = np.zeros_like(t1)
    jacobian = [
        np.stack([dx1, zero, zero], axis=-1),
        np.stack([zero, np.ones_like(t1), zero], axis=-1),
        np.stack([zero, zero, np.ones_like(t1)], axis=-1),
    ]
    net = _flat_net(positions, jacobian, axes)
    if not exact:
        net.tangents = None
    return net


def spherical_net(shape=(9, 9, 9), spans=((1.0, 2.0), (0.5, 1.2), (0.0, 1.0)), exact=True):
    """
    Spherical coordinates (rho, theta, phi) on R^3; Lamé functions (1, rho, rho sin theta).

    Triply orthogonal and flat, but not a Guichard net.
    """
    axes = _axes(shape, spans)
    rho, theta, phi = np.meshgrid(*axes, indexing='ij')
    st, ct, sp, cp = np.sin(theta), np.cos(theta), np.sin(phi), np.cos(phi)
    positions = np.stack([rho * st * cp, rho * st * sp, rho * ct], axis=-1)
    jacobian = [
        np.stack([st * cp, st * sp, ct], axis=-1),
        np.stack([rho * ct * cp, rho * ct * sp, -rho * st], axis=-1),
        np.stack([-rho * st * sp, rho * st * cp, np.zeros_like(rho)], axis=-1),
    ]
    net = _flat_net(positions, jacobian, axes)
    if not exact:
        net.tangents = None
    return net


def confocal_net(shape=(9, 9, 9), spans=((0.2, 1.0), (-1.8, -1.2), (-2.8, -2.2)), squares=(3.0, 2.0, 1.0)):
    """
    Confocal quadrics x_i^2 = prod_t (A_i + t) / prod_{j != i} (A_i - A_j) in the
    positive octant: ellipsoids, hyperboloids of one and of two sheets.

    None of the three families consists of channel surfaces.
    """
    A = np.asarray(squares, dtype=float)
    (u_lo, _), (v_lo, v_hi), (w_lo, w_hi) = spans
    if not (-A[2] < u_lo and -A[1] < v_lo and v_hi < -A[2] and -A[0] < w_lo and w_hi < -A[1]):
        raise UsageError("Confocal coordinates need -A1 < w < -A2 < v < -A3 < u")
    axes = _axes(shape, spans)
    coords = np.meshgrid(*axes, indexing='ij')
    positions = []
    for i in range(3):
        numerator = np.prod([A[i] + t for t in coords], axis=0)
        denominator = np.prod([A[i] - A[j] for j in range(3) if j != i])
        positions.append(np.sqrt(numerator / denominator))
    positions = np.stack(positions, axis=-1)
    jacobian = [positions / (2.0 * (A + t[..., None])) for t in coords]
    return _flat_net(positions, jacobian, axes)


def sheared_net(shape=(9, 9, 9), shear=0.3):
    """Affine net x = (t1 + shear t2, t2, t3); directions 1 and 2 are not orthogonal."""
    axes = _axes(shape, ((0.0, 1.0),) * 3)
    t1, t2, t3 = np.meshgrid(*axes, indexing='ij')
    positions = np.stack([t1 + shear * t2, t2, t3], axis=-1)
    zero, one = np.zeros_like(t1), np.ones_like(t1)
    jacobian = [
        np.stack([one, zero, zero], axis=-1),
        np.stack([shear * one, one, zero], axis=-1),
        np.stack([zero, zero, one], axis=-1),
    ]
    return _flat_net(positions, jacobian, axes)


def torus_strip(grid, radii=(2.0, 0.5), h=0.0):
    """
    Torus patch in curvature-line coordinates with the sphere congruence s = N + h f.

    Args:
        grid: ParamGrid2 of (theta, phi) angles
        radii: (R, r) with R > r > 0
        h: constant mean curvature of the spheres

    Returns:
        StripGrid
    """
    R, r = radii
    theta, phi = grid.mesh()
    normal = np.stack([np.cos(theta) * np.cos(phi), np.cos(theta) * np.sin(phi), np.sin(theta)], axis=-1)
    positions = np.stack([(R + r * np.cos(theta)) * np.cos(phi), (R + r * np.cos(theta)) * np.sin(phi),
                          r * np.sin(theta)], axis=-1)
    return surface_strip(positions, normal, grid, h)


def graph_strip(grid, height, gradient, h=0.0):
    """
    Graph z = height(x, y) with its sphere congruence s = N + h f.

    Args:
        height: callable (x, y) -> z
        gradient: callable (x, y) -> (z_x, z_y)
    """
    x, y = grid.mesh()
    zx, zy = gradient(x, y)
    norm = np.sqrt(1.0 + zx ** 2 + zy ** 2)
    normal = np.stack([-zx / norm, -zy / norm, 1.0 / norm], axis=-1)
    positions = np.stack([x, y, height(x, y)], axis=-1)
    return surface_strip(positions, normal, grid, h)


def surface_strip(positions, normal, grid, h=0.0):
    """Light-cone strip of a Euclidean surface with unit normal field `normal`."""
    f = embed_flat(positions)
    N = np.zeros_like(f)
    N[..., :3] = normal
    N = N - np.sum(positions * normal, axis=-1)[..., None] * base_normal(3)
    return StripGrid(s=N + h * f, f=f, grid=grid)


def flat_parallel_congruence(grid):
    """
    Circles through the lines x, y = const of R^3 framed with nu = 0.

    Members of the orthogonal family are the planes z = g.

    Returns:
        FrameGrid
    """
    x, y = grid.mesh()
    n0 = base_normal(3)
    e = np.eye(5)
    f = embed_flat(np.stack([x, y, np.zeros_like(x)], axis=-1))
    s1 = e[0] - x[..., None] * n0
    s2 = e[1] - y[..., None] * n0
    s = np.broadcast_to(e[2], f.shape)
    fhat = np.broadcast_to(n0, f.shape)
    frames = np.stack([s1, s2, s, f, fhat], axis=-1)
    return FrameGrid(frames=frames, grid=grid)


def random_algebra_element(rng, m):
    """Random X with X^T G + G X = 0, i.e. X = G A for antisymmetric A."""
    A = rng.normal(size=(m, m))
    return frame_gram_target(m) @ (A - A.T)


def random_congruence(grid, seed=0, scale=0.5, n=3):
    """
    Frames F0 exp(t1 X1 + t2 X2 + t1 t2 X3) for random Lie algebra elements;
    generically not a cyclic system.

    Returns:
        FrameGrid
    """
    rng = np.random.default_rng(seed)
    m = n + 2
    X1, X2, X3 = (scale * random_algebra_element(rng, m) for _ in range(3))
    t1, t2 = grid.mesh()
    generator = t1[..., None, None] * X1 + t2[..., None, None] * X2 + (t1 * t2)[..., None, None] * X3
    frames = standard_frame(n) @ expm(generator)
    return FrameGrid(frames=frames, grid=grid)


def unit_grid(n1=17, n2=17, span=(-0.5, 0.5)):
    return ParamGrid2.uniform(span, span, n1, n2)


FIXTURES = {
    'cartesian': cartesian_net,
    'spherical': spherical_net,
}


def fixture_net(name, size=9):
    """Shipped fixture net by name (see FIXTURES)."""
    try:
        builder = FIXTURES[name]
    except KeyError:
        raise KeyError(f"Unknown fixture net {name!r}; choose from {sorted(FIXTURES)}")
    logger.info(f"Building fixture net {name} with {size} nodes per axis")
    return builder(shape=(size, size, size))
