"""
Parallel linear Weingarten families and the cyclic Guichard nets they carry.

A family is fixed by (k, a1, a2, eps2) with the tangent-plane gauge
b1 = k/2, b2 = 0. The moving frame (s1, s2, s, f, fhat) of the base surface
satisfies, with u the angle function of the principal coordinates,

    eps2 = +1: df = cos u s1 dt1 + sin u s2 dt2
    eps2 = -1: df = cosh u s1 dt1 + sinh u s2 dt2

and the parallel surfaces f_t are swept with t = t(r) solving
t'^2 = (1 + k t^2) cK(t).
"""
from dataclasses import dataclass, field
import logging
from typing import Optional

import numpy as np
from scipy.integrate import solve_ivp
from scipy.linalg import expm

from .errors import (
    BranchAmbiguityError,
    DegenerateQuarticError,
    DomainError,
    ExcludedCaseError,
    InconsistentAnsatzError,
    InfinityBoundaryError,
    SingularNetError,
    UsageError,
)
from .lorentz import frame_inverse, inner
from .spaceform import standard_frame
from .stencils import max_interior, partial
from .strip import ParamGrid2
from .triorth import NetGrid, guichard_angle, lame_from_grid

logger = logging.getLogger(__name__)

ODE_TOL = 1e-12
AUDIT_TOL = 1e-6
ROOT_TOL = 1e-9
# |t| standing in for t = +-infinity in numerical limits
LARGE_T = 1e6


@dataclass(frozen=True)
class Quadratic:
    q2: float
    q1: float
    q0: float

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        return (self.q2 * t + self.q1) * t + self.q0

    @property
    def coefficients(self):
        return (self.q2, self.q1, self.q0)

    def is_zero(self, tol=1e-14):
        return max(abs(c) for c in self.coefficients) <= tol

    def degree(self, tol=1e-14):
        if abs(self.q2) > tol:
            return 2
        if abs(self.q1) > tol:
            return 1
        return 0

    def roots(self, tol=1e-14):
        """All finite roots (complex), with multiplicity; empty for constants."""
        degree = self.degree(tol)
        if degree == 0:
            return np.array([], dtype=complex)
        coefficients = self.coefficients[2 - degree:]
        return np.roots(coefficients).astype(complex)

    def real_roots(self, tol=1e-12):
        roots = self.roots()
        real = [float(r.real) for r in roots if abs(r.imag) <= tol * max(1.0, abs(r))]
        return sorted(real)


@dataclass(frozen=True)
class WeingartenFamily:
    k: float
    a1: float
    a2: float
    eps2: float

    @property
    def leading(self):
        """a1^2 + eps2 a2^2."""
        return self.a1 ** 2 + self.eps2 * self.a2 ** 2

    @property
    def cK(self):
        return Quadratic(self.leading, 2.0 * self.a1, 1.0)

    @property
    def cH(self):
        return Quadratic(self.a1 * self.k, self.k - self.leading, -self.a1)

    @property
    def c(self):
        return Quadratic(self.k ** 2, -2.0 * self.a1 * self.k, self.leading)

    @property
    def eps(self):
        return '1' if self.eps2 > 0 else 'i'

    @property
    def b1(self):
        return 0.5 * self.k

    def boundary(self, t):
        """1 + k t^2."""
        t = np.asarray(t, dtype=float)
        return 1.0 + self.k * t * t

    def quartic(self, t):
        return self.boundary(t) * self.cK(t)

    def as_dict(self):
        return {'k': self.k, 'a1': self.a1, 'a2': self.a2, 'eps': self.eps}


def family_coeffs(k, a1, a2, eps2):
    """
    Coefficients of the affine curvature relation cK K + 2 cH H + c = 0.

    Args:
        k: ambient curvature
        a1, a2: principal curvature ansatz constants of the base surface
        eps2: +1 or -1

    Returns:
        WeingartenFamily

    Raises:
        ExcludedCaseError: for a2 <= 0 (totally umbilic family)
    """
    if eps2 not in (1, -1, 1.0, -1.0):
        raise UsageError(f"eps2 must be +1 or -1, got {eps2}")
    if not np.isfinite([k, a1, a2]).all():
        raise UsageError("Family parameters must be finite")
    if a2 <= 0:
        raise ExcludedCaseError(f"a2 = {a2} gives a family of totally umbilic surfaces")
    return WeingartenFamily(k=float(k), a1=float(a1), a2=float(a2), eps2=float(eps2))


def case_invariant(wf, t):
    """cK c - cH^2 - eps2 a2^2 (1 + k t^2)^2; vanishes identically."""
    return wf.cK(t) * wf.c(t) - wf.cH(t) ** 2 - wf.eps2 * wf.a2 ** 2 * wf.boundary(t) ** 2


def _require_inside(wf, t):
    w2 = wf.boundary(t)
    if np.any(w2 <= 0):
        raise InfinityBoundaryError(f"1 + k t^2 <= 0 for t = {t} (k = {wf.k})")
    return np.sqrt(w2)


def parallel_frame_at(wf, base, t):
    """
    Tangent plane, point and partner point of the parallel surface f_t.

    Args:
        wf: WeingartenFamily
        base: (s, f, fhat) with f in Q_k and nk = fhat - (k/2) f; arrays broadcast
        t: parameter along the normal geodesics (scalar)

    Returns:
        tuple: (s_t, f_t, fhat_t)
    """
    s, f, fhat = (np.asarray(v, dtype=float) for v in base)
    w = float(_require_inside(wf, t))
    nk = fhat - 0.5 * wf.k * f
    sigma = s + (t / (1.0 + w)) * nk
    s_t = (s + t * (0.5 * wf.k * f + fhat)) / w
    f_t = (f - t * sigma) / w
    fhat_t = (fhat - 0.5 * wf.k * t * sigma) / w
    return s_t, f_t, fhat_t


def _trig(wf, u):
    if wf.eps2 > 0:
        return np.cos(u), np.sin(u)
    return np.cosh(u), np.sinh(u)


def principal_curvatures_at(wf, u, t):
    """
    Principal curvatures of f_t at a point where the angle function is u.

    Vanishing denominators (focal points) come back as inf rather than raising.

    Returns:
        tuple: (k1, k2)
    """
    _require_inside(wf, t)
    u = np.asarray(u, dtype=float)
    C, S = _trig(wf, u)
    a1, a2, k = wf.a1, wf.a2, wf.k
    if wf.eps2 > 0:
        num1, den1 = (a1 - k * t) * C - a2 * S, (1 + a1 * t) * C - a2 * t * S
        num2, den2 = (a1 - k * t) * S + a2 * C, (1 + a1 * t) * S + a2 * t * C
    else:
        num1, den1 = (a1 - k * t) * C + a2 * S, (1 + a1 * t) * C + a2 * t * S
        num2, den2 = (a1 - k * t) * S + a2 * C, (1 + a1 * t) * S + a2 * t * C

    def ratio(num, den):
        scale = np.maximum(np.abs(num), 1.0) * max(1.0, abs(t))
        small = np.abs(den) <= 1e-14 * scale
        with np.errstate(divide='ignore', invalid='ignore'):
            return np.where(small, np.inf, num / np.where(small, 1.0, den))

    k1, k2 = ratio(num1, den1), ratio(num2, den2)
    if np.any(np.isinf(k1)) or np.any(np.isinf(k2)):
        logger.warning(f"Principal curvature blows up on f_t at t={t}")
    return k1, k2


# ---------------------------------------------------------------------------
# Elliptic reparametrization
# ---------------------------------------------------------------------------

@dataclass
class EllipticReparam:
    k: float
    eps2: float
    a1: float
    a2: float
    r: np.ndarray
    t: np.ndarray
    dt: np.ndarray
    branch_points: np.ndarray
    branch_cross_ratio: Optional[complex]
    crossings: list = field(default_factory=list)
    ode_residual: float = 0.0


def branch_points(wf):
    """
    Roots of (1 + k t^2) cK(t) as four complex numbers; complex infinity marks lost degree.

    Returns:
        tuple: (cK roots (2,), boundary roots (2,))
    """
    inf = complex(np.inf, 0.0)
    finite = list(wf.cK.roots())
    rho = finite + [inf] * (2 - len(finite))
    if wf.k > 0:
        sigma = [1j / np.sqrt(wf.k), -1j / np.sqrt(wf.k)]
    elif wf.k < 0:
        sigma = [complex(1.0 / np.sqrt(-wf.k)), complex(-1.0 / np.sqrt(-wf.k))]
    else:
        sigma = [inf, inf]
    return np.array(rho, dtype=complex), np.array(sigma, dtype=complex)


def _homogeneous(z):
    if np.isinf(z.real) or np.isinf(z.imag):
        return (1.0 + 0j, 0j)
    return (z, 1.0 + 0j)


def _det(a, b):
    za, wa = _homogeneous(a)
    zb, wb = _homogeneous(b)
    return za * wb - zb * wa


def _check_double_roots(rho, sigma, tol=ROOT_TOL):
    points = list(rho) + list(sigma)
    for a in range(4):
        for b in range(a + 1, 4):
            if (a, b) == (2, 3):
                # the boundary pair only merges at k = 0, where both sit at infinity
                continue
            pa, pb = points[a], points[b]
            if np.isinf(abs(pa)) and np.isinf(abs(pb)):
                if a < 2 and b < 2:
                    continue
                raise DegenerateQuarticError("Branch points coincide at infinity")
            if not np.isinf(abs(pa)) and not np.isinf(abs(pb)) and abs(pa - pb) <= tol * max(1.0, abs(pa)):
                raise DegenerateQuarticError(f"Double branch point at {pa:.6g}")


def branch_cross_ratio(wf):
    """
    Cross ratio (rho1 - sigma1)(rho2 - sigma2) / ((rho1 - sigma2)(rho2 - sigma1)) of the branch points.

    Raises:
        DegenerateQuarticError: when two branch points coincide
    """
    rho, sigma = branch_points(wf)
    _check_double_roots(rho, sigma)
    numerator = _det(rho[0], sigma[0]) * _det(rho[1], sigma[1])
    denominator = _det(rho[0], sigma[1]) * _det(rho[1], sigma[0])
    return complex(numerator / denominator)


def elliptic_reparam(wf, t_init, r_span, step=None, r_values=None):
    """
    Solve t'^2 = (1 + k t^2) cK(t) with t(0) = t_init and t'(0) > 0.

    The second-order form t'' = Q'(t)/2 passes through simple branch points by
    itself; crossings are recorded through events on t' = 0.

    Args:
        wf: WeingartenFamily
        t_init: starting value
        r_span: (r_min, r_max)
        step: sample spacing (ignored when r_values is given)
        r_values: explicit sample abscissae

    Returns:
        EllipticReparam
    """
    boundary = float(wf.boundary(t_init))
    if boundary <= 0:
        raise InfinityBoundaryError(f"t_init = {t_init} lies beyond the infinity boundary")
    quartic = boundary * float(wf.cK(t_init))
    if abs(quartic) <= 1e-12:
        raise BranchAmbiguityError(f"t_init = {t_init} is a branch point; offset the start value")
    if quartic < 0:
        raise DomainError(f"(1 + k t^2) cK(t) < 0 at t_init = {t_init}")

    rho, sigma = branch_points(wf)
    _check_double_roots(rho, sigma)
    cross = branch_cross_ratio(wf)

    if r_values is None:
        if step is None or step <= 0:
            raise UsageError("elliptic_reparam needs a positive step or explicit r_values")
        count = int(round((r_span[1] - r_span[0]) / step)) + 1
        r_values = np.linspace(r_span[0], r_span[1], max(count, 2))
    r_values = np.asarray(r_values, dtype=float)

    # Q(t) = (1 + k t^2)(A t^2 + 2 a1 t + 1) expanded
    A, a1, k = wf.leading, wf.a1, wf.k
    poly = np.polynomial.Polynomial([1.0, 2.0 * a1, A + k, 2.0 * a1 * k, A * k])
    dpoly = poly.deriv()

    def rhs(r, y):
        return [y[1], 0.5 * dpoly(y[0])]

    def turning(r, y):
        return y[1]

    y0 = [float(t_init), float(np.sqrt(quartic))]
    t_out = np.empty_like(r_values)
    dt_out = np.empty_like(r_values)
    crossings = []
    for end, mask in ((max(float(np.max(r_values)), 0.0), r_values >= 0), (min(float(np.min(r_values)), 0.0), r_values < 0)):
        if not np.any(mask):
            continue
        if end == 0.0:
            t_out[mask], dt_out[mask] = y0
            continue
        sol = solve_ivp(rhs, (0.0, end), y0, method='DOP853', rtol=ODE_TOL, atol=ODE_TOL,
                        dense_output=True, events=turning)
        if not sol.success:
            raise DomainError(f"Elliptic reparametrization failed: {sol.message}")
        values = sol.sol(r_values[mask])
        t_out[mask], dt_out[mask] = values[0], values[1]
        crossings.extend(float(r) for r in sol.t_events[0])

    residual = float(np.max(np.abs(dt_out ** 2 - poly(t_out)) / np.maximum(1.0, np.abs(poly(t_out)))))
    if residual > 1e-8:
        logger.warning(f"Elliptic reparametrization residual {residual:.3e} exceeds 1e-8")
    logger.info(f"Elliptic reparametrization on [{r_values[0]:.4g}, {r_values[-1]:.4g}] with {len(crossings)} branch crossings")
    return EllipticReparam(
        k=wf.k, eps2=wf.eps2, a1=wf.a1, a2=wf.a2,
        r=r_values, t=t_out, dt=dt_out,
        branch_points=np.concatenate([rho, sigma]),
        branch_cross_ratio=cross,
        crossings=sorted(crossings),
        ode_residual=residual,
    )


def rebase(wf, t):
    """
    The same parallel family with f_t as base surface.

    Returns:
        WeingartenFamily: a1' = -cH(t)/cK(t), a2' = a2 (1 + k t^2) / |cK(t)|
    """
    _require_inside(wf, t)
    ck = float(wf.cK(t))
    if abs(ck) <= 1e-12:
        raise DomainError(f"f_t at t={t} has constant mean curvature and cannot serve as base")
    a1 = -float(wf.cH(t)) / ck
    a2 = wf.a2 * float(wf.boundary(t)) / abs(ck)
    return family_coeffs(wf.k, a1, a2, wf.eps2)


# ---------------------------------------------------------------------------
# Sine/sinh-Gordon and pendulum reductions
# ---------------------------------------------------------------------------

def _gordon_force(wf, u):
    """Non-derivative part of the sine/sinh-Gordon equation."""
    if wf.eps2 > 0:
        return 0.5 * (wf.a1 ** 2 - wf.a2 ** 2 + 2.0 * wf.b1) * np.sin(2 * u) + wf.a1 * wf.a2 * np.cos(2 * u)
    return 0.5 * (wf.a1 ** 2 + wf.a2 ** 2 + 2.0 * wf.b1) * np.sinh(2 * u) + wf.a1 * wf.a2 * np.cosh(2 * u)


@dataclass
class UProfile:
    """Solution u(t1) of the one-dimensional reduction, with dense output."""
    wf: WeingartenFamily
    t1_span: tuple
    solution: object

    def __call__(self, t1):
        values = self.solution.sol(np.asarray(t1, dtype=float))
        return values[0], values[1]


def sine_gordon_profile(wf, u0, du0, t1_span):
    """
    Integrate u'' + (force) = 0, the sine/sinh-Gordon equation for u depending on t1 only.

    Returns:
        UProfile: u(t1_span[0]) = u0, u'(t1_span[0]) = du0
    """
    def rhs(t1, y):
        return [y[1], -_gordon_force(wf, y[0])]

    sol = solve_ivp(rhs, tuple(float(x) for x in t1_span), [float(u0), float(du0)], method='DOP853',
                    rtol=ODE_TOL, atol=ODE_TOL, dense_output=True)
    if not sol.success:
        raise DomainError(f"u profile integration failed: {sol.message}")
    return UProfile(wf=wf, t1_span=tuple(t1_span), solution=sol)


def sine_gordon_residual(u, grid, wf, margin=1):
    """
    max |u_11 -+ u_22 + force(u)| over interior nodes of a ParamGrid2.
    """
    u = np.asarray(u, dtype=float)
    h1, h2 = grid.spacing
    u11 = partial(partial(u, h1, 0), h1, 0)
    u22 = partial(partial(u, h2, 1), h2, 1)
    value = u11 - wf.eps2 * u22 + _gordon_force(wf, u)
    return max_interior(value, margin)


def _pendulum_basis(eps2, x):
    if eps2 > 0:
        return np.cos(x), np.sin(x)
    return np.cosh(x), np.sinh(x)


def pendulum_residual(v, h, eps2, c_red, r0, v0, margin=1):
    """max |c_red + eps2 v'^2 - r0 cos(2 eps (v - v0))| with the eps = i form written via cosh."""
    v = np.asarray(v, dtype=float)
    dv = partial(v, h, 0)
    C, _ = _pendulum_basis(eps2, 2.0 * (v - v0))
    return max_interior(c_red + eps2 * dv ** 2 - r0 * C, margin, 1)


def fit_pendulum(v, h, eps2, margin=1):
    """
    Least-squares constants (c_red, r0, v0) of the pendulum equation for sampled v.

    The `margin` end samples, where the derivative stencil is one-sided, are left out.

    Returns:
        tuple: (c_red, r0, v0)
    """
    v = np.asarray(v, dtype=float)
    dv = partial(v, h, 0)
    if margin:
        v, dv = v[margin:-margin], dv[margin:-margin]
    C, S = _pendulum_basis(eps2, 2.0 * v)
    design = np.column_stack([np.ones_like(v), C, S])
    (beta, A, B), *_ = np.linalg.lstsq(design, eps2 * dv ** 2, rcond=None)
    c_red = -float(beta)
    if eps2 > 0:
        return c_red, float(np.hypot(A, B)), 0.5 * float(np.arctan2(B, A))
    if abs(B) >= abs(A):
        raise UsageError("Pendulum fit has no real phase (|B| >= |A|)")
    r0 = float(np.sign(A) * np.sqrt(A * A - B * B))
    return c_red, r0, 0.5 * float(np.arctanh(-B / A))


@dataclass
class ReducedLame:
    w: np.ndarray
    w0: np.ndarray
    w1: np.ndarray
    w2: np.ndarray
    w3: np.ndarray
    u: np.ndarray
    v: np.ndarray
    c_red: float
    r0: float
    v0: float
    eps2: float
    spacing: tuple


def reduced_lame(net, eps2=None, tol=1e-4):
    """
    Guichard angle w of a net gauged to l3 = 1 and the derived fields w0..w3.

    Returns:
        ReducedLame
    """
    eps2 = eps2 if eps2 is not None else net.eps2
    if eps2 is None:
        raise UsageError("reduced_lame needs eps2")
    ld = lame_from_grid(net)
    w = guichard_angle(ld, eps2, tol)
    h = net.spacing
    W = [partial(w, h[a], a) for a in range(3)]
    W11 = partial(W[0], h[0], 0)
    W22 = partial(W[1], h[1], 1)
    W33 = partial(W[2], h[2], 2)
    W13 = 0.5 * (partial(W[2], h[0], 0) + partial(W[0], h[2], 2))
    W23 = 0.5 * (partial(W[2], h[1], 1) + partial(W[1], h[2], 2))
    if eps2 > 0:
        w1 = -W13 / np.tan(w)
        w2 = W23 * np.tan(w)
        w3 = (W11 - W22 - W33 * np.cos(2 * w)) / np.sin(2 * w)
    else:
        w1 = -W13 / np.tanh(w)
        w2 = -W23 * np.tanh(w)
        w3 = (W11 + W22 - W33 * np.cosh(2 * w)) / np.sinh(2 * w)
    w0 = W[0] ** 2 + eps2 * W[1] ** 2 + W[2] ** 2

    i0, j0 = (n // 2 for n in w.shape[:2])
    v = w[i0, j0, :]
    u = w[:, :, 0] - v[0]
    try:
        c_red, r0, v0 = fit_pendulum(v, h[2], eps2)
    except UsageError as e:
        logger.warning(f"Pendulum constants unavailable: {str(e)}")
        c_red, r0, v0 = float('nan'), float('nan'), float('nan')
    return ReducedLame(w=w, w0=w0, w1=w1, w2=w2, w3=w3, u=u, v=v,
                       c_red=c_red, r0=r0, v0=v0, eps2=float(eps2), spacing=h)


def reduced_lame_residuals(net, eps2=None, margin=3):
    """
    The four reduced Lamé equations: (w1, w2, w3) is a gradient and
    d1 w1 + eps2 d2 w2 + d3 w3 = eps2 d3 w0.

    Returns:
        tuple: (r12, r13, r23, divergence)
    """
    rl = reduced_lame(net, eps2)
    h = rl.spacing

    def d(values, a):
        return partial(values, h[a], a)

    r12 = max_interior(d(rl.w1, 1) - d(rl.w2, 0), margin, 3)
    r13 = max_interior(d(rl.w1, 2) - d(rl.w3, 0), margin, 3)
    r23 = max_interior(d(rl.w2, 2) - d(rl.w3, 1), margin, 3)
    divergence = d(rl.w1, 0) + rl.eps2 * d(rl.w2, 1) + d(rl.w3, 2) - rl.eps2 * d(rl.w0, 2)
    return r12, r13, r23, max_interior(divergence, margin, 3)


# ---------------------------------------------------------------------------
# Net synthesis
# ---------------------------------------------------------------------------

def ansatz_coefficients(wf, u):
    """(L, A, B) per direction for the angle function u."""
    C, S = _trig(wf, u)
    a1, a2, b1 = wf.a1, wf.a2, wf.b1
    if wf.eps2 > 0:
        A1, A2 = a1 * C - a2 * S, a1 * S + a2 * C
    else:
        A1, A2 = a1 * C + a2 * S, a1 * S + a2 * C
    return (C, A1, b1 * C), (S, A2, b1 * S)


def ansatz_connection(wf, u, du1, du2=0.0):
    """
    Connection matrices (Phi1, Phi2) of the frame (s1, s2, s, f, fhat).

    Returns:
        tuple: two arrays (..., 5, 5)
    """
    u = np.asarray(u, dtype=float)
    (L1, A1, B1), (L2, A2, B2) = ansatz_coefficients(wf, u)
    if wf.eps2 > 0:
        w1, w2 = du2 * np.ones_like(u), du1 * np.ones_like(u)
    else:
        w1, w2 = -du2 * np.ones_like(u), du1 * np.ones_like(u)

    phi1 = np.zeros(u.shape + (5, 5))
    phi1[..., 1, 0], phi1[..., 0, 1] = w1, -w1
    phi1[..., 2, 0], phi1[..., 0, 2] = A1, -A1
    phi1[..., 3, 0], phi1[..., 0, 3] = -B1, L1
    phi1[..., 4, 0], phi1[..., 0, 4] = -L1, B1

    phi2 = np.zeros(u.shape + (5, 5))
    phi2[..., 1, 0], phi2[..., 0, 1] = w2, -w2
    phi2[..., 2, 1], phi2[..., 1, 2] = A2, -A2
    phi2[..., 3, 1], phi2[..., 1, 3] = -B2, L2
    phi2[..., 4, 1], phi2[..., 1, 4] = -L2, B2
    return phi1, phi2


def initial_frame():
    """(e1, e2, e3, p0, n0): f = p0 in Q_k with nk = n0 - (k/2) p0 for every k."""
    return standard_frame(3)


def integrate_base_strip(wf, profile, grid, audit_tol=AUDIT_TOL):
    """
    Frames of the base surface over a ParamGrid2.

    Integrates F' = F Phi1 along t1 at t2 = 0, then transports along each t2
    line with expm(t2 Phi2). The transport is audited around every cell of the
    first column strip.

    Returns:
        ndarray: frames (N1, N2, 5, 5)
    """
    t1s, t2s = grid.t1s, grid.t2s

    def rhs(t1, y):
        u, du = profile(t1)
        phi1, _ = ansatz_connection(wf, u, du)
        return (y.reshape(5, 5) @ phi1).ravel()

    sol = solve_ivp(rhs, (float(t1s[0]), float(t1s[-1])), initial_frame().ravel(), method='DOP853',
                    rtol=ODE_TOL, atol=ODE_TOL, t_eval=t1s)
    if not sol.success:
        raise InconsistentAnsatzError(f"Base frame integration failed: {sol.message}")
    base = sol.y.T.reshape(len(t1s), 5, 5)

    u, du = profile(t1s)
    _, phi2 = ansatz_connection(wf, u, du)
    transports = expm(t2s[None, :, None, None] * phi2[:, None])
    frames = base[:, None] @ transports

    steps = frame_inverse(base[:-1]) @ base[1:]
    for column in (0, len(t2s) - 1):
        lhs = transports[:-1, column] @ steps
        rhs_ = steps @ transports[1:, column]
        defect = np.max(np.abs(lhs - rhs_), axis=(-2, -1))
        worst = int(np.argmax(defect))
        if defect[worst] > audit_tol:
            raise InconsistentAnsatzError(
                f"Frame transport is path dependent (defect {defect[worst]:.3e} > {audit_tol:.1e})",
                node=(worst, column),
            )
    logger.info(f"Base strip frames integrated on a {grid.shape} grid")
    return frames


def synthesize_net(wf, profile, shape, t1_span, t2_span, r_span, t_init=0.0, audit_tol=AUDIT_TOL,
                   singular_tol=1e-6):
    """
    Cyclic Guichard net swept by the parallel surfaces of the base surface.

    Args:
        wf: WeingartenFamily
        profile: UProfile solving the one-dimensional reduction
        shape: (N1, N2, Nr)
        t1_span, t2_span, r_span: parameter ranges
        t_init: t at r = 0

    Returns:
        NetGrid: in Q_k with exact tangents, normals s_t and t values
    """
    n1, n2, nr = shape
    if min(shape) < 8:
        raise UsageError(f"Grid sizes must be at least 8, got {shape}")
    grid = ParamGrid2.uniform(t1_span, t2_span, n1, n2)
    rs = np.linspace(r_span[0], r_span[1], nr)
    frames = integrate_base_strip(wf, profile, grid, audit_tol)

    reparam = elliptic_reparam(wf, t_init, r_span, r_values=rs)
    inside = [r for r in reparam.crossings if rs[0] - 1e-12 <= r <= rs[-1] + 1e-12]
    if inside:
        raise SingularNetError(f"r-range crosses a branch point of t(r) at r = {inside[0]:.6g}")
    ts, dts = reparam.t, reparam.dt
    if np.any(wf.boundary(ts) <= 0):
        raise SingularNetError("Parallel surfaces reach the infinity boundary")
    ck = wf.cK(ts)
    if np.any(np.abs(ck) <= singular_tol):
        raise SingularNetError("Parallel family reaches a constant mean curvature surface",
                               node=(0, 0, int(np.argmin(np.abs(ck)))))

    s1, s2 = frames[..., :, 0], frames[..., :, 1]
    s, f, fhat = frames[..., :, 2], frames[..., :, 3], frames[..., :, 4]
    nk = fhat - 0.5 * wf.k * f
    u, _ = profile(grid.t1s)
    (L1, A1, _), (L2, A2, _) = ansatz_coefficients(wf, u)

    points = np.empty((n1, n2, nr, 5))
    normals = np.empty_like(points)
    tangents = np.empty((3,) + points.shape)
    for j, (t, dt) in enumerate(zip(ts, dts)):
        w = float(np.sqrt(wf.boundary(t)))
        s_t, f_t, _ = parallel_frame_at(wf, (s, f, fhat), t)
        points[:, :, j] = f_t
        normals[:, :, j] = s_t
        tangents[0, :, :, j] = ((L1 + t * A1) / w)[:, None, None] * s1
        tangents[1, :, :, j] = ((L2 + t * A2) / w)[:, None, None] * s2
        along_t = -(s + (t / w) * nk) / w - (wf.k * t / w ** 2) * f_t
        tangents[2, :, :, j] = dt * along_t

    lengths = np.sqrt(np.clip(inner(tangents, tangents), 0.0, None))
    floor = singular_tol * float(np.max(lengths))
    if np.any(lengths <= floor):
        axis, *node = np.unravel_index(int(np.argmin(lengths)), lengths.shape)
        raise SingularNetError(f"Net degenerates (l_{axis + 1} vanishes, focal surface)", node=node)

    logger.info(f"Synthesized a {shape} Guichard net for {wf.as_dict()}")
    return NetGrid(
        f=points,
        spacing=(grid.h1, grid.h2, float(rs[1] - rs[0])),
        origin=(float(grid.t1s[0]), float(grid.t2s[0]), float(rs[0])),
        tangents=tangents,
        k=wf.k,
        eps2=wf.eps2,
        normals=normals,
        t=ts,
        meta={'family': wf.as_dict(), 'reparam': reparam, 'u': u},
    )


def guichard_axis(eps2):
    """Axis carrying the imaginary unit: t3 for eps = 1, t1 for eps = i."""
    return 2 if eps2 > 0 else 0


def slice_curvatures(net, j, margin=1):
    """
    Gauss and mean curvature of the r-slice j from finite differences of (f_t, s_t).

    Returns:
        tuple: (K, H) arrays over the slice
    """
    if net.normals is None:
        raise UsageError("slice_curvatures needs the normals of a synthesized net")
    h1, h2 = net.spacing[0], net.spacing[1]
    f = net.f[:, :, j]
    s = net.normals[:, :, j]
    df = [partial(f, h1, 0), partial(f, h2, 1)]
    ds = [partial(s, h1, 0), partial(s, h2, 1)]
    first = np.empty(f.shape[:2] + (2, 2))
    second = np.empty_like(first)
    for a in range(2):
        for b in range(2):
            first[..., a, b] = inner(df[a], df[b])
            second[..., a, b] = -0.5 * (inner(ds[a], df[b]) + inner(ds[b], df[a]))
    shape_operator = np.linalg.solve(first, second)
    K = np.linalg.det(shape_operator)
    H = 0.5 * np.trace(shape_operator, axis1=-2, axis2=-1)
    return K, H
