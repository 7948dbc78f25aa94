"""
Circle congruences: the orthogonal-surface equation, normality and the
orthogonal family of a parallel framing.

A circle congruence is carried by a FrameGrid whose last three columns
(s, f, fhat) span the circle's Lorentz complement per node. A point on the
circle is t s + f - t^2/2 fhat; it traces a surface orthogonal to all
circles iff

    dt = 1/2 t^2 nu_s + t nu_f + nu_hat_s.
"""
from dataclasses import dataclass
import logging

import numpy as np
from numba import njit

from .errors import (
    DegenerateConfigurationError,
    DivergenceError,
    SingularParametrizationError,
    UsageError,
)
from .lorentz import inner
from .sphere import cross_ratio
from .stencils import max_interior, partial, wedge
from .strip import FrameGrid, StripGrid, connection

logger = logging.getLogger(__name__)

DEFAULT_GUARD = 1e8
PARALLEL_TOL = 1e-4
# starting values of the three solutions used by the orthogonal-surface count
TRIAL_VALUES = (-0.5, 0.25, 1.0)


@dataclass
class CircleCongruence:
    frame: FrameGrid

    def __post_init__(self):
        residual = self.frame.gram_residual()
        if residual > 1e-8:
            raise UsageError(f"Circle congruence frame violates the gram invariant ({residual:.3e})")

    @property
    def grid(self):
        return self.frame.grid

    @property
    def shape(self):
        return self.frame.grid.shape


@dataclass
class TField:
    t: np.ndarray
    base: tuple
    t0: float
    order: str = 'row'


def nu_forms(cc):
    """
    Connection of the congruence frame; nu_s, nu_f and nu_hat_s are read off its nu block.

    Returns:
        ConnectionSample
    """
    return connection(cc.frame)


def _nu_stack(cs):
    """(2, N1, N2, 3) array of (nu_s, nu_f, nu_hat_s) per direction."""
    return np.stack([cs.nu_s, cs.nu_f, cs.nu_hat_s], axis=-1)


@njit(cache=True)
def _rhs(t, coeffs):
    return 0.5 * t * t * coeffs[0] + t * coeffs[1] + coeffs[2]


@njit(cache=True)
def _edge_midpoint(values, lo):
    n = values.shape[0]
    if lo >= 1 and lo + 2 < n:
        return (-values[lo - 1] + 9.0 * values[lo] + 9.0 * values[lo + 1] - values[lo + 2]) / 16.0
    return 0.5 * (values[lo] + values[lo + 1])


@njit(cache=True)
def _sweep_line(values, h, start, t_start, guard, out):
    """
    RK4 along one grid line in both directions from `start`.

    Returns the index of the first node whose value leaves the guard, or -1.
    """
    n = values.shape[0]
    out[start] = t_start
    for forward in (True, False):
        i = start
        t = t_start
        while True:
            j = i + 1 if forward else i - 1
            if j < 0 or j >= n:
                break
            step = h if forward else -h
            mid = _edge_midpoint(values, min(i, j))
            k1 = _rhs(t, values[i])
            k2 = _rhs(t + 0.5 * step * k1, mid)
            k3 = _rhs(t + 0.5 * step * k2, mid)
            k4 = _rhs(t + step * k3, values[j])
            t = t + step / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            if not np.isfinite(t) or abs(t) > guard:
                return j
            out[j] = t
            i = j
    return -1


@njit(cache=True)
def _sweep(nu1, nu2, h1, h2, b1, b2, t0, guard, row_first):
    n1 = nu1.shape[0]
    n2 = nu1.shape[1]
    t = np.zeros((n1, n2))
    line1 = np.zeros(n1)
    line2 = np.zeros(n2)
    if row_first:
        bad = _sweep_line(nu1[:, b2, :], h1, b1, t0, guard, line1)
        if bad >= 0:
            return t, bad, b2
        for i in range(n1):
            bad = _sweep_line(nu2[i, :, :], h2, b2, line1[i], guard, line2)
            if bad >= 0:
                return t, i, bad
            t[i, :] = line2
    else:
        bad = _sweep_line(nu2[b1, :, :], h2, b2, t0, guard, line2)
        if bad >= 0:
            return t, b1, bad
        for j in range(n2):
            bad = _sweep_line(nu1[:, j, :], h1, b1, line2[j], guard, line1)
            if bad >= 0:
                return t, bad, j
            t[:, j] = line1
    return t, -1, -1


def integrate_tfield(cc, t0, base=(0, 0), order='row', guard=DEFAULT_GUARD, cs=None):
    """
    Solve the orthogonal-surface equation along grid edges.

    Args:
        cc: CircleCongruence
        t0: value at the base node
        base: base node index
        order: 'row' sweeps along t1 through the base first, 'column' along t2 first
        guard: overflow bound on |t|

    Returns:
        TField
    """
    if order not in ('row', 'column'):
        raise UsageError(f"Unknown sweep order {order!r}")
    n1, n2 = cc.shape
    b1, b2 = int(base[0]), int(base[1])
    if not (0 <= b1 < n1 and 0 <= b2 < n2):
        raise UsageError(f"Base node {base} lies outside the grid")
    cs = cs or nu_forms(cc)
    nu = np.ascontiguousarray(_nu_stack(cs))
    h1, h2 = cc.grid.spacing
    t, bad_i, bad_j = _sweep(nu[0], nu[1], h1, h2, b1, b2, float(t0), float(guard), order == 'row')
    if bad_i >= 0:
        raise DivergenceError(f"Orthogonal-surface equation blew up (|t| > {guard:.1e})", node=(bad_i, bad_j))
    return TField(t=t, base=(b1, b2), t0=float(t0), order=order)


def loop_defect(cc, t0, base=(0, 0), cs=None):
    """max |t_row - t_column| between the two sweep orders."""
    cs = cs or nu_forms(cc)
    by_rows = integrate_tfield(cc, t0, base, order='row', cs=cs)
    by_columns = integrate_tfield(cc, t0, base, order='column', cs=cs)
    return float(np.max(np.abs(by_rows.t - by_columns.t)))


def integrability_quadratic(cc, cs=None):
    """
    Coefficients of the quadratic obstruction to solving the orthogonal-surface equation.

    Returns:
        tuple: (q2, q1, q0) arrays of shape (N1, N2)
    """
    if min(cc.shape) < 3:
        raise UsageError("integrability_quadratic needs at least a 3x3 grid")
    cs = cs or nu_forms(cc)
    h1, h2 = cc.grid.spacing

    def d(form):
        return partial(form[1], h1, 0) - partial(form[0], h2, 1)

    nu_s, nu_f, nu_hat = cs.nu_s, cs.nu_f, cs.nu_hat_s
    q2 = 0.5 * (d(nu_s) + wedge(nu_f, nu_s))
    q1 = d(nu_f) + wedge(nu_hat, nu_s)
    q0 = d(nu_hat) + wedge(nu_hat, nu_f)
    return q2, q1, q0


def normality_report(cc, tol, margin=2, guard=DEFAULT_GUARD):
    """
    Both normality tests side by side.

    Returns:
        dict: flatness maximum, loop defects of the trial solutions, the two verdicts and whether they agree
    """
    cs = nu_forms(cc)
    coefficients = integrability_quadratic(cc, cs)
    flatness = max(max_interior(q, margin) for q in coefficients)
    defects = []
    for t0 in TRIAL_VALUES:
        try:
            defects.append(loop_defect(cc, t0, cs=cs))
        except DivergenceError as e:
            logger.warning(f"Trial solution t0={t0} diverged: {str(e)}")
            defects.append(float('inf'))
    flat = flatness <= tol
    three_solutions = all(defect <= tol for defect in defects)
    if flat != three_solutions:
        logger.warning(f"Normality tests disagree: flatness {flatness:.3e}, loop defects {defects}")
    return {
        'flatness': flatness,
        'loop_defects': defects,
        'worst': max([flatness] + defects),
        'flat': flat,
        'three_solutions': three_solutions,
        'agree': flat == three_solutions,
    }


def is_normal(cc, tol=5e-2, margin=2):
    """
    Check whether the circles admit a one-parameter family of orthogonal surfaces.

    The normal bundle has to be flat and three solutions of the
    orthogonal-surface equation have to close up; a disagreement counts as not normal.

    Returns:
        bool
    """
    report = normality_report(cc, tol, margin)
    return report['flat'] and report['three_solutions']


def parallel_residual(cc, margin=1):
    """Largest nu component; zero for parallel framings."""
    cs = nu_forms(cc)
    return max(max_interior(v[a], margin) for v in (cs.nu_s, cs.nu_f, cs.nu_hat_s) for a in range(2))


def member_point(s, f, fhat, g, gprime=1.0):
    if np.isinf(g):
        return fhat
    return (g * s + f - 0.5 * g * g * fhat) / gprime


def member_sphere(s, fhat, g):
    """Sphere through the member point that contains the circle: s - g fhat."""
    if np.isinf(g):
        return -s
    return s - g * fhat


def orthogonal_family(cc, schedule, parallel_tol=PARALLEL_TOL):
    """
    Members of the orthogonal family of a parallel circle framing.

    Args:
        cc: CircleCongruence with nu = 0
        schedule: sequence of (g, g') pairs; g = inf gives the fhat member

    Returns:
        list: StripGrid per schedule entry
    """
    residual = parallel_residual(cc)
    if residual > parallel_tol:
        raise UsageError(f"Frame is not parallel (max nu {residual:.3e} > {parallel_tol:.1e})")
    fg = cc.frame
    members = []
    for g, gprime in schedule:
        if gprime == 0:
            raise SingularParametrizationError(f"g' vanishes for the member g={g}")
        f_g = member_point(fg.s, fg.f, fg.fhat, g, gprime)
        s_g = member_sphere(fg.s, fg.fhat, g)
        members.append(StripGrid(s=s_g, f=f_g, grid=cc.grid))
    logger.info(f"Generated {len(members)} members of the orthogonal family")
    return members


def orthogonality_residual(cc, g, gprime=1.0, margin=1):
    """
    max |<d f_g / dg, d f_g>| over interior nodes.

    Only the circle tangent s - g fhat enters; the radial part is null against d f_g.
    """
    fg = cc.frame
    f_g = member_point(fg.s, fg.f, fg.fhat, g, gprime)
    along_circle = (fg.s - g * fg.fhat) / gprime
    tangents = [partial(f_g, h, axis) for axis, h in enumerate(cc.grid.spacing)]
    return max(max_interior(inner(along_circle, t), margin) for t in tangents)


def family_cross_ratio(members, tol=1e-12):
    """
    Cross ratio of four members of one orthogonal family, per node.

    Returns:
        tuple: (values (N1, N2), standard deviation over nodes)
    """
    if len(members) != 4:
        raise UsageError("family_cross_ratio needs exactly four members")
    points = [m.f for m in members]
    for a in range(4):
        for b in range(a + 1, 4):
            pairing = np.abs(inner(points[a], points[b]))
            if np.any(pairing <= tol):
                raise DegenerateConfigurationError(f"Members {a} and {b} coincide")
    values = cross_ratio(points[0], points[1], points[2], points[3])
    return values, float(np.std(values))


def gauge_transform(cc, lam, mu):
    """
    Re-frame the same congruence: (f, fhat) -> (e^lam f, e^-lam fhat), then the
    null rotation s -> s + mu f, fhat -> fhat - mu s - mu^2/2 f.

    Args:
        lam, mu: scalars or (N1, N2) arrays

    Returns:
        CircleCongruence
    """
    fg = cc.frame
    shape = cc.shape
    lam = np.broadcast_to(np.asarray(lam, dtype=float), shape)[..., None]
    mu = np.broadcast_to(np.asarray(mu, dtype=float), shape)[..., None]
    f = np.exp(lam) * fg.f
    fhat = np.exp(-lam) * fg.fhat
    s = fg.s + mu * f
    fhat = fhat - mu * fg.s - 0.5 * mu * mu * f
    frames = fg.frames.copy()
    frames[..., :, -3] = s
    frames[..., :, -2] = f
    frames[..., :, -1] = fhat
    return CircleCongruence(FrameGrid(frames=frames, grid=fg.grid, mode=fg.mode))


def envelope_sphere(cc, g_a, g_b):
    """
    The sphere congruence touching the members g_a and g_b.

    Returns:
        ndarray: (N1, N2, m) unit vectors in span(s, f, fhat)
    """
    fg = cc.frame
    if g_a == g_b:
        raise DegenerateConfigurationError("Envelope of a member with itself is undefined")
    if np.isinf(g_a):
        g_a, g_b = g_b, g_a
    if np.isinf(g_b):
        return fg.s - g_a * fg.fhat
    # roots of -1/2 beta g^2 + alpha g + gamma are g_a, g_b
    sphere = -(g_a + g_b) * fg.s - 2.0 * fg.f + g_a * g_b * fg.fhat
    return sphere / abs(g_a - g_b)
