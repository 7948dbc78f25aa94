"""
Special surfaces of a parallel linear Weingarten family.

Every question about constant mean curvature, constant Gauss curvature or
constant radii-sum surfaces in the family reduces to the real zeros of the
quadratics cK, cH and c.
"""
from dataclasses import asdict, dataclass, field
import logging
from typing import Optional

import numpy as np

from .errors import DegenerateQuarticError, DomainError, InfinityBoundaryError, UsageError
from .weingarten import (
    LARGE_T,
    EllipticReparam,
    WeingartenFamily,
    branch_cross_ratio,
    principal_curvatures_at,
    rebase,
)

logger = logging.getLogger(__name__)

CMC = 'constant-mean-curvature'
CONSTANT_K = 'constant-Gauss-curvature'
RADII_SUM = 'constant-radii-sum'

RECTANGULAR = 'rectangular'
RHOMBIC = 'rhombic'
CYLINDER = 'degenerate-cylinder'
DEGENERATE_QUARTIC = 'degenerate-quartic'

NOT_APPLICABLE = 'not-applicable'

SAMPLE_COUNT = 20
CHECK_TOL = 1e-8


@dataclass
class SpecialSurface:
    t: float
    kind: str
    value: float
    spread: float
    radii_sum: Optional[float] = None


@dataclass
class BonnetReport:
    family: dict
    roots: dict
    beyond_boundary: dict
    identically_zero: list
    special_surfaces: list
    distances: list
    relations: dict
    torus_type: str
    cross_ratio: Optional[list]
    square_torus: bool
    limit_curvature: dict
    rebased: Optional[dict] = None
    notes: list = field(default_factory=list)

    def count(self, kind):
        return sum(1 for surface in self.special_surfaces if surface.kind == kind)

    def to_dict(self):
        """JSON-ready dict; the key set does not depend on the family."""
        data = asdict(self)
        data['special_surfaces'] = [asdict(s) for s in self.special_surfaces]
        return _jsonable(data)


def _jsonable(value):
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.floating, float)):
        value = float(value)
        if np.isnan(value):
            return None
        if np.isinf(value):
            return 'inf' if value > 0 else '-inf'
        return value
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.bool_):
        return bool(value)
    return value


def distance(k, t_a, t_b):
    """
    Geodesic distance between the parallel surfaces f_{t_a} and f_{t_b}.

    Integrates dt / (1 + k t^2) in closed form; t = +-inf is allowed for k > 0.

    Raises:
        InfinityBoundaryError: when [t_a, t_b] leaves the domain 1 + k t^2 > 0
    """
    for t in (t_a, t_b):
        if np.isinf(t) and k <= 0:
            raise InfinityBoundaryError(f"t = {t} lies on the infinity boundary for k = {k}")
        if not np.isinf(t) and 1.0 + k * t * t <= 0:
            raise InfinityBoundaryError(f"t = {t} lies beyond the infinity boundary for k = {k}")
    if k > 0:
        root = np.sqrt(k)
        return float((np.arctan(root * t_b) - np.arctan(root * t_a)) / root)
    if k < 0:
        root = np.sqrt(-k)
        return float((np.arctanh(root * t_b) - np.arctanh(root * t_a)) / root)
    return float(t_b - t_a)


def _u_samples(wf):
    low, high = (0.1, 1.4) if wf.eps2 > 0 else (0.2, 2.0)
    return np.linspace(low, high, SAMPLE_COUNT)


def _sampled_curvatures(wf, t):
    k1, k2 = principal_curvatures_at(wf, _u_samples(wf), t)
    finite = np.isfinite(k1) & np.isfinite(k2)
    return k1[finite], k2[finite]


def _spread(values):
    values = values[np.isfinite(values)]
    if values.size == 0:
        return float('nan')
    return float(np.max(values) - np.min(values))


def _special_surface(wf, t, kind):
    k1, k2 = _sampled_curvatures(wf, t)
    if kind == CMC:
        value = -float(wf.c(t)) / (2.0 * float(wf.cH(t)))
        return SpecialSurface(t=t, kind=kind, value=value, spread=_spread(0.5 * (k1 + k2)))
    if kind == CONSTANT_K:
        value = -float(wf.c(t)) / float(wf.cK(t))
        return SpecialSurface(t=t, kind=kind, value=value, spread=_spread(k1 * k2))
    radii_sum = -float(wf.cK(t)) / float(wf.cH(t))
    with np.errstate(divide='ignore', invalid='ignore'):
        sampled = 0.5 * (1.0 / k1 + 1.0 / k2)
    return SpecialSurface(t=t, kind=kind, value=0.5 * radii_sum, spread=_spread(sampled), radii_sum=radii_sum)


def _admissible(wf, roots):
    inside = [t for t in roots if 1.0 + wf.k * t * t > 0]
    outside = [t for t in roots if 1.0 + wf.k * t * t <= 0]
    return inside, outside


def torus_type(er, tol=1e-9):
    """
    Shape of the torus carrying the elliptic reparametrization.

    Args:
        er: EllipticReparam, or a WeingartenFamily whose branch points are used directly

    Returns:
        tuple: (type, cross ratio or None, square flag)
    """
    if isinstance(er, WeingartenFamily):
        try:
            cross = branch_cross_ratio(er)
        except DegenerateQuarticError as e:
            logger.warning(f"Degenerate quartic: {str(e)}")
            return DEGENERATE_QUARTIC, None, False
        eps_k = er.eps2 * er.k
    elif isinstance(er, EllipticReparam):
        cross = er.branch_cross_ratio
        eps_k = er.eps2 * er.k
    else:
        raise UsageError(f"torus_type needs an EllipticReparam, got {type(er).__name__}")

    if abs(cross - 1.0) <= tol:
        return CYLINDER, cross, False
    real = abs(cross.imag) <= tol * max(1.0, abs(cross))
    unit = abs(abs(cross) - 1.0) <= tol
    if real and unit:
        return (RECTANGULAR if eps_k > 0 else RHOMBIC), cross, True
    if real:
        return RECTANGULAR, cross, False
    if unit:
        return RHOMBIC, cross, False
    logger.warning(f"Branch cross ratio {cross} is neither real nor unimodular")
    return (RECTANGULAR if abs(cross.imag) < abs(abs(cross) - 1.0) else RHOMBIC), cross, False


def _base_at_constant_k(wf):
    """The family re-based at the admissible cH root closest to t = 0, or wf itself when a1 = 0."""
    if abs(wf.a1) <= 1e-14:
        return wf, 0.0
    roots, _ = _admissible(wf, wf.cH.real_roots())
    if not roots:
        return None, None
    t = min(roots, key=abs)
    try:
        return rebase(wf, t), t
    except DomainError as e:
        logger.warning(f"Cannot re-base at t={t}: {str(e)}")
        return None, None


def limit_curvature(wf):
    """
    Gauss curvature of f_t as t -> infinity for a family based at a constant-K surface.

    Returns:
        dict: symbolic limit -k^2/(eps2 a2^2), the printed form -k^2/a2^2, the
        numerical value at large t and which of the two forms it matches
    """
    based, _ = _base_at_constant_k(wf)
    if based is None or wf.k < 0:
        return {'symbolic': float('nan'), 'printed': float('nan'), 'numeric': float('nan'), 'matches': NOT_APPLICABLE}
    symbolic = -based.k ** 2 / (based.eps2 * based.a2 ** 2)
    printed = -based.k ** 2 / based.a2 ** 2
    k1, k2 = _sampled_curvatures(based, LARGE_T)
    numeric = float(np.mean(k1 * k2)) if k1.size else float('nan')
    scale = max(1.0, abs(symbolic))
    hits = [name for name, value in (('symbolic', symbolic), ('printed', printed))
            if abs(numeric - value) <= 1e-4 * scale]
    matches = 'both' if len(hits) == 2 else (hits[0] if hits else 'neither')
    return {'symbolic': symbolic, 'printed': printed, 'numeric': numeric, 'matches': matches}


def _relation(applicable, value=float('nan'), expected=float('nan')):
    if not applicable:
        return {'status': NOT_APPLICABLE, 'value': float('nan'), 'expected': float('nan'), 'residual': float('nan')}
    return {'status': 'checked', 'value': value, 'expected': expected, 'residual': abs(value - expected)}


def constant_k_roots(wf):
    """
    Parameters t of the constant Gauss curvature surfaces, in increasing order.

    For k > 0 the t-line closes up through infinity, which is a root when cH
    drops to degree one.
    """
    if wf.cH.is_zero():
        return []
    roots, _ = _admissible(wf, wf.cH.real_roots())
    if wf.k > 0 and wf.cH.degree() == 1:
        roots.append(np.inf)
    return roots


def gauss_curvature_at(wf, t):
    """-c(t)/cK(t), the constant Gauss curvature of f_t at a root of cH; t = inf uses leading coefficients."""
    if np.isinf(t):
        numerator, denominator = wf.c.q2, wf.cK.q2
    else:
        numerator, denominator = float(wf.c(t)), float(wf.cK(t))
    if denominator == 0:
        return float('nan')
    return -numerator / denominator


def _root_pair_checks(wf):
    """K0 K_inf = k^2 and the quarter spacing of the two constant-K surfaces on the closed t-line."""
    k = wf.k
    roots = constant_k_roots(wf)
    if k <= 0 or len(roots) != 2:
        return {'k_product': _relation(False), 'quarter_distance': _relation(False)}
    product = gauss_curvature_at(wf, roots[0]) * gauss_curvature_at(wf, roots[1])
    quarter = np.pi / (2.0 * np.sqrt(k))
    gap = abs(distance(k, roots[0], roots[1]))
    # the closed line has length pi/sqrt(k); report the arc further from a quarter
    worst = max((gap, 2.0 * quarter - gap), key=lambda arc: abs(arc - quarter))
    return {
        'k_product': _relation(bool(np.isfinite(product)), product, k ** 2),
        'quarter_distance': _relation(True, worst, quarter),
    }


def relation_checks(wf):
    """
    Relations between the special surfaces of a family.

    The CMC and radii-sum relations refer to the family re-based at a
    constant-K surface; K1 is the Gauss curvature there, K2 the one at distance
    pi/(2 sqrt(k)).

    Returns:
        dict: relation name -> {'status', 'value', 'expected', 'residual'}
    """
    k = wf.k
    checks = _root_pair_checks(wf)
    based, _ = _base_at_constant_k(wf)
    if based is None:
        logger.warning(f"No admissible constant-K surface in {wf.as_dict()}; relation checks skipped")
        for name in ('cmc_value', 'cmc_distance', 'radii_sum_value', 'radii_sum_distance'):
            checks[name] = _relation(False)
        return checks

    K1 = -float(based.c(0.0)) / float(based.cK(0.0))
    K2 = -k ** 2 / based.leading if based.leading != 0 else float('nan')
    positive = k > 0 and K1 > 0 and K2 > 0

    expected = 0.5 * abs(np.sqrt(K1) - np.sqrt(K2)) if positive else float('nan')
    d = float(np.arctan(np.sqrt(k / K1)) / np.sqrt(k)) if positive else float('nan')

    cmc_roots, _ = _admissible(based, based.cK.real_roots())
    if positive and cmc_roots:
        t_cmc = min(cmc_roots, key=abs)
        H = abs(-float(based.c(t_cmc)) / (2.0 * float(based.cH(t_cmc))))
        checks['cmc_value'] = _relation(True, H, expected)
        checks['cmc_distance'] = _relation(True, abs(distance(k, 0.0, t_cmc)), d)
    else:
        checks['cmc_value'] = checks['cmc_distance'] = _relation(False)

    radii_roots, _ = _admissible(based, based.c.real_roots())
    if positive and radii_roots:
        t_rs = max(radii_roots, key=abs)
        mean_radius = abs(float(based.cK(t_rs)) / (2.0 * float(based.cH(t_rs))))
        checks['radii_sum_value'] = _relation(True, mean_radius, expected / k)
        to_infinity = abs(distance(k, t_rs, np.sign(t_rs) * np.inf))
        checks['radii_sum_distance'] = _relation(True, to_infinity, d)
    else:
        checks['radii_sum_value'] = checks['radii_sum_distance'] = _relation(False)

    for name, check in checks.items():
        if check['status'] == NOT_APPLICABLE:
            logger.debug(f"Relation {name} not applicable to {wf.as_dict()}")
    return checks


def classify(wf):
    """
    Report the special surfaces of a Weingarten family.

    Args:
        wf: WeingartenFamily

    Returns:
        BonnetReport
    """
    quadratics = {'cK': (wf.cK, CMC), 'cH': (wf.cH, CONSTANT_K), 'c': (wf.c, RADII_SUM)}
    roots, beyond, zero, surfaces = {}, {}, [], []
    for name, (quadratic, kind) in quadratics.items():
        if quadratic.is_zero():
            zero.append(name)
            roots[name], beyond[name] = [], []
            continue
        inside, outside = _admissible(wf, quadratic.real_roots())
        roots[name], beyond[name] = inside, outside
        surfaces.extend(_special_surface(wf, t, kind) for t in inside)

    notes = []
    for name in zero:
        notes.append(f"{name} vanishes identically")
    for surface in surfaces:
        if surface.spread > CHECK_TOL * max(1.0, abs(surface.value)):
            logger.warning(f"{surface.kind} surface at t={surface.t:.6g} varies by {surface.spread:.3e} over u")
            notes.append(f"{surface.kind} at t={surface.t:.6g} not confirmed numerically")

    ordered = sorted(surfaces, key=lambda s: s.t)
    distances = []
    for first, second in zip(ordered, ordered[1:]):
        distances.append({'from': first.t, 'to': second.t, 'distance': distance(wf.k, first.t, second.t)})

    kind, cross, square = torus_type(wf)
    based, t_base = _base_at_constant_k(wf)
    rebased = None
    if based is not None and based is not wf:
        rebased = dict(based.as_dict(), t=t_base)

    logger.info(f"Classified {wf.as_dict()}: {len(surfaces)} special surfaces, {kind} torus")
    return BonnetReport(
        family=wf.as_dict(),
        roots=roots,
        beyond_boundary=beyond,
        identically_zero=zero,
        special_surfaces=surfaces,
        distances=distances,
        relations=relation_checks(wf),
        torus_type=kind,
        cross_ratio=None if cross is None else [cross.real, cross.imag],
        square_torus=square,
        limit_curvature=limit_curvature(wf),
        rebased=rebased,
        notes=notes,
    )


def format_report(report):
    """Plain-text rendering used by the bonnet command."""
    family = report.family
    lines = [f"Family k={family['k']} a1={family['a1']} a2={family['a2']} eps={family['eps']}"]
    for name in ('cK', 'cH', 'c'):
        found = ', '.join(f"{t:.10g}" for t in report.roots[name]) or 'none'
        lines.append(f"  real roots of {name}: {found}")
        if report.beyond_boundary[name]:
            lines.append(f"    beyond infinity boundary: {', '.join(f'{t:.10g}' for t in report.beyond_boundary[name])}")
    if report.count(CMC) == 0:
        lines.append("  no constant mean curvature surfaces")
    if report.count(RADII_SUM) == 0:
        lines.append("  no constant radii-sum surfaces")
    for surface in report.special_surfaces:
        lines.append(f"  {surface.kind} at t={surface.t:.10g}: value {surface.value:.10g} (spread {surface.spread:.2e})")
    for entry in report.distances:
        lines.append(f"  distance {entry['from']:.6g} -> {entry['to']:.6g}: {entry['distance']:.10g}")
    for name, check in report.relations.items():
        if check['status'] == NOT_APPLICABLE:
            lines.append(f"  {name}: not applicable")
        else:
            lines.append(f"  {name}: {check['value']:.10g} vs {check['expected']:.10g} (residual {check['residual']:.2e})")
    limit = report.limit_curvature
    lines.append(f"  K_inf: symbolic {limit['symbolic']:.10g}, printed {limit['printed']:.10g}, "
                 f"numeric {limit['numeric']:.10g} ({limit['matches']})")
    square = ' (square)' if report.square_torus else ''
    lines.append(f"  torus: {report.torus_type}{square}")
    lines.extend(f"  note: {note}" for note in report.notes)
    return '\n'.join(lines)
