"""
Service functions shared by the management commands and the Celery tasks.
"""
import logging
from pathlib import Path

import numpy as np

from .bonnet import classify, torus_type
from .cyclic import CircleCongruence, family_cross_ratio, normality_report
from .errors import ConfigError, NetsError
from .export import (
    REPORT_FILE,
    export_lame,
    export_slices,
    load_net,
    save_net,
    write_report,
)
from .strip import FrameGrid, ParamGrid2, StripGrid
from .triorth import (
    best_guichard,
    channel_residuals,
    dupin_residual,
    genlame_residuals,
    guichard_residual,
    lame_from_grid,
    lame_residuals,
    orthogonality_residual,
    w_split_residual,
)
from .weingarten import (
    family_coeffs,
    guichard_axis,
    integrate_base_strip,
    pendulum_residual,
    principal_curvatures_at,
    reduced_lame,
    reduced_lame_residuals,
    sine_gordon_profile,
    sine_gordon_residual,
    slice_curvatures,
    synthesize_net,
)

logger = logging.getLogger(__name__)

RESIDUAL_TOL = 1e-6
STENCIL_TOL = 5e-2


def eps_to_eps2(token):
    """'1' -> +1, 'i' -> -1."""
    token = str(token).strip().strip('"\'')
    if token == '1':
        return 1.0
    if token == 'i':
        return -1.0
    raise ConfigError(f"eps must be '1' or 'i', got {token!r}")


def _check(value, tol):
    value = float(value)
    return {'value': value, 'tol': float(tol), 'passed': bool(np.isfinite(value) and value <= tol)}


def _failed(message):
    return {'value': float('inf'), 'tol': 0.0, 'passed': False, 'error': message}


def _info(value):
    """Reported value without a verdict; never decides a run."""
    return {'value': float(value), 'tol': None, 'passed': None}


def all_passed(checks):
    return all(check['passed'] for check in checks.values() if check['tol'] is not None)


def verification_suite(net, k=None, residual_tol=RESIDUAL_TOL, stencil_tol=STENCIL_TOL):
    """
    Residual table of a sampled net.

    Args:
        net: NetGrid
        k: ambient curvature for Lamé's equations; None skips them

    Returns:
        dict: {'checks': {name: {'value', 'tol', 'passed'}}, 'guichard_axis', 'passed'}
    """
    exact_tol = residual_tol if net.tangents is not None else stencil_tol
    checks = {'orthogonality': _check(orthogonality_residual(net), exact_tol)}
    axis = None
    try:
        # orthogonality is judged by its own check above
        ld = lame_from_grid(net, tol=np.inf)
    except NetsError as e:
        logger.error(f"Lamé data unavailable: {str(e)}")
        checks['lame_data'] = _failed(str(e))
        return {'checks': checks, 'guichard_axis': axis, 'passed': False}

    if k is not None:
        for index, value in enumerate(lame_residuals(ld, k)):
            checks[f"lame_{index + 1}"] = _check(value, stencil_tol)
    checks['b_symmetry'] = _check(ld.b_asymmetry(), stencil_tol)
    for index, value in enumerate(genlame_residuals(ld)):
        checks[f"genlame_{index + 1}"] = _check(value, stencil_tol)
    checks['dupin'] = _check(dupin_residual(net), stencil_tol)
    for candidate in range(3):
        checks[f"guichard_axis_{candidate + 1}"] = _info(guichard_residual(ld, candidate))
    axis, value = best_guichard(ld)
    checks['guichard'] = _check(value, exact_tol)
    passed = all_passed(checks)
    logger.info(f"Verification suite on {net.shape}: {'pass' if passed else 'fail'}")
    return {'checks': checks, 'guichard_axis': axis, 'passed': passed}


def _affine_relation(wf, net, u, margin=2):
    """
    cK K + 2 cH H + c over every slice, from the closed-form curvatures and from
    finite differences of the slices.
    """
    closed, sampled = 0.0, 0.0
    for j, t in enumerate(net.t):
        k1, k2 = principal_curvatures_at(wf, u, t)
        value = wf.cK(t) * k1 * k2 + wf.cH(t) * (k1 + k2) + wf.c(t)
        closed = max(closed, float(np.max(np.abs(value))))
        K, H = slice_curvatures(net, j)
        value = wf.cK(t) * K + 2.0 * wf.cH(t) * H + wf.c(t)
        sampled = max(sampled, float(np.max(np.abs(value[margin:-margin, margin:-margin]))))
    return closed, sampled


def synthesis_diagnostics(wf, profile, net, config, residual_tol, stencil_tol):
    """Checks specific to synthesized nets, on top of verification_suite."""
    checks = {}
    ld = lame_from_grid(net)
    checks['guichard_expected_axis'] = _check(guichard_residual(ld, guichard_axis(wf.eps2)), residual_tol)
    # circles run along r: t1 and t2 surfaces are channel surfaces
    for axis in (0, 1):
        checks[f"channel_t{axis + 1}"] = _check(channel_residuals(net, axis, ld)[2], stencil_tol)

    grid = ParamGrid2.uniform(config.t1_span, config.t2_span, config.N1, config.N2)
    u, _ = profile(grid.t1s)
    u_field = np.broadcast_to(u[:, None], grid.shape)
    checks['sine_gordon'] = _check(sine_gordon_residual(u_field, grid, wf), stencil_tol)

    for name, value in zip(('w_13', 'w_23'), w_split_residual(ld, wf.eps2)):
        checks[f"w_split_{name}"] = _check(value, stencil_tol)
    for name, value in zip(('12', '13', '23', 'divergence'), reduced_lame_residuals(net, wf.eps2)):
        checks[f"reduced_lame_{name}"] = _check(value, stencil_tol)

    rl = reduced_lame(net, wf.eps2)
    constants = {'c_red': rl.c_red, 'r0': rl.r0, 'v0': rl.v0}
    if np.isfinite(rl.c_red):
        residual = pendulum_residual(rl.v, net.spacing[2], wf.eps2, rl.c_red, rl.r0, rl.v0, margin=2)
        checks['pendulum'] = _check(residual, stencil_tol)

    closed, sampled = _affine_relation(wf, net, u)
    checks['affine_relation'] = _check(closed, residual_tol)
    checks['affine_relation_slices'] = _check(sampled, stencil_tol)

    nr = net.shape[2]
    picks = [0, nr // 3, (2 * nr) // 3, nr - 1]
    members = [StripGrid(s=net.normals[:, :, j], f=net.f[:, :, j], grid=grid) for j in picks]
    _, spread = family_cross_ratio(members)
    checks['cross_ratio_spread'] = _check(spread, residual_tol)

    frames = integrate_base_strip(wf, profile, grid)
    congruence = CircleCongruence(FrameGrid(frames=frames, grid=grid))
    normality = normality_report(congruence, stencil_tol)
    checks['normality'] = _check(normality['worst'], stencil_tol)
    return checks, constants


def run_synthesis(config, out_dir, residual_tol=RESIDUAL_TOL, stencil_tol=STENCIL_TOL):
    """
    Synthesize the net described by a NetConfig and write its artifacts.

    Writes net.npz, slice_XXX.obj, lame_l1..3.csv and report.json into out_dir.
    A NetsError is recorded in report.json and re-raised.

    Returns:
        dict: the run report; report['passed'] is True iff every residual is within tolerance
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    residual_tol = config.tol or residual_tol
    stencil_tol = config.stencil_tol or stencil_tol
    report = {
        'status': 'error',
        'config': config.as_dict(),
        'family': None,
        'checks': {},
        'pendulum_constants': None,
        'elliptic': None,
        'torus_type': None,
        'guichard_axis': None,
        'files': [],
        'error': None,
        'passed': False,
    }
    try:
        wf = family_coeffs(config.k, config.a1, config.a2, config.eps2)
        report['family'] = wf.as_dict()
        profile = sine_gordon_profile(wf, config.u0, config.du0, config.t1_span)
        net = synthesize_net(wf, profile, config.shape, config.t1_span, config.t2_span, config.r_span,
                             t_init=config.t_init)
        suite = verification_suite(net, wf.k, residual_tol, stencil_tol)
        extra, constants = synthesis_diagnostics(wf, profile, net, config, residual_tol, stencil_tol)
    except NetsError as e:
        logger.error(f"Synthesis failed: {type(e).__name__}: {str(e)}")
        report['error'] = {'type': type(e).__name__, 'message': str(e)}
        write_report(out_dir / REPORT_FILE, report)
        raise

    reparam = net.meta['reparam']
    report['elliptic'] = {
        'ode_residual': reparam.ode_residual,
        'crossings': reparam.crossings,
        't_min': float(np.min(reparam.t)),
        't_max': float(np.max(reparam.t)),
    }
    report['torus_type'] = torus_type(reparam)[0]
    report['guichard_axis'] = suite['guichard_axis']
    report['pendulum_constants'] = constants
    report['checks'] = {**suite['checks'], **extra}
    report['passed'] = all_passed(report['checks'])
    report['status'] = 'success'

    save_net(net, out_dir / 'net.npz')
    files = ['net.npz']
    files += [p.name for p in export_slices(net, out_dir, model_k=config.model_k)]
    files += [p.name for p in export_lame(lame_from_grid(net), out_dir)]
    files.append(REPORT_FILE)
    report['files'] = files
    write_report(out_dir / REPORT_FILE, report)
    logger.info(f"Synthesis finished in {out_dir}: {'pass' if report['passed'] else 'residual failure'}")
    return report


def run_verification(in_dir, k='auto', residual_tol=RESIDUAL_TOL, stencil_tol=STENCIL_TOL):
    """
    Load a net directory (or net.npz) and run the verification suite.

    Args:
        k: ambient curvature, 'auto' (the curvature stored with the net) or None

    Returns:
        dict: verification_suite result plus the curvature used
    """
    net = load_net(in_dir)
    if k == 'auto':
        k = net.k if net.gauged else None
    result = verification_suite(net, k, residual_tol, stencil_tol)
    result['k'] = k
    return result


def bonnet_report(k, a1, a2, eps):
    """BonnetReport of the family (k, a1, a2, eps)."""
    return classify(family_coeffs(k, a1, a2, eps_to_eps2(eps)))


def project_net(in_dir, to_k, out_dir=None):
    """
    Re-export the slice meshes of a stored net in the model of curvature to_k.

    Returns:
        list: written paths
    """
    net = load_net(in_dir)
    in_dir = Path(in_dir)
    base = in_dir if in_dir.is_dir() else in_dir.parent
    out_dir = Path(out_dir) if out_dir else base / f"model_k{to_k:g}"
    return export_slices(net, out_dir, model_k=to_k)


def format_checks(checks):
    """Residual table lines: name, value, tolerance and verdict."""
    width = max((len(name) for name in checks), default=0)
    lines = []
    for name, check in checks.items():
        if check['tol'] is None:
            lines.append(f"{name:<{width}}  {check['value']:.3e}  (info)")
            continue
        verdict = 'ok' if check['passed'] else 'FAIL'
        line = f"{name:<{width}}  {check['value']:.3e}  (tol {check['tol']:.1e})  {verdict}"
        if check.get('error'):
            line += f"  {check['error']}"
        lines.append(line)
    return lines
