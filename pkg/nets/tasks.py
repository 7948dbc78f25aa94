from celery import shared_task
from django.conf import settings
import logging

from .errors import NetsError
from .netconfig import NetConfig
from .pipeline import bonnet_report, run_synthesis, run_verification

logger = logging.getLogger(__name__)

# Tolerances - shared with the management commands
RESIDUAL_TOL = getattr(settings, 'NETS_RESIDUAL_TOL', 1e-6)
STENCIL_TOL = getattr(settings, 'NETS_STENCIL_TOL', 5e-2)


@shared_task
def synthesize_net_task(config_text, out_dir):
    """
    Celery task to synthesize a cyclic Guichard net and write its artifacts.

    Args:
        config_text: contents of a NetConfig file
        out_dir: directory receiving net.npz, meshes, CSV fields and report.json

    Returns:
        dict: Results of the operation
    """
    try:
        config = NetConfig.parse(config_text)
        report = run_synthesis(config, out_dir, RESIDUAL_TOL, STENCIL_TOL)
        logger.info(f"Synthesized net into {out_dir}, passed={report['passed']}")
        return {
            'status': 'success',
            'message': 'All residuals within tolerance' if report['passed'] else 'Residual failure',
            'passed': report['passed'],
            'out_dir': str(out_dir),
        }

    except NetsError as e:
        logger.error(f"Error synthesizing net: {type(e).__name__}: {str(e)}")
        return {
            'status': 'error',
            'message': str(e),
            'error_type': type(e).__name__,
            'out_dir': str(out_dir),
        }
    except Exception as e:
        logger.error(f"Unexpected error synthesizing net: {str(e)}")
        return {
            'status': 'error',
            'message': str(e),
            'error_type': type(e).__name__,
            'out_dir': str(out_dir),
        }


@shared_task
def verify_net_task(in_dir, k='auto'):
    """
    Celery task to run the verification suite on a stored net.

    Args:
        in_dir: directory holding net.npz (or the file itself)
        k: ambient curvature, 'auto' or None

    Returns:
        dict: Results of the operation
    """
    try:
        result = run_verification(in_dir, k, RESIDUAL_TOL, STENCIL_TOL)
        failed = [name for name, check in result['checks'].items() if check['passed'] is False]
        return {
            'status': 'success',
            'message': 'All checks passed' if result['passed'] else f"Failed checks: {', '.join(failed)}",
            'passed': result['passed'],
            'guichard_axis': result['guichard_axis'],
        }

    except Exception as e:
        logger.error(f"Error verifying net in {in_dir}: {str(e)}")
        return {
            'status': 'error',
            'message': str(e),
        }


@shared_task
def bonnet_report_task(k, a1, a2, eps):
    """
    Celery task to classify the special surfaces of a Weingarten family.

    Returns:
        dict: Results of the operation, with the report as JSON-ready dict
    """
    try:
        report = bonnet_report(k, a1, a2, eps)
        return {
            'status': 'success',
            'message': f"{len(report.special_surfaces)} special surfaces, {report.torus_type} torus",
            'report': report.to_dict(),
        }

    except Exception as e:
        logger.error(f"Error building Bonnet report: {str(e)}")
        return {
            'status': 'error',
            'message': str(e),
        }
