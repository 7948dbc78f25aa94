from django.conf import settings
from django.core.management.base import BaseCommand, CommandError
import logging

from nets.errors import ConfigError, NetsError
from nets.pipeline import format_checks, run_verification
from nets.tasks import verify_net_task

logger = logging.getLogger(__name__)


def parse_curvature(value):
    """'auto', 'none' or a real number."""
    if value in (None, 'auto'):
        return 'auto'
    if value == 'none':
        return None
    try:
        return float(value)
    except ValueError:
        raise CommandError(f"--k must be a real number, 'auto' or 'none', got {value!r}", returncode=2)


class Command(BaseCommand):
    help = 'Run the triply orthogonal, Lamé, Dupin and Guichard residual suite on a stored net'

    def add_arguments(self, parser):
        parser.add_argument('--in', dest='in_dir', required=True, help='Directory holding net.npz, or the file itself')
        parser.add_argument('--k', default='auto', help="Ambient curvature for Lamé's equations, 'auto' or 'none'")
        parser.add_argument('--tol', type=float, help='Tolerance for residuals computed from exact tangents')
        parser.add_argument('--stencil-tol', type=float, help='Tolerance for finite-difference residuals')
        parser.add_argument('--queue', action='store_true', help='Schedule the verification with Celery and return')

    def handle(self, *args, **options):
        in_dir = options['in_dir']
        k = parse_curvature(options.get('k'))

        if options.get('queue'):
            task = verify_net_task.delay(str(in_dir), k)
            self.stdout.write(self.style.SUCCESS(f"Scheduled verification task (ID: {task.id}) for {in_dir}"))
            return

        residual_tol = options.get('tol') or getattr(settings, 'NETS_RESIDUAL_TOL', 1e-6)
        stencil_tol = options.get('stencil_tol') or getattr(settings, 'NETS_STENCIL_TOL', 5e-2)
        try:
            result = run_verification(in_dir, k, residual_tol, stencil_tol)
        except ConfigError as e:
            logger.error(f"Unreadable net: {str(e)}")
            raise CommandError(f"Unreadable input: {str(e)}", returncode=2)
        except NetsError as e:
            logger.error(f"Verification failed: {str(e)}")
            raise CommandError(f"Verification failed ({type(e).__name__}): {str(e)}", returncode=3)

        used = 'not checked' if result['k'] is None else result['k']
        self.stdout.write(f"Lamé curvature: {used}")
        for line in format_checks(result['checks']):
            self.stdout.write(line)
        if result['guichard_axis'] is not None:
            self.stdout.write(f"Best Guichard assignment: imaginary unit on axis {result['guichard_axis'] + 1}")

        if not result['passed']:
            raise CommandError("Residual failure", returncode=1)
        self.stdout.write(self.style.SUCCESS("All checks passed"))
