from django.core.management.base import BaseCommand, CommandError
import logging

from nets.errors import ConfigError, NetsError
from nets.pipeline import project_net

logger = logging.getLogger(__name__)


class Command(BaseCommand):
    help = 'Re-export the slice meshes of a stored net in the space form model of another curvature'

    def add_arguments(self, parser):
        parser.add_argument('--in', dest='in_dir', required=True, help='Directory holding net.npz')
        parser.add_argument('--to-k', dest='to_k', type=float, required=True, help='Curvature of the target model')
        parser.add_argument('--out', help='Output directory (default: <in>/model_k<to-k>)')

    def handle(self, *args, **options):
        try:
            written = project_net(options['in_dir'], options['to_k'], options.get('out'))
        except ConfigError as e:
            logger.error(f"Unreadable net: {str(e)}")
            raise CommandError(f"Unreadable input: {str(e)}", returncode=2)
        except NetsError as e:
            logger.error(f"Projection failed: {str(e)}")
            raise CommandError(f"Projection failed ({type(e).__name__}): {str(e)}", returncode=3)

        if not written:
            self.stdout.write(self.style.WARNING("No slice could be projected into the target model"))
            return
        self.stdout.write(self.style.SUCCESS(f"Wrote {len(written)} meshes to {written[0].parent}"))
