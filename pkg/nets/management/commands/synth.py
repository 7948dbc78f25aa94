from django.conf import settings
from django.core.management.base import BaseCommand, CommandError
import logging

from nets.errors import ConfigError, NetsError
from nets.netconfig import NetConfig
from nets.pipeline import format_checks, run_synthesis
from nets.tasks import synthesize_net_task

logger = logging.getLogger(__name__)


class Command(BaseCommand):
    help = 'Synthesize a cyclic Guichard net from a configuration file and export meshes, fields and a report'

    def add_arguments(self, parser):
        parser.add_argument('--config', required=True, help='Path of the key = value configuration file')
        parser.add_argument('--out', help='Output directory (defaults to the "out" key of the configuration)')
        parser.add_argument('--queue', action='store_true', help='Schedule the synthesis with Celery and return')

    def handle(self, *args, **options):
        try:
            config = NetConfig.load(options['config'])
        except ConfigError as e:
            logger.error(f"Invalid configuration: {str(e)}")
            raise CommandError(f"Invalid configuration: {str(e)}", returncode=2)

        out_dir = options.get('out') or config.out
        if not out_dir:
            raise CommandError("No output directory: pass --out or set 'out' in the configuration", returncode=2)

        if options.get('queue'):
            with open(options['config'], encoding='utf8') as handle:
                task = synthesize_net_task.delay(handle.read(), str(out_dir))
            self.stdout.write(self.style.SUCCESS(f"Scheduled synthesis task (ID: {task.id}) writing to {out_dir}"))
            return

        self.stdout.write(f"Synthesizing {config.shape} net for k={config.k} a1={config.a1} a2={config.a2} eps={config.eps}...")
        try:
            report = run_synthesis(
                config,
                out_dir,
                residual_tol=getattr(settings, 'NETS_RESIDUAL_TOL', 1e-6),
                stencil_tol=getattr(settings, 'NETS_STENCIL_TOL', 5e-2),
            )
        except NetsError as e:
            raise CommandError(f"Synthesis failed ({type(e).__name__}): {str(e)}", returncode=3)

        for line in format_checks(report['checks']):
            self.stdout.write(line)
        self.stdout.write(f"Torus type: {report['torus_type']}, Guichard axis: {report['guichard_axis']}")

        if not report['passed']:
            raise CommandError(f"Residual failure, see {out_dir}/report.json", returncode=1)
        self.stdout.write(self.style.SUCCESS(f"Wrote {len(report['files'])} files to {out_dir}"))
