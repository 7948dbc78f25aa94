from django.core.management.base import BaseCommand, CommandError
import json
import logging

from nets.bonnet import format_report
from nets.errors import NetsError
from nets.pipeline import bonnet_report

logger = logging.getLogger(__name__)


def parse_real(name, value):
    try:
        number = float(value)
    except (TypeError, ValueError):
        raise CommandError(f"--{name} must be a real number, got {value!r}", returncode=2)
    if number != number or number in (float('inf'), float('-inf')):
        raise CommandError(f"--{name} must be finite, got {value!r}", returncode=2)
    return number


class Command(BaseCommand):
    help = 'Classify the special surfaces of a parallel linear Weingarten family'

    def add_arguments(self, parser):
        parser.add_argument('--k', required=True, help='Ambient curvature')
        parser.add_argument('--a1', required=True)
        parser.add_argument('--a2', required=True)
        parser.add_argument('--eps', required=True, help="'1' or 'i'")
        parser.add_argument('--json', action='store_true', help='Print the report as JSON')

    def handle(self, *args, **options):
        k = parse_real('k', options['k'])
        a1 = parse_real('a1', options['a1'])
        a2 = parse_real('a2', options['a2'])

        try:
            report = bonnet_report(k, a1, a2, options['eps'])
        except NetsError as e:
            logger.error(f"Invalid family: {str(e)}")
            raise CommandError(f"Invalid family ({type(e).__name__}): {str(e)}", returncode=2)

        if options.get('json'):
            self.stdout.write(json.dumps(report.to_dict(), indent=2, sort_keys=True))
        else:
            self.stdout.write(format_report(report))
