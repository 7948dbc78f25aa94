from django.core.management.base import BaseCommand
from pathlib import Path

from nets.export import NET_FILE, save_net
from nets.samples import FIXTURES, fixture_net


class Command(BaseCommand):
    help = 'Write an analytic fixture net (net.npz) for the verify command'

    def add_arguments(self, parser):
        parser.add_argument('--name', choices=sorted(FIXTURES), default='spherical')
        parser.add_argument('--size', type=int, default=17, help='Nodes per axis')
        parser.add_argument('--out', required=True, help='Output directory')
        parser.add_argument('--no-tangents', action='store_true', help='Drop the exact tangents (finite differences only)')

    def handle(self, *args, **options):
        out_dir = Path(options['out'])
        out_dir.mkdir(parents=True, exist_ok=True)
        net = fixture_net(options['name'], options['size'])
        if options.get('no_tangents'):
            net.tangents = None
        save_net(net, out_dir / NET_FILE)
        self.stdout.write(self.style.SUCCESS(f"Wrote {options['name']} net {net.shape} to {out_dir / NET_FILE}"))
