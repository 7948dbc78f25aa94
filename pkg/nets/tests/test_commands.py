from io import StringIO
import json
from pathlib import Path
import tempfile
from unittest import mock

from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import SimpleTestCase

from nets.export import NET_FILE, REPORT_FILE

# default grid and tolerances
FLAGSHIP = """
# k = 0, a1 = 0, a2 = 1, eps = i
k = 0
a1 = 0
a2 = 1
eps = "i"
"""


def run(name, *args):
    out = StringIO()
    call_command(name, *args, stdout=out)
    return out.getvalue()


def check_lines(output):
    """Verdicts of the residual table keyed by check name."""
    verdicts = {}
    for line in output.splitlines():
        parts = line.split()
        if parts and parts[-1] in ('ok', 'FAIL'):
            verdicts[parts[0]] = parts[-1]
    return verdicts


class CommandTestCase(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.root = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def write_config(self, text, name='net.cfg'):
        path = self.root / name
        path.write_text(text)
        return str(path)

    def assertExitCode(self, code, name, *args):
        with self.assertRaises(CommandError) as ctx:
            run(name, *args)
        self.assertEqual(ctx.exception.returncode, code)
        return ctx.exception


class SynthCommandTests(CommandTestCase):
    def test_flagship_round_trip(self):
        out_dir = self.root / 'flagship'
        output = run('synth', '--config', self.write_config(FLAGSHIP), '--out', str(out_dir))
        self.assertIn('Torus type: degenerate-cylinder', output)
        self.assertTrue((out_dir / NET_FILE).exists())
        self.assertTrue((out_dir / 'slice_000.obj').exists())
        self.assertTrue((out_dir / 'lame_l3.csv').exists())

        report = json.loads((out_dir / REPORT_FILE).read_text())
        self.assertTrue(report['passed'])
        self.assertEqual(report['guichard_axis'], 0)
        self.assertLess(report['checks']['guichard']['value'], 1e-6)
        self.assertTrue(report['checks']['genlame_8']['passed'])
        for name in ('channel_t1', 'channel_t2', 'normality'):
            self.assertTrue(report['checks'][name]['passed'], name)
        self.assertIsNone(report['checks']['guichard_axis_2']['passed'])
        self.assertIsNone(report['checks']['guichard_axis_2']['tol'])

        verified = run('verify', '--in', str(out_dir))
        self.assertIn('All checks passed', verified)
        self.assertNotIn('guichard_axis_2', check_lines(verified))
        self.assertIn('(info)', verified)

    def test_residual_failure(self):
        config = self.write_config(FLAGSHIP + "tol = 1e-300\n")
        self.assertExitCode(1, 'synth', '--config', config, '--out', str(self.root / 'strict'))
        report = json.loads((self.root / 'strict' / REPORT_FILE).read_text())
        self.assertEqual(report['status'], 'success')
        self.assertFalse(report['passed'])

    def test_branch_point_in_range(self):
        config = self.write_config(FLAGSHIP + "r_min = -2\nr_max = 2\n")
        error = self.assertExitCode(3, 'synth', '--config', config, '--out', str(self.root / 'singular'))
        self.assertIn('SingularNetError', str(error))
        report = json.loads((self.root / 'singular' / REPORT_FILE).read_text())
        self.assertEqual(report['error']['type'], 'SingularNetError')

    def test_malformed_config(self):
        self.assertExitCode(2, 'synth', '--config', self.write_config("k = 0\na1 = 0\neps = i\n"),
                            '--out', str(self.root / 'x'))
        self.assertExitCode(2, 'synth', '--config', self.write_config(FLAGSHIP + "colour = blue\n"),
                            '--out', str(self.root / 'x'))
        self.assertExitCode(2, 'synth', '--config', str(self.root / 'missing.cfg'), '--out', str(self.root / 'x'))

    def test_output_directory_required(self):
        self.assertExitCode(2, 'synth', '--config', self.write_config(FLAGSHIP))

    def test_queue(self):
        with mock.patch('nets.management.commands.synth.synthesize_net_task') as task:
            task.delay.return_value.id = 'abc123'
            output = run('synth', '--config', self.write_config(FLAGSHIP), '--out', str(self.root / 'q'), '--queue')
        self.assertIn('abc123', output)
        config_text, out_dir = task.delay.call_args[0]
        self.assertIn('a2 = 1', config_text)
        self.assertEqual(out_dir, str(self.root / 'q'))


class VerifyCommandTests(CommandTestCase):
    def test_spherical_fixture_table(self):
        run('sample_net', '--name', 'spherical', '--size', '33', '--out', str(self.root))
        out = StringIO()
        with self.assertRaises(CommandError):
            call_command('verify', '--in', str(self.root), stdout=out)
        verdicts = check_lines(out.getvalue())
        for index in range(1, 7):
            self.assertEqual(verdicts[f"lame_{index}"], 'ok')
        self.assertEqual(verdicts['orthogonality'], 'ok')
        self.assertEqual(verdicts['b_symmetry'], 'ok')
        for index in range(1, 10):
            self.assertEqual(verdicts[f"genlame_{index}"], 'ok')
        self.assertEqual(verdicts['guichard'], 'FAIL')

    def test_lame_skipped_without_curvature(self):
        run('sample_net', '--name', 'cartesian', '--size', '9', '--out', str(self.root))
        out = StringIO()
        with self.assertRaises(CommandError):
            call_command('verify', '--in', str(self.root), '--k', 'none', stdout=out)
        self.assertIn('Lamé curvature: not checked', out.getvalue())
        self.assertNotIn('lame_1', check_lines(out.getvalue()))

    def test_unreadable_input(self):
        self.assertExitCode(2, 'verify', '--in', str(self.root / 'nowhere'))
        run('sample_net', '--name', 'cartesian', '--size', '9', '--out', str(self.root))
        path = self.root / NET_FILE
        path.write_bytes(path.read_bytes()[:100])
        self.assertExitCode(2, 'verify', '--in', str(self.root))

    def test_bad_curvature(self):
        self.assertExitCode(2, 'verify', '--in', str(self.root), '--k', 'flat')


class BonnetCommandTests(CommandTestCase):
    def test_classical_bonnet(self):
        output = run('bonnet', '--k', '0', '--a1', '0', '--a2', '1', '--eps', 'i')
        self.assertIn('constant-mean-curvature at t=1: value 0.5', output)
        self.assertIn('distance 0 -> 1: 1', output)

    def test_no_cmc_surfaces(self):
        output = run('bonnet', '--k', '0', '--a1', '0', '--a2', '1', '--eps', '1')
        self.assertIn('no constant mean curvature surfaces', output)

    def test_json(self):
        data = json.loads(run('bonnet', '--k', '1', '--a1', '0', '--a2', '1', '--eps', 'i', '--json'))
        self.assertAlmostEqual(data['relations']['k_product']['value'], 1.0)
        self.assertEqual(data['family']['eps'], 'i')

    def test_invalid_input(self):
        self.assertExitCode(2, 'bonnet', '--k', '0', '--a1', '0', '--a2', 'one', '--eps', 'i')
        self.assertExitCode(2, 'bonnet', '--k', 'inf', '--a1', '0', '--a2', '1', '--eps', 'i')
        self.assertExitCode(2, 'bonnet', '--k', '0', '--a1', '0', '--a2', '0', '--eps', 'i')
        self.assertExitCode(2, 'bonnet', '--k', '0', '--a1', '0', '--a2', '1', '--eps', '2')


class ProjectCommandTests(CommandTestCase):
    def test_projects_into_sphere_model(self):
        run('sample_net', '--name', 'cartesian', '--size', '9', '--out', str(self.root))
        output = run('project', '--in', str(self.root), '--to-k', '1')
        self.assertIn('Wrote 9 meshes', output)
        meshes = sorted((self.root / 'model_k1').glob('slice_*.obj'))
        self.assertEqual(len(meshes), 9)
        first = meshes[0].read_text().splitlines()
        self.assertEqual(first[0], 'o slice_000')
        self.assertEqual(sum(1 for line in first if line.startswith('v ')), 81)
        self.assertEqual(sum(1 for line in first if line.startswith('f ')), 64)

    def test_missing_net(self):
        self.assertExitCode(2, 'project', '--in', str(self.root), '--to-k', '1')
