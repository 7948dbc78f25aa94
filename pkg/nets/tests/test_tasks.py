from pathlib import Path
import tempfile

from django.test import SimpleTestCase

from nets.export import save_net
from nets.samples import cartesian_net
from nets.tasks import bonnet_report_task, synthesize_net_task, verify_net_task
from nets.tests.test_commands import FLAGSHIP


class SynthesizeTaskTests(SimpleTestCase):
    def test_success(self):
        with tempfile.TemporaryDirectory() as tmp:
            result = synthesize_net_task(FLAGSHIP, tmp)
            self.assertEqual(result['status'], 'success')
            self.assertTrue(result['passed'])
            self.assertTrue((Path(tmp) / 'report.json').exists())

    def test_config_error(self):
        with tempfile.TemporaryDirectory() as tmp:
            result = synthesize_net_task("k = 0\n", tmp)
        self.assertEqual(result['status'], 'error')
        self.assertEqual(result['error_type'], 'ConfigError')

    def test_synthesis_error(self):
        with tempfile.TemporaryDirectory() as tmp:
            result = synthesize_net_task(FLAGSHIP + "r_min = -2\nr_max = 2\n", tmp)
        self.assertEqual(result['status'], 'error')
        self.assertEqual(result['error_type'], 'SingularNetError')


class VerifyTaskTests(SimpleTestCase):
    def test_cartesian_net(self):
        with tempfile.TemporaryDirectory() as tmp:
            save_net(cartesian_net((9, 9, 9)), Path(tmp) / 'net.npz')
            result = verify_net_task(tmp)
        self.assertEqual(result['status'], 'success')
        self.assertFalse(result['passed'])
        self.assertIn('guichard', result['message'])
        self.assertNotIn('lame_1', result['message'])

    def test_missing_net(self):
        with tempfile.TemporaryDirectory() as tmp:
            result = verify_net_task(tmp)
        self.assertEqual(result['status'], 'error')


class BonnetTaskTests(SimpleTestCase):
    def test_report(self):
        result = bonnet_report_task(0.0, 0.0, 1.0, 'i')
        self.assertEqual(result['status'], 'success')
        self.assertEqual(result['report']['torus_type'], 'degenerate-cylinder')
        self.assertIn('3 special surfaces', result['message'])

    def test_invalid_family(self):
        result = bonnet_report_task(0.0, 0.0, 1.0, '2')
        self.assertEqual(result['status'], 'error')
