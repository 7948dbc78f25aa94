from pathlib import Path
import tempfile

from django.test import SimpleTestCase

from nets.errors import ConfigError
from nets.netconfig import NetConfig

BASE = "k = 0\na1 = 0\na2 = 1\neps = i\n"


class NetConfigTests(SimpleTestCase):
    def test_defaults(self):
        config = NetConfig.parse(BASE)
        self.assertEqual(config.shape, (32, 32, 32))
        self.assertEqual(config.r_span, (-0.6, 0.6))
        self.assertEqual(config.t1_span, (-0.08, 0.08))
        self.assertEqual(config.eps2, -1.0)
        self.assertIsNone(config.tol)
        self.assertIsNone(config.out)

    def test_comments_and_quotes(self):
        config = NetConfig.parse("# flat ambient space\n\nk = 0.5\na1 = -0.25\na2 = 2\neps = \"1\"\nNr = 12\ntol = 1e-4\n")
        self.assertEqual(config.k, 0.5)
        self.assertEqual(config.a1, -0.25)
        self.assertEqual(config.eps, '1')
        self.assertEqual(config.eps2, 1.0)
        self.assertEqual(config.Nr, 12)
        self.assertEqual(config.tol, 1e-4)

    def test_rejected_configurations(self):
        cases = {
            'unknown key': BASE + "colour = blue\n",
            'missing key': "k = 0\na1 = 0\neps = i\n",
            'bad number': "k = 0\na1 = 0\na2 = one\neps = i\n",
            'bad integer': BASE + "N1 = many\n",
            'too few nodes': BASE + "N1 = 7\n",
            'bad eps': "k = 0\na1 = 0\na2 = 1\neps = 2\n",
            'non-positive a2': "k = 0\na1 = 0\na2 = -1\neps = i\n",
            'empty range': BASE + "r_min = 0.5\nr_max = 0.5\n",
            'negative tolerance': BASE + "tol = -1\n",
            'not a pair': BASE + "just words\n",
        }
        for name, text in cases.items():
            with self.subTest(name):
                with self.assertRaises(ConfigError):
                    NetConfig.parse(text)

    def test_load(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'net.cfg'
            path.write_text(BASE + "out = results\n")
            self.assertEqual(NetConfig.load(path).out, 'results')
            with self.assertRaises(ConfigError):
                NetConfig.load(Path(tmp) / 'missing.cfg')
