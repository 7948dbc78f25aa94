from pathlib import Path
import tempfile

import numpy as np
from django.test import SimpleTestCase
from numpy.testing import assert_allclose

from nets.errors import ConfigError
from nets.export import (
    NET_FILE,
    export_slices,
    load_net,
    read_report,
    read_scalar_csv,
    save_net,
    write_obj,
    write_report,
    write_scalar_csv,
)
from nets.samples import cartesian_net


class ExportTestCase(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.root = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()


class NetFileTests(ExportTestCase):
    def test_save_and_load(self):
        net = cartesian_net((6, 7, 8))
        save_net(net, self.root / NET_FILE)
        loaded = load_net(self.root)
        self.assertEqual(loaded.shape, (6, 7, 8))
        self.assertEqual(loaded.k, 0.0)
        self.assertIsNone(loaded.eps2)
        assert_allclose(loaded.spacing, net.spacing)
        assert_allclose(loaded.tangents, net.tangents)

    def test_unreadable_files(self):
        with self.assertRaises(ConfigError):
            load_net(self.root / 'missing.npz')
        (self.root / 'garbage.npz').write_bytes(b'not an archive')
        with self.assertRaises(ConfigError):
            load_net(self.root / 'garbage.npz')
        np.savez(self.root / 'partial.npz', f=cartesian_net((6, 6, 6)).f)
        with self.assertRaises(ConfigError):
            load_net(self.root / 'partial.npz')


class MeshTests(ExportTestCase):
    def test_quad_mesh(self):
        vertices = np.zeros((3, 4, 3))
        path = self.root / 'mesh.obj'
        write_obj(path, vertices, name='patch')
        lines = path.read_text().splitlines()
        self.assertEqual(lines[0], 'o patch')
        self.assertEqual(sum(1 for line in lines if line.startswith('v ')), 12)
        faces = [line for line in lines if line.startswith('f ')]
        self.assertEqual(len(faces), 6)
        self.assertEqual(faces[0], 'f 1 5 6 2')

    def test_flat_slices(self):
        net = cartesian_net((5, 5, 6))
        written = export_slices(net, self.root / 'slices')
        self.assertEqual(len(written), 6)
        vertex_lines = [line for line in written[-1].read_text().splitlines() if line.startswith('v ')]
        coords = np.array([[float(c) for c in line.split()[1:]] for line in vertex_lines])
        assert_allclose(coords[:, 2], 1.0, atol=1e-12)


class TableTests(ExportTestCase):
    def test_scalar_csv(self):
        values = np.arange(24, dtype=float).reshape(2, 3, 4) / 7.0
        path = self.root / 'field.csv'
        write_scalar_csv(path, values)
        self.assertEqual(path.read_text().splitlines()[0].strip(), 'i,j,k,value')
        assert_allclose(read_scalar_csv(path, values.shape), values)

    def test_reports(self):
        path = self.root / 'report.json'
        write_report(path, {'passed': True, 'checks': {}})
        self.assertEqual(read_report(path)['passed'], True)
        path.write_text('{broken')
        with self.assertRaises(ConfigError):
            read_report(path)
