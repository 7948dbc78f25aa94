"""
Readers and writers for nets and their artifacts.

net.npz holds the sampled map; per r-slice meshes go to OBJ, Lamé fields
to CSV (tablib) and run reports to JSON.
"""
import json
import logging
from pathlib import Path
import zipfile

import numpy as np
import tablib

from .errors import ConfigError, InfinityBoundaryError, NetsError
from .spaceform import project_points
from .triorth import NetGrid

logger = logging.getLogger(__name__)

NET_FILE = 'net.npz'
REPORT_FILE = 'report.json'


def save_net(net, path):
    """
    Write a NetGrid to an .npz archive; ungauged nets store k = NaN.
    """
    arrays = {
        'f': net.f,
        'spacing': np.asarray(net.spacing),
        'origin': np.asarray(net.origin),
        'k': np.asarray(np.nan if net.k is None else net.k),
        'eps2': np.asarray(np.nan if net.eps2 is None else net.eps2),
    }
    for name in ('tangents', 'normals', 't'):
        value = getattr(net, name)
        if value is not None:
            arrays[name] = value
    np.savez_compressed(path, **arrays)
    logger.info(f"Saved net {net.shape} to {path}")


def load_net(path):
    """
    Read a NetGrid written by save_net.

    Raises:
        ConfigError: missing, truncated or inconsistent file
    """
    path = Path(path)
    if path.is_dir():
        path = path / NET_FILE
    try:
        with np.load(path, allow_pickle=False) as data:
            fields = {name: data[name] for name in data.files}
    except (OSError, ValueError, EOFError, zipfile.BadZipFile) as e:
        raise ConfigError(f"Cannot read net file {path}: {str(e)}")
    try:
        k = float(fields['k'])
        eps2 = float(fields.get('eps2', np.nan))
        return NetGrid(
            f=fields['f'],
            spacing=tuple(fields['spacing']),
            origin=tuple(fields.get('origin', (0.0, 0.0, 0.0))),
            tangents=fields.get('tangents'),
            k=None if np.isnan(k) else k,
            eps2=None if np.isnan(eps2) else eps2,
            normals=fields.get('normals'),
            t=fields.get('t'),
        )
    except KeyError as e:
        raise ConfigError(f"Net file {path} lacks array {str(e)}")
    except NetsError as e:
        raise ConfigError(f"Net file {path} is invalid: {str(e)}")


def slice_vertices(points, model_k):
    """
    Euclidean coordinates of light-cone points in the model of curvature model_k.

    For model_k = 0 these are the flat coordinates; otherwise the first n
    coordinates of the normalized points (a sphere or hyperboloid in R^{n+1}).
    """
    projected = project_points(points, model_k)
    n = points.shape[-1] - 2
    return projected[..., :n] if model_k == 0 else projected[..., :n + 1]


def write_obj(path, vertices, name='slice'):
    """Quad mesh from an (N1, N2, d) vertex grid; d = 3 or the first three coordinates."""
    n1, n2 = vertices.shape[:2]
    lines = [f"o {name}"]
    for v in vertices.reshape(-1, vertices.shape[-1]):
        lines.append('v ' + ' '.join(f"{c:.12g}" for c in v[:3]))
    for i in range(n1 - 1):
        for j in range(n2 - 1):
            a = i * n2 + j + 1
            lines.append(f"f {a} {a + n2} {a + n2 + 1} {a + 1}")
    Path(path).write_text('\n'.join(lines) + '\n')


def export_slices(net, out_dir, model_k=None, prefix='slice'):
    """
    One OBJ per r-slice, projected into the model of curvature model_k (default: the net's k).

    Returns:
        list: written paths
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if model_k is None:
        model_k = net.k if net.gauged else 0.0
    written = []
    for j in range(net.shape[2]):
        try:
            vertices = slice_vertices(net.f[:, :, j], model_k)
        except InfinityBoundaryError as e:
            logger.warning(f"Slice {j} not exported in the model k={model_k}: {str(e)}")
            continue
        path = out_dir / f"{prefix}_{j:03d}.obj"
        write_obj(path, vertices, name=f"{prefix}_{j:03d}")
        written.append(path)
    logger.info(f"Wrote {len(written)} slice meshes to {out_dir}")
    return written


def scalar_dataset(values):
    """(i, j, k, value) rows of a 3D scalar field."""
    dataset = tablib.Dataset(headers=['i', 'j', 'k', 'value'])
    for index in np.ndindex(values.shape):
        dataset.append([*index, float(values[index])])
    return dataset


def write_scalar_csv(path, values):
    Path(path).write_text(scalar_dataset(values).export('csv'))


def read_scalar_csv(path, shape):
    dataset = tablib.Dataset().load(Path(path).read_text(), format='csv')
    values = np.empty(shape)
    for row in dataset:
        i, j, k = (int(x) for x in row[:3])
        values[i, j, k] = float(row[3])
    return values


def export_lame(ld, out_dir):
    """lame_l1.csv .. lame_l3.csv."""
    out_dir = Path(out_dir)
    paths = []
    for a in range(3):
        path = out_dir / f"lame_l{a + 1}.csv"
        write_scalar_csv(path, ld.l[a])
        paths.append(path)
    return paths


def write_report(path, report):
    Path(path).write_text(json.dumps(report, indent=2, sort_keys=True))


def read_report(path):
    try:
        return json.loads(Path(path).read_text())
    except (OSError, ValueError) as e:
        raise ConfigError(f"Cannot read report {path}: {str(e)}")
