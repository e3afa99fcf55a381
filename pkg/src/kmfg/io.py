"""Deterministic CSV/JSON emission and ingestion for runs and tests."""

import hashlib
import json

import numpy as np

from .torus import Measure

FLOAT_FMT = "%.12g"


def write_columns_csv(path, header, columns, fmt=FLOAT_FMT):
    """Write equal-length columns as CSV with 12-significant-digit floats."""
    columns = [np.asarray(c) for c in columns]
    n = columns[0].shape[0]
    if any(c.shape != (n,) for c in columns):
        raise ValueError("columns must share a length")
    with open(path, "w") as fh:
        fh.write(",".join(header) + "\n")
        for i in range(n):
            fh.write(",".join(fmt % c[i] for c in columns) + "\n")


def read_columns_csv(path, expected_header=None):
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        if expected_header is not None and header != list(expected_header):
            raise ValueError(f"unexpected header {header!r} in {path}")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    return header, [data[:, j] for j in range(data.shape[1])]


def write_density_csv(path, mu):
    write_columns_csv(path, ["x", "density"], [mu.grid.x, mu.density])


def read_density_csv(path, grid):
    """Load a density CSV and resample it onto ``grid`` (periodic linear)."""
    _, (x, dens) = read_columns_csv(path, ["x", "density"])
    order = np.argsort(x)
    x, dens = x[order], dens[order]
    xs = np.concatenate([x, [x[0] + 2.0 * np.pi]])
    ds = np.concatenate([dens, [dens[0]]])
    vals = np.interp(grid.x, xs, ds, period=2.0 * np.pi)
    return Measure.from_values(grid, vals)


def write_value_csv(path, vf):
    write_columns_csv(path, ["x", "v", "v_x"], [vf.grid.x, vf.v.values, vf.v_x.values])


def write_moments_csv(path, flow):
    write_columns_csv(path, ["t", "a", "b", "d"], [flow.t, flow.a, flow.b, flow.d])


def write_forcing_csv(path, forcing):
    write_columns_csv(path, ["t", "gamma", "eta"], [forcing.t, forcing.gamma, forcing.eta])


def read_forcing_csv(path):
    from .evolution import Forcing

    _, (t, g, e) = read_columns_csv(path, ["t", "gamma", "eta"])
    return Forcing(t, g, e)


def write_flow_csv(path, flow, max_slices=200):
    """Long-format t,x,density export, thinned to at most max_slices slices."""
    m = flow.t.size
    stride = max(1, int(np.ceil(m / max_slices)))
    idx = np.arange(0, m, stride)
    if idx[-1] != m - 1:
        idx = np.append(idx, m - 1)
    n = flow.grid.n
    t_col = np.repeat(flow.t[idx], n)
    x_col = np.tile(flow.grid.x, idx.size)
    d_col = flow.densities[idx].reshape(-1)
    write_columns_csv(path, ["t", "x", "density"], [t_col, x_col, d_col])


def write_bifurcation_csv(path, points):
    kappas = np.array([pt.kappa for pt in points])
    stars = np.array([pt.gamma_star for pt in points])
    orders = np.array([max(pt.order_parameters) for pt in points])
    write_columns_csv(path, ["kappa", "gamma_star", "order_parameter"], [kappas, stars, orders])


def write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


def sha256_file(path):
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(65536), b""):
            digest.update(block)
    return digest.hexdigest()
