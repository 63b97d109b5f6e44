"""
On-disk formats: dataset directories, estimation outputs and result tables.
Every table is a comma separated file with one header row; floats are written
with 17 significant digits so files reproduce exactly and read back losslessly.
See docs/FORMATS.md.
"""
import os

import numpy as np
from configobj import ConfigObj

from network import enumerate_routes, load_network, save_network
from od_errors import ConfigError
from simulator import SimulationConfig, SyntheticDataset
from utils.singal_guard import atomic_write

MANIFEST = "manifest.ini"
NETWORK = "network.ini"


def format_value(value):
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return "%.17g" % value
    if value is None:
        return ""
    return str(value)


def write_table(path, header, rows):
    lines = [",".join(header)] + [",".join(format_value(v) for v in row) for row in rows]

    def writer(f):
        np.savetxt(f, np.array(lines, dtype=str), fmt="%s")
    atomic_write(path, writer)


def read_table(path):
    """Returns (header, rows as lists of strings)."""
    if not os.path.isfile(path):
        raise ConfigError(f"No such file: {path}")
    with open(path) as f:
        lines = [line.rstrip("\r\n") for line in f if line.strip()]
    if not lines:
        raise ConfigError(f"{path}: empty table")
    header = lines[0].split(",")
    return header, [line.split(",") for line in lines[1:]]


def read_matrix(path):
    """Numeric table as (header, 2-d float array)."""
    header, rows = read_table(path)
    data = np.array([[float(v) for v in row] for row in rows]).reshape(len(rows), len(header))
    return header, data


def write_manifest(path, sections):
    keywords = ConfigObj()
    for key, value in sections.items():
        keywords[key] = value
    lines = keywords.write()
    atomic_write(path, lambda f: f.write("\n".join(lines) + "\n"))


def read_manifest(path):
    if not os.path.isfile(path):
        raise ConfigError(f"No such file: {path}")
    return ConfigObj(path, file_error=True)


def _flat(M):
    return [format_value(v) for v in np.asarray(M, dtype=float).ravel()]


def _square(values):
    v = np.array([float(x) for x in values])
    d = int(round(np.sqrt(v.size)))
    return v.reshape(d, d)


def od_labels(route_set):
    return [f"od_{o}-{d}" for o, d in route_set.od_pairs]


def save_dataset(dataset, network, route_set, directory, seed):
    os.makedirs(directory, exist_ok=True)
    cfg = dataset.config
    n_links = len(network.links)
    T, r = dataset.T, dataset.r
    days = np.arange(1, T + 1)

    save_network(network, os.path.join(directory, NETWORK))
    write_table(os.path.join(directory, "theta.csv"), ["t"] + od_labels(route_set),
                [[t] + list(row) for t, row in zip(days, dataset.theta)])
    write_table(os.path.join(directory, "x.csv"), ["t"] + od_labels(route_set),
                [[t] + list(row) for t, row in zip(days, dataset.x)])
    routes = [f"route_{k + 1}" for k in range(route_set.n_routes)]
    write_table(os.path.join(directory, "y.csv"), ["t"] + routes,
                [[t] + list(row) for t, row in zip(days, dataset.y)])
    write_table(os.path.join(directory, "z.csv"), ["t"] + [str(i) for i in network.link_ids],
                [[t] + list(row) for t, row in zip(days, dataset.z)])
    write_table(os.path.join(directory, "costs.csv"), ["t"] + routes,
                [[t] + list(row) for t, row in zip(range(1 - r, T + 1), dataset.costs)])

    write_manifest(os.path.join(directory, MANIFEST), {
        'KIND': 'dataset',
        'SEED': str(seed),
        'T': str(T),
        'MEMORY': str(r),
        'PI': format_value(cfg.pi),
        'PHI': _flat(cfg.phi),
        'THETA0': _flat(cfg.theta0),
        'BOUNDS': [format_value(b) for b in cfg.bounds],
        'BOUNDS_MODE': cfg.bounds_mode,
        'W': _flat(cfg.W),
        'SIGMA_X': _flat(cfg.sigma_x),
        'SIGMA_Z': _flat(cfg.sigma_z_for(n_links)),
        'NETWORK_FILE': NETWORK,
        'ROUTES': [" ".join(str(i) for i in route) for route in route_set.all_routes()],
        'CLAMPS': {k.upper(): str(v) for k, v in dataset.clamps.items()},
    })


def read_optional_series(path):
    """Value columns of a day-indexed table, or None when the file does not exist."""
    if not os.path.isfile(path):
        return None
    return read_matrix(path)[1][:, 1:]


def _simulation_config(manifest, route_set, T):
    """The generating configuration recorded by `simulate`, or None for bare observations."""
    if 'PHI' not in manifest:
        return None
    try:
        return SimulationConfig(n_pairs=route_set.n_pairs,
                                theta0=[float(v) for v in manifest['THETA0']],
                                W=_square(manifest['W']),
                                sigma_x=_square(manifest['SIGMA_X']),
                                sigma_z=_square(manifest['SIGMA_Z']),
                                phi=[float(v) for v in manifest['PHI']],
                                pi=float(manifest['PI']),
                                T=T,
                                bounds=tuple(float(b) for b in manifest['BOUNDS']),
                                bounds_mode=manifest['BOUNDS_MODE'],
                                seed=int(manifest['SEED']))
    except KeyError as e:
        raise ConfigError(f"{manifest.filename}: missing key {e}") from e


def load_dataset(directory, network=None, r=None):
    """
    Returns (dataset, network, route_set, manifest).

    A simulated dataset carries its manifest, network file and the true series.
    A bare observation directory needs only z.csv and costs.csv; its network and
    memory length r come from the arguments unless a manifest or network.ini is present.
    The manifest returned for such a directory is empty.
    """
    manifest_path = os.path.join(directory, MANIFEST)
    manifest = read_manifest(manifest_path) if os.path.isfile(manifest_path) else ConfigObj()
    if manifest and manifest.get('KIND') != 'dataset':
        raise ConfigError(f"{directory} is not a dataset directory")
    network_path = os.path.join(directory, manifest.get('NETWORK_FILE', NETWORK))
    if os.path.isfile(network_path) or manifest:
        network = load_network(network_path)
    elif network is None:
        raise ConfigError(f"{directory}: no network file and no network given")
    route_set = enumerate_routes(network)
    try:
        r = int(manifest['MEMORY']) if manifest else int(r)
    except KeyError as e:
        raise ConfigError(f"{manifest_path}: missing key {e}") from e
    except (TypeError, ValueError) as e:
        raise ConfigError(f"{directory}: the memory length r is unknown") from e
    if r < 1:
        raise ConfigError(f"{directory}: the memory length r must be at least 1")

    z = read_link_counts(os.path.join(directory, "z.csv"), network)
    T = z.shape[0]
    costs_path = os.path.join(directory, "costs.csv")
    _, costs = read_matrix(costs_path)
    if costs.shape[0] == 0 or int(costs[0, 0]) > 1 - r:
        raise ConfigError(f"{costs_path}: route costs must start at day {1 - r} "
                          f"to cover the {r}-day pre-sample window")
    if costs.shape[1] - 1 != route_set.n_routes:
        raise ConfigError(f"{costs_path}: expected {route_set.n_routes} route columns, got {costs.shape[1] - 1}")
    if int(costs[-1, 0]) < T - 1:
        raise ConfigError(f"{costs_path}: route costs end at day {int(costs[-1, 0])}, need day {T - 1}")

    theta = read_optional_series(os.path.join(directory, "theta.csv"))
    if theta is not None and theta.shape != (T, route_set.n_pairs):
        raise ConfigError(f"{directory}/theta.csv: expected {T} x {route_set.n_pairs} values, got {theta.shape}")
    first = int(costs[0, 0])
    clamps = {k.lower(): int(v) for k, v in manifest.get('CLAMPS', {}).items()}
    dataset = SyntheticDataset(theta,
                               read_optional_series(os.path.join(directory, "x.csv")),
                               read_optional_series(os.path.join(directory, "y.csv")),
                               z, costs[1 - r - first:, 1:], r, clamps,
                               _simulation_config(manifest, route_set, T))
    return dataset, network, route_set, manifest


def read_observations(path, observed_links):
    """Columns of an observation file for the requested link ids, in that order."""
    header, data = read_matrix(path)
    columns = header[1:]
    missing = [i for i in observed_links if str(i) not in columns]
    if missing:
        raise ConfigError(f"{path}: no column for observed link(s) {', '.join(map(str, missing))}")
    return data[:, [columns.index(str(i)) + 1 for i in observed_links]]


def read_link_counts(path, network):
    """
    Link counts in network link order. Links without a column in the file are
    NaN; a column naming no network link is an error.
    """
    header, _ = read_table(path)
    try:
        present = [int(i) for i in header[1:]]
    except ValueError as e:
        raise ConfigError(f"{path}: link columns must be link ids") from e
    unknown = [i for i in present if i not in network.link_ids]
    if unknown:
        raise ConfigError(f"{path}: unknown link id(s) {', '.join(map(str, unknown))}")
    observed = [i for i in network.link_ids if i in present]
    counts = read_observations(path, observed)
    z = np.full((counts.shape[0], len(network.links)), np.nan)
    z[:, [network.link_index(i) for i in observed]] = counts
    return z


def write_trace(path, trace):
    """Kept phi samples with the log posterior and acceptance flag of their iteration."""
    r = trace.phi.shape[1]
    header = ["chain", "iteration"] + [f"phi_{k + 1}" for k in range(r)] + ["log_posterior", "accepted"]
    per_chain = trace.accepted.size//trace.chains
    rows = []
    chain = 0
    previous = 0
    for it, phi in zip(trace.phi_iterations, trace.phi):
        if it <= previous:
            chain += 1
        previous = it
        idx = chain*per_chain + it - 1
        rows.append([chain + 1, int(it)] + list(phi) + [trace.log_posterior[idx], bool(trace.accepted[idx])])
    write_table(path, header, rows)


def read_trace(path):
    """Returns (chain, iteration, phi, log posterior, accepted) columns."""
    header, data = read_matrix(path)
    r = sum(1 for h in header if h.startswith("phi_"))
    return (data[:, 0].astype(int), data[:, 1].astype(int), data[:, 2:2 + r],
            data[:, 2 + r], data[:, 3 + r].astype(bool))


def write_theta_summary(path, route_set, summary, truth=None):
    header = ["t", "origin", "destination", "mean", "hpd_lo", "hpd_hi", "truth"]
    rows = []
    T, n = summary.theta_mean.shape
    for t in range(T):
        for j, (o, d) in enumerate(route_set.od_pairs):
            lo, hi = (None, None) if summary.theta_hpd is None else summary.theta_hpd[t, j]
            rows.append([t + 1, o, d, summary.theta_mean[t, j], lo, hi,
                         None if truth is None else truth[t, j]])
    write_table(path, header, rows)


def read_theta_means(path, route_set):
    header, rows = read_table(path)
    T = len(rows)//route_set.n_pairs
    theta = np.empty((T, route_set.n_pairs))
    for row in rows:
        t = int(row[0])
        j = route_set.pair_of((int(row[1]), int(row[2])))
        theta[t - 1, j] = float(row[3])
    return theta


def summary_header(r):
    header = []
    for k in range(1, r + 1):
        header += [f"phi_{k}_mean", f"phi_{k}_hpd_lo", f"phi_{k}_hpd_hi"]
    return header + ["acceptance_rate", "mse", "samples", "hpd_prob"]


def summary_row(summary):
    row = []
    for mean, (lo, hi) in zip(summary.phi_mean, summary.phi_hpd):
        row += [mean, lo, hi]
    return row + [summary.acceptance_rate, summary.mse, summary.samples, summary.prob]


def write_summary(path, summary):
    write_table(path, summary_header(len(summary.phi_mean)), [summary_row(summary)])
