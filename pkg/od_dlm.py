"""
Job layer of the OD demand estimator: reads a control file, validates its
keywords and runs a simulation, an estimation, an experiment grid or a
summary. See docs/FORMATS.md for the keyword reference.
"""
from dataclasses import dataclass, replace
import logging
import logging.config
import multiprocessing as mp
import os

import numpy as np
from configobj import ConfigObj, ConfigObjError

from dlm_filter import Evolution, ModelParams
from gibbs_sampling import hpd_interval
from network import (canonical_network, congestion_levels, enumerate_routes, incidence_matrix, load_network,
                     save_network)
from od_errors import ConfigError, NumericalError
import od_io
from route_choice import DEFAULT_PI, LEVEL_FLOOR
from sampler import (EstimationProblem, McmcConfig, PosteriorSummary, Trace, gibbs_run, mse,
                     posterior_summary)
from simulator import SimulationConfig, generate, replay_costs
from stochastics import RngStream
from utils.timer import Timer

__version__ = '1.0.0'

EXPERIMENT_KINDS = ('full-observation', 'discount-grid', 'partial-links')
DEFAULT_LINK_SETS = ('1', '2', '9', '2 5', '1 9', '2 5 9', '1 7 9')
DEFAULT_DISCOUNTS = (0.7, 0.8, 0.9)
SIMULATION_STREAM = 0

logger = logging.getLogger("od_dlm")


def setup_logging():
    logging.config.fileConfig(os.path.join(os.path.dirname(os.path.abspath(__file__)), "utils", "logging.conf"),
                              disable_existing_loggers=False)


def _values(value):
    items = value if isinstance(value, (list, tuple)) else str(value).split(',')
    return [str(v).strip() for v in items if str(v).strip() != '']


def _floats(value):
    return [float(v) for v in _values(value)]


def _ints(value):
    return [int(v) for v in _values(value)]


def _yes(value):
    return str(value).strip().lower() in ('yes', 'true', '1')


def _vector(value, n):
    v = np.array(_floats(value))
    if v.size == 1:
        return np.full(n, v[0])
    if v.size != n:
        raise ValueError(f"expected 1 or {n} values, got {v.size}")
    return v


def _matrix(value, n):
    """A scalar s means s*I, n values a diagonal, n*n values a full row-major matrix."""
    v = np.array(_floats(value))
    if v.size == 1:
        return v[0]*np.eye(n)
    if v.size == n:
        return np.diag(v)
    if v.size == n*n:
        return v.reshape(n, n)
    raise ValueError(f"expected 1, {n} or {n*n} values, got {v.size}")


@dataclass(frozen=True)
class Cell:
    """One scenario of an experiment grid: an observed link set and an evolution."""
    label: str
    observed_links: tuple
    discount: float = None

    def evolution(self, W):
        if self.discount is not None:
            return Evolution(discount=self.discount)
        return Evolution(W=W)


@dataclass
class ModelSettings:
    """[MODEL] keywords; None falls back to the dataset's known quantities."""
    m0: np.ndarray
    C0: np.ndarray
    sigma_x: np.ndarray = None
    sigma_z: np.ndarray = None
    W: np.ndarray = None
    pi: float = None
    level_floor: float = LEVEL_FLOOR


@dataclass
class CellResult:
    cell: Cell
    seed: int
    trace: Trace = None
    summary: PosteriorSummary = None
    error: str = None
    duration: float = 0.0
    evolution: str = None


def estimation_problem(dataset, network, route_set, cell, settings):
    """
    Model quantities not set in [MODEL] fall back to the dataset's generating
    configuration, or for bare observations to I, I and DEFAULT_PI for sigma_x,
    sigma_z and pi. W has no fallback there: a known-W cell needs [MODEL] W.
    """
    sim = dataset.config
    n, n_links = route_set.n_pairs, len(network.links)
    incidence = incidence_matrix(route_set, network, cell.observed_links)
    rows = incidence.observed_rows
    z = dataset.z[:, rows]
    missing = [i for i, col in zip(incidence.observed_links, z.T) if np.any(np.isnan(col))]
    if missing:
        raise ValueError(f"no counts for observed link(s) {', '.join(map(str, missing))}")

    def known(value, name, default):
        if value is not None:
            return value
        return default if sim is None else getattr(sim, name)

    W = known(settings.W, 'W', None)
    if W is None and cell.discount is None:
        raise ValueError("the evolution covariance is unknown: set W or DISCOUNT in [MODEL]")
    sigma_z = settings.sigma_z
    if sigma_z is None:
        sigma_z = np.eye(n_links) if sim is None else sim.sigma_z_for(n_links)
    params = ModelParams(sigma_x=known(settings.sigma_x, 'sigma_x', np.eye(n)),
                         sigma_z=sigma_z[np.ix_(rows, rows)],
                         evolution=cell.evolution(W),
                         m0=settings.m0,
                         C0=settings.C0,
                         pi=known(settings.pi, 'pi', DEFAULT_PI),
                         r=dataset.r,
                         observed_links=incidence.observed_links,
                         level_floor=settings.level_floor)
    return EstimationProblem(z, replay_costs(dataset), params, route_set, incidence)


def run_chains(problem, mcmc, chains=1):
    """Independent chains on RNG streams mcmc.stream, mcmc.stream + 1, ..."""
    traces = []
    for c in range(chains):
        with Timer(logger.info, f"chain {c + 1}/{chains}"):
            traces.append(gibbs_run(replace(mcmc, stream=mcmc.stream + c), problem))
    return traces[0] if chains == 1 else Trace.merge(traces)


def _run_cell(task):
    cell, seed, dataset, network, route_set, settings, mcmc, chains, prob = task
    result = CellResult(cell, seed)
    with Timer(logger.info, f"cell {cell.label} seed {seed}") as elapsed:
        try:
            problem = estimation_problem(dataset, network, route_set, cell, settings)
            result.evolution = str(problem.params.evolution)
            result.trace = run_chains(problem, replace(mcmc, seed=seed), chains)
            result.summary = posterior_summary(result.trace, dataset.theta, prob)
        except (ConfigError, NumericalError, ValueError) as e:
            logger.error("cell %s seed %d failed: %s", cell.label, seed, e)
            result.error = str(e)
    result.duration = elapsed.duration
    return result


class od_job(object):
    """
    Base class of the jobs: reads and checks the control file keywords.
    `options` carries the command line overrides (out, seed, threads, dataset, prob).
    """
    kind = None

    def __init__(self, command_file=None, options=None):
        self._setLogger()
        self.options = {k: v for k, v in (options or {}).items() if v is not None}
        self.command_file = command_file
        if command_file is not None and not os.path.exists(command_file):
            self._exit('No such file: %s' % command_file)
        try:
            self.keywords = ConfigObj(command_file) if command_file is not None else ConfigObj()
        except ConfigObjError as e:
            self._exit('Unable to parse %s: %s' % (command_file, e))
        if command_file is not None:
            self.jobname = os.path.splitext(os.path.basename(command_file))[0]
        else:
            self.jobname = self.kind

        self._checkInput()
        self._printStatus()

    def _setLogger(self):
        self.logger = logging.getLogger("od_dlm")

    def _exit(self, message):
        """Log a configuration problem and abort the job."""
        self.logger.error(message)
        raise ConfigError(message)

    def getVersion(self):
        return __version__

    def _printStatus(self):
        self.logger.info("od_dlm %s, Version %s", self.kind, self.getVersion())
        self.logger.info("command_file = %s", self.command_file)
        self.logger.info("jobname = %s", self.jobname)
        self.logger.info("Keywords:")
        for k, v in self.keywords.items():
            self.logger.info("%s: %s", k, v)
        for k, v in self.options.items():
            self.logger.info("option %s: %s", k, v)

    def _section(self, name):
        section = self.keywords.get(name, {})
        if not isinstance(section, dict):
            self._exit('%s must be a section' % name)
        return section

    def _get(self, section, key, convert, default):
        value = section.get(key)
        if value is None or value == '' or value == []:
            return default
        try:
            return convert(value)
        except (TypeError, ValueError) as e:
            self._exit('invalid value for %s: %s (%s)' % (key, value, e))

    def _checkInput(self):
        if _yes(self.keywords.get('VERBOSE', 'no')):
            self.verbose = True
            self.logger.setLevel(logging.DEBUG)
        else:
            self.verbose = False

        self.seed = self.options.get('seed', self._get(self.keywords, 'SEED', int, 0))
        if self.seed < 0:
            self._exit('SEED must be a non-negative integer')

        self.out = self.options.get('out')

    def _requireOut(self):
        if self.out is None:
            self._exit('an output directory (--out) needs to be specified')

    def _loadNetwork(self):
        filename = self._section('NETWORK').get('NETWORK_FILE')
        if not filename:
            return canonical_network()
        if not os.path.isabs(filename) and self.command_file is not None:
            filename = os.path.join(os.path.dirname(os.path.abspath(self.command_file)), filename)
        try:
            network = load_network(filename)
            return network, enumerate_routes(network)
        except (ConfigError, OSError, ValueError) as e:
            self._exit('Unable to load network %s: %s' % (filename, e))

    def _simulationConfig(self, route_set, n_links, seed):
        s = self._section('SIMULATION')
        n = route_set.n_pairs
        bounds = self._get(s, 'BOUNDS', _floats, [10.0, 100.0])
        if len(bounds) != 2:
            self._exit('BOUNDS needs two values (lo, hi)')
        try:
            return SimulationConfig(n_pairs=n,
                                    theta0=self._get(s, 'THETA0', lambda v: _vector(v, n), None),
                                    W=self._get(s, 'W', lambda v: _matrix(v, n), None),
                                    sigma_x=self._get(s, 'SIGMA_X', lambda v: _matrix(v, n), None),
                                    sigma_z=self._get(s, 'SIGMA_Z', lambda v: _matrix(v, n_links), None),
                                    phi=self._get(s, 'PHI', _floats, None),
                                    pi=self._get(s, 'PI', float, DEFAULT_PI),
                                    T=self._get(s, 'T', int, 100),
                                    bounds=tuple(bounds),
                                    bounds_mode=s.get('BOUNDS_MODE', 'clamp'),
                                    seed=seed)
        except ValueError as e:
            self._exit('[SIMULATION] %s' % e)

    def _modelSettings(self, n, n_links):
        md = self._section('MODEL')
        settings = ModelSettings(m0=self._get(md, 'M0', lambda v: _vector(v, n), np.full(n, 100.0)),
                                 C0=self._get(md, 'C0', lambda v: _matrix(v, n), 1000.0*np.eye(n)),
                                 sigma_x=self._get(md, 'SIGMA_X', lambda v: _matrix(v, n), None),
                                 sigma_z=self._get(md, 'SIGMA_Z', lambda v: _matrix(v, n_links), None),
                                 W=self._get(md, 'W', lambda v: _matrix(v, n), None),
                                 pi=self._get(md, 'PI', float, None),
                                 level_floor=self._get(md, 'LEVEL_FLOOR', float, LEVEL_FLOOR))
        if settings.level_floor < 0.0:
            self._exit('LEVEL_FLOOR must be non-negative')
        return settings

    def _mcmcConfig(self, r, seed):
        m = self._section('MCMC')
        try:
            mcmc = McmcConfig(iterations=self._get(m, 'ITERATIONS', int, 10000),
                              burn_in=self._get(m, 'BURN_IN', int, 2000),
                              proposal_cov=self._get(m, 'PROPOSAL_COV', lambda v: _matrix(v, r), 0.04*np.eye(r)),
                              phi0=self._get(m, 'PHI0', lambda v: _vector(v, r), np.ones(r)),
                              theta0_mean=self._get(m, 'THETA0_MEAN', float, 100.0),
                              theta0_var=self._get(m, 'THETA0_VAR', float, 100.0),
                              seed=seed,
                              stream=1,
                              thin=self._get(m, 'THIN', int, 1),
                              theta_thin=self._get(m, 'THETA_THIN', int, 10),
                              phi_prior=m.get('PHI_PRIOR', 'flat'),
                              report_every=self._get(m, 'REPORT_EVERY', int, 1000))
        except ValueError as e:
            self._exit('[MCMC] %s' % e)
        chains = self._get(m, 'CHAINS', int, 1)
        if chains < 1:
            self._exit('CHAINS must be at least 1')
        prob = self.options.get('prob', self._get(m, 'HPD_PROB', float, 0.95))
        if not 0.0 < prob < 1.0:
            self._exit('HPD_PROB must lie in (0, 1)')
        return mcmc, chains, prob

    def run(self):
        raise NotImplementedError


class od_job_simulate(od_job):
    """Generates one synthetic dataset directory."""
    kind = 'simulate'

    def _checkInput(self):
        od_job._checkInput(self)
        self._requireOut()
        self.network, self.route_set = self._loadNetwork()
        self.config = self._simulationConfig(self.route_set, len(self.network.links), self.seed)

    def run(self):
        rng = RngStream(self.seed, SIMULATION_STREAM).generator()
        with Timer(self.logger.info, "simulation of %d days" % self.config.T):
            dataset = generate(self.config, self.network, self.route_set, rng)
        od_io.save_dataset(dataset, self.network, self.route_set, self.out, self.seed)
        self.logger.info("dataset written to %s", self.out)
        return dataset


class od_job_estimate(od_job):
    """Runs the Gibbs sampler on a dataset directory."""
    kind = 'estimate'

    def _checkInput(self):
        od_job._checkInput(self)
        self._requireOut()
        md = self._section('MODEL')
        self.dataset_dir = self.options.get('dataset', md.get('DATASET'))
        if not self.dataset_dir:
            self._exit('a dataset directory (--dataset) needs to be specified')
        # used only by observation directories without a manifest or network file
        network, _ = self._loadNetwork()
        memory = self._get(md, 'MEMORY', int, 2)
        self.dataset, self.network, self.route_set, _ = od_io.load_dataset(self.dataset_dir, network, memory)
        n_links = len(self.network.links)
        self.settings = self._modelSettings(self.route_set.n_pairs, n_links)

        observed = self._get(md, 'OBSERVED_LINKS', _ints, list(self.network.link_ids))
        discount = self._get(md, 'DISCOUNT', float, None)
        if discount is not None and self.settings.W is not None:
            self._exit('specify either DISCOUNT or W in [MODEL], not both')
        self.cell = Cell('estimate', tuple(observed), discount)
        self.mcmc, self.chains, self.prob = self._mcmcConfig(self.dataset.r, self.seed)
        try:
            self.problem = estimation_problem(self.dataset, self.network, self.route_set, self.cell, self.settings)
        except ValueError as e:
            self._exit('[MODEL] %s' % e)

    def run(self):
        with Timer(self.logger.info, "estimation") as elapsed:
            trace = run_chains(self.problem, self.mcmc, self.chains)
        summary = posterior_summary(trace, self.dataset.theta, self.prob)
        self.logger.info("phi mean %s, acceptance rate %.3f, MSE %s",
                         np.array2string(summary.phi_mean, precision=4), summary.acceptance_rate,
                         "n/a" if summary.mse is None else "%.4f" % summary.mse)

        write_estimate(self.out, trace, summary, self.dataset, self.network, self.route_set, {
            'DATASET': os.path.abspath(self.dataset_dir),
            'SEED': str(self.seed),
            'CHAINS': str(self.chains),
            'OBSERVED_LINKS': [str(i) for i in self.cell.observed_links],
            'EVOLUTION': str(self.problem.params.evolution),
            'KEYWORDS': self.keywords.dict(),
        })
        self.logger.info("estimation took %.1f s, results in %s", elapsed.duration, self.out)
        return trace, summary


def write_estimate(directory, trace, summary, dataset, network, route_set, fields):
    """Writes an estimation directory that summarize can read back on its own."""
    os.makedirs(directory, exist_ok=True)
    od_io.write_trace(os.path.join(directory, "trace.csv"), trace)
    od_io.write_theta_summary(os.path.join(directory, "theta_summary.csv"), route_set, summary, dataset.theta)
    od_io.write_summary(os.path.join(directory, "summary.csv"), summary)
    save_network(network, os.path.join(directory, od_io.NETWORK))
    od_io.write_manifest(os.path.join(directory, od_io.MANIFEST), {
        'KIND': 'estimate',
        'VERSION': __version__,
        'NETWORK_FILE': od_io.NETWORK,
        'MEMORY': str(dataset.r),
        **fields,
        'HPD_PROB': od_io.format_value(summary.prob),
        'ACCEPTANCE_RATE': od_io.format_value(summary.acceptance_rate),
    })


class od_job_experiment(od_job):
    """
    Runs an experiment grid: one simulated dataset per seed, one estimation per
    (scenario cell, seed). Cells run in a process pool when --threads > 1; all
    files are written by the parent.
    """
    kind = 'experiment'

    def _checkInput(self):
        od_job._checkInput(self)
        self._requireOut()
        e = self._section('EXPERIMENT')
        self.experiment_kind = e.get('KIND', 'full-observation')
        if self.experiment_kind not in EXPERIMENT_KINDS:
            self._exit('unknown experiment KIND %s, expected one of %s'
                       % (self.experiment_kind, ', '.join(EXPERIMENT_KINDS)))
        if 'SEEDS' in e:
            self.seeds = self._get(e, 'SEEDS', _ints, [])
        else:
            replications = self._get(e, 'REPLICATIONS', int, 10)
            self.seeds = list(range(self.seed, self.seed + replications))
        if not self.seeds:
            self._exit('the experiment needs a non-empty seed list')
        if len(set(self.seeds)) != len(self.seeds) or min(self.seeds) < 0:
            self._exit('experiment seeds must be distinct non-negative integers')

        self.threads = self.options.get('threads', 1)
        if self.threads < 1:
            self._exit('--threads must be at least 1')

        self.network, self.route_set = self._loadNetwork()
        n_links = len(self.network.links)
        self.sim_config = self._simulationConfig(self.route_set, n_links, self.seed)
        self.settings = self._modelSettings(self.route_set.n_pairs, n_links)
        self.mcmc, self.chains, self.prob = self._mcmcConfig(self.sim_config.r, self.seed)
        self.cells = self._cells(e)

    def _cells(self, e):
        all_links = tuple(self.network.link_ids)
        if self.experiment_kind == 'full-observation':
            return [Cell('all', all_links)]
        if self.experiment_kind == 'discount-grid':
            discounts = self._get(e, 'DISCOUNTS', _floats, list(DEFAULT_DISCOUNTS))
            for d in discounts:
                if not 0.0 < d <= 1.0:
                    self._exit('discount factors must lie in (0, 1], got %g' % d)
            cells = [Cell('discount_%g' % d, all_links, d) for d in discounts]
            if _yes(e.get('KNOWN_W', 'no')):
                cells.append(Cell('known_W', all_links))
            return cells
        link_sets = self._get(e, 'LINK_SETS', _values, list(DEFAULT_LINK_SETS))
        cells = []
        for link_set in link_sets:
            try:
                links = tuple(int(i) for i in str(link_set).split())
            except ValueError:
                self._exit('invalid link set "%s"' % link_set)
            if not links or any(i not in all_links for i in links):
                self._exit('link set "%s" must be a non-empty subset of the link ids' % link_set)
            cells.append(Cell('links_' + '_'.join(str(i) for i in links), links))
        if _yes(e.get('INCLUDE_FULL', 'no')):
            cells.append(Cell('all', all_links))
        return cells

    def run(self):
        datasets = {}
        for seed in self.seeds:
            config = replace(self.sim_config, seed=seed)
            datasets[seed] = generate(config, self.network, self.route_set, RngStream(seed, SIMULATION_STREAM).generator())
            od_io.save_dataset(datasets[seed], self.network, self.route_set,
                               os.path.join(self.out, "datasets", "seed_%d" % seed), seed)

        tasks = [(cell, seed, datasets[seed], self.network, self.route_set, self.settings, self.mcmc,
                  self.chains, self.prob) for cell in self.cells for seed in self.seeds]
        self.logger.info("running %d cells x %d seeds on %d worker(s)", len(self.cells), len(self.seeds), self.threads)
        if self.threads > 1:
            with mp.get_context('spawn').Pool(self.threads, initializer=setup_logging) as pool:
                results = pool.map(_run_cell, tasks, chunksize=1)
        else:
            results = [_run_cell(task) for task in tasks]

        for result in results:
            directory = os.path.join(self.out, "cells", result.cell.label, "seed_%d" % result.seed)
            if result.error is None:
                write_estimate(directory, result.trace, result.summary, datasets[result.seed], self.network,
                               self.route_set, {
                                   'DATASET': os.path.abspath(os.path.join(self.out, "datasets", "seed_%d" % result.seed)),
                                   'SEED': str(result.seed),
                                   'CHAINS': str(self.chains),
                                   'OBSERVED_LINKS': [str(i) for i in result.cell.observed_links],
                                   'EVOLUTION': result.evolution,
                                   'KEYWORDS': self.keywords.dict(),
                               })
        write_results(os.path.join(self.out, "results.csv"), results, self.cells, self.sim_config.r)
        od_io.write_table(os.path.join(self.out, "timings.csv"), ["cell", "seed", "seconds"],
                          [[res.cell.label, res.seed, res.duration] for res in results])
        od_io.write_manifest(os.path.join(self.out, od_io.MANIFEST), {
            'KIND': 'experiment',
            'VERSION': __version__,
            'EXPERIMENT': self.experiment_kind,
            'SEEDS': [str(s) for s in self.seeds],
            'CELLS': [c.label for c in self.cells],
            'KEYWORDS': self.keywords.dict(),
        })
        failed = sum(1 for res in results if res.error is not None)
        if failed:
            self.logger.warning("%d of %d cells failed, see results.csv", failed, len(results))
        return results


def write_results(path, results, cells, r):
    """One row per (cell, seed) followed by one row of across-seed medians per cell."""
    header = ["cell", "observed_links", "evolution", "seed", "status"] + od_io.summary_header(r) + ["message"]
    width = len(od_io.summary_header(r))
    rows = []
    for cell in cells:
        links = " ".join(str(i) for i in cell.observed_links)
        evolution = "known W" if cell.discount is None else "discount %g" % cell.discount
        values = []
        for res in results:
            if res.cell != cell:
                continue
            if res.error is None:
                row = od_io.summary_row(res.summary)
                values.append(row)
                rows.append([cell.label, links, evolution, res.seed, "ok"] + row + [None])
            else:
                message = " ".join(res.error.replace(",", ";").split())
                rows.append([cell.label, links, evolution, res.seed, "failed"] + [None]*width + [message])
        if values:
            medians = list(np.median(np.array(values, dtype=float), axis=0))
        else:
            medians = [None]*width
        total = sum(1 for res in results if res.cell == cell)
        rows.append([cell.label, links, evolution, "median", "%d/%d ok" % (len(values), total)] + medians + [None])
    od_io.write_table(path, header, rows)


class od_job_summarize(od_job):
    """
    Tables derived from existing outputs: per-link congestion levels of a
    dataset, or the summary of an estimation recomputed from its CSV files.
    """
    kind = 'summarize'

    def _checkInput(self):
        od_job._checkInput(self)
        self.directory = self.options.get('dataset')
        if not self.directory:
            self._exit('a dataset or estimation directory (--dataset) needs to be specified')
        self.manifest = od_io.read_manifest(os.path.join(self.directory, od_io.MANIFEST))
        if self.manifest.get('KIND') not in ('dataset', 'estimate'):
            self._exit('%s holds neither a dataset nor an estimation' % self.directory)
        if self.out is None:
            self.out = self.directory

    def run(self):
        os.makedirs(self.out, exist_ok=True)
        if self.manifest['KIND'] == 'dataset':
            return self._congestion()
        return self._summary()

    def _congestion(self):
        dataset, network, _, _ = od_io.load_dataset(self.directory)
        levels = congestion_levels(dataset.z, network)
        od_io.write_table(os.path.join(self.out, "congestion.csv"),
                          ["link", "from", "to", "zmax", "congestion_level"],
                          [[link.id, link.tail, link.head, link.zmax, cl] for link, cl in zip(network.links, levels)])
        return levels

    def _summary(self):
        network = load_network(os.path.join(self.directory, self.manifest.get('NETWORK_FILE', od_io.NETWORK)))
        route_set = enumerate_routes(network)
        truth = od_io.read_optional_series(os.path.join(self.manifest['DATASET'], "theta.csv"))
        prob = self.options.get('prob', float(self.manifest.get('HPD_PROB', 0.95)))
        if not 0.0 < prob < 1.0:
            self._exit('the HPD probability must lie in (0, 1)')
        _, _, phi, _, _ = od_io.read_trace(os.path.join(self.directory, "trace.csv"))
        if phi.shape[0] == 0:
            self._exit('%s/trace.csv holds no samples' % self.directory)
        theta_hat = od_io.read_theta_means(os.path.join(self.directory, "theta_summary.csv"), route_set)
        summary = PosteriorSummary(phi_mean=phi.mean(axis=0),
                                   phi_hpd=[hpd_interval(phi[:, k], prob) for k in range(phi.shape[1])],
                                   acceptance_rate=float(self.manifest['ACCEPTANCE_RATE']),
                                   theta_mean=theta_hat,
                                   mse=None if truth is None else mse(theta_hat, truth),
                                   samples=phi.shape[0],
                                   prob=prob)
        od_io.write_summary(os.path.join(self.out, "summary.csv"), summary)
        return summary


JOBS = {
    'simulate': od_job_simulate,
    'estimate': od_job_estimate,
    'experiment': od_job_experiment,
    'summarize': od_job_summarize,
}
