import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from dlm_filter import Evolution, ModelParams  # noqa: E402
from network import Link, Network, canonical_network, enumerate_routes, incidence_matrix  # noqa: E402
from sampler import EstimationProblem  # noqa: E402
from simulator import SimulationConfig, generate, replay_costs  # noqa: E402
from stochastics import rng_stream  # noqa: E402


@pytest.fixture
def canonical():
    return canonical_network()


@pytest.fixture
def rng():
    return rng_stream(20240611, 0)


@pytest.fixture
def two_pair_network():
    """Two origins joined to one destination by a single link each."""
    links = (Link(1, 1, 3), Link(2, 2, 3))
    network = Network((1, 2, 3), links, ((1, 3), (2, 3)))
    return network, enumerate_routes(network)


def simulate(network, route_set, T=10, seed=3, **kwargs):
    config = SimulationConfig(n_pairs=route_set.n_pairs, T=T, seed=seed, **kwargs)
    return generate(config, network, route_set, rng_stream(seed, 0))


def make_problem(dataset, network, route_set, observed_links=None, evolution=None):
    incidence = incidence_matrix(route_set, network, observed_links)
    rows = incidence.observed_rows
    n = route_set.n_pairs
    params = ModelParams(sigma_x=dataset.config.sigma_x,
                         sigma_z=dataset.config.sigma_z_for(len(network.links))[np.ix_(rows, rows)],
                         evolution=evolution or Evolution(W=dataset.config.W),
                         m0=np.full(n, 100.0),
                         C0=1000.0*np.eye(n),
                         pi=dataset.config.pi,
                         r=dataset.r,
                         observed_links=incidence.observed_links)
    return EstimationProblem(dataset.z[:, rows], replay_costs(dataset), params, route_set, incidence)


@pytest.fixture
def small_problem(canonical):
    network, route_set = canonical
    dataset = simulate(network, route_set, T=8, seed=5)
    return dataset, make_problem(dataset, network, route_set)
