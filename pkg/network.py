"""
Road network representation: links with BPR travel time functions, OD pairs,
exhaustive route enumeration and link-route incidence matrices.
"""
from dataclasses import dataclass, field
import logging

import networkx as nx
import numpy as np
from configobj import ConfigObj

from od_errors import ConfigError

logger = logging.getLogger("od_dlm.network")


@dataclass(frozen=True)
class Link:
    id: int
    tail: int
    head: int
    tau0: float = 1.0
    zmax: float = 130.0
    alpha: float = 0.15
    beta: float = 4.0

    def __post_init__(self):
        if self.tau0 <= 0.0:
            raise ValueError(f"link {self.id}: free-flow time tau0 must be positive")
        if self.zmax <= 0.0:
            raise ValueError(f"link {self.id}: capacity zmax must be positive")
        if self.alpha < 0.0 or self.beta < 0.0:
            raise ValueError(f"link {self.id}: BPR parameters alpha and beta must be non-negative")
        if self.tail == self.head:
            raise ValueError(f"link {self.id}: self loop at node {self.tail}")


@dataclass(frozen=True)
class Network:
    nodes: tuple
    links: tuple
    od_pairs: tuple

    def __post_init__(self):
        nodes = set(self.nodes)
        ids = [link.id for link in self.links]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate link ids")
        for link in self.links:
            if link.tail not in nodes or link.head not in nodes:
                raise ValueError(f"link {link.id} ({link.tail}->{link.head}) has an endpoint outside the node set")
        if len(set(self.od_pairs)) != len(self.od_pairs):
            raise ValueError("OD pairs must be distinct")
        for origin, destination in self.od_pairs:
            if origin not in nodes or destination not in nodes:
                raise ValueError(f"OD pair ({origin},{destination}) references an unknown node")

    @property
    def link_ids(self):
        return tuple(link.id for link in self.links)

    def link_index(self, link_id):
        try:
            return self.link_ids.index(link_id)
        except ValueError:
            raise ValueError(f"unknown link id {link_id}") from None

    def link(self, link_id):
        return self.links[self.link_index(link_id)]

    def graph(self):
        G = nx.MultiDiGraph()
        G.add_nodes_from(self.nodes)
        for link in self.links:
            G.add_edge(link.tail, link.head, key=link.id)
        return G

    def bpr_parameters(self):
        """Arrays (tau0, zmax, alpha, beta) in link order."""
        return tuple(np.array([getattr(link, name) for link in self.links], dtype=float)
                     for name in ("tau0", "zmax", "alpha", "beta"))


@dataclass(frozen=True)
class RouteSet:
    """Routes per OD pair as link id tuples; the global route order is OD pair
    order, then the order within the pair."""
    od_pairs: tuple
    routes: tuple

    @property
    def n_pairs(self):
        return len(self.od_pairs)

    @property
    def n_routes(self):
        return sum(len(r) for r in self.routes)

    def sizes(self):
        return [len(r) for r in self.routes]

    def all_routes(self):
        return [route for pair_routes in self.routes for route in pair_routes]

    def route_pairs(self):
        """OD pair index of every route in the global order."""
        return np.repeat(np.arange(self.n_pairs), self.sizes())

    def pair_slices(self):
        slices = []
        start = 0
        for size in self.sizes():
            slices.append(slice(start, start + size))
            start += size
        return slices

    def pair_of(self, od_pair):
        return self.od_pairs.index(tuple(od_pair))


@dataclass(frozen=True)
class IncidenceMatrix:
    full: np.ndarray
    link_ids: tuple
    observed_links: tuple = field(default=())

    @property
    def observed_rows(self):
        return [self.link_ids.index(i) for i in self.observed_links]

    @property
    def selected(self):
        return self.full[self.observed_rows, :]


def enumerate_routes(network):
    G = network.graph()
    routes = []
    for origin, destination in network.od_pairs:
        paths = nx.all_simple_edge_paths(G, origin, destination) if origin != destination else []
        pair_routes = sorted(tuple(key for _, _, key in path) for path in paths)
        if not pair_routes:
            raise ValueError(f"OD pair ({origin},{destination}) has no route")
        routes.append(tuple(pair_routes))
    route_set = RouteSet(tuple(network.od_pairs), tuple(routes))
    logger.debug("enumerated %d routes for %d OD pairs", route_set.n_routes, route_set.n_pairs)
    return route_set


def incidence_matrix(route_set, network, observed_links=None):
    link_ids = network.link_ids
    if observed_links is None:
        observed_links = link_ids
    observed_links = tuple(int(i) for i in observed_links)
    for i in observed_links:
        if i not in link_ids:
            raise ValueError(f"unknown observed link id {i}")
    delta = np.zeros((len(link_ids), route_set.n_routes))
    for k, route in enumerate(route_set.all_routes()):
        for link_id in route:
            delta[network.link_index(link_id), k] = 1.0
    return IncidenceMatrix(delta, link_ids, observed_links)


def _bpr(volume, tau0, zmax, alpha, beta):
    # 0**0 counts as 0 so that tau(0) = tau0 for every beta
    load = np.where(volume > 0.0, (volume/zmax)**beta, 0.0)
    return tau0*(1.0 + alpha*load)


def bpr_cost(link, volume):
    volume = np.asarray(volume, dtype=float)
    if np.any(volume < 0.0):
        raise ValueError(f"link {link.id}: negative volume")
    return _bpr(volume, link.tau0, link.zmax, link.alpha, link.beta)


def link_costs(network, link_volumes):
    """Vector g(z) of BPR travel times in link order."""
    z = np.asarray(link_volumes, dtype=float)
    if z.shape != (len(network.links),):
        raise ValueError(f"expected {len(network.links)} link volumes, got shape {z.shape}")
    if np.any(z < 0.0):
        raise ValueError("negative link volume")
    return _bpr(z, *network.bpr_parameters())


def route_costs(network, route_set, link_volumes, incidence=None):
    if incidence is None:
        incidence = incidence_matrix(route_set, network)
    return incidence.full.T @ link_costs(network, link_volumes)


def free_flow_costs(network, route_set, incidence=None):
    return route_costs(network, route_set, np.zeros(len(network.links)), incidence)


def congestion_levels(volumes, network):
    z = np.atleast_2d(np.asarray(volumes, dtype=float))
    if z.shape[0] < 1 or z.shape[1] != len(network.links):
        raise ValueError(f"expected a T x {len(network.links)} volume series, got shape {z.shape}")
    _, zmax, _, _ = network.bpr_parameters()
    return z.sum(axis=0)/(z.shape[0]*zmax)


# Stand-in for the eight node, ten link test network: two origins (1, 2) feed a
# shared entry node 3 that splits over links 2 and 9 towards destinations 7, 8.
CANONICAL_LINKS = ((1, 1, 3), (2, 3, 4), (3, 4, 7), (4, 6, 7), (5, 4, 6),
                   (6, 5, 6), (7, 6, 8), (8, 5, 8), (9, 3, 5), (10, 2, 3))


def canonical_network():
    links = tuple(Link(i, tail, head, tau0=1.0, zmax=130.0, alpha=0.15, beta=4.0)
                  for i, tail, head in CANONICAL_LINKS)
    network = Network(tuple(range(1, 9)), links, ((1, 7), (1, 8), (2, 7), (2, 8)))
    return network, enumerate_routes(network)


def load_network(filename):
    """
    Reads a network definition file:

        NODES = 1, 2, 3
        OD_PAIRS = 1:3, 2:3
        [LINKS]
        # id = from, to, tau0, zmax, alpha, beta
        1 = 1, 3, 1.0, 130, 0.15, 4
    """
    keywords = ConfigObj(filename, file_error=True)
    try:
        nodes = tuple(int(v) for v in _as_list(keywords['NODES']))
        od_pairs = tuple(tuple(int(x) for x in pair.split(':')) for pair in _as_list(keywords['OD_PAIRS']))
        links = []
        for key, value in keywords['LINKS'].items():
            fields = [float(x) for x in _as_list(value)]
            if len(fields) != 6:
                raise ConfigError(f"link {key}: expected from, to, tau0, zmax, alpha, beta")
            links.append(Link(int(key), int(fields[0]), int(fields[1]), *fields[2:]))
    except KeyError as e:
        raise ConfigError(f"{filename}: missing {e.args[0]}") from None
    except ValueError as e:
        raise ConfigError(f"{filename}: {e}") from None
    try:
        return Network(nodes, tuple(links), od_pairs)
    except ValueError as e:
        raise ConfigError(f"{filename}: {e}") from None


def save_network(network, filename):
    keywords = ConfigObj()
    keywords.filename = filename
    keywords['NODES'] = [str(n) for n in network.nodes]
    keywords['OD_PAIRS'] = [f"{o}:{d}" for o, d in network.od_pairs]
    keywords['LINKS'] = {}
    for link in network.links:
        keywords['LINKS'][str(link.id)] = [str(link.tail), str(link.head), repr(link.tau0),
                                           repr(link.zmax), repr(link.alpha), repr(link.beta)]
    keywords.write()


def _as_list(value):
    if isinstance(value, (list, tuple)):
        return [v for v in value if str(v).strip() != '']
    return [v for v in str(value).split(',') if v.strip() != '']
