import numpy as np
import pytest

from network import (Link, Network, bpr_cost, congestion_levels, enumerate_routes, free_flow_costs,
                     incidence_matrix, link_costs, load_network, route_costs, save_network)
from od_errors import ConfigError


def test_canonical_route_enumeration(canonical):
    network, route_set = canonical
    assert route_set.n_routes == 12
    assert route_set.sizes() == [3, 3, 3, 3]
    assert route_set.od_pairs == ((1, 7), (1, 8), (2, 7), (2, 8))
    assert list(route_set.routes[0]) == [(1, 2, 3), (1, 2, 5, 4), (1, 9, 6, 4)]
    assert list(route_set.routes[1]) == [(1, 2, 5, 7), (1, 9, 6, 7), (1, 9, 8)]
    assert list(route_set.routes[2]) == [(10, 2, 3), (10, 2, 5, 4), (10, 9, 6, 4)]
    # link 1 is never used from origin 2
    for pair_routes in route_set.routes[2:]:
        assert all(1 not in route for route in pair_routes)


def test_enumeration_is_deterministic(canonical):
    network, route_set = canonical
    assert enumerate_routes(network) == route_set


def test_single_link_network():
    network = Network((1, 2), (Link(1, 1, 2),), ((1, 2),))
    route_set = enumerate_routes(network)
    assert route_set.routes == (((1,),),)
    assert incidence_matrix(route_set, network).full.tolist() == [[1.0]]


def test_cycle_off_the_od_axis_is_not_traversed():
    links = (Link(1, 1, 2), Link(2, 2, 3), Link(3, 3, 2), Link(4, 2, 4))
    network = Network((1, 2, 3, 4), links, ((1, 4),))
    assert enumerate_routes(network).routes == (((1, 4),),)


def test_unreachable_pair_names_the_pair():
    network = Network((1, 2), (Link(1, 1, 2),), ((2, 1),))
    with pytest.raises(ValueError, match=r"\(2,1\)"):
        enumerate_routes(network)


def test_invalid_links():
    with pytest.raises(ValueError):
        Link(1, 1, 1)
    with pytest.raises(ValueError):
        Link(1, 1, 2, tau0=0.0)
    with pytest.raises(ValueError):
        Network((1, 2), (Link(1, 1, 3),), ((1, 2),))


def test_incidence_matrix(canonical):
    network, route_set = canonical
    incidence = incidence_matrix(route_set, network)
    assert incidence.full.shape == (10, 12)
    assert set(np.unique(incidence.full)) <= {0.0, 1.0}
    lengths = [len(route) for route in route_set.all_routes()]
    assert incidence.full.sum(axis=0).tolist() == lengths

    link1 = incidence_matrix(route_set, network, [1]).selected
    assert link1.shape == (1, 12)
    assert link1[0].tolist() == [1.0]*6 + [0.0]*6

    with pytest.raises(ValueError):
        incidence_matrix(route_set, network, [11])


def test_bpr_cost():
    link = Link(1, 1, 2, tau0=1.0, zmax=130.0, alpha=0.15, beta=4.0)
    assert bpr_cost(link, 0.0) == 1.0
    assert float(bpr_cost(link, 130.0)) == pytest.approx(1.15, rel=1e-15)
    assert float(bpr_cost(link, 65.0)) == pytest.approx(1.009375, rel=1e-14)
    assert bpr_cost(Link(2, 1, 2, tau0=2.0, beta=0.0), 0.0) == 2.0
    assert bpr_cost(link, 200.0) > bpr_cost(link, 130.0)
    with pytest.raises(ValueError):
        bpr_cost(link, -1.0)



def test_link_costs_apply_each_link_parameters():
    links = (Link(1, 1, 2, tau0=2.0, zmax=100.0, alpha=0.5, beta=2.0),
             Link(2, 2, 3, tau0=1.0, zmax=50.0, alpha=0.15, beta=0.0),
             Link(3, 1, 3))
    network = Network((1, 2, 3), links, ((1, 3),))
    volumes = np.array([50.0, 0.0, 195.0])
    expected = [float(bpr_cost(link, v)) for link, v in zip(links, volumes)]
    np.testing.assert_allclose(link_costs(network, volumes), expected, rtol=1e-15)
    assert expected[:2] == [2.25, 1.0]
    with pytest.raises(ValueError):
        link_costs(network, np.array([1.0, -1.0, 0.0]))


def test_route_costs(canonical):
    network, route_set = canonical
    lengths = np.array([len(route) for route in route_set.all_routes()], dtype=float)
    np.testing.assert_array_equal(free_flow_costs(network, route_set), lengths)
    np.testing.assert_allclose(route_costs(network, route_set, np.full(10, 65.0)), 1.009375*lengths, rtol=1e-14)
    with pytest.raises(ValueError):
        link_costs(network, np.zeros(9))


def test_congestion_levels(canonical):
    network, _ = canonical
    np.testing.assert_allclose(congestion_levels(np.full((5, 10), 130.0), network), np.ones(10))
    np.testing.assert_array_equal(congestion_levels(np.zeros((3, 10)), network), np.zeros(10))
    z = np.zeros((2, 10))
    z[:, 0] = [65.0, 130.0]
    assert congestion_levels(z, network)[0] == pytest.approx(0.75)


def test_network_file(tmp_path, canonical):
    network, route_set = canonical
    filename = str(tmp_path/"net.ini")
    save_network(network, filename)
    loaded = load_network(filename)
    assert loaded == network
    assert enumerate_routes(loaded) == route_set


def test_network_file_errors(tmp_path):
    filename = tmp_path/"bad.ini"
    filename.write_text("NODES = 1, 2\nOD_PAIRS = 1:2\n[LINKS]\n1 = 1, 2, 1.0\n")
    with pytest.raises(ConfigError, match="link 1"):
        load_network(str(filename))
    filename.write_text("NODES = 1, 2\n[LINKS]\n1 = 1, 2, 1.0, 130, 0.15, 4\n")
    with pytest.raises(ConfigError, match="OD_PAIRS"):
        load_network(str(filename))
