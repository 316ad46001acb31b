import math

import networkx as nx
import numpy as np
import pytest

from islnet.constellation import generate_random, generate_walker_delta, generate_walker_star, nearest_satellite
from islnet.experiments import sample_endpoints
from islnet.geometry import GeodeticCoord
from islnet.routing import (
    C_KM_S,
    DelayModel,
    NoPathError,
    RoutePath,
    alternate_paths,
    dijkstra,
    end_to_end_delay,
    fiber_delay,
    fspl,
    improvement,
    path_energy,
    path_weight,
    route,
)
from islnet.topology import IslGraph, build_cutoff, build_nearest_hop, compute_d_max

# mpmath oracle values
FIBER_ANTIPODAL_S = 0.09800829417982957
BENT_PIPE_S = 0.0036748050471796725  # 1100 km of legs, one satellite, tau = 5.6 us
TAU_DERIVED_S = 5.628517823639775e-6
FSPL_1000KM_3CM = 1.7545963379714415e17

G0 = GeodeticCoord(0.0, 0.0)


def random_graph(rng, n, p_edge, integer=False):
    edges, weights = [], []
    for i in range(n):
        for j in range(i + 1, n):
            if rng.random() < p_edge:
                edges.append((i, j))
                weights.append(float(rng.integers(1, 4)) if integer else rng.uniform(1, 100))
    return IslGraph(n, np.array(edges, dtype=np.int64).reshape(-1, 2), weights, "cutoff")


def bellman_ford(g, src):
    dist = [math.inf] * g.node_count
    pred = [-1] * g.node_count
    dist[src] = 0.0
    arcs = [(int(i), int(j), float(w)) for (i, j), w in zip(g.edges, g.weights)]
    arcs += [(j, i, w) for i, j, w in arcs]
    for _ in range(g.node_count):
        changed = False
        for u, v, w in arcs:
            if dist[u] + w < dist[v]:
                dist[v] = dist[u] + w
                pred[v] = u
                changed = True
        if not changed:
            break
    return dist, pred


class TestDijkstra:
    def test_small_example(self):
        g = IslGraph(4, [[0, 1], [1, 2], [0, 2], [2, 3]], [1.0, 1.0, 3.0, 1.0], "cutoff")
        assert dijkstra(g, 0, 3) == [0, 1, 2, 3]
        assert path_weight(g, [0, 1, 2, 3]) == 3.0

    def test_trivial_and_errors(self):
        g = IslGraph(3, [[0, 1]], [1.0], "cutoff")
        assert dijkstra(g, 2, 2) == [2]
        with pytest.raises(NoPathError):
            dijkstra(g, 0, 2)
        with pytest.raises(IndexError):
            dijkstra(g, 0, 3)

    def test_tie_prefers_lexicographic(self):
        # 0-1-3 and 0-2-3 both weigh 2
        g = IslGraph(4, [[0, 2], [2, 3], [0, 1], [1, 3]], [1.0] * 4, "cutoff")
        assert dijkstra(g, 0, 3) == [0, 1, 3]
        assert dijkstra(g, 3, 0) == [3, 1, 0]

    @pytest.mark.parametrize("seed", range(30))
    def test_bellman_ford_oracle(self, seed):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(5, 100))
        g = random_graph(rng, n, 4.0 / n)
        dist, _ = bellman_ford(g, 0)
        for dst in range(1, n):
            if math.isinf(dist[dst]):
                with pytest.raises(NoPathError):
                    dijkstra(g, 0, dst)
            else:
                assert path_weight(g, dijkstra(g, 0, dst)) == pytest.approx(dist[dst], rel=1e-12)

    @pytest.mark.parametrize("seed", range(40))
    def test_lexicographic_against_enumeration(self, seed):
        rng = np.random.default_rng(100 + seed)
        n = int(rng.integers(4, 9))
        g = random_graph(rng, n, 0.5, integer=True)
        G = nx.Graph()
        G.add_nodes_from(range(n))
        G.add_edges_from(map(tuple, g.edges))
        src, dst = 0, n - 1
        paths = list(nx.all_simple_paths(G, src, dst))
        if not paths:
            with pytest.raises(NoPathError):
                dijkstra(g, src, dst)
            return
        best = min(path_weight(g, p) for p in paths)
        expect = min(p for p in paths if path_weight(g, p) == best)
        assert dijkstra(g, src, dst) == expect

    def test_hop_cost_changes_choice(self):
        # two light hops versus one heavier direct link
        g = IslGraph(3, [[0, 1], [1, 2], [0, 2]], [1.0, 1.0, 2.5], "cutoff")
        assert dijkstra(g, 0, 2) == [0, 1, 2]
        assert dijkstra(g, 0, 2, hop_cost=1.0) == [0, 2]

    @pytest.mark.parametrize("seed", range(10))
    def test_relabel_invariance(self, seed):
        rng = np.random.default_rng(200 + seed)
        n = 40
        g = random_graph(rng, n, 0.15)
        perm = rng.permutation(n)
        # rebuild via explicit mapping so weights stay attached to their edges
        pairs = {}
        for (i, j), w in zip(g.edges, g.weights):
            a, b = sorted((int(perm[i]), int(perm[j])))
            pairs[(a, b)] = w
        h = IslGraph(n, list(pairs), list(pairs.values()), "cutoff")
        for dst in range(1, n):
            try:
                w1 = path_weight(g, dijkstra(g, 0, dst))
            except NoPathError:
                with pytest.raises(NoPathError):
                    dijkstra(h, int(perm[0]), int(perm[dst]))
                continue
            assert path_weight(h, dijkstra(h, int(perm[0]), int(perm[dst]))) == pytest.approx(w1, rel=1e-12)


class TestDelayModel:
    def test_fiber(self):
        assert fiber_delay(math.pi * 6371) == pytest.approx(FIBER_ANTIPODAL_S, rel=1e-12)
        assert fiber_delay(0) == 0
        with pytest.raises(ValueError):
            fiber_delay(-1)

    def test_bent_pipe(self):
        p = RoutePath(G0, G0, (0,), (), 550.0, 550.0)
        assert end_to_end_delay(p) == pytest.approx(BENT_PIPE_S, rel=1e-12)
        assert end_to_end_delay(p, DelayModel().without_processing()) == pytest.approx(1100 / C_KM_S, rel=1e-15)

    def test_processing_counts_every_satellite(self):
        p = RoutePath(G0, G0, (0, 1, 2), (1000.0, 1000.0), 600.0, 700.0)
        m = DelayModel()
        assert end_to_end_delay(p, m) == pytest.approx(3300 / C_KM_S + 3 * 5.6e-6, rel=1e-15)

    def test_derived_tau(self):
        assert DelayModel.derived().tau_process_s == pytest.approx(TAU_DERIVED_S, rel=1e-15)

    def test_improvement(self):
        assert improvement(0.1, 0.05) == pytest.approx(1.0)
        assert improvement(0.05, 0.05) == 0.0
        assert improvement(0.04, 0.05) < 0

    def test_fspl(self):
        assert fspl(1000, 0.03) == pytest.approx(FSPL_1000KM_3CM, rel=1e-12)
        assert fspl(2000, 0.03) == pytest.approx(4 * fspl(1000, 0.03), rel=1e-15)
        with pytest.raises(ValueError):
            fspl(0, 0.03)

    def test_energy(self):
        p = RoutePath(G0, G0, (0, 1, 2, 3), (3.0, 4.0, 12.0), 1.0, 1.0)
        assert path_energy(p) == 169.0
        assert path_energy(p, alpha=2.0, e_processing=5.0) == 2 * 169.0 + 15.0
        assert path_energy(RoutePath(G0, G0, (0,), (), 1.0, 1.0), e_processing=9.0) == 0.0


@pytest.fixture(scope="module")
def shell():
    c = generate_random(1000, 550, 2023)
    return c, build_cutoff(c, compute_d_max(550)), build_nearest_hop(c)


class TestRoute:
    def test_fields_consistent(self, shell):
        c, cut, _ = shell
        tx, rx = GeodeticCoord.from_degrees(-31.9523, 115.8613), GeodeticCoord.from_degrees(48.3904, -4.4861)
        p = route(c, cut, tx, rx)
        assert p.sat_ids[0] == nearest_satellite(c, tx) and p.sat_ids[-1] == nearest_satellite(c, rx)
        assert p.total_delay_s == pytest.approx(p.propagation_delay_s + p.processing_delay_s, rel=1e-15)
        assert p.processing_delay_s == p.n_sats * 5.6e-6
        assert p.hop_count == len(p.hop_distances_km)
        assert p.total_energy == sum(d * d for d in p.hop_distances_km)
        for u, v, d in zip(p.sat_ids, p.sat_ids[1:], p.hop_distances_km):
            assert d == pytest.approx(np.linalg.norm(c.positions[u] - c.positions[v]), rel=1e-14)

    def test_replay_with_networkx(self, shell, tmp_path):
        c, cut, nh = shell
        m = DelayModel()
        for g in (cut, nh):
            path = tmp_path / "g.csv"
            g.to_csv(path)
            back = IslGraph.from_csv(path)
            G = nx.Graph()
            for (i, j), w in zip(back.edges, back.weights):
                G.add_edge(int(i), int(j), weight=float(w) + m.c_km_s * m.tau_process_s)
            for trial in range(20):
                tx, rx = sample_endpoints(9, trial)
                p = route(c, g, tx, rx, m, min_elevation_rad=None)
                s, t = nearest_satellite(c, tx), nearest_satellite(c, rx)
                # the hop costs already account for all but one satellite's processing
                best = nx.shortest_path_length(G, s, t, weight="weight")
                expect = (best + p.d_up_km + p.d_down_km) / m.c_km_s + m.tau_process_s
                assert p.total_delay_s == pytest.approx(expect, rel=1e-12)

    def test_same_attach_satellite(self):
        c = generate_walker_star(24, 4, 550)
        g = build_cutoff(c, compute_d_max(550))
        p = route(c, g, G0, GeodeticCoord.from_degrees(0.01, 0.01))
        assert p.n_sats == 1 and p.hop_count == 0 and p.total_energy == 0.0

    def test_disconnected(self):
        c = generate_random(50, 550, 4)
        g = IslGraph(50, np.empty((0, 2), dtype=np.int64), [], "cutoff")
        tx, rx = sample_endpoints(0, 0)
        if nearest_satellite(c, tx) != nearest_satellite(c, rx):
            with pytest.raises(NoPathError):
                route(c, g, tx, rx)

    def test_low_elevation_warns(self, shell, caplog):
        c, cut, _ = shell
        tx, rx = sample_endpoints(1, 0)
        with caplog.at_level("WARNING"):
            route(c, cut, tx, rx, min_elevation_rad=math.radians(89.9))
        assert "elevation" in caplog.text
        caplog.clear()
        with caplog.at_level("WARNING"):
            route(c, cut, tx, rx, min_elevation_rad=None)
        assert not caplog.text

    def test_energy_nearest_hop_beats_cutoff(self, shell):
        c, cut, nh = shell
        e_nh, e_cut = [], []
        for trial in range(100):
            tx, rx = sample_endpoints(2023, trial)
            e_nh.append(route(c, nh, tx, rx, min_elevation_rad=None).total_energy)
            e_cut.append(route(c, cut, tx, rx, min_elevation_rad=None).total_energy)
        assert np.mean(e_nh) <= np.mean(e_cut)

    def test_processing_choice_trades_hops(self, shell):
        c, cut, _ = shell
        tx, rx = sample_endpoints(3, 0)
        fast = route(c, cut, tx, rx, DelayModel(tau_process_s=0.0), min_elevation_rad=None)
        slow = route(c, cut, tx, rx, DelayModel(tau_process_s=1e-3), min_elevation_rad=None)
        assert slow.hop_count <= fast.hop_count
        assert slow.propagation_delay_s >= fast.propagation_delay_s - 1e-15


class TestAlternates:
    def test_non_decreasing_and_disjoint(self):
        c = generate_walker_delta(996, 12, 550)
        g = build_cutoff(c, compute_d_max(550))
        tx, rx = GeodeticCoord.from_degrees(40.7128, -74.0060), GeodeticCoord.from_degrees(51.5074, -0.1278)
        alt = alternate_paths(c, g, tx, rx, k=10, min_elevation_rad=None)
        assert len(alt.paths) == 10 and not alt.truncated
        delays = [p.total_delay_s for p in alt.paths]
        assert all(a <= b for a, b in zip(delays, delays[1:]))
        assert alt.paths[0] == route(c, g, tx, rx, min_elevation_rad=None)
        used = set()
        for p in alt.paths:
            links = {tuple(sorted(e)) for e in zip(p.sat_ids, p.sat_ids[1:])}
            assert not links & used
            used |= links

    def test_truncates_when_disconnected(self):
        g = IslGraph(4, [[0, 1], [1, 2], [2, 3]], [1000.0] * 3, "cutoff")
        c = generate_random(4, 550, 0)
        tx = GeodeticCoord.from_degrees(0, 0)
        rx = GeodeticCoord.from_degrees(10, 10)
        alt = alternate_paths(c, g, tx, rx, k=5, min_elevation_rad=None)
        assert alt.truncated and len(alt.paths) == 1

    def test_k_validated(self):
        c = generate_random(4, 550, 0)
        g = IslGraph(4, [[0, 1]], [1.0], "cutoff")
        with pytest.raises(ValueError):
            alternate_paths(c, g, G0, G0, k=0)

    def test_serialisation(self):
        c = generate_walker_star(48, 6, 550)
        g = build_cutoff(c, compute_d_max(550))
        p = route(c, g, G0, GeodeticCoord.from_degrees(30, 60), min_elevation_rad=None)
        d = p.to_dict()
        assert d["hop_count"] == p.hop_count and d["sat_ids"] == list(p.sat_ids)
        assert d["delay"]["total_s"] == p.total_delay_s
