"""Link graph utilities against networkx and brute-force oracles."""

import itertools
import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from polyrank.linkgraph import (TYPE2, TYPE32, BudgetExceeded, LinkGraph, are_isomorphic,
                                automorphism_group_order, automorphisms, canonical_form,
                                complete_bipartite, complete_graph, count_paths, cycle_graph,
                                cycles_of_length, distance_matrix, enumerate_ample_cubic,
                                fano_incidence, generalized_petersen, girth, heawood, is_ample,
                                l74, pair_type, parse_graph, random_walk_spectrum,
                                six_cycle_analysis)


def to_nx(g: LinkGraph) -> nx.Graph:
    h = nx.Graph()
    h.add_nodes_from(range(g.n))
    h.add_edges_from(g.edges)
    return h


def random_cubic(n, seed):
    return LinkGraph(n, tuple(nx.random_regular_graph(3, n, seed=seed).edges()))


def nx_cycles(h, k):
    return [c for c in nx.simple_cycles(h, length_bound=k) if len(c) == k]


def brute_force_ample(n):
    h = nx.Graph()
    h.add_nodes_from(range(n))
    h.add_edges_from([(0, 1), (0, 2), (0, 3), (1, 4), (1, 5), (2, 6), (2, 7), (3, 8), (3, 9)])
    found: list[nx.Graph] = []

    def rec():
        deficient = [v for v in h if h.degree(v) < 3]
        if not deficient:
            if nx.girth(h) == 6 and not any(nx.is_isomorphic(h, f) for f in found):
                found.append(h.copy())
            return
        u = deficient[0]
        for w in deficient[1:]:
            if h.has_edge(u, w):
                continue
            try:
                d = nx.shortest_path_length(h, u, w)
            except nx.NetworkXNoPath:
                d = math.inf
            if d >= 5:
                h.add_edge(u, w)
                rec()
                h.remove_edge(u, w)

    rec()
    return found


class TestBasics:
    def test_girth_small_graphs(self):
        assert girth(cycle_graph(5)) == 5
        assert girth(complete_graph(4)) == 3
        assert girth(complete_bipartite(3, 3)) == 4
        assert girth(LinkGraph(2, ((0, 1), (0, 1)))) == 2
        assert girth(LinkGraph(1, ((0, 0),))) == 1
        assert girth(LinkGraph(3, ((0, 1), (1, 2)))) == math.inf

    @settings(max_examples=40, deadline=None)
    @given(st.integers(3, 11), st.integers(0, 10_000))
    def test_girth_matches_networkx(self, half, seed):
        g = random_cubic(2 * half, seed)
        assert girth(g) == nx.girth(to_nx(g))

    def test_l74_is_gp83(self):
        assert are_isomorphic(l74(), generalized_petersen(8, 3))
        assert nx.is_isomorphic(to_nx(l74()), to_nx(generalized_petersen(8, 3)))

    def test_heawood_matches_networkx(self):
        assert nx.is_isomorphic(to_nx(heawood()), nx.heawood_graph())

    def test_ample(self):
        assert is_ample(l74()) and is_ample(heawood())
        assert not is_ample(generalized_petersen(5, 2))  # Petersen, girth 5
        assert not is_ample(cycle_graph(6))

    def test_distance_matrix_matches_networkx(self):
        g = l74()
        d = distance_matrix(g)
        ref = dict(nx.all_pairs_shortest_path_length(to_nx(g)))
        assert all(d[u, v] == ref[u][v] for u in range(g.n) for v in range(g.n))
        assert d.max() == 4

    def test_parse_roundtrip(self):
        g = l74()
        assert parse_graph(g.to_text()) == g

    def test_parse_rejects_garbage(self):
        with pytest.raises(ValueError):
            parse_graph("0 1 2\n")


class TestIsomorphism:
    @settings(max_examples=30, deadline=None)
    @given(st.integers(4, 9), st.integers(0, 10_000), st.randoms(use_true_random=False))
    def test_canonical_form_invariant_under_relabelling(self, half, seed, rnd):
        g = random_cubic(2 * half, seed)
        perm = list(range(g.n))
        rnd.shuffle(perm)
        h = g.relabel(perm)
        assert canonical_form(g)[0] == canonical_form(h)[0]
        c, p = canonical_form(h)
        assert h.relabel(p).edges == c.edges

    @settings(max_examples=30, deadline=None)
    @given(st.integers(4, 8), st.integers(0, 10_000), st.integers(0, 10_000))
    def test_isomorphism_agrees_with_networkx(self, half, s1, s2):
        g, h = random_cubic(2 * half, s1), random_cubic(2 * half, s2)
        assert are_isomorphic(g, h) == nx.is_isomorphic(to_nx(g), to_nx(h))

    @pytest.mark.parametrize("g", [l74(), heawood(), generalized_petersen(5, 2), cycle_graph(7)],
                             ids=["l74", "heawood", "petersen", "c7"])
    def test_automorphism_count_matches_networkx(self, g):
        h = to_nx(g)
        ref = sum(1 for _ in nx.algorithms.isomorphism.GraphMatcher(h, h).isomorphisms_iter())
        auts = automorphisms(g)
        assert len(auts) == ref
        assert all(set(map(tuple, (sorted((a[u], a[v])) for u, v in g.edges)))
                   == set(g.edges) for a in auts)

    def test_l74_automorphisms(self):
        rep = automorphism_group_order(l74())
        assert rep.order == 96
        assert rep.tripod_transitive
        assert rep.pointwise_stabilizer_order == 1
        assert rep.tripod_stabilizer_order == 6

    def test_heawood_automorphisms(self):
        assert automorphism_group_order(heawood()).order == 336


class TestSpectrum:
    def test_l74_spectrum(self):
        sp = random_walk_spectrum(l74())
        expected = sorted([1, -1] + [1 / math.sqrt(3)] * 4 + [-1 / math.sqrt(3)] * 4
                          + [1 / 3] * 3 + [-1 / 3] * 3)
        assert np.allclose(sorted(sp.values()), expected, atol=1e-9)
        assert abs(sp.lambda1 - (1 - 1 / math.sqrt(3))) < 1e-9

    def test_spectrum_matches_networkx_laplacian(self):
        g = heawood()
        sp = random_walk_spectrum(g)
        lap = nx.normalized_laplacian_spectrum(to_nx(g))
        assert np.allclose(sorted(1 - np.array(sp.values())), sorted(lap), atol=1e-9)

    def test_requires_regular(self):
        with pytest.raises(ValueError):
            random_walk_spectrum(LinkGraph(3, ((0, 1), (1, 2))))


class TestLocalStructure:
    def test_pair_types_from_a_vertex(self):
        g = l74()
        d = distance_matrix(g)
        far = [b for b in range(g.n) if d[0, b] == 3]
        types = [pair_type(g, 0, b) for b in far]
        assert len(far) == 5
        assert types.count(TYPE32) == 3 and types.count(TYPE2) == 2

    def test_count_paths_brute_force(self):
        g = l74()
        h = to_nx(g)
        for a, b in [(0, 5), (0, 9), (3, 12)]:
            ref = sum(1 for p in nx.all_simple_paths(h, a, b, cutoff=3) if len(p) == 4)
            assert count_paths(g, a, b, 3) == ref

    @pytest.mark.parametrize("g,count", [(l74(), 24), (heawood(), 28)], ids=["l74", "heawood"])
    def test_six_cycles(self, g, count):
        cyc = cycles_of_length(g, 6)
        assert len(cyc) == count == len(nx_cycles(to_nx(g), 6))

    def test_six_cycle_antipodes(self):
        for cyc, types in six_cycle_analysis(l74()):
            assert sorted(types, key=str) == sorted([TYPE32, TYPE2, TYPE2], key=str)


class TestEnumeration:
    def test_small_orders(self):
        assert enumerate_ample_cubic(10) == []
        assert enumerate_ample_cubic(12) == []

    def test_n14_is_heawood(self):
        (g,) = enumerate_ample_cubic(14)
        assert are_isomorphic(g, fano_incidence())

    def test_n16_is_gp83(self):
        (g,) = enumerate_ample_cubic(16)
        assert are_isomorphic(g, generalized_petersen(8, 3))

    @pytest.mark.parametrize("n", [14])
    def test_brute_force_oracle(self, n):
        # n=16 takes too long without symmetry breaking
        # independent search: grow the radius-2 tree at vertex 0, then add
        # edges between vertices at networkx distance >= 5 until cubic
        classes = brute_force_ample(n)
        ours = enumerate_ample_cubic(n)
        assert len(classes) == len(ours)
        for h in classes:
            assert sum(nx.is_isomorphic(h, to_nx(g)) for g in ours) == 1

    def test_cap_and_parity(self):
        with pytest.raises(BudgetExceeded):
            enumerate_ample_cubic(22, max_vertices=20)
        with pytest.raises(ValueError):
            enumerate_ample_cubic(15)

    def test_workers_do_not_change_output(self):
        assert enumerate_ample_cubic(16, workers=2) == enumerate_ample_cubic(16)

    def test_outputs_are_ample_and_pairwise_distinct(self):
        gs = enumerate_ample_cubic(16)
        assert all(is_ample(g) for g in gs)
        assert all(not are_isomorphic(a, b) for a, b in itertools.combinations(gs, 2))
