"""Flat disks, flat triangles, strips and the mesoscopic construction."""

import math
from fractions import Fraction

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from polyrank import develop_ball, preset
from polyrank.complexes import link_of
from polyrank.cover import OutOfBall, gauss_bonnet_audit, is_geodesic_word
from polyrank.flats import (G_WORD, H_WORD, SIX, count_strips_of_form, disk_support, down,
                            flat_disks_at, flat_triangle_count, free_semigroup_probe, hex_distance,
                            hexagon, interval_p, meso_bound, meso_lower_bound_check,
                            mesoscopic_profile, mu, norm2, order_triangles, radius_grid,
                            realize_strip, reverse_word, same_cyclic, strips_on_geodesic,
                            strips_on_word, tri_distance2, up, verify_patch)

SQ3 = math.sqrt(3)


def cart(v):
    return np.array([v[0] + v[1] / 2, v[1] * SQ3 / 2])


def float_dist2(t):
    """Squared distance from the origin to a triangle, by dense sampling of
    its boundary plus an inside test."""
    p = [cart(v) for v in t]
    # inside test with barycentric coordinates
    m = np.column_stack([p[1] - p[0], p[2] - p[0]])
    lam = np.linalg.solve(m, -p[0])
    if lam.min() >= -1e-12 and lam.sum() <= 1 + 1e-12:
        return 0.0
    s = np.linspace(0, 1, 2001)
    best = math.inf
    for k in range(3):
        a, b = p[k], p[(k + 1) % 3]
        pts = a[None, :] + s[:, None] * (b - a)[None, :]
        best = min(best, float((pts ** 2).sum(axis=1).min()))
    return best


def link_six_cycles(p):
    h = nx.Graph()
    h.add_edges_from(link_of(p).edges)
    return sum(1 for c in nx.simple_cycles(h, length_bound=6) if len(c) == 6)


def side_two_triangles(b, word):
    """Independent count of side-2 flat triangles on a two-letter base:
    choose apexes on both base edges, require the middle and top triangles,
    and require six distinct vertices."""
    tris = {frozenset(t[1:]) for t in b.triangles()}
    apex: dict[frozenset, set] = {}
    for t in tris:
        for u in t:
            for w in t:
                if u < w:
                    apex.setdefault(frozenset((u, w)), set()).update(t - {u, w})
    a = b.base
    m = b.step(a, word[0])
    c = b.step(m, word[1])
    n = 0
    for x in apex[frozenset((a, m))]:
        for y in apex[frozenset((m, c))]:
            if frozenset((x, m, y)) in tris:
                n += sum(len({a, m, c, x, y, z}) == 6 for z in apex[frozenset((x, y))] - {m})
    return n


@pytest.fixture(scope="module")
def p():
    return preset("V0_1")


@pytest.fixture(scope="module")
def ball():
    return develop_ball(preset("V0_1"), 30, lazy=True)


class TestModelLattice:
    @settings(max_examples=200, deadline=None)
    @given(st.integers(-6, 6), st.integers(-6, 6), st.booleans())
    def test_tri_distance_matches_float_oracle(self, i, j, is_up):
        t = up(i, j) if is_up else down(i, j)
        assert abs(float(tri_distance2(t)) - float_dist2(t)) < 1e-5

    def test_distance_is_exact(self):
        assert tri_distance2(up(0, 0)) == 0
        assert tri_distance2(down(0, 0)) == Fraction(1, 4) * 3
        assert tri_distance2(up(1, 0)) == 1

    def test_norms(self):
        assert norm2((1, 0)) == norm2((0, 1)) == norm2((1, -1)) == 1
        assert norm2((1, 1)) == 3
        assert hex_distance((2, -1)) == 2

    @pytest.mark.parametrize("n", range(5))
    def test_hexagon_size(self, n):
        assert len(hexagon(n)) == 6 * n * n

    def test_disk_support_is_hexagon_at_small_radius(self):
        assert set(disk_support(Fraction(1, 4))) == set(hexagon(1))
        assert len(disk_support(Fraction(1))) == 6 + 6  # first ring plus six edge neighbours

    @pytest.mark.parametrize("p,lo,hi", [(0, SQ3 / 2, 1.0), (1, 3 * SQ3 / 2, math.sqrt(7))])
    def test_intervals(self, p, lo, hi):
        a, b = interval_p(p)
        assert math.isclose(a, lo) and math.isclose(b, hi)
        assert a < b

    def test_radius_grid(self):
        g = radius_grid(SQ3)
        assert len(g) == 6 and math.isclose(g[-1], SQ3)

    def test_order_triangles(self):
        order = order_triangles(hexagon(2))
        seen = {order[0]}
        for t in order[1:]:
            assert any(len(set(t) & set(s)) == 2 for s in seen)
            seen.add(t)
        with pytest.raises(ValueError):
            order_triangles([up(0, 0), up(5, 5)])


class TestFlatDisks:
    def test_radius_zero(self, lazy_v01):
        assert len(flat_disks_at(lazy_v01, 0, 0)) == 1

    @pytest.mark.parametrize("name", ["V0_1", "V1", "V4_2"])
    def test_radius_one_is_link_six_cycles(self, name):
        b = develop_ball(preset(name), 3)
        disks = flat_disks_at(b, 0, 1)
        assert len(disks) == link_six_cycles(preset(name)) == 24
        for d in disks:
            assert verify_patch(b, d) == 6

    def test_radius_two(self, lazy_v01):
        disks = flat_disks_at(lazy_v01, 0, 2)
        assert len(disks) == 264
        # each radius-two disk restricts to one of the 24 radius-one disks
        small = {d.image for d in flat_disks_at(lazy_v01, 0, 1)}
        inner = set(hexagon(1))
        for d in disks:
            assert frozenset(frozenset(d.vmap[v] for v in t) for t in inner) in small

    def test_errors(self, ball_v01_3):
        with pytest.raises(ValueError):
            flat_disks_at(ball_v01_3, 0, -1)
        with pytest.raises(OutOfBall):
            flat_disks_at(ball_v01_3, 0, 3)


class TestFlatTriangles:
    @pytest.mark.parametrize("word", [[6, 6], [1, 2], [6, -5], [2, 7]])
    def test_side_two_matches_oracle(self, word):
        b = develop_ball(preset("V0_1"), 5)
        if not is_geodesic_word(b.presentation, word):
            pytest.skip("not a geodesic base")
        assert flat_triangle_count(b, word) == side_two_triangles(b, word)

    def test_side_one_is_edge_valence(self, ball_v01_3):
        assert all(flat_triangle_count(ball_v01_3, [g]) == 3 for g in range(1, 9))

    def test_along_the_six_line(self, lazy_v01):
        assert [flat_triangle_count(lazy_v01, [SIX] * r) for r in (1, 2, 3)] == [3, 6, 12]

    def test_errors(self, lazy_v01):
        with pytest.raises(ValueError):
            flat_triangle_count(lazy_v01, [])
        with pytest.raises(ValueError):
            flat_triangle_count(lazy_v01, [1, -1])


class TestStrips:
    def test_six_line_counts(self, p):
        left = strips_on_word(p, [SIX], side="left")
        right = strips_on_word(p, [SIX], side="right")
        assert len(left) == len(right) == 3
        # both neighbouring lines read 5 in the direction of the 6-line
        assert all(s.opposite == (5,) for s in left + right)
        assert all(s.tops[-1] == (-5,) for s in right)

    def test_counts_of_form(self, p):
        assert count_strips_of_form(p, [5], [SIX], [SIX]) == 3
        assert count_strips_of_form(p, G_WORD, G_WORD, G_WORD) == 2
        assert count_strips_of_form(p, G_WORD, H_WORD, H_WORD) == 3
        assert count_strips_of_form(p, G_WORD, H_WORD, G_WORD) == 1

    @pytest.mark.parametrize("word", [[SIX], list(G_WORD), list(H_WORD)])
    def test_strips_realize_as_flat_pieces(self, lazy_v01, word):
        for patch in strips_on_geodesic(lazy_v01, word, side="both"):
            assert verify_patch(lazy_v01, patch) == 6

    def test_multi_period_realization(self, lazy_v01, p):
        for s in strips_on_word(p, [SIX]):
            patch = realize_strip(lazy_v01, s, periods=4)
            assert verify_patch(lazy_v01, patch) == 6
            assert gauss_bonnet_audit(patch.image_triangles()) == 6

    def test_shifted_start_gives_same_count(self, lazy_v01, p):
        v = lazy_v01.trace([SIX, SIX])
        for s in strips_on_word(p, [SIX]):
            assert verify_patch(lazy_v01, realize_strip(lazy_v01, s, start=v)) == 6

    def test_height_two(self, p):
        tall = strips_on_word(p, [SIX], height=2)
        assert all(s.height == 2 for s in tall)
        low = {s.layers[0] for s in strips_on_word(p, [SIX])}
        assert {s.layers[0] for s in tall} <= low

    def test_errors(self, p):
        with pytest.raises(ValueError):
            strips_on_word(p, [1, -1])
        with pytest.raises(ValueError):
            strips_on_word(p, [SIX], side="up")

    def test_word_helpers(self):
        assert reverse_word([1, -2]) == (2, -1)
        assert same_cyclic([1, 2, 1, 2], [2, 1])
        assert not same_cyclic([1, 2], [1, 3])


class TestProfile:
    def test_margin_monotone_and_totals(self, ball):
        radii = radius_grid(1.2)
        a = mesoscopic_profile(ball, 0, radii, margin=0)
        b = mesoscopic_profile(ball, 0, radii, margin=1)
        assert a.totals == b.totals
        assert all(x <= y for x, y in zip(a.counts, b.counts))
        assert a.counts == [0] * len(radii)
        assert a.totals[:3] == [24] * 3

    def test_out_of_ball(self, ball_v01_3):
        with pytest.raises(OutOfBall):
            mesoscopic_profile(ball_v01_3, 0, [1.0], margin=2)


class TestMeso:
    @pytest.mark.parametrize("k,m,bound", [(8, 2, 1), (10, 2, 1), (12, 2, 1), (14, 3, 4)])
    def test_mu_and_bound(self, k, m, bound):
        assert mu(k) == m
        assert meso_bound(k) == bound

    def test_k8_construction(self):
        res = meso_lower_bound_check(8)
        assert res.flat_checked
        assert res.constructed == res.nu ** 2 == 4
        assert res.non_extendable >= res.bound
        assert res.b_path_distance == 2


class TestProbe:
    def test_free_products(self, lazy_v02):
        ok, n, ends = free_semigroup_probe(lazy_v02, [[3, 4], [5, 6, 7, 2, 3, 4]], 4)
        assert ok and n == ends == 30

    def test_relation_detected(self, lazy_v02):
        ok, n, ends = free_semigroup_probe(lazy_v02, [[1, 1, 1], [3, 4]], 2)
        assert not ok and (n, ends) == (6, 5)

    def test_errors(self, ball_v01_3):
        with pytest.raises(ValueError):
            free_semigroup_probe(ball_v01_3, [], 2)
        with pytest.raises(OutOfBall):
            free_semigroup_probe(ball_v01_3, [[1, 2]], 3)
