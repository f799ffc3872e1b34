"""Smith normal form and first homology."""

import itertools
import math
import random

import pytest
from hypothesis import given, settings, strategies as st

from polyrank.complexes import ORIENTABLE_PRESETS, PRESETS, preset
from polyrank.homology import (PI1_PRESENTATIONS, PUBLISHED_H1, AbelianGroup, WordError,
                               abelianization, boundary_matrix, cokernel, determinant,
                               h1_of_complex, invariant_factors, matmul, parse_word,
                               smith_normal_form)

matrices = st.integers(1, 5).flatmap(lambda r: st.integers(1, 5).flatmap(
    lambda c: st.lists(st.lists(st.integers(-9, 9), min_size=c, max_size=c),
                       min_size=r, max_size=r)))


def minor_gcds(m):
    """Determinantal divisors: ``g_k`` is the gcd of all k x k minors."""
    rows, cols = len(m), len(m[0])
    out = []
    for k in range(1, min(rows, cols) + 1):
        g = 0
        for ri in itertools.combinations(range(rows), k):
            for ci in itertools.combinations(range(cols), k):
                g = math.gcd(g, determinant([[m[i][j] for j in ci] for i in ri]))
        out.append(g)
    return out


def brute_det(m):
    n = len(m)
    total = 0
    for perm in itertools.permutations(range(n)):
        inv = sum(perm[i] > perm[j] for i in range(n) for j in range(i + 1, n))
        total += (-1) ** inv * math.prod(m[i][perm[i]] for i in range(n))
    return total


class TestSmithNormalForm:
    @settings(max_examples=150, deadline=None)
    @given(matrices)
    def test_matches_determinantal_divisors(self, m):
        diag, U, V = smith_normal_form(m)
        g = minor_gcds(m)
        prod = 1
        for k, d in enumerate(diag):
            prod *= d
            assert prod == g[k]
        assert all(d >= 0 for d in diag)
        nz = [d for d in diag if d]
        assert all(b % a == 0 for a, b in zip(nz, nz[1:]))
        assert diag[len(nz):] == [0] * (len(diag) - len(nz))

    @settings(max_examples=150, deadline=None)
    @given(matrices)
    def test_transforms_are_unimodular(self, m):
        diag, U, V = smith_normal_form(m)
        assert abs(determinant(U)) == 1 and abs(determinant(V)) == 1
        d = matmul(matmul(U, m), V)
        assert all(d[i][j] == (diag[i] if i == j else 0)
                   for i in range(len(m)) for j in range(len(m[0])))

    def test_many_random_8x8(self):
        rnd = random.Random(0)
        for _ in range(200):
            m = [[rnd.randint(-9, 9) for _ in range(8)] for _ in range(8)]
            diag, U, V = smith_normal_form(m)
            assert abs(determinant(U)) == 1 and abs(determinant(V)) == 1
            assert math.prod(diag) == abs(determinant(m))

    @settings(max_examples=60, deadline=None)
    @given(st.integers(1, 5).flatmap(lambda n: st.lists(
        st.lists(st.integers(-6, 6), min_size=n, max_size=n), min_size=n, max_size=n)))
    def test_determinant_matches_leibniz(self, m):
        assert determinant(m) == brute_det(m)

    def test_empty_and_zero(self):
        assert cokernel([], 3) == AbelianGroup(3)
        assert cokernel([[0, 0]], 2) == AbelianGroup(2)
        assert smith_normal_form([[0, 0], [0, 0]])[0] == [0, 0]

    def test_invariant_factors(self):
        assert invariant_factors([2, 3]) == (6,)
        assert invariant_factors([4, 6, 10]) == (2, 2, 60)
        assert invariant_factors([]) == ()


class TestAbelianGroup:
    @pytest.mark.parametrize("text,group", [
        ("0", AbelianGroup(0)), ("Z", AbelianGroup(1)), ("Z^2", AbelianGroup(2)),
        ("Z/3 x Z^2", AbelianGroup(2, (3,))), ("(Z/3)^3", AbelianGroup(0, (3, 3, 3))),
        ("(Z/2)^2 x Z/12", AbelianGroup(0, (2, 2, 12))), ("Z/2 x Z/3", AbelianGroup(0, (6,))),
    ])
    def test_parse(self, text, group):
        assert AbelianGroup.parse(text) == group

    def test_str_roundtrip(self):
        for text in PUBLISHED_H1.values():
            g = AbelianGroup.parse(text)
            assert AbelianGroup.parse(str(g)) == g

    def test_validation(self):
        with pytest.raises(ValueError):
            AbelianGroup(0, (4, 6))
        with pytest.raises(ValueError):
            AbelianGroup.parse("Q")


class TestWords:
    def test_basic_tokens(self):
        assert parse_word("s t' S^2", ["s", "t"]) == [(0, 1), (1, -1), (0, -2)]

    def test_conjugate_and_equation(self):
        assert parse_word("t^s", ["s", "t"]) == [(0, -1), (1, 1), (0, 1)]
        assert parse_word("s = t", ["s", "t"]) == [(0, 1), (1, -1)]

    def test_identity(self):
        assert parse_word("s s' e", ["s", "t"]) == [(0, 1), (0, -1)]

    @pytest.mark.parametrize("bad", ["x", "s^", "s?"])
    def test_errors(self, bad):
        with pytest.raises(WordError):
            parse_word(bad, ["s", "t"])

    def test_abelianization_examples(self):
        assert abelianization(2, ["s t S T"]) == AbelianGroup(2)
        assert abelianization(2, ["s^2", "t^3", "s t S T"]) == AbelianGroup(0, (6,))
        assert abelianization(["a"], ["a^5"]) == AbelianGroup(0, (5,))


class TestComplexHomology:
    @pytest.mark.parametrize("name", PRESETS)
    def test_boundary_rows_sum_to_three_letters(self, name):
        b = boundary_matrix(preset(name))
        assert len(b) == 8 and all(sum(abs(x) for x in r) <= 3 for r in b)

    @pytest.mark.parametrize("name", ORIENTABLE_PRESETS)
    def test_h1_matches_published(self, name):
        assert h1_of_complex(preset(name)) == AbelianGroup.parse(PUBLISHED_H1[name])

    @pytest.mark.parametrize("name", PRESETS)
    def test_pi1_abelianization_matches_published(self, name):
        n, rels = PI1_PRESENTATIONS[name]
        assert abelianization(n, rels) == AbelianGroup.parse(PUBLISHED_H1[name])

    @pytest.mark.parametrize("name", [n for n in ORIENTABLE_PRESETS
                                      if AbelianGroup.parse(PUBLISHED_H1[n]).free_rank == 0])
    def test_finite_orders_by_determinant(self, name):
        # a square relation matrix presents a group of order |det|
        g = h1_of_complex(preset(name))
        assert abs(brute_det(boundary_matrix(preset(name)))) == math.prod(g.torsion)

    def test_vbar_face_list_disagrees_with_published(self):
        # finding: the signed face list gives Z/8 while the group presentation
        # and the published value give Z
        assert h1_of_complex(preset("Vbar")) == AbelianGroup(0, (8,))
