"""Presentations, links and the classification of orientable complexes."""

import itertools
import json
import random

import networkx as nx
import pytest
from hypothesis import given, settings, strategies as st

from polyrank.complexes import (ORIENTABLE_PRESETS, PRESETS, Presentation, PresentationError,
                                canonical_faces, classify_by_link_matchings, classify_orientable,
                                euler_characteristic, germ_end, germ_letter, germ_start,
                                is_rank74, link_edges, link_of, mirror, parse_presentation,
                                preset, presentations_isomorphic, relator)
from polyrank.linkgraph import are_isomorphic, girth, l74

PUBLISHED_TYPES = {
    "V0": "I", "V0_1": "I", "V0_2": "I", "V0_2_check": "I", "V1": "II",
    "V2_1": "III", "V2_2": "III", "V2_3": "III", "V2_4": "III",
    "V3": "IV", "V4_1": "V", "V4_2": "V",
}
# V0_2_check differs from V0_2 by one reversed face and is a separate class
DUPLICATES: set[tuple[str, str]] = set()


def nx_link(p):
    """Link built directly from the triangle corners: at the vertex, the
    corner between consecutive sides ``x, y`` of a face joins the end of
    ``x`` to the start of ``y``."""
    h = nx.MultiGraph()
    h.add_nodes_from([("s", i) for i in range(1, 9)] + [("e", i) for i in range(1, 9)])

    def start(g):
        return ("s", g) if g > 0 else ("e", -g)

    def end(g):
        return ("e", g) if g > 0 else ("s", -g)

    for f in p.faces:
        for k in range(3):
            h.add_edge(start(f[k]), end(f[(k + 1) % 3]))
    return h


def random_relabelling(p, rnd):
    perm = list(range(1, 9))
    rnd.shuffle(perm)
    faces = []
    for f in p.faces:
        f = tuple(perm[x - 1] for x in f)
        k = rnd.randrange(3)
        faces.append(f[k:] + f[:k])
    rnd.shuffle(faces)
    return Presentation(tuple(faces))


class TestPresentation:
    def test_validation(self):
        with pytest.raises(PresentationError):
            Presentation(((1, 2, 3),) * 7)
        with pytest.raises(PresentationError):
            Presentation(tuple((1, 2, 9) for _ in range(8)))
        bad = list(PRESETS["V0"])
        bad[0] = (1, 1, 6)
        with pytest.raises(PresentationError, match="exactly 3 times"):
            Presentation(tuple(bad))

    def test_json_roundtrip(self):
        for name in PRESETS:
            p = preset(name)
            assert parse_presentation(p.to_json()) == p
        assert parse_presentation(json.dumps([list(f) for f in PRESETS["V0"]])) == preset("V0")

    @pytest.mark.parametrize("text", ["{", "{}", '{"faces": 3}', '{"faces": [[1, "a", 2]]}'])
    def test_parse_errors(self, text):
        with pytest.raises(PresentationError):
            parse_presentation(text)

    def test_unknown_preset(self):
        with pytest.raises(PresentationError):
            preset("V9")

    @pytest.mark.parametrize("name", PRESETS)
    def test_euler_characteristic(self, name):
        assert euler_characteristic(preset(name)) == 1

    def test_germs(self):
        for g in range(1, 9):
            assert germ_letter(germ_start(g)) == g
            assert germ_letter(germ_start(-g)) == -g
            assert germ_end(g) == germ_start(-g)

    def test_relator_reverses_face(self):
        assert relator((1, 2, 3)) == (3, 2, 1)


class TestLinks:
    @pytest.mark.parametrize("name", PRESETS)
    def test_link_matches_direct_construction(self, name):
        p = preset(name)
        ours = link_of(p)
        ref = nx_link(p)
        assert len(ours.edges) == ref.number_of_edges() == 24
        h = nx.MultiGraph()
        h.add_nodes_from(range(16))
        h.add_edges_from(ours.edges)
        assert nx.is_isomorphic(h, ref)

    @pytest.mark.parametrize("name", PRESETS)
    def test_published_links_are_l74(self, name):
        p = preset(name)
        assert is_rank74(p)
        assert are_isomorphic(link_of(p), l74())

    @pytest.mark.parametrize("name", ORIENTABLE_PRESETS)
    def test_published_types(self, name):
        assert preset(name).type_tag == PUBLISHED_TYPES[name]

    def test_vbar_not_orientable(self):
        assert not preset("Vbar").orientable

    def test_degenerate_links_rejected(self):
        p = Presentation(((1, 2, 3), (1, 2, 3), (1, 2, 3), (4, 5, 6), (4, 5, 6), (4, 5, 6),
                          (7, 8, 7), (8, 7, 8)))
        assert not is_rank74(p)
        assert girth(link_of(p)) <= 2


class TestIsomorphism:
    @settings(max_examples=25, deadline=None)
    @given(st.sampled_from(ORIENTABLE_PRESETS), st.randoms(use_true_random=False))
    def test_relabelling_preserves_class(self, name, rnd):
        p = preset(name)
        q = random_relabelling(p, rnd)
        assert presentations_isomorphic(p, q)
        assert canonical_faces(p) == canonical_faces(q)

    def test_distinct_published_classes(self):
        names = list(ORIENTABLE_PRESETS)
        for a, b in itertools.combinations(names, 2):
            same = presentations_isomorphic(preset(a), preset(b))
            assert same == ((a, b) in DUPLICATES)
            assert same == (canonical_faces(preset(a)) == canonical_faces(preset(b)))

    def test_mirror_is_involution(self):
        for name in ORIENTABLE_PRESETS:
            p = preset(name)
            assert canonical_faces(mirror(mirror(p))) == canonical_faces(p)
            assert is_rank74(mirror(p))


@pytest.fixture(scope="module")
def full():
    return classify_orientable("full")


@pytest.mark.slow
class TestClassification:
    def test_all_classes_rank74(self, full):
        assert all(is_rank74(c.presentation) for c in full)
        keys = [canonical_faces(c.presentation) for c in full]
        assert len(set(keys)) == len(keys)

    def test_every_published_presentation_found(self, full):
        keys = {canonical_faces(c.presentation) for c in full}
        for name in ORIENTABLE_PRESETS:
            assert canonical_faces(preset(name)) in keys

    def test_closed_under_mirror(self, full):
        keys = {canonical_faces(c.presentation) for c in full}
        assert {canonical_faces(mirror(c.presentation)) for c in full} == keys

    def test_matching_route_agrees(self, full):
        other = classify_by_link_matchings()
        assert {c.faces for c in other} == {c.faces for c in full}

    def test_random_completion_oracle(self, full):
        # random orientable face lists that happen to be rank 7/4 fall in a found class
        keys = {canonical_faces(c.presentation) for c in full}
        rnd = random.Random(5)
        hits = 0
        for _ in range(20000):
            letters = [i for i in range(1, 9) for _ in range(3)]
            rnd.shuffle(letters)
            try:
                p = Presentation(tuple(tuple(letters[3 * i:3 * i + 3]) for i in range(8)))
            except PresentationError:
                continue
            if is_rank74(p):
                hits += 1
                assert canonical_faces(p) in keys
        assert hits > 0

    def test_six_case_mode_subset(self, full):
        six = classify_orientable("six-cases")
        assert {c.faces for c in six} <= {c.faces for c in full}
