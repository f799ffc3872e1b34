"""One-vertex triangle complexes given by 8 signed triples, their links,
and the exhaustive classification of the orientable ones whose link is
ample."""

from __future__ import annotations

import json
from dataclasses import dataclass
from itertools import permutations
from typing import Iterable, Sequence

import numpy as np

from .linkgraph import FLAT, SHARP, LinkGraph, is_ample

NUM_LETTERS = 8
NUM_FACES = 8
TYPE_TAGS = ("I", "II", "III", "IV", "V", "VI")


class PresentationError(ValueError):
    pass


@dataclass(frozen=True)
class Presentation:
    """Eight faces ``[x, y, z]`` over signed letters ``±1..±8``.

    A negative entry means the face runs against the orientation of that
    loop.  Every letter occurs exactly three times.
    """

    faces: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        faces = tuple(tuple(int(x) for x in f) for f in self.faces)
        if len(faces) != NUM_FACES:
            raise PresentationError(f"expected {NUM_FACES} faces, got {len(faces)}")
        counts = [0] * (NUM_LETTERS + 1)
        for f in faces:
            if len(f) != 3:
                raise PresentationError(f"face {list(f)} is not a triple")
            for x in f:
                if x == 0 or abs(x) > NUM_LETTERS:
                    raise PresentationError(f"letter {x} out of range")
                counts[abs(x)] += 1
        bad = [i for i in range(1, NUM_LETTERS + 1) if counts[i] != 3]
        if bad:
            raise PresentationError(
                "letters must occur exactly 3 times; offending: "
                + ", ".join(f"{i} (x{counts[i]})" for i in bad))
        object.__setattr__(self, "faces", faces)

    @property
    def orientable(self) -> bool:
        # all-positive lists are coherently oriented by construction
        return all(x > 0 for f in self.faces for x in f)

    @property
    def adjacent_identifications(self) -> int:
        """Number of faces of shape ``[x, x, .]`` up to rotation."""
        return sum(1 for f in self.faces if not _all_distinct_abs(f))

    @property
    def type_tag(self) -> str:
        k = self.adjacent_identifications
        return TYPE_TAGS[k] if k < len(TYPE_TAGS) else str(k)

    def to_json(self) -> str:
        return json.dumps({"faces": [list(f) for f in self.faces]})

    def relabel(self, perm: Sequence[int]) -> "Presentation":
        """Apply the letter map ``i -> perm[i-1]`` (signed images allowed)."""
        return Presentation(tuple(
            tuple((1 if x > 0 else -1) * perm[abs(x) - 1] for x in f) for f in self.faces))


def _all_distinct_abs(f) -> bool:
    return len({abs(x) for x in f}) == 3


def parse_presentation(text: str) -> Presentation:
    """Read ``{"faces": [[1, 2, 6], ...]}``; a bare list of triples is also accepted."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise PresentationError(f"malformed presentation JSON: {exc}") from None
    if isinstance(data, dict):
        if "faces" not in data:
            raise PresentationError("missing 'faces' key")
        data = data["faces"]
    if not isinstance(data, list) or not all(isinstance(f, list) for f in data):
        raise PresentationError("faces must be a list of triples")
    if not all(isinstance(x, int) for f in data for x in f):
        raise PresentationError("face entries must be integers")
    return Presentation(tuple(tuple(f) for f in data))


# ----------------------------------------------------------------------
# link


def flat_vertex(i: int) -> int:
    return i - 1


def sharp_vertex(i: int) -> int:
    return NUM_LETTERS + i - 1


def germ_start(g: int) -> int:
    """Link vertex of the initial germ of signed letter ``g``."""
    return flat_vertex(g) if g > 0 else sharp_vertex(-g)


def germ_end(g: int) -> int:
    """Link vertex of the terminal germ of signed letter ``g``."""
    return sharp_vertex(g) if g > 0 else flat_vertex(-g)


def germ_letter(v: int) -> int:
    """Signed letter whose initial germ is link vertex ``v``."""
    return v + 1 if v < NUM_LETTERS else -(v - NUM_LETTERS + 1)


def relator(face) -> tuple[int, int, int]:
    """Boundary word of a face: ``[x, y, z]`` is bounded by the path
    ``z y x`` (so the corner where ``y`` ends and ``x`` starts gives the
    link edge ``x♭ y♯``)."""
    return (face[2], face[1], face[0])


LINK_LABELS = tuple([(i, FLAT) for i in range(1, 9)] + [(i, SHARP) for i in range(1, 9)])


def link_edges(p: Presentation) -> list[tuple[int, int]]:
    edges = []
    for f in p.faces:
        for k in range(3):
            x, y = f[k], f[(k + 1) % 3]
            edges.append((germ_start(x), germ_end(y)))
    return edges


def link_of(p: Presentation) -> LinkGraph:
    """Labelled link on ``{i♭, i♯}``: consecutive entries ``x, y`` of a
    face join ``x♭`` to ``y♯``, with ♭/♯ exchanged for inverted letters.
    ``i♭`` is the initial germ of loop ``i`` and ``i♯`` its terminal germ.

    Vertex ``i-1`` is ``i♭`` and ``7+i`` is ``i♯``.  A loop or repeated
    edge is kept so that :func:`is_rank74` can reject it.
    """
    return LinkGraph(2 * NUM_LETTERS, tuple(link_edges(p)), LINK_LABELS)


def is_rank74(p: Presentation) -> bool:
    g = link_of(p)
    return g.is_simple and is_ample(g)


def euler_characteristic(p: Presentation) -> int:
    letters = {abs(x) for f in p.faces for x in f}
    return 1 - len(letters) + len(p.faces)


# ----------------------------------------------------------------------
# equivalence


def _face_variants(f, reversal):
    x, y, z = f
    out = [(x, y, z), (y, z, x), (z, x, y)]
    if reversal:
        r = (-z, -y, -x)
        out += [(r[0], r[1], r[2]), (r[1], r[2], r[0]), (r[2], r[0], r[1])]
    return out


def _face_key(f, reversal=False):
    return min(_face_variants(f, reversal))


def presentations_isomorphic(p: Presentation, q: Presentation, *,
                             letter_inversion: bool = False,
                             face_reversal: bool = False) -> bool:
    """Whether a letter permutation carries the faces of ``p`` onto those of
    ``q`` up to rotation inside each triple and reordering of triples.

    The defaults give orientation-preserving equivalence.  For signed
    presentations ``letter_inversion`` also allows ``i -> -j`` and
    ``face_reversal`` identifies ``[x, y, z]`` with ``[-z, -y, -x]``.
    """
    if p.adjacent_identifications != q.adjacent_identifications:
        return False
    target: dict[tuple, int] = {}
    for f in q.faces:
        k = _face_key(f, face_reversal)
        target[k] = target.get(k, 0) + 1
    faces = sorted(p.faces, key=lambda f: -len({abs(x) for x in f}))
    images = [s * j for j in range(1, 9) for s in ((1, -1) if letter_inversion else (1,))]

    def image(x, phi):
        y = phi[abs(x)]
        return y if x > 0 else -y

    def rec(k, phi, used):
        if k == len(faces):
            return True
        f = faces[k]
        free = [abs(x) for x in f if abs(x) not in phi]
        free = list(dict.fromkeys(free))
        if not free:
            key = _face_key(tuple(image(x, phi) for x in f), face_reversal)
            if target.get(key, 0) == 0:
                return False
            target[key] -= 1
            ok = rec(k + 1, phi, used)
            target[key] += 1
            return ok
        a = free[0]
        for img in images:
            if abs(img) in used:
                continue
            phi[a] = img
            used.add(abs(img))
            if rec(k, phi, used):
                del phi[a]
                used.discard(abs(img))
                return True
            del phi[a]
            used.discard(abs(img))
        return False

    return rec(0, {}, set())


_PERMS = None


def _perm_table():
    global _PERMS
    if _PERMS is None:
        _PERMS = np.array(list(permutations(range(1, 9))), dtype=np.int16)
    return _PERMS


def canonical_faces(p: Presentation) -> tuple[tuple[int, int, int], ...]:
    """Lexicographically least face list over all letter permutations, each
    triple in its least rotation and the triples sorted.

    Letters keep their signs; this is the orientation-preserving canonical
    form and is exact for signed input under the same equivalence.
    """
    perms = _perm_table()
    arr = np.array(p.faces, dtype=np.int16)                     # (8, 3)
    sign = np.sign(arr)
    img = perms[:, np.abs(arr) - 1] * sign                      # (P, 8, 3)
    # encode signed letters 1..8 as 1..8, -1..-8 as 9..16 to order them
    enc = np.where(img > 0, img, 8 - img).astype(np.int32)
    a, b, c = enc[..., 0], enc[..., 1], enc[..., 2]
    base = 17
    r0 = (a * base + b) * base + c
    r1 = (b * base + c) * base + a
    r2 = (c * base + a) * base + b
    code = np.minimum(np.minimum(r0, r1), r2)                   # (P, 8)
    code.sort(axis=1)
    order = np.lexsort(code.T[::-1])
    best = code[order[0]]
    faces = []
    for v in best:
        v = int(v)
        tri = (v // (base * base), (v // base) % base, v % base)
        faces.append(tuple(t if t <= 8 else 8 - t for t in tri))
    return tuple(faces)


def mirror(p: Presentation) -> Presentation:
    """Orientation-reversed complex: every triple read backwards."""
    return Presentation(tuple((f[2], f[1], f[0]) for f in p.faces))


# ----------------------------------------------------------------------
# classification


@dataclass(frozen=True)
class ComplexClass:
    faces: tuple[tuple[int, int, int], ...]
    type_tag: str
    orientable: bool

    @property
    def presentation(self) -> Presentation:
        return Presentation(self.faces)


class _LinkState:
    """Incremental test for repeated edges and 4-cycles in the link of a
    partial positive presentation (bipartite, so these are the only short
    cycles)."""

    def __init__(self):
        self.out = [set() for _ in range(NUM_LETTERS + 1)]
        self.inc = [set() for _ in range(NUM_LETTERS + 1)]

    def can_add(self, x, y) -> bool:
        if y in self.out[x]:
            return False
        for z in self.inc[y]:
            if z != x and self.out[z] & self.out[x]:
                return False
        return True

    def add(self, x, y):
        self.out[x].add(y)
        self.inc[y].add(x)

    def remove(self, x, y):
        self.out[x].discard(y)
        self.inc[y].discard(x)

    def try_face(self, f) -> list | None:
        added = []
        for k in range(3):
            x, y = f[k], f[(k + 1) % 3]
            if not self.can_add(x, y):
                for e in reversed(added):
                    self.remove(*e)
                return None
            self.add(x, y)
            added.append((x, y))
        return added

    def undo(self, added):
        for e in reversed(added):
            self.remove(*e)


def _least_rotation_from(f, m):
    rots = [r for r in _face_variants(f, False) if r[0] == m]
    return min(rots)


def _search_full(budget):
    """Backtracking over positive presentations.

    Faces are added so that each new face starts with the smallest letter
    that is used but not exhausted (or the smallest fresh letter), faces
    sharing that first letter come in nondecreasing order, and a letter not
    used so far may only be introduced as the smallest such letter.
    """
    counts = [0] + [3] * NUM_LETTERS
    faces: list[tuple[int, int, int]] = []
    state = _LinkState()
    found: list[tuple] = []
    nodes = 0

    def fresh_min():
        for i in range(1, NUM_LETTERS + 1):
            if counts[i] == 3:
                return i
        return None

    def rec():
        nonlocal nodes
        nodes += 1
        if nodes > budget:
            from .linkgraph import BudgetExceeded
            raise BudgetExceeded("classification search exceeded its node budget")
        if len(faces) == NUM_FACES:
            found.append(tuple(faces))
            return
        open_letters = [i for i in range(1, NUM_LETTERS + 1) if 0 < counts[i] < 3]
        m = open_letters[0] if open_letters else fresh_min()
        prev = max((f for f in faces if f[0] == m), default=None)
        counts[m] -= 1
        for y in _candidates(counts, fresh_min):
            counts[y] -= 1
            for z in _candidates(counts, fresh_min):
                counts[z] -= 1
                face = (m, y, z)
                if _least_rotation_from(face, m) == face and (prev is None or face >= prev):
                    added = state.try_face(face)
                    if added is not None:
                        faces.append(face)
                        rec()
                        faces.pop()
                        state.undo(added)
                counts[z] += 1
            counts[y] += 1
        counts[m] += 1

    rec()
    return found


def _candidates(counts, fresh_min):
    f = fresh_min()
    out = [i for i in range(1, NUM_LETTERS + 1) if 0 < counts[i] < 3]
    if f is not None:
        out.append(f)
    return sorted(out)


# The six seeds used to split the search by hand; ``None`` marks a free slot.
SIX_CASES = (
    [(1, 2, 3), (4, 4, 5), (1, None, None), (2, None, None), (3, None, None),
     (1, None, None), (2, None, None), (3, None, None)],
    [(1, 2, 3), (4, 5, 6), (1, None, None), (2, None, None), (3, None, None),
     (1, None, None), (2, None, None), (3, None, None)],
    [(1, 2, 3), (1, 3, 2), (1, 4, None), (2, None, None), (3, None, None),
     (None, None, None), (None, None, None), (None, None, None)],
    [(1, 2, 3), (1, 3, 4), (3, 5, None), (1, None, None), (2, None, None),
     (2, None, None), (None, None, None), (None, None, None)],
    [(1, 2, 3), (1, 3, 4), (3, 5, None), (2, 1, None), (2, None, None),
     (None, None, None), (None, None, None), (None, None, None)],
    [(1, 2, 3), (1, 3, 4), (2, 1, None), (3, 2, None), (None, None, None),
     (None, None, None), (None, None, None), (None, None, None)],
)


def _search_seed(seed, budget):
    counts = [0] + [3] * NUM_LETTERS
    for f in seed:
        for x in f:
            if x is not None:
                counts[x] -= 1
    if min(counts[1:]) < 0:
        raise ValueError("seed uses a letter more than 3 times")
    slots = [(k, j) for k, f in enumerate(seed) for j in range(3) if f[j] is None]
    grid = [list(f) for f in seed]
    state = _LinkState()
    found = []
    nodes = 0
    # fully free faces are interchangeable: keep them in nondecreasing order
    free_faces = [k for k, f in enumerate(seed) if all(x is None for x in f)]

    def face_done(k):
        return all(x is not None for x in grid[k])

    def rec(s):
        nonlocal nodes
        nodes += 1
        if nodes > budget:
            from .linkgraph import BudgetExceeded
            raise BudgetExceeded("six-case search exceeded its node budget")
        if s == len(slots):
            found.append(tuple(tuple(f) for f in grid))
            return
        k, j = slots[s]
        for x in range(1, NUM_LETTERS + 1):
            if counts[x] == 0:
                continue
            counts[x] -= 1
            grid[k][j] = x
            ok = True
            added = None
            if face_done(k):
                if k in free_faces:
                    i = free_faces.index(k)
                    if i and tuple(grid[free_faces[i - 1]]) > tuple(grid[k]):
                        ok = False
                if ok:
                    added = state.try_face(tuple(grid[k]))
                    ok = added is not None
            if ok:
                rec(s + 1)
                if added:
                    state.undo(added)
            grid[k][j] = None
            counts[x] += 1

    # faces already complete in the seed
    pre = []
    for k, f in enumerate(seed):
        if face_done(k):
            added = state.try_face(tuple(grid[k]))
            if added is None:
                return []
            pre.append(added)
    rec(0)
    return found


def _dedupe(candidates: Iterable[tuple]) -> list[ComplexClass]:
    seen: dict[tuple, ComplexClass] = {}
    # cheap invariant first, exact canonical form only for new buckets
    for faces in candidates:
        p = Presentation(faces)
        if not is_rank74(p):
            continue
        key = tuple(sorted(_face_key(f) for f in faces))
        if key in seen:
            continue
        canon = canonical_faces(p)
        cls = ComplexClass(canon, p.type_tag, True)
        seen[key] = cls
        seen.setdefault(("canon",) + canon, cls)
    classes = {c.faces: c for k, c in seen.items() if k and k[0] == "canon"}
    return [classes[k] for k in sorted(classes, key=lambda f: (Presentation(f).adjacent_identifications, f))]


def classify_orientable(mode: str = "full", budget: int = 50_000_000,
                        case_order: Sequence[int] | None = None) -> list[ComplexClass]:
    """All orientable one-vertex complexes with ample link, one canonical
    representative per class, ordered by type then faces.

    ``mode="full"`` runs one symmetry-reduced backtracking search;
    ``mode="six-cases"`` completes the six hand-made seeds instead.
    """
    if mode == "full":
        cands = _search_full(budget)
    elif mode == "six-cases":
        order = list(case_order) if case_order is not None else range(len(SIX_CASES))
        cands = []
        for i in order:
            cands.extend(_search_seed(SIX_CASES[i], budget))
    else:
        raise ValueError(f"unknown classification mode {mode!r}")
    return _dedupe(cands)


def classify_by_link_matchings() -> list[ComplexClass]:
    """Independent route: fix L_{7/4} as the bipartite link, choose which
    sharp vertex pairs with each flat vertex, and decompose the resulting
    letter digraph into directed triangles."""
    from .linkgraph import circulant_factor
    factor = circulant_factor(8, (0, 2, 7))
    arcs_from = [[j for j in range(8) if factor[i][j]] for i in range(8)]
    found = []
    for sigma in permutations(range(8)):
        # flat vertex i is letter i+1; sharp vertex sigma[j] belongs to letter j+1
        letter_of_sharp = [0] * 8
        for j, s in enumerate(sigma):
            letter_of_sharp[s] = j + 1
        out = [[letter_of_sharp[s] for s in arcs_from[i]] for i in range(8)]
        arcs = {(i + 1, y) for i in range(8) for y in out[i]}
        if len(arcs) != 24:
            continue
        for dec in _triangle_decompositions(arcs):
            found.append(dec)
    return _dedupe(found)


def _triangle_decompositions(arcs):
    arcs = set(arcs)
    out_map: dict[int, list[int]] = {}
    for x, y in arcs:
        out_map.setdefault(x, []).append(y)
    result = []

    def rec(remaining, faces):
        if not remaining:
            result.append(tuple(sorted(faces)))
            return
        x, y = min(remaining)
        for z in out_map.get(y, []):
            if (y, z) in remaining and (z, x) in remaining and len({(x, y), (y, z), (z, x)}) == 3:
                rest = remaining - {(x, y), (y, z), (z, x)}
                rec(rest, faces + [_least_rotation_from((x, y, z), min(x, y, z))])

    rec(frozenset(arcs), [])
    return result


# ----------------------------------------------------------------------
# published complexes


PRESETS: dict[str, tuple[tuple[int, int, int], ...]] = {
    "V0": ((1, 2, 6), (2, 3, 7), (3, 4, 8), (4, 5, 1), (5, 6, 2), (6, 7, 3), (7, 8, 4), (8, 1, 5)),
    "V0_1": ((1, 2, 3), (1, 4, 5), (1, 6, 4), (2, 6, 8), (2, 8, 5), (3, 6, 7), (3, 7, 5), (4, 8, 7)),
    "V0_2": ((1, 2, 3), (1, 4, 5), (1, 6, 7), (2, 4, 6), (2, 8, 5), (3, 6, 8), (3, 7, 5), (4, 8, 7)),
    "V0_2_check": ((1, 2, 3), (1, 4, 5), (1, 6, 7), (2, 6, 4), (2, 8, 5), (3, 6, 8), (3, 7, 5), (4, 8, 7)),
    "V1": ((1, 1, 2), (1, 3, 4), (2, 5, 6), (2, 7, 8), (3, 5, 7), (3, 6, 5), (4, 6, 8), (4, 8, 7)),
    "V2_1": ((1, 1, 3), (2, 2, 3), (1, 4, 5), (2, 7, 8), (3, 5, 7), (4, 6, 8), (4, 7, 6), (5, 8, 6)),
    "V2_2": ((1, 1, 3), (2, 2, 4), (3, 7, 4), (1, 4, 6), (2, 5, 3), (5, 7, 8), (5, 8, 6), (6, 8, 7)),
    "V2_3": ((1, 1, 3), (2, 2, 4), (1, 5, 2), (3, 6, 4), (3, 7, 6), (4, 6, 8), (5, 7, 8), (5, 8, 7)),
    "V2_4": ((1, 1, 3), (2, 2, 4), (1, 5, 2), (3, 6, 5), (3, 7, 8), (4, 5, 8), (4, 6, 7), (6, 8, 7)),
    "V3": ((1, 1, 4), (2, 2, 4), (3, 3, 5), (1, 3, 6), (2, 5, 7), (4, 7, 8), (5, 8, 6), (6, 8, 7)),
    "V4_1": ((1, 1, 5), (2, 2, 5), (3, 3, 6), (4, 4, 6), (1, 3, 8), (2, 7, 4), (5, 8, 7), (6, 7, 8)),
    "V4_2": ((1, 1, 5), (2, 2, 5), (3, 3, 6), (4, 4, 7), (1, 3, 8), (2, 7, 6), (4, 8, 6), (5, 8, 7)),
    "Vbar": ((3, -1, 2), (3, -2, 4), (2, 6, -3), (5, -1, -6), (7, -4, 5), (8, -6, 7), (5, 8, 7), (1, 4, -8)),
}

ORIENTABLE_PRESETS = tuple(k for k in PRESETS if k != "Vbar")


def preset(name: str) -> Presentation:
    try:
        return Presentation(PRESETS[name])
    except KeyError:
        raise PresentationError(f"unknown preset {name!r}; choose from {', '.join(PRESETS)}") from None
