"""Development of balls in the universal cover of a one-vertex complex,
word tracing, local geodesics, rings and the Gauss-Bonnet audit.

Vertices of the cover are group elements; the neighbour of ``v`` along the
signed letter ``g`` is ``v*g``.  Signed letters are stored as indices
``2*(|g|-1) + (g < 0)`` so that inversion is ``i ^ 1``.
"""

from __future__ import annotations

import hashlib
import os
import random
import re
import struct
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .complexes import Presentation, germ_end, germ_letter, germ_start, link_of, relator
from .linkgraph import BudgetExceeded, distance_matrix

DEFAULT_BUDGET = 10_000_000
NGERMS = 16


class DevelopmentError(RuntimeError):
    """Inconsistent development: the link is not ample or a bug."""


class OutOfBall(LookupError):
    pass


def letter_index(g: int) -> int:
    return 2 * (abs(g) - 1) + (g < 0)


def index_letter(i: int) -> int:
    return -(i // 2 + 1) if i & 1 else i // 2 + 1


def budget_from_env(default: int = DEFAULT_BUDGET) -> int:
    val = os.environ.get("POLYRANK_BUDGET")
    if not val:
        return default
    try:
        b = int(val)
    except ValueError:
        raise ValueError(f"POLYRANK_BUDGET must be an integer, got {val!r}") from None
    if b <= 0:
        raise ValueError("POLYRANK_BUDGET must be positive")
    return b


def parse_letters(text: str) -> list[int]:
    """Read a word of signed letters.

    Accepts ``"6 1 -5 -1"``, ``"6,1,-5,-1"``, compact digit strings such as
    ``"271834"`` and inverse marks ``1-``, ``1'`` or ``1⁻``.
    """
    text = text.strip()
    if not text:
        return []
    if re.search(r"[\s,]", text):
        toks = [t for t in re.split(r"[\s,]+", text) if t]
        out = []
        for t in toks:
            out += parse_letters(t) if not re.fullmatch(r"-?\d+", t) else [int(t)]
        return _check_letters(out)
    out = []
    for m in re.finditer(r"(-?)a?(\d)(['⁻-]?)|(.)", text):
        if m.group(4):
            raise ValueError(f"cannot parse letter at {text[m.start():]!r}")
        g = int(m.group(2))
        if bool(m.group(1)) != bool(m.group(3)):
            g = -g
        out.append(g)
    return _check_letters(out)


def _check_letters(word):
    for g in word:
        if g == 0 or abs(g) > 8:
            raise ValueError(f"letter {g} out of range 1..8")
    return word


def corner_table(p: Presentation) -> list[tuple[int, int, int]]:
    """For each rotation ``(x, y, z)`` of each face relator, the letter
    indices ``(x, y, z^-1)``: the triangle at ``v`` is ``v, v*x, v*z^-1``
    and ``v*x*y = v*z^-1``."""
    out = []
    for f in p.faces:
        r = relator(f)
        for k in range(3):
            x, y, z = r[k], r[(k + 1) % 3], r[(k + 2) % 3]
            out.append((letter_index(x), letter_index(y), letter_index(-z)))
    return out


class _Development:
    """Mutable coset-table style state with union-find coincidences."""

    def __init__(self, p: Presentation, budget: int):
        self.p = p
        self.corners = corner_table(p)
        self.budget = budget
        self.nbr: list[list[int]] = [[-1] * NGERMS]
        self.parent = [0]
        self.dist = [0]
        self.done = [False]
        self.merges = 0

    def find(self, a: int) -> int:
        parent = self.parent
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def _new(self, d: int) -> int:
        if len(self.nbr) >= self.budget:
            raise BudgetExceeded(f"vertex budget {self.budget} exceeded while developing")
        self.nbr.append([-1] * NGERMS)
        self.parent.append(len(self.parent))
        self.dist.append(d)
        self.done.append(False)
        return len(self.nbr) - 1

    def _merge(self, a: int, b: int):
        queue = [(a, b)]
        while queue:
            a, b = queue.pop()
            a, b = self.find(a), self.find(b)
            if a == b:
                continue
            if b < a:
                a, b = b, a
            if self.done[a] or self.done[b]:
                raise DevelopmentError(
                    f"identification involves a completed vertex ({a}, {b}); link is not ample")
            if self.dist[a] != self.dist[b]:
                raise DevelopmentError(
                    f"identified vertices at distances {self.dist[a]} and {self.dist[b]}")
            self.merges += 1
            self.parent[b] = a
            na, nb = self.nbr[a], self.nbr[b]
            for g in range(NGERMS):
                w = nb[g]
                if w < 0:
                    continue
                u = na[g]
                if u < 0:
                    na[g] = self.find(w)
                else:
                    queue.append((u, w))

    def _glue(self, a: int, g: int, b: int):
        """Enforce ``a * g = b``."""
        a, b = self.find(a), self.find(b)
        u, w = self.nbr[a][g], self.nbr[b][g ^ 1]
        if u >= 0 and self.find(u) != b:
            self._merge(u, b)
        if w >= 0 and self.find(w) != a:
            self._merge(w, a)
        a, b = self.find(a), self.find(b)
        self.nbr[a][g] = b
        self.nbr[b][g ^ 1] = a

    def process(self, v: int):
        """Complete the star of ``v``: all 16 neighbours and 24 triangles."""
        v = self.find(v)
        if self.done[v]:
            return
        d = self.dist[v] + 1
        row = self.nbr[v]
        for g in range(NGERMS):
            if row[g] < 0:
                w = self._new(d)
                row = self.nbr[v]
                row[g] = w
                self.nbr[w][g ^ 1] = v
        for g, h, k in self.corners:
            v = self.find(v)
            self._glue(self.nbr[v][g], h, self.nbr[v][k])
        v = self.find(v)
        nb = {self.find(w) for w in self.nbr[v]}
        if len(nb) != NGERMS or v in nb:
            raise DevelopmentError(f"vertex {v} has {len(nb)} distinct neighbours; link is not ample")
        self.done[v] = True

    def parents(self, v: int) -> set[int]:
        d = self.dist[v] - 1
        return {self.find(w) for w in self.nbr[v] if w >= 0 and self.dist[self.find(w)] == d}

    def ensure(self, v: int):
        """Process ``v`` after all of its neighbours one step closer to the
        base, recursively.  This reproduces exactly the local picture an
        eager breadth-first development would produce."""
        stack = [self.find(v)]
        while stack:
            v = self.find(stack[-1])
            if self.done[v]:
                stack.pop()
                continue
            todo = [u for u in self.parents(v) if not self.done[u]]
            if todo:
                stack.extend(todo)
                continue
            self.process(v)
            stack.pop()

    def develop(self, radius: int):
        i = 0
        while i < len(self.nbr):
            if self.find(i) == i and not self.done[i]:
                if self.dist[i] > radius - 1:
                    break
                self.process(i)
            i += 1


@dataclass
class CoverBall:
    """Ball of simplicial radius ``radius`` about vertex 0.

    Vertices at distance at most ``radius - 1`` have complete stars.  In
    ``lazy`` mode the ball is developed on demand by the queries, which is
    how radii far beyond an explicit enumeration are handled; the answers
    are identical to those on the explicit ball.
    """

    presentation: Presentation
    radius: int
    lazy: bool = False
    budget: int = DEFAULT_BUDGET
    base: int = 0
    _dev: _Development = field(init=False, repr=False)
    nbr: list = field(init=False, repr=False)
    dist: list = field(init=False, repr=False)
    complete: list = field(init=False, repr=False)
    _triangles: list | None = field(init=False, default=None, repr=False)

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("radius must be nonnegative")
        self._dev = _Development(self.presentation, self.budget)
        if not self.lazy:
            self._dev.develop(self.radius)
            self._compact()

    def _compact(self):
        dev = self._dev
        roots = [i for i in range(len(dev.nbr)) if dev.find(i) == i]
        roots.sort(key=lambda i: (dev.dist[i], i))
        index = {r: k for k, r in enumerate(roots)}
        self.nbr = [[index[dev.find(w)] if w >= 0 else -1 for w in dev.nbr[r]] for r in roots]
        self.dist = [dev.dist[r] for r in roots]
        self.complete = [dev.done[r] for r in roots]

    # -- queries

    @property
    def num_vertices(self) -> int:
        if self.lazy:
            return sum(1 for i in range(len(self._dev.nbr)) if self._dev.find(i) == i)
        return len(self.nbr)

    def is_complete(self, v: int) -> bool:
        if self.lazy:
            return self._dev.done[self._dev.find(v)]
        return self.complete[v]

    def distance(self, v: int) -> int:
        return self._dev.dist[self._dev.find(v)] if self.lazy else self.dist[v]

    def step(self, v: int, g: int) -> int:
        """Neighbour of ``v`` along signed letter ``g``."""
        if self.lazy:
            dev = self._dev
            v = dev.find(v)
            if dev.dist[v] > self.radius - 1:
                raise OutOfBall(f"step from vertex at distance {dev.dist[v]} leaves radius {self.radius}")
            dev.ensure(v)
            w = dev.find(dev.nbr[dev.find(v)][letter_index(g)])
            # processed vertices are never merged again, so their ids are stable
            if dev.dist[w] <= self.radius - 1:
                dev.ensure(w)
            return dev.find(w)
        if not self.complete[v]:
            raise OutOfBall(f"step from vertex {v} at distance {self.dist[v]} leaves the completed region")
        return self.nbr[v][letter_index(g)]

    def neighbours(self, v: int) -> list[int]:
        return [self.step(v, index_letter(i)) for i in range(NGERMS)]

    def trace(self, word: Sequence[int], start: int | None = None) -> int:
        v = self.base if start is None else start
        for g in word:
            v = self.step(v, g)
        return v

    def sphere_sizes(self) -> list[int]:
        if self.lazy:
            raise ValueError("sphere sizes need an explicit ball")
        sizes = [0] * (self.radius + 1)
        for d in self.dist:
            sizes[d] += 1
        return sizes

    def edges(self) -> list[tuple[int, int, int]]:
        """Directed edges ``(u, u*a_i, i)``."""
        if self.lazy:
            raise ValueError("edge lists need an explicit ball")
        out = []
        for u, row in enumerate(self.nbr):
            for i in range(1, 9):
                w = row[letter_index(i)]
                if w >= 0:
                    out.append((u, w, i))
        return out

    def triangles(self) -> list[tuple[int, int, int, int]]:
        """``(face index, u, u*x, u*x*y)`` for face relator ``x y z``, once each."""
        if self.lazy:
            raise ValueError("triangle lists need an explicit ball")
        if self._triangles is None:
            seen = set()
            for v, ok in enumerate(self.complete):
                if not ok:
                    continue
                row = self.nbr[v]
                for fi, f in enumerate(self.presentation.faces):
                    r = relator(f)
                    for k in range(3):
                        x, z = r[k], r[(k + 2) % 3]
                        c = [0, 0, 0]
                        c[k] = v
                        c[(k + 1) % 3] = row[letter_index(x)]
                        c[(k + 2) % 3] = row[letter_index(-z)]
                        seen.add((fi, c[0], c[1], c[2]))
            self._triangles = sorted(seen)
        return self._triangles

    def triangles_at(self, v: int) -> list[tuple[int, int, int]]:
        """The 24 triangles ``(v, v*x, v*z^-1)`` of the star of ``v``."""
        out = []
        for f in self.presentation.faces:
            r = relator(f)
            for k in range(3):
                x, z = r[k], r[(k + 2) % 3]
                out.append((v, self.step(v, x), self.step(v, -z)))
        return out

    def fingerprint(self) -> str:
        """SHA-256 of the neighbour table, distances and completeness flags."""
        if self.lazy:
            raise ValueError("fingerprints need an explicit ball")
        h = hashlib.sha256()
        for row, d, ok in zip(self.nbr, self.dist, self.complete):
            h.update(struct.pack(f"<{NGERMS}iiB", *row, d, ok))
        return h.hexdigest()

    def stats(self) -> dict:
        return {
            "radius": self.radius,
            "vertices": self.num_vertices,
            "edges": len(self.edges()),
            "triangles": len(self.triangles()),
            "sphere_sizes": self.sphere_sizes(),
        }


def develop_ball(p: Presentation, radius: int, *, lazy: bool = False,
                 budget: int | None = None) -> CoverBall:
    return CoverBall(p, radius, lazy=lazy, budget=budget or budget_from_env())


def trace_word(b: CoverBall, word: Sequence[int]) -> int:
    """End vertex of the path from the base spelling ``word``; raises
    :class:`OutOfBall` if the path leaves the completed region."""
    return b.trace(word)


def is_trivial(b: CoverBall, word: Sequence[int]) -> bool:
    """Whether ``word`` is trivial in the fundamental group.

    Traces the first half forwards and the inverse of the second half, so a
    ball of radius ``ceil(len/2)`` suffices.
    """
    h = (len(word) + 1) // 2
    return b.trace(word[:h]) == b.trace([-g for g in reversed(word[h:])])


def commutator(u: Sequence[int], v: Sequence[int]) -> list[int]:
    inv = lambda w: [-g for g in reversed(w)]
    return list(u) + list(v) + inv(u) + inv(v)


def check_ball(b: CoverBall) -> None:
    """Assert the structural invariants of an explicit ball."""
    p = b.presentation
    link_e = {frozenset(e) for e in link_of(p).edges}
    for v in range(b.num_vertices):
        for i, w in enumerate(b.nbr[v]):
            if w >= 0 and b.nbr[w][i ^ 1] != v:
                raise DevelopmentError(f"edge table not symmetric at {v}")
        if not b.complete[v]:
            continue
        if b.dist[v] > b.radius - 1:
            raise DevelopmentError("completed vertex beyond radius - 1")
        row = b.nbr[v]
        if len(set(row)) != NGERMS or -1 in row:
            raise DevelopmentError(f"vertex {v} does not have 16 distinct neighbours")
        germ = {w: i for i, w in enumerate(row)}
        seen = set()
        for _, x, y in b.triangles_at(v):
            # germ of the edge towards a neighbour, as a link vertex
            gx, gy = germ_start(index_letter(germ[x])), germ_start(index_letter(germ[y]))
            seen.add(frozenset((gx, gy)))
            if b.nbr[x][germ_index_between(b, x, y)] != y:
                raise DevelopmentError("triangle side missing")
        if seen != link_e:
            raise DevelopmentError(f"link at {v} differs from the link of the presentation")
    if b.radius >= 1:
        # any edge with a completed endpoint lies in exactly three triangles
        count: dict[frozenset, int] = {}
        for _, a, c, d in b.triangles():
            for e in ((a, c), (c, d), (d, a)):
                count[frozenset(e)] = count.get(frozenset(e), 0) + 1
        for u, w, _ in b.edges():
            if b.complete[u] or b.complete[w]:
                if count.get(frozenset((u, w)), 0) != 3:
                    raise DevelopmentError(f"edge {u}-{w} lies in {count.get(frozenset((u, w)), 0)} triangles")


def germ_index_between(b: CoverBall, u: int, w: int) -> int:
    for i, x in enumerate(b.nbr[u]):
        if x == w:
            return i
    raise DevelopmentError(f"{u} and {w} are not adjacent")


# ----------------------------------------------------------------------
# local geometry: geodesics and rings


def link_distances(p: Presentation):
    return distance_matrix(link_of(p))


def turning_distances(p: Presentation, word: Sequence[int], cyclic: bool = False) -> list[int]:
    """Link distance between incoming and outgoing germ at each interior
    vertex (and at the closing vertex if ``cyclic``)."""
    D = link_distances(p)
    pairs = list(zip(word, word[1:]))
    if cyclic and word:
        pairs.append((word[-1], word[0]))
    return [int(D[germ_end(g)][germ_start(h)]) for g, h in pairs]


def is_geodesic_word(p: Presentation, word: Sequence[int], cyclic: bool = False) -> bool:
    """Local geodesic test: angle at least pi (link distance at least 3)
    at every interior vertex.  ``cyclic`` tests the bi-infinite ``word^oo``."""
    return all(d >= 3 for d in turning_distances(p, word, cyclic))


def is_geodesic(b: CoverBall, path: Sequence[int], start: int | None = None) -> bool:
    """Geodesic test for a path in a ball; raises if it leaves the ball."""
    b.trace(path, start)
    return is_geodesic_word(b.presentation, path)


def antipode_map(p: Presentation) -> dict[int, int]:
    D = link_distances(p)
    n = len(D)
    out = {}
    for v in range(n):
        far = [w for w in range(n) if D[v][w] == 4]
        if len(far) != 1:
            raise DevelopmentError(f"link vertex {v} has {len(far)} antipodes")
        out[v] = far[0]
    return out


def continuation(p: Presentation) -> dict[int, int]:
    """Signed letter ``g`` to the letter continuing it analytically."""
    anti = antipode_map(p)
    return {g: germ_letter(anti[germ_end(g)])
            for g in [s * i for i in range(1, 9) for s in (1, -1)]}


def _key(g):
    return (abs(g), g < 0)


def canonical_ring(word: Sequence[int]) -> tuple[int, ...]:
    """Least rotation over the word and its reverse with signs flipped."""
    n = len(word)
    rev = [-g for g in reversed(word)]
    cands = [tuple(w[i:] + w[:i]) for w in (list(word), rev) for i in range(n)]
    return min(cands, key=lambda t: [_key(g) for g in t])


def rings(p: Presentation) -> list[tuple[int, ...]]:
    """Closed analytic geodesics as canonical cyclic words, one per
    reverse pair, sorted by length then word."""
    nxt = continuation(p)
    seen = set()
    out = set()
    for g in sorted(nxt, key=_key):
        if g in seen:
            continue
        cyc = [g]
        seen.add(g)
        h = nxt[g]
        while h != g:
            cyc.append(h)
            seen.add(h)
            h = nxt[h]
        out.add(canonical_ring(cyc))
    return sorted(out, key=lambda r: (len(r), [_key(g) for g in r]))


def format_word(word: Iterable[int]) -> str:
    return " ".join(str(g) for g in word)


# ----------------------------------------------------------------------
# Gauss-Bonnet


class DiskError(ValueError):
    pass


def _disk_structure(tris: Sequence[tuple[int, int, int]]):
    tris = [tuple(t) for t in tris]
    if not tris:
        raise DiskError("empty disk")
    if len(set(map(frozenset, tris))) != len(tris):
        raise DiskError("repeated triangle")
    edge_count: dict[frozenset, int] = {}
    for t in tris:
        if len(set(t)) != 3:
            raise DiskError("degenerate triangle")
        for e in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0])):
            k = frozenset(e)
            edge_count[k] = edge_count.get(k, 0) + 1
    if any(c > 2 for c in edge_count.values()):
        raise DiskError("an edge lies in more than two disk triangles")
    verts = {v for t in tris for v in t}
    boundary = [tuple(e) for e, c in edge_count.items() if c == 1]
    return tris, verts, edge_count, boundary


def _check_disk(tris, verts, edge_count, boundary):
    if len(verts) - len(edge_count) + len(tris) != 1:
        raise DiskError("Euler characteristic is not 1")
    bdeg: dict[int, list[int]] = {}
    for a, c in boundary:
        bdeg.setdefault(a, []).append(c)
        bdeg.setdefault(c, []).append(a)
    if any(len(n) != 2 for n in bdeg.values()):
        raise DiskError("boundary is not simple")
    start = boundary[0][0]
    prev, cur, n = None, start, 0
    while True:
        nxt = bdeg[cur][0] if bdeg[cur][0] != prev else bdeg[cur][1]
        prev, cur = cur, nxt
        n += 1
        if cur == start:
            break
    if n != len(boundary):
        raise DiskError("boundary has several components")
    # every vertex star must be a single fan
    star: dict[int, list] = {}
    for t in tris:
        for k in range(3):
            star.setdefault(t[k], []).append((t[(k + 1) % 3], t[(k + 2) % 3]))
    for v, sides in star.items():
        adj: dict[int, set] = {}
        for a, c in sides:
            adj.setdefault(a, set()).add(c)
            adj.setdefault(c, set()).add(a)
        comp, todo = set(), [next(iter(adj))]
        while todo:
            x = todo.pop()
            if x not in comp:
                comp.add(x)
                todo.extend(adj[x])
        if len(comp) != len(adj):
            raise DiskError(f"vertex {v} is singular in the disk")


def gauss_bonnet_audit(tris: Sequence[tuple[int, int, int]]) -> int:
    """Total curvature of a triangulated disk in units of pi/3.

    Boundary vertices contribute their turning ``3 - t`` and interior ones
    their curvature ``6 - t``, where ``t`` counts incident disk triangles.
    For a disk this is always 6.  Raises :class:`DiskError` if the
    triangles do not form a disk.
    """
    tris, verts, edge_count, boundary = _disk_structure(tris)
    _check_disk(tris, verts, edge_count, boundary)
    bverts = {v for e in boundary for v in e}
    t = {v: 0 for v in verts}
    for tri in tris:
        for v in tri:
            t[v] += 1
    return sum((3 - t[v]) if v in bverts else (6 - t[v]) for v in verts)


def is_disk(tris) -> bool:
    try:
        s = _disk_structure(tris)
        _check_disk(*s)
    except DiskError:
        return False
    return True


def random_disk(b: CoverBall, size: int, rng: random.Random) -> list[tuple[int, int, int]]:
    """Grow a random triangulated disk of at most ``size`` triangles,
    one triangle at a time across its boundary."""
    tris = [t[1:] for t in b.triangles()]
    on_edge: dict[frozenset, list] = {}
    for t in tris:
        for e in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0])):
            on_edge.setdefault(frozenset(e), []).append(t)
    complete = [t for t in tris if any(b.complete[v] for v in t)]
    disk = [rng.choice(complete)]
    members = {frozenset(disk[0])}
    stalls = 0
    while len(disk) < size and stalls < 50:
        _, _, edge_count, boundary = _disk_structure(disk)
        e = frozenset(rng.choice(boundary))
        cands = [t for t in on_edge[e] if frozenset(t) not in members]
        if not cands:
            stalls += 1
            continue
        t = rng.choice(cands)
        if is_disk(disk + [t]):
            disk.append(t)
            members.add(frozenset(t))
            stalls = 0
        else:
            stalls += 1
    return disk
