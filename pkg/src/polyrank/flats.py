"""Flat pieces inside developed covers: hexagons and disk supports, strips
along periodic geodesics, flat equilateral triangles, mesoscopic counts and
the explicit lower-bound construction for the complex ``V0_1``."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Callable, Iterable, Sequence

from .complexes import Presentation, germ_end, germ_letter, germ_start, link_of, preset
from .cover import (CoverBall, DevelopmentError, OutOfBall, corner_table, develop_ball,
                    gauss_bonnet_audit, index_letter, is_geodesic_word, link_distances)
from .linkgraph import BudgetExceeded

SQRT3 = math.sqrt(3.0)

# ----------------------------------------------------------------------
# the model triangular lattice
#
# Vertex (i, j) sits at i*e0 + j*e60.  Up triangle U(i, j) has corners
# (i, j), (i+1, j), (i, j+1); down triangle D(i, j) has corners (i+1, j),
# (i, j+1), (i+1, j+1).

Vertex = tuple[int, int]
Tri = tuple[Vertex, Vertex, Vertex]


def up(i: int, j: int) -> Tri:
    return ((i, j), (i + 1, j), (i, j + 1))


def down(i: int, j: int) -> Tri:
    return ((i + 1, j), (i, j + 1), (i + 1, j + 1))


def norm2(v: Vertex) -> int:
    """Squared Euclidean length of a lattice vector (edges have length 1)."""
    i, j = v
    return i * i + i * j + j * j


def hex_distance(v: Vertex) -> int:
    i, j = v
    return (abs(i) + abs(j) + abs(i + j)) // 2


def _dot(a, b) -> Fraction:
    # coordinates X = 2i + j, Y = j; real point (X/2, Y*sqrt3/2)
    return Fraction(a[0] * b[0] + 3 * a[1] * b[1], 4)


def _xy(v: Vertex):
    return (2 * v[0] + v[1], v[1])


def tri_distance2(t: Tri, centre: Vertex = (0, 0)) -> Fraction:
    """Exact squared distance from ``centre`` to the closed triangle."""
    pts = [_xy((v[0] - centre[0], v[1] - centre[1])) for v in t]
    signs = []
    for k in range(3):
        a, b = pts[k], pts[(k + 1) % 3]
        signs.append(a[0] * b[1] - a[1] * b[0])
    if all(s >= 0 for s in signs) or all(s <= 0 for s in signs):
        return Fraction(0)
    best = None
    for k in range(3):
        a, b = pts[k], pts[(k + 1) % 3]
        d = (b[0] - a[0], b[1] - a[1])
        t_ = -_dot(a, d) / _dot(d, d)
        t_ = min(max(t_, Fraction(0)), Fraction(1))
        q = (a[0] + t_ * d[0], a[1] + t_ * d[1])
        val = _dot(q, q)
        best = val if best is None else min(best, val)
    return best


def lattice_triangles(radius_bound: int) -> list[Tri]:
    """All model triangles within hex distance ``radius_bound`` of the origin."""
    out = []
    R = radius_bound + 1
    for i in range(-R, R + 1):
        for j in range(-R, R + 1):
            for t in (up(i, j), down(i, j)):
                if all(hex_distance(v) <= radius_bound for v in t):
                    out.append(t)
    return out


def hexagon(n: int) -> list[Tri]:
    return lattice_triangles(n)


def disk_support(r2, centre: Vertex = (0, 0)) -> list[Tri]:
    """Model triangles whose interiors meet the closed disk of squared
    radius ``r2``: those at distance strictly less than ``r``."""
    bound = int(math.isqrt(int(math.ceil(float(r2)))) + 2)
    out = []
    for t in lattice_triangles(bound + 1):
        tt = tuple((v[0] + centre[0], v[1] + centre[1]) for v in t)
        if tri_distance2(t) < r2:
            out.append(tt)
    return out


def interval_p(p: int) -> tuple[float, float]:
    """The interval ``((2p+1)sqrt3/2, sqrt(3p(p+1)+1)]``, as its endpoints."""
    return ((2 * p + 1) * SQRT3 / 2, math.sqrt(3 * p * (p + 1) + 1))


def radius_grid(r_max: float, step_denominator: int = 6) -> list[float]:
    """Radii ``m*sqrt3/6`` up to ``r_max``."""
    step = SQRT3 / step_denominator
    return [m * step for m in range(1, int(r_max / step + 1e-9) + 1)]


def support_thresholds(lo: float, hi: float, limit: int) -> list[Fraction]:
    """Distinct squared triangle distances in ``[lo^2, hi^2)``; the support
    ``{d^2 <= c}`` is constant on the radius interval just above each."""
    vals = {tri_distance2(t) for t in lattice_triangles(limit)}
    return sorted(v for v in vals if lo * lo <= float(v) < hi * hi)


def order_triangles(tris: Sequence[Tri], first: Tri | None = None) -> list[Tri]:
    """Breadth-first order in which each triangle shares an edge with an
    earlier one."""
    tris = list(tris)
    if not tris:
        return []
    by_edge: dict[frozenset, list[Tri]] = {}
    for t in tris:
        for k in range(3):
            by_edge.setdefault(frozenset((t[k], t[(k + 1) % 3])), []).append(t)
    start = first if first is not None else min(tris, key=lambda t: (tri_distance2(t), t))
    seen = {start}
    order = [start]
    q = 0
    while q < len(order):
        t = order[q]
        q += 1
        for k in range(3):
            for s in sorted(by_edge[frozenset((t[k], t[(k + 1) % 3]))]):
                if s not in seen:
                    seen.add(s)
                    order.append(s)
    if len(order) != len(tris):
        raise ValueError("model region is not edge-connected")
    return order


# ----------------------------------------------------------------------
# cover-side helpers


class _Local:
    """Adjacency queries on a ball, with the fixed link of the complex."""

    def __init__(self, b: CoverBall):
        self.b = b
        self.link = link_of(b.presentation)
        self.D = link_distances(b.presentation)
        self._letters: dict[int, dict[int, int]] = {}

    def canon(self, v: int) -> int:
        return self.b._dev.find(v) if self.b.lazy else v

    def letters(self, v: int) -> dict[int, int]:
        v = self.canon(v)
        got = self._letters.get(v)
        if got is None:
            got = {}
            for i in range(16):
                g = index_letter(i)
                got[self.canon(self.b.step(v, g))] = g
            self._letters[v] = got
        return got

    def letter(self, u: int, w: int) -> int:
        try:
            return self.letters(u)[self.canon(w)]
        except KeyError:
            raise DevelopmentError(f"vertices {u} and {w} are not adjacent") from None

    def germ(self, u: int, w: int) -> int:
        return germ_start(self.letter(u, w))

    def step_germ(self, u: int, germ: int) -> int:
        return self.canon(self.b.step(u, germ_letter(germ)))

    def third_vertices(self, u: int, w: int) -> list[int]:
        """Apexes of the three triangles on edge ``u w``."""
        s = self.germ(u, w)
        return [self.step_germ(u, t) for t in self.link.neighbors(s)]

    def is_triangle(self, u: int, v: int, w: int) -> bool:
        try:
            a, c = self.germ(u, v), self.germ(u, w)
        except DevelopmentError:
            return False
        return c in self.link.neighbors(a)

    def common_neighbour(self, a: int, c: int) -> int | None:
        if self.D[a][c] != 2:
            return None
        s = set(self.link.neighbors(a)) & set(self.link.neighbors(c))
        return next(iter(s)) if len(s) == 1 else None


@dataclass
class FlatPatch:
    """A simplicial map from model triangles into a cover ball."""

    model: tuple[Tri, ...]
    vmap: dict[Vertex, int]
    meta: dict = field(default_factory=dict)

    @property
    def image(self) -> frozenset:
        return frozenset(frozenset(self.vmap[v] for v in t) for t in self.model)

    def image_triangles(self) -> list[tuple[int, int, int]]:
        return [tuple(self.vmap[v] for v in t) for t in self.model]


def verify_patch(b: CoverBall, patch: FlatPatch, local: _Local | None = None) -> int:
    """Check a patch is a flat embedding; returns its Gauss-Bonnet residual.

    Requires injectivity on vertices, every model triangle to land on a
    triangle of the cover, and the six triangles at each interior model
    vertex to be distinct (so they close up a 6-cycle of the link).
    """
    loc = local or _Local(b)
    verts = {v for t in patch.model for v in t}
    imgs = [loc.canon(patch.vmap[v]) for v in verts]
    if len(set(imgs)) != len(imgs):
        raise DevelopmentError("patch is not injective on vertices")
    for t in patch.model:
        if not loc.is_triangle(*(patch.vmap[v] for v in t)):
            raise DevelopmentError(f"model triangle {t} does not map to a triangle")
    res = gauss_bonnet_audit(patch.image_triangles())
    if res != 6:
        raise DevelopmentError(f"Gauss-Bonnet residual {res} != 6")
    return res


def embeddings(b: CoverBall, model: Sequence[Tri], seed: dict[Vertex, int],
               loc: _Local | None = None, stop_after: int | None = None) -> list[dict[Vertex, int]]:
    """All flat embeddings of ``model`` extending ``seed``.

    ``seed`` must map at least two adjacent vertices of a model triangle,
    and the model must be edge-connected.  New triangles are placed across
    an already placed edge, on one of the (at most two) cover triangles not
    yet used there.
    """
    loc = loc or _Local(b)
    seeded = [t for t in model if sum(v in seed for v in t) >= 2]
    if not seeded:
        raise ValueError("seed does not cover an edge of the model")
    order = order_triangles(model, first=seeded[0])
    vmap = {v: loc.canon(w) for v, w in seed.items()}
    used = set(vmap.values())
    if len(used) != len(vmap):
        return []
    results: list[dict[Vertex, int]] = []
    # explicit stack of (triangle index, remaining candidates, placed vertex)
    stack: list[tuple[int, list[int], Vertex | None]] = []

    def candidates(k):
        t = order[k]
        free = [v for v in t if v not in vmap]
        if not free:
            return None, ([0] if loc.is_triangle(*(vmap[v] for v in t)) else [])
        if len(free) > 1:
            raise ValueError("model order does not attach along an edge")
        a, c = [vmap[v] for v in t if v in vmap]
        return free[0], [w for w in loc.third_vertices(a, c) if w not in used]

    k = 0
    while True:
        if k == len(order):
            results.append(dict(vmap))
            if stop_after is not None and len(results) >= stop_after:
                break
            k = -1
        else:
            free, cands = candidates(k)
            stack.append((k, cands, free))
        # advance to the next untried candidate, backtracking as needed
        while stack:
            kk, cands, free = stack[-1]
            if free is not None and free in vmap:
                used.discard(vmap.pop(free))
            if cands:
                w = cands.pop()
                if free is not None:
                    vmap[free] = w
                    used.add(w)
                k = kk + 1
                break
            stack.pop()
        else:
            break
    return results


def _seeds_at(loc: _Local, A: int, model: Sequence[Tri]) -> list[dict[Vertex, int]]:
    """Every placement of the model triangle ``U(0,0)`` on a triangle at A."""
    first = up(0, 0)
    if first not in set(model):
        raise ValueError("model must contain the triangle U(0,0)")
    out = []
    link = loc.link
    for a in range(link.n):
        for c in link.neighbors(a):
            out.append({(0, 0): A, (1, 0): loc.step_germ(A, a), (0, 1): loc.step_germ(A, c)})
    return out


def flat_patches(b: CoverBall, A: int, model: Sequence[Tri]) -> list[FlatPatch]:
    """Distinct images of flat embeddings of ``model`` with the origin at A."""
    loc = _Local(b)
    seen: dict[frozenset, FlatPatch] = {}
    for seed in _seeds_at(loc, A, model):
        for vm in embeddings(b, model, seed, loc):
            patch = FlatPatch(tuple(model), vm)
            seen.setdefault(patch.image, patch)
    return [seen[k] for k in sorted(seen, key=lambda s: sorted(map(sorted, s)))]


def flat_disks_at(b: CoverBall, A: int, n: int) -> list[FlatPatch]:
    """Flat hexagons of simplicial radius ``n`` centred at ``A``."""
    if n < 0:
        raise ValueError("radius must be nonnegative")
    if not b.lazy and n > b.radius - 1:
        raise OutOfBall(f"hexagon radius {n} needs a ball of radius at least {n + 1}")
    if n == 0:
        return [FlatPatch((), {(0, 0): A})]
    return flat_patches(b, A, hexagon(n))


def flat_triangle_count(b: CoverBall, base: Sequence[int], start: int | None = None) -> int:
    """Number of flat equilateral triangles with the geodesic ``base`` as a side."""
    r = len(base)
    if r == 0:
        raise ValueError("base of length 0 has no flat triangle")
    if not is_geodesic_word(b.presentation, base):
        raise ValueError("base is not geodesic")
    if not b.lazy and 2 * r > b.radius - 1 + r:
        raise OutOfBall("ball too small for this base")
    v = b.base if start is None else start
    seed = {(0, 0): v}
    for i, g in enumerate(base):
        v = b.step(v, g)
        seed[(i + 1, 0)] = v
    model = [t for i in range(r) for j in range(r)
             for t in (up(i, j), down(i, j)) if all(x + y <= r and y >= 0 for x, y in t)]
    loc = _Local(b)
    images = {frozenset(frozenset(vm[v] for v in t) for t in model)
              for vm in embeddings(b, model, seed, loc)}
    return len(images)


# ----------------------------------------------------------------------
# mesoscopic profile


@dataclass
class Profile:
    centre: int
    margin: int
    radii: list[float]
    counts: list[int]
    totals: list[int]

    def rows(self):
        return list(zip(self.radii, self.counts, self.totals))


def mesoscopic_profile(b: CoverBall, A: int, radii: Sequence[float], margin: int = 2) -> Profile:
    """For each radius, the number of distinct flat disk supports centred
    at ``A`` that do not extend to a flat disk of radius ``r + margin``."""
    loc = _Local(b)
    counts, totals = [], []
    for r in radii:
        small = disk_support(Fraction(r * r).limit_denominator(10 ** 9))
        if not small:
            counts.append(0)
            totals.append(0)
            continue
        big = disk_support(Fraction((r + margin) ** 2).limit_denominator(10 ** 9))
        if not b.lazy and (r + margin) >= b.radius:
            raise OutOfBall("ball too small for this radius and margin")
        seen: dict[frozenset, dict] = {}
        for seed in _seeds_at(loc, A, small):
            for vm in embeddings(b, small, seed, loc):
                img = frozenset(frozenset(vm[v] for v in t) for t in small)
                seen.setdefault(img, vm)
        bad = 0
        for vm in seen.values():
            if margin > 0 and not embeddings(b, big, vm, loc, stop_after=1):
                bad += 1
        counts.append(bad)
        totals.append(len(seen))
    return Profile(A, margin, list(radii), counts, totals)


# ----------------------------------------------------------------------
# strips along periodic geodesics (label level)


def _apex_table(p: Presentation) -> dict[tuple[int, int], int]:
    """``(x, z) -> y`` whenever ``x*y = z`` along a triangle side."""
    T = {}
    for g, h, k in corner_table(p):
        x, y, z = index_letter(g), index_letter(h), index_letter(k)
        T[(x, z)] = y
        T[(z, x)] = -y
    return T


@dataclass(frozen=True)
class Strip:
    """A periodic flat strip described by letters along one period.

    ``layers[m]`` lists, for each edge of the m-th line, the letter from the
    start of the edge to the apex of the triangle on it; ``tops[m]`` is the
    word read along the (m+1)-th line.  Words follow the walking direction,
    which is opposite to the queried line when ``reversed`` is set.
    """

    bottom: tuple[int, ...]
    period: int
    layers: tuple[tuple[int, ...], ...]
    tops: tuple[tuple[int, ...], ...]
    reversed: bool = False

    @property
    def height(self) -> int:
        return len(self.layers)

    @property
    def opposite(self) -> tuple[int, ...]:
        """Far boundary word, read in the direction of the queried line."""
        return reverse_word(self.tops[-1]) if self.reversed else self.tops[-1]


def _layer(p, T, D, link, word, a1, exclude=None):
    """Run one strip layer along ``word`` (already one full period of the
    layer below).  Returns (apex letters, back letters, top word) or None."""
    n = len(word)
    a = a1
    apex, back, top = [], [], []
    for k in range(n):
        g, nxt = word[k], word[(k + 1) % n]
        b_ = T.get((g, a))
        if b_ is None:
            return None
        alpha = germ_start(b_)
        tau = germ_start(nxt)
        if D[alpha][tau] != 2:
            return None
        beta = (set(link.neighbors(alpha)) & set(link.neighbors(tau))).pop()
        c = germ_letter(beta)
        t = T.get((b_, c))
        if t is None:
            return None
        apex.append(a)
        back.append(b_)
        top.append(t)
        if exclude is not None and a == exclude[k]:
            return None
        a = c
    if a != a1:
        return None
    return apex, back, top


def _min_period(seq_len: int, states) -> int:
    for P in range(1, seq_len + 1):
        if seq_len % P == 0 and all(states[i] == states[(i + P) % seq_len] for i in range(seq_len)):
            return P
    return seq_len


def reverse_word(word: Sequence[int]) -> tuple[int, ...]:
    """The same path traversed backwards."""
    return tuple(-g for g in reversed(word))


def strips_on_word(p: Presentation, word: Sequence[int], height: int = 1,
                   period_bound: int | None = None, side: str = "left") -> list[Strip]:
    """All periodic flat strips of the given height whose boundary is the
    bi-infinite geodesic ``word^oo``, with period at most ``period_bound``.

    ``side="left"`` gives strips to the left of the oriented line (apexes
    reached by turning counterclockwise); ``side="right"`` gives those on
    the other side, computed on the reversed line, with opposite words read
    back in the direction of ``word``.  Strips are determined by their first
    triangle; a stacked layer may use either triangle on the edges of the
    previous top line other than the one below it.
    """
    if side == "right":
        out = strips_on_word(p, reverse_word(word), height, period_bound, "left")
        return [Strip(s.bottom, s.period, s.layers, s.tops, True) for s in out]
    if side != "left":
        raise ValueError("side must be 'left' or 'right'")
    word = tuple(word)
    if not word:
        raise ValueError("empty boundary word")
    if not is_geodesic_word(p, word, cyclic=True):
        raise ValueError("boundary word is not a geodesic")
    T = _apex_table(p)
    D = link_distances(p)
    link = link_of(p)
    bound = period_bound or 3 ** height * len(word)
    out: set[Strip] = set()
    # extend the word to a common period; the strip state is periodic with
    # period dividing 3^height * len(word)
    for reps in range(1, bound // len(word) + 1):
        line = word * reps
        P = len(line)
        if P > bound:
            break

        def rec(m, cur_line, layers, tops, exclude):
            if m == height:
                states = list(zip(*layers)) if layers else []
                per = _min_period(P, [tuple(s) for s in states]) if states else P
                key_line = tuple(line[:per])
                if per == P:
                    out.add(Strip(key_line, per, tuple(tuple(l[:per]) for l in layers),
                                  tuple(tuple(t[:per]) for t in tops)))
                return
            start = germ_start(cur_line[0])
            for c in sorted(germ_letter(t) for t in link.neighbors(start)):
                res = _layer(p, T, D, link, cur_line, c, exclude)
                if res is None:
                    continue
                apex, back, top = res
                if not is_geodesic_word(p, top, cyclic=True):
                    continue
                rec(m + 1, tuple(top), layers + [apex], tops + [top], [-x for x in back])

        rec(0, line, [], [], None)
    return sorted(out, key=lambda s: (s.period, s.layers))


def same_cyclic(u: Sequence[int], v: Sequence[int]) -> bool:
    """Whether ``u^oo`` and ``v^oo`` agree up to shift."""
    if not u or not v:
        return False
    n = len(u) * len(v)
    uu = list(u) * (n // len(u))
    vv = list(v) * (n // len(v))
    return any(uu[i:] + uu[:i] == vv for i in range(n))


def strips_on_geodesic(b: CoverBall, word: Sequence[int], height: int = 1,
                       period_bound: int | None = None,
                       opposite: Sequence[int] | None = None,
                       side: str = "left") -> list[FlatPatch]:
    """Strips on the geodesic ``word^oo`` through the base of ``b``, realized
    over one period; ``opposite`` filters by the form of the far boundary.
    ``side`` is ``"left"``, ``"right"`` or ``"both"``."""
    sides = ("left", "right") if side == "both" else (side,)
    out = []
    for sd in sides:
        strips = strips_on_word(b.presentation, word, height, period_bound, sd)
        if opposite is not None:
            strips = [s for s in strips if same_cyclic(s.opposite, opposite)]
        for s in strips:
            patch = realize_strip(b, s)
            patch.meta["side"] = sd
            patch.meta["opposite"] = list(s.opposite)
            out.append(patch)
    return out


def count_strips_of_form(p: Presentation, left: Sequence[int], right: Sequence[int],
                         line: Sequence[int], height: int = 1,
                         period_bound: int | None = None) -> int:
    """Number of strips whose boundaries, read in a common direction, are
    ``left^oo`` on the left and ``right^oo`` on the right, and which have
    the given line ``line^oo`` as one of their boundaries."""
    total = 0
    if same_cyclic(line, right):
        total += sum(same_cyclic(s.opposite, left)
                     for s in strips_on_word(p, line, height, period_bound, "left"))
    if same_cyclic(line, left):
        total += sum(same_cyclic(s.opposite, right)
                     for s in strips_on_word(p, line, height, period_bound, "right"))
    return total


def realize_strip(b: CoverBall, s: Strip, start: int | None = None, periods: int = 1) -> FlatPatch:
    """Map ``periods`` periods of a strip into ``b`` starting at ``start``."""
    loc = _Local(b)
    v0 = b.base if start is None else start
    P = s.period
    n = P * periods
    line_words = [s.bottom] + list(s.tops)
    vmap: dict[Vertex, int] = {}
    model: list[Tri] = []
    row = [v0]
    for g in (line_words[0] * periods):
        row.append(loc.canon(b.step(row[-1], g)))
    for i, v in enumerate(row):
        vmap[(i, 0)] = v
    for m in range(s.height):
        apex = s.layers[m]
        top = [loc.canon(b.step(vmap[(0, m)], apex[0]))]
        for g in (line_words[m + 1] * periods)[: n - 1]:
            top.append(loc.canon(b.step(top[-1], g)))
        for i, v in enumerate(top):
            vmap[(i, m + 1)] = v
        for i in range(n):
            model.append(up(i, m))
            if i + 1 < n:
                model.append(down(i, m))
    patch = FlatPatch(tuple(model), vmap, {"period": P, "opposite": list(s.opposite),
                                           "layers": [list(l) for l in s.layers]})
    return patch


# ----------------------------------------------------------------------
# explicit lower bound for V0_1


SIX = 6
G_WORD = (2, 7, 1, 8, 3, 4)
H_WORD = (6, 5)


def mu(k: int) -> int:
    return math.ceil(k * (2 / SQRT3 - 1) - 1e-12)


def meso_bound(k: int) -> int:
    return 2 ** (2 * mu(k) - 4) if mu(k) >= 2 else 0


def _propagate(loc: _Local, line: list[int], m: int, apex_m: int) -> list[int]:
    """Apexes of the flat strip on ``line`` whose triangle on edge ``m`` has
    apex ``apex_m``.  Fails if the strip cannot be continued."""
    n = len(line) - 1
    apex: list[int | None] = [None] * n
    apex[m] = apex_m
    for e in range(m + 1, n):
        v = line[e]
        beta = loc.common_neighbour(loc.germ(v, apex[e - 1]), loc.germ(v, line[e + 1]))
        if beta is None:
            raise DevelopmentError("strip does not continue")
        apex[e] = loc.step_germ(v, beta)
    for e in range(m - 1, -1, -1):
        v = line[e + 1]
        beta = loc.common_neighbour(loc.germ(v, apex[e + 1]), loc.germ(v, line[e]))
        if beta is None:
            raise DevelopmentError("strip does not continue")
        apex[e] = loc.step_germ(v, beta)
    return apex  # type: ignore[return-value]


@dataclass
class MesoResult:
    """Outcome of :func:`meso_lower_bound_check`.

    ``constructed`` counts distinct disks ``D_i`` (as triangle sets);
    ``non_extendable`` counts those admitting no flat extension to radius
    ``k + margin`` centred at A; ``distinct_min`` is the least number of
    distinct concentric sub-disks ``D_i^r`` over ``r`` in ``(k - sqrt3, k]``.
    """

    k: int
    mu: int
    nu: int
    bound: int
    constructed: int
    non_extendable: int
    margin: int
    distinct_min: int
    distinct_by_radius: list[tuple[float, int]]
    b_path: list[int]
    b_path_distance: int
    flat_checked: bool
    passed: bool
    disks: list = field(default_factory=list, repr=False)
    ball: CoverBall | None = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "k": self.k, "mu": self.mu, "nu": self.nu, "bound": self.bound,
            "constructed": self.constructed, "non_extendable": self.non_extendable,
            "margin": self.margin, "distinct_min_on_interval": self.distinct_min,
            "link_path_at_B": self.b_path, "link_path_endpoint_distance": self.b_path_distance,
            "flat_checked": self.flat_checked, "pass": self.passed,
        }


def _build_plane(loc: _Local, A: int, k: int) -> dict[Vertex, int]:
    """The flat through ``A`` containing the lines ``6^oo`` (rows) and
    ``g^oo`` (direction e120 = e60 - e0), on rows ``-J..k+1``."""
    b = loc.b
    W = 2 * k + 6
    J = math.ceil(2 * (k + 2) / SQRT3) + 1
    f: dict[Vertex, int] = {}
    for i in range(0, W + 1):
        f[(i, 0)] = A if i == 0 else loc.canon(b.step(f[(i - 1, 0)], SIX))
    for i in range(-1, -W - 1, -1):
        f[(i, 0)] = loc.canon(b.step(f[(i + 1, 0)], -SIX))
    gline = {(0, 0): A}
    v = A
    for t in range(1, k + 3):
        v = loc.canon(b.step(v, G_WORD[(t - 1) % 6]))
        gline[(-t, t)] = v
    v = A
    for t in range(1, J + 2):
        v = loc.canon(b.step(v, -G_WORD[-t % 6]))
        gline[(t, -t)] = v
    # upward rows: apex of edge (i, j)-(i+1, j) is (i, j+1)
    for j in range(0, k + 2):
        cols = sorted(i for (i, jj) in f if jj == j)
        line = [f[(i, j)] for i in cols]
        m = cols.index(-j - 1)
        apex = _propagate(loc, line, m, gline[(-j - 1, j + 1)])
        for idx, i in enumerate(cols[:-1]):
            f[(i, j + 1)] = apex[idx]
    # downward rows: apex of edge (i, j)-(i+1, j) is (i+1, j-1)
    for j in range(0, -J, -1):
        cols = sorted(i for (i, jj) in f if jj == j)
        line = [f[(i, j)] for i in cols]
        m = cols.index(-j)
        apex = _propagate(loc, line, m, gline[(-j + 1, j - 1)])
        for idx, i in enumerate(cols[:-1]):
            f[(i + 1, j - 1)] = apex[idx]
    return f


def meso_lower_bound_check(k: int, *, margin: int = 2, budget: int | None = None,
                           verify_flat: bool = True) -> MesoResult:
    """Rebuild the disks ``D_i`` of the explicit construction at distance
    ``k`` and check them.

    ``Pi`` is the flat through A containing ``6^oo`` and ``g^oo``; B is the
    vertex at distance k on the bisector of their 2pi/3 angle.  Stacked
    strips of height ``mu_k`` are attached along the lines ``d1`` (parallel
    to ``6^oo``) and ``d2`` (parallel to ``g^oo``) through B, the first
    layer on ``d1`` taken from ``Pi`` and the first on ``d2`` being the third
    triangle on it.  Each disk is checked to be flat, the disks are
    compared as sets of triangles for every radius in ``(k - sqrt3, k]``,
    and each disk is searched for a flat extension to radius ``k + margin``
    centred at A.  A disk with no such extension lies in no flat.  The run
    passes when all ``nu_k^2`` disks are distinct, flat and non-extendable.
    """
    if k < 8:
        raise ValueError("k must be at least 8")
    p = preset("V0_1")
    b = develop_ball(p, 40 * k, lazy=True, budget=budget)
    loc = _Local(b)
    A = b.base
    mu_k = mu(k)
    nu = 2 ** (mu_k - 1)
    f = _build_plane(loc, A, k)

    # S: stacked rows above d1 (row k), restricted to i + j <= k
    J = math.ceil(2 * (k + 2) / SQRT3) + 2
    s_choices: list[dict[Vertex, int]] = []
    base_rows = {(i, j): v for (i, j), v in f.items() if j <= k + 1}

    def s_stacks(m, cur):
        j = k + m  # current top row of the stack
        if m == mu_k:
            s_choices.append(cur)
            return
        cols = sorted(i for (i, jj) in cur if jj == j and i + j <= k)
        line = [cur[(i, j)] for i in cols]
        e = cols.index(k - j - 1)
        P, Q = line[e], line[e + 1]
        below = cur.get((k - j, j - 1))
        if m == 0:
            opts = [cur[(k - j - 1, j + 1)]]
        else:
            opts = [w for w in loc.third_vertices(P, Q) if w != below]
        for w in opts:
            nxt = dict(cur)
            for key in [key for key in nxt if key[1] == j + 1]:
                del nxt[key]
            try:
                apex = _propagate(loc, line, e, w)
            except DevelopmentError:
                continue
            for idx, i in enumerate(cols[:-1]):
                nxt[(i, j + 1)] = apex[idx]
            s_stacks(m + 1, nxt)

    s_stacks(0, {key: v for key, v in base_rows.items() if key[1] <= k + 1})

    # T: stacked lines i + j = k + m beyond d2, restricted to j <= k
    t_choices: list[dict[Vertex, int]] = []

    def t_stacks(m, cur):
        s = k + m
        if m == mu_k:
            t_choices.append(cur)
            return
        js = sorted(j for (i, j) in cur if i + j == s and j <= k)
        js = [j for j in js if j >= -J]
        line = [cur[(s - j, j)] for j in reversed(js)]  # from j = k downwards
        P, Q = cur[(s - k, k)], cur[(s - k + 1, k - 1)]
        # triangle on edge (s-k+1, k-1)-(s-k, k) towards i + j = s + 1 has apex (s-k+1, k)
        left = cur[(s - k, k - 1)]
        opts = [w for w in loc.third_vertices(Q, P) if w != left]
        if m == 0:
            opts = [w for w in opts if w != f.get((s - k + 1, k))]
        for w in opts:
            try:
                apex = _propagate(loc, line, 0, w)
            except DevelopmentError:
                continue
            nxt = {key: v for key, v in cur.items() if key[0] + key[1] <= s}
            # edge between (s-j, j) and (s-j+1, j-1) has apex (s-j+1, j)
            for idx, j in enumerate(list(reversed(js))[:-1]):
                nxt[(s - j + 1, j)] = apex[idx]
            t_stacks(m + 1, nxt)

    t_base = {key: v for key, v in f.items() if key[0] + key[1] <= k and key[1] <= k}
    t_stacks(0, t_base)

    pi0 = {key: v for key, v in f.items() if key[1] <= k and key[0] + key[1] <= k}
    region_tris = [t for t in lattice_triangles(2 * k + 4) if tri_distance2(t) < k * k]

    def in_pi0(t):
        return all(v[1] <= k and v[0] + v[1] <= k for v in t)

    def in_s(t):
        return all(v[1] >= k and v[0] + v[1] <= k for v in t)

    def in_t(t):
        return all(v[1] <= k and v[0] + v[1] >= k for v in t)

    disks = []
    for S, Tm in product(s_choices, t_choices):
        vm: dict[Vertex, int] = {}
        model = []
        for t in region_tris:
            if in_pi0(t):
                src = pi0
            elif in_s(t):
                src = S
            elif in_t(t):
                src = Tm
            else:
                raise DevelopmentError(f"triangle {t} lies outside the construction")
            for v in t:
                if v not in src:
                    raise DevelopmentError(f"strip height too small for vertex {v}")
                if v in vm and vm[v] != src[v]:
                    raise DevelopmentError("construction pieces disagree")
                vm[v] = src[v]
            model.append(t)
        disks.append(FlatPatch(tuple(model), vm))

    if verify_flat:
        for d in disks:
            verify_patch(b, d, loc)

    # distinct concentric sub-disks for each radius in (k - sqrt3, k]
    lo = k - SQRT3
    d2s = {t: tri_distance2(t) for t in region_tris}
    below = [v for v in d2s.values() if float(v) < lo * lo]
    cuts = ([max(below)] if below else []) + sorted(
        {v for v in d2s.values() if float(v) >= lo * lo})
    by_radius = []
    for c in cuts:
        imgs = {frozenset(frozenset(d.vmap[v] for v in t) for t in d.model if d2s[t] <= c)
                for d in disks}
        by_radius.append((math.sqrt(c), len(imgs)))
    distinct_min = min(n for _, n in by_radius)
    constructed = len({d.image for d in disks})

    # a disk lies in no flat if it admits no flat disk of radius k + margin
    big = disk_support(Fraction((k + margin) ** 2))
    non_ext = sum(1 for d in disks if not embeddings(b, big, dict(d.vmap), loc, stop_after=1))

    # the triangles of the disk at B read as a path in the link there
    vb = f[(0, k)]
    d0 = disks[0].vmap
    seq = [d0[(-1, k + 1)], d0[(-1, k)], d0[(0, k - 1)], d0[(1, k - 1)], d0[(1, k)]]
    germs = [loc.germ(vb, w) for w in seq]
    for a_, c_ in zip(germs, germs[1:]):
        if c_ not in loc.link.neighbors(a_):
            raise DevelopmentError("triangles at B do not form a link path")
    b_path = [germ_letter(g) for g in germs]
    b_dist = int(link_distances(p)[germs[0]][germs[-1]])

    bound = meso_bound(k)
    passed = (verify_flat and constructed == nu * nu and constructed >= bound
              and non_ext == len(disks))
    return MesoResult(k, mu_k, nu, bound, constructed, non_ext, margin, distinct_min,
                      by_radius, b_path, b_dist, verify_flat, passed, disks, b)


# ----------------------------------------------------------------------
# growth probes


def free_semigroup_probe(b: CoverBall, words: Sequence[Sequence[int]], L: int) -> tuple[bool, int, int]:
    """Trace all products of 1..L factors from ``words``.

    Returns ``(all distinct, number of products, number of endpoints)``.
    """
    if not words:
        raise ValueError("need at least one word")
    if not b.lazy and L * max(len(w) for w in words) > b.radius:
        raise OutOfBall("ball too small for these products")
    ends = []
    for n in range(1, L + 1):
        for combo in product(range(len(words)), repeat=n):
            v = b.base
            for c in combo:
                v = b.trace(words[c], v)
            ends.append(v)
    canon = [b._dev.find(v) if b.lazy else v for v in ends]
    return len(set(canon)) == len(canon), len(canon), len(set(canon))
