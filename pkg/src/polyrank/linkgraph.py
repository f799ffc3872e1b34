"""Finite trivalent link graphs: girth, canonical labelling, spectra and
enumeration of ample (girth exactly 6) cubic graphs."""

from __future__ import annotations

import math
from collections import deque
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterable, Sequence

import numpy as np

INF = math.inf

FLAT = "♭"
SHARP = "♯"

TYPE32 = "3/2"
TYPE2 = "2"


class BudgetExceeded(RuntimeError):
    """Raised when a search would exceed its configured resource cap."""


@dataclass(frozen=True)
class LinkGraph:
    """Undirected graph on vertices ``0..n-1``.

    Edges are stored as a sorted tuple of ``(u, v)`` pairs with ``u <= v``.
    Repeated pairs and loops are representable so that degenerate links of
    presentations can be built and then rejected by :func:`girth`; use
    :attr:`is_simple` to test for them.

    ``labels`` optionally names every vertex by ``(letter, marker)`` with
    marker one of ``FLAT``/``SHARP``.
    """

    n: int
    edges: tuple[tuple[int, int], ...]
    labels: tuple[tuple[int, str], ...] | None = None
    _adj: tuple[tuple[int, ...], ...] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        edges = tuple(sorted((min(u, v), max(u, v)) for u, v in self.edges))
        for u, v in edges:
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"edge ({u}, {v}) out of range for n={self.n}")
        object.__setattr__(self, "edges", edges)
        if self.labels is not None:
            labels = tuple((int(i), str(m)) for i, m in self.labels)
            if len(labels) != self.n:
                raise ValueError("one label per vertex required")
            if len(set(labels)) != self.n:
                raise ValueError("vertex labels must be distinct")
            object.__setattr__(self, "labels", labels)
        adj: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in edges:
            adj[u].append(v)
            if u != v:
                adj[v].append(u)
        object.__setattr__(self, "_adj", tuple(tuple(sorted(a)) for a in adj))

    @classmethod
    def from_adjacency(cls, adj: Sequence[Iterable[int]], labels=None) -> "LinkGraph":
        edges = {(min(u, v), max(u, v)) for u, nbrs in enumerate(adj) for v in nbrs}
        return cls(len(adj), tuple(edges), labels)

    def neighbors(self, v: int) -> tuple[int, ...]:
        return self._adj[v]

    def degree(self, v: int) -> int:
        return sum(2 if (a, b) == (v, v) else 1 for a, b in self.edges if v in (a, b))

    @property
    def is_simple(self) -> bool:
        return all(u != v for u, v in self.edges) and len(set(self.edges)) == len(self.edges)

    def is_regular(self, k: int | None = None) -> bool:
        degs = {self.degree(v) for v in range(self.n)}
        return len(degs) <= 1 and (k is None or degs <= {k})

    def is_connected(self) -> bool:
        if self.n == 0:
            return True
        return len(bfs_distances(self, 0)) == self.n

    def vertex_index(self, letter: int, marker: str) -> int:
        if self.labels is None:
            raise ValueError("graph is unlabelled")
        return self.labels.index((letter, marker))

    def relabel(self, perm: Sequence[int]) -> "LinkGraph":
        """Graph with vertex ``v`` renamed ``perm[v]``; labels travel along."""
        labels = None
        if self.labels is not None:
            labels = [None] * self.n
            for v, lab in enumerate(self.labels):
                labels[perm[v]] = lab
        return LinkGraph(self.n, tuple((perm[u], perm[v]) for u, v in self.edges), labels)

    def adjacency_matrix(self) -> np.ndarray:
        m = np.zeros((self.n, self.n))
        for u, v in self.edges:
            m[u, v] += 1
            if u != v:
                m[v, u] += 1
        return m

    def to_text(self) -> str:
        """Adjacency-list interchange format, one ``v: u1 u2 u3`` line per vertex."""
        lines = []
        for v in range(self.n):
            head = str(v)
            if self.labels is not None:
                i, m = self.labels[v]
                head += f"({i}{m})"
            lines.append(f"{head}: " + " ".join(str(u) for u in self._adj[v]))
        return "\n".join(lines) + "\n"


def parse_graph(text: str) -> LinkGraph:
    """Inverse of :meth:`LinkGraph.to_text`.  Labels are optional but must
    be given for every vertex or for none."""
    adj: dict[int, list[int]] = {}
    labels: dict[int, tuple[int, str]] = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if ":" not in line:
            raise ValueError(f"malformed graph line: {raw!r}")
        head, rest = line.split(":", 1)
        head = head.strip()
        if "(" in head:
            vs, lab = head.split("(", 1)
            lab = lab.rstrip(")").strip()
            marker = lab[-1]
            if marker in "b":
                marker = FLAT
            elif marker in "#":
                marker = SHARP
            if marker not in (FLAT, SHARP):
                raise ValueError(f"bad vertex label {lab!r}")
            v = int(vs)
            labels[v] = (int(lab[:-1]), marker)
        else:
            v = int(head)
        adj[v] = [int(t) for t in rest.split()]
    n = len(adj)
    if sorted(adj) != list(range(n)):
        raise ValueError("vertices must be numbered 0..n-1")
    for v, nbrs in adj.items():
        for u in nbrs:
            if u not in adj or v not in adj[u]:
                raise ValueError(f"adjacency not symmetric at {v}-{u}")
    if labels and len(labels) != n:
        raise ValueError("labels must be given for all vertices or none")
    lab = tuple(labels[v] for v in range(n)) if labels else None
    return LinkGraph.from_adjacency([adj[v] for v in range(n)], lab)


# ----------------------------------------------------------------------
# metric helpers


def bfs_distances(g: LinkGraph, source: int) -> dict[int, int]:
    dist = {source: 0}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for w in g.neighbors(u):
            if w not in dist:
                dist[w] = dist[u] + 1
                queue.append(w)
    return dist


def distance_matrix(g: LinkGraph) -> np.ndarray:
    d = np.full((g.n, g.n), -1, dtype=int)
    for v in range(g.n):
        for u, k in bfs_distances(g, v).items():
            d[v, u] = k
    return d


def girth(g: LinkGraph) -> float:
    """Length of a shortest cycle; loops count 1, parallel edges 2;
    ``math.inf`` for forests."""
    if g.n == 0:
        raise ValueError("girth of the empty graph is undefined")
    if any(u == v for u, v in g.edges):
        return 1
    if len(set(g.edges)) != len(g.edges):
        return 2
    best = INF
    for s in range(g.n):
        dist = {s: 0}
        parent = {s: -1}
        queue = deque([s])
        while queue:
            u = queue.popleft()
            if 2 * dist[u] + 1 >= best:
                break
            for w in g.neighbors(u):
                if w not in dist:
                    dist[w] = dist[u] + 1
                    parent[w] = u
                    queue.append(w)
                elif parent[u] != w:
                    best = min(best, dist[u] + dist[w] + 1)
    return best


def is_ample(g: LinkGraph) -> bool:
    return g.n > 0 and g.is_connected() and g.is_regular(3) and girth(g) == 6


def diameter(g: LinkGraph) -> int:
    return int(distance_matrix(g).max())


# ----------------------------------------------------------------------
# canonical labelling by individualisation-refinement


def _refine(adj, cells):
    cells = [list(c) for c in cells]
    while True:
        where = {}
        for i, c in enumerate(cells):
            for v in c:
                where[v] = i
        k = len(cells)
        new_cells = []
        for c in cells:
            if len(c) == 1:
                new_cells.append(c)
                continue
            sig = {}
            for v in c:
                counts = [0] * k
                for w in adj[v]:
                    counts[where[w]] += 1
                sig[v] = tuple(counts)
            for s in sorted(set(sig.values())):
                new_cells.append([v for v in c if sig[v] == s])
        if len(new_cells) == len(cells):
            return new_cells
        cells = new_cells


def _search_leaves(g: LinkGraph, initial=None):
    adj = [list(g.neighbors(v)) for v in range(g.n)]
    cells = initial if initial is not None else [list(range(g.n))]
    leaves = []

    def rec(cells):
        cells = _refine(adj, cells)
        if all(len(c) == 1 for c in cells):
            perm = [0] * g.n
            for i, c in enumerate(cells):
                perm[c[0]] = i
            code = tuple(sorted((min(perm[u], perm[v]), max(perm[u], perm[v])) for u, v in g.edges))
            leaves.append((code, perm))
            return
        target = min((i for i, c in enumerate(cells) if len(c) > 1), key=lambda i: (len(cells[i]), i))
        for v in cells[target]:
            rest = [w for w in cells[target] if w != v]
            rec(cells[:target] + [[v], rest] + cells[target + 1:])

    if g.n:
        rec(cells)
    return leaves


def canonical_form(g: LinkGraph) -> tuple[LinkGraph, list[int]]:
    """Canonical representative of the isomorphism class of ``g`` (labels
    ignored) and the relabelling ``perm`` with ``g.relabel(perm)`` equal to
    it."""
    if g.n == 0:
        return LinkGraph(0, ()), []
    code, perm = min(_search_leaves(g))
    return LinkGraph(g.n, code), perm


def are_isomorphic(g: LinkGraph, h: LinkGraph) -> bool:
    if g.n != h.n or len(g.edges) != len(h.edges):
        return False
    return canonical_form(g)[0].edges == canonical_form(h)[0].edges


def automorphisms(g: LinkGraph) -> list[tuple[int, ...]]:
    """All automorphisms of ``g`` as tuples ``a`` with ``a[v]`` the image of ``v``."""
    if g.n == 0:
        return [()]
    leaves = _search_leaves(g)
    best = min(leaves)[0]
    same = [perm for code, perm in leaves if code == best]
    ref = same[0]
    inv = [0] * g.n
    for v, p in enumerate(ref):
        inv[p] = v
    # ref(g) == p(g)  =>  ref^-1 . p is an automorphism
    return sorted(tuple(inv[p[v]] for v in range(g.n)) for p in same)


@dataclass(frozen=True)
class AutomorphismReport:
    order: int
    tripod_transitive: bool
    tripod_stabilizer_order: int
    pointwise_stabilizer_order: int


def automorphism_group_order(g: LinkGraph) -> AutomorphismReport:
    auts = automorphisms(g)
    if g.n == 0:
        return AutomorphismReport(1, True, 1, 1)
    orbit0 = {a[0] for a in auts}
    star = [0, *g.neighbors(0)]
    stab = [a for a in auts if a[0] == 0]
    pointwise = [a for a in stab if all(a[v] == v for v in star)]
    return AutomorphismReport(
        order=len(auts),
        tripod_transitive=len(orbit0) == g.n,
        tripod_stabilizer_order=len(stab),
        pointwise_stabilizer_order=len(pointwise),
    )


# ----------------------------------------------------------------------
# spectrum


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues of the random-walk operator with multiplicities,
    ascending; ``lambda1`` is the smallest nonzero Laplacian eigenvalue."""

    eigenvalues: tuple[tuple[float, int], ...]
    lambda1: float

    def values(self) -> list[float]:
        return [v for v, m in self.eigenvalues for _ in range(m)]


def random_walk_spectrum(g: LinkGraph, tol: float = 1e-9) -> Spectrum:
    if not g.is_regular() or g.n == 0:
        raise ValueError("random walk spectrum requires a nonempty regular graph")
    if not g.is_connected():
        raise ValueError("random walk spectrum requires a connected graph")
    d = g.degree(0)
    ev = np.linalg.eigvalsh(g.adjacency_matrix() / d)
    groups: list[list[float]] = []
    for x in ev:
        if groups and abs(x - groups[-1][-1]) <= tol * 10:
            groups[-1].append(x)
        else:
            groups.append([x])
    vals = tuple((float(np.mean(grp)), len(grp)) for grp in groups)
    second = vals[-2][0] if len(vals) > 1 else vals[-1][0]
    return Spectrum(vals, 1.0 - second)


# ----------------------------------------------------------------------
# local structure of L_{7/4}


def count_paths(g: LinkGraph, a: int, b: int, length: int) -> int:
    """Number of simple paths with ``length`` edges from ``a`` to ``b``."""
    count = 0

    def rec(v, used, left):
        nonlocal count
        if left == 0:
            count += v == b
            return
        for w in g.neighbors(v):
            if w not in used:
                used.add(w)
                rec(w, used, left - 1)
                used.discard(w)

    rec(a, {a}, length)
    return count


def pair_type(g: LinkGraph, a: int, b: int) -> str | int:
    """``TYPE32`` when two length-3 paths join ``a`` and ``b``, ``TYPE2`` when
    three do; any other path count is returned raw."""
    d = bfs_distances(g, a).get(b)
    if d != 3:
        raise ValueError(f"vertices {a}, {b} are at distance {d}, not 3")
    k = count_paths(g, a, b, 3)
    return {2: TYPE32, 3: TYPE2}.get(k, k)


def cycles_of_length(g: LinkGraph, k: int) -> list[tuple[int, ...]]:
    """Simple cycles of length ``k``, each once, as vertex tuples starting at
    their minimum vertex and oriented towards the smaller neighbour."""
    out = []
    for s in range(g.n):
        def rec(path, used):
            v = path[-1]
            if len(path) == k:
                if s in g.neighbors(v) and path[1] < path[-1]:
                    out.append(tuple(path))
                return
            for w in g.neighbors(v):
                if w > s and w not in used:
                    used.add(w)
                    path.append(w)
                    rec(path, used)
                    path.pop()
                    used.discard(w)
        rec([s], {s})
    return sorted(out)


def six_cycle_analysis(g: LinkGraph) -> list[tuple[tuple[int, ...], tuple]]:
    """For every 6-cycle, the pair types of its three antipodal pairs."""
    result = []
    for cyc in cycles_of_length(g, 6):
        types = tuple(pair_type(g, cyc[i], cyc[i + 3]) for i in range(3))
        result.append((cyc, types))
    return result


# ----------------------------------------------------------------------
# named graphs


def cycle_graph(n: int) -> LinkGraph:
    return LinkGraph(n, tuple((i, (i + 1) % n) for i in range(n)))


def complete_graph(n: int) -> LinkGraph:
    return LinkGraph(n, tuple(combinations(range(n), 2)))


def complete_bipartite(a: int, b: int) -> LinkGraph:
    return LinkGraph(a + b, tuple((i, a + j) for i in range(a) for j in range(b)))


def generalized_petersen(n: int, k: int) -> LinkGraph:
    """GP(n, k): outer cycle ``0..n-1``, spokes ``i - (n+i)``, inner star
    polygon ``n+i - n+(i+k)``."""
    edges = set()
    for i in range(n):
        edges.add((i, (i + 1) % n))
        edges.add((i, n + i))
        a, b = n + i, n + (i + k) % n
        edges.add((min(a, b), max(a, b)))
    return LinkGraph(2 * n, tuple(edges))


def bipartite_from_factor(rows: Sequence[Sequence[int]]) -> LinkGraph:
    """Bipartite graph with biadjacency matrix ``rows`` (0/1 entries)."""
    n = len(rows)
    return LinkGraph(2 * n, tuple((i, n + j) for i in range(n) for j in range(n) if rows[i][j]))


def circulant_factor(n: int, shifts: Iterable[int]) -> list[list[int]]:
    """``sum(sigma^s)`` where ``sigma`` is the cyclic shift ``e_i -> e_{i+1}``."""
    m = [[0] * n for _ in range(n)]
    for s in shifts:
        for i in range(n):
            m[(i + s) % n][i] += 1
    return m


def l74() -> LinkGraph:
    """L_{7/4} as the bipartite graph with factor Id + sigma^2 + sigma^7."""
    return bipartite_from_factor(circulant_factor(8, (0, 2, 7)))


def fano_incidence() -> LinkGraph:
    """Point/line incidence graph of PG(2, 2) (the Heawood graph)."""
    lines = [tuple(sorted(((i) % 7, (i + 1) % 7, (i + 3) % 7))) for i in range(7)]
    return LinkGraph(14, tuple((p, 7 + j) for j, line in enumerate(lines) for p in line))


def heawood() -> LinkGraph:
    return fano_incidence()


# ----------------------------------------------------------------------
# enumeration of ample cubic graphs


def _girth6_fill(n, adj, used, out, budget, split_depth=None, depth=0):
    if split_depth is not None and depth == split_depth:
        out.append(([set(a) for a in adj], used))
        return
    # smallest vertex still missing edges
    u = next((v for v in range(used) if len(adj[v]) < 3), None)
    if u is None:
        if used == n:
            out.append(tuple((a, b) for a in range(n) for b in adj[a] if a < b))
            if len(out) > budget:
                raise BudgetExceeded("too many labelled graphs")
        return
    near = {u}
    frontier = [u]
    for _ in range(4):
        nxt = []
        for v in frontier:
            for w in adj[v]:
                if w not in near:
                    near.add(w)
                    nxt.append(w)
        frontier = nxt
    floor = max(adj[u])
    for v in range(floor + 1, used):
        if len(adj[v]) < 3 and v not in near:
            adj[u].add(v)
            adj[v].add(u)
            _girth6_fill(n, adj, used, out, budget, split_depth, depth + 1)
            adj[u].discard(v)
            adj[v].discard(u)
    if used < n:
        adj[u].add(used)
        adj[used].add(u)
        _girth6_fill(n, adj, used + 1, out, budget, split_depth, depth + 1)
        adj[u].discard(used)
        adj[used].discard(u)


def _seed(n):
    adj = [set() for _ in range(n)]
    for v in (1, 2, 3):
        adj[0].add(v)
        adj[v].add(0)
    nxt = 4
    for v in (1, 2, 3):
        for _ in range(2):
            adj[v].add(nxt)
            adj[nxt].add(v)
            nxt += 1
    return adj


def _run_branch(args):
    n, adj, used, budget = args
    out: list = []
    _girth6_fill(n, adj, used, out, budget)
    return out


def enumerate_ample_cubic(n: int, max_vertices: int = 20, budget: int = 5_000_000,
                          workers: int = 1) -> list[LinkGraph]:
    """All connected cubic graphs of girth exactly 6 on ``n`` vertices, one
    canonical representative per isomorphism class, sorted by edge code.

    Vertices are added in breadth-first fashion around vertex 0 with every
    new edge checked against girth >= 6; isomorphs are removed by canonical
    form.  ``workers > 1`` splits the search tree across processes; the
    output does not depend on it.
    """
    if n % 2 or n < 4:
        raise ValueError("n must be an even integer >= 4")
    if n > max_vertices:
        raise BudgetExceeded(f"n={n} exceeds the vertex cap {max_vertices}")
    if n < 10:
        return []
    states: list = []
    _girth6_fill(n, _seed(n), 10, states, budget, split_depth=8)
    branches = [(n, adj, used, budget) for adj, used in states]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            parts = list(pool.map(_run_branch, branches))
    else:
        parts = [_run_branch(b) for b in branches]
    seen = {}
    for part in parts:
        for edges in part:
            g = LinkGraph(n, edges)
            if girth(g) != 6:
                continue
            canon, _ = canonical_form(g)
            seen.setdefault(canon.edges, canon)
    return [seen[k] for k in sorted(seen)]
