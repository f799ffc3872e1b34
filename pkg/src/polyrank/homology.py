"""Exact integer linear algebra: Smith normal form, first homology of
one-vertex complexes and abelianization of finite presentations."""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Sequence

IntMatrix = list[list[int]]


@dataclass(frozen=True)
class AbelianGroup:
    """``Z^free_rank x Z/d1 x ... x Z/dk`` with ``d1 | d2 | ... | dk``, each ``>= 2``."""

    free_rank: int
    torsion: tuple[int, ...] = ()

    def __post_init__(self):
        t = tuple(int(d) for d in self.torsion)
        if self.free_rank < 0 or any(d < 2 for d in t):
            raise ValueError("invalid abelian group data")
        if any(t[i + 1] % t[i] for i in range(len(t) - 1)):
            raise ValueError(f"torsion {t} is not a divisibility chain")
        object.__setattr__(self, "torsion", t)

    @classmethod
    def from_divisors(cls, divisors: Sequence[int], ngens: int) -> "AbelianGroup":
        """Cokernel data from SNF diagonal of a relation matrix on ``ngens`` generators."""
        ds = [abs(d) for d in divisors if d != 0]
        return cls(ngens - len(ds), tuple(d for d in ds if d > 1))

    @classmethod
    def parse(cls, text: str) -> "AbelianGroup":
        """Read forms like ``Z/3 x Z^2``, ``(Z/2)^2 x Z/12``, ``Z``, ``0``.

        Cyclic factors need not be given in invariant-factor form.
        """
        text = text.replace(" ", "").replace("×", "x").replace("Z", "Z")
        if text in ("0", "1", ""):
            return cls(0)
        free = 0
        cyc: list[int] = []
        for part in text.split("x"):
            m = re.fullmatch(r"\(?Z(?:/(\d+)(?:Z)?)?\)?(?:\^(\d+))?", part)
            if not m:
                raise ValueError(f"cannot parse group factor {part!r}")
            mult = int(m.group(2) or 1)
            if m.group(1):
                cyc += [int(m.group(1))] * mult
            else:
                free += mult
        return cls(free, invariant_factors(cyc))

    def __str__(self) -> str:
        parts = [f"Z/{d}" for d in self.torsion]
        if self.free_rank == 1:
            parts.append("Z")
        elif self.free_rank > 1:
            parts.append(f"Z^{self.free_rank}")
        return " x ".join(parts) if parts else "0"

    def to_dict(self) -> dict:
        return {"free_rank": self.free_rank, "torsion": list(self.torsion)}


def invariant_factors(orders: Sequence[int]) -> tuple[int, ...]:
    """Invariant factors of a product of cyclic groups of the given orders."""
    snf = smith_normal_form([[d if i == j else 0 for j in range(len(orders))]
                             for i, d in enumerate(orders)])[0] if orders else []
    return tuple(d for d in snf if d > 1)


def _identity(n):
    return [[int(i == j) for j in range(n)] for i in range(n)]


def smith_normal_form(m: IntMatrix):
    """Return ``(diag, U, V)`` with ``U @ m @ V`` diagonal.

    ``diag`` has length ``min(rows, cols)``, is nonnegative and forms a
    divisibility chain (zeros last).  ``U`` and ``V`` are unimodular.
    Pivots are chosen by least absolute value.
    """
    a = [list(map(int, r)) for r in m]
    rows = len(a)
    cols = len(a[0]) if rows else 0
    U = _identity(rows)
    V = _identity(cols)

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for r in a:
            r[i], r[j] = r[j], r[i]
        for r in V:
            r[i], r[j] = r[j], r[i]

    def add_row(dst, src, k):  # row dst += k * row src
        a[dst] = [x + k * y for x, y in zip(a[dst], a[src])]
        U[dst] = [x + k * y for x, y in zip(U[dst], U[src])]

    def add_col(dst, src, k):
        for r in a:
            r[dst] += k * r[src]
        for r in V:
            r[dst] += k * r[src]

    t = 0
    while t < min(rows, cols):
        nz = [(abs(a[i][j]), i, j) for i in range(t, rows) for j in range(t, cols) if a[i][j]]
        if not nz:
            break
        _, pi, pj = min(nz)
        swap_rows(t, pi)
        swap_cols(t, pj)
        while True:
            p = a[t][t]
            done = True
            for i in range(t + 1, rows):
                if a[i][t]:
                    add_row(i, t, -(a[i][t] // p))
                    if a[i][t]:
                        done = False
            for j in range(t + 1, cols):
                if a[t][j]:
                    add_col(j, t, -(a[t][j] // p))
                    if a[t][j]:
                        done = False
            if not done:
                # a smaller remainder appeared in the pivot row/column
                cand = [(abs(a[i][t]), i, t) for i in range(t, rows) if a[i][t]]
                cand += [(abs(a[t][j]), t, j) for j in range(t, cols) if a[t][j]]
                _, pi, pj = min(cand)
                swap_rows(t, pi)
                swap_cols(t, pj)
                continue
            # divisibility: fold in any entry not divisible by the pivot
            bad = next(((i, j) for i in range(t + 1, rows) for j in range(t + 1, cols)
                        if a[i][j] % p), None)
            if bad is None:
                break
            add_row(t, bad[0], 1)
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            U[t] = [-x for x in U[t]]
        t += 1
    diag = [a[i][i] for i in range(min(rows, cols))]
    return diag, U, V


def determinant(m: IntMatrix) -> int:
    """Exact determinant by fraction-free Bareiss elimination."""
    a = [list(map(int, r)) for r in m]
    n = len(a)
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            sw = next((i for i in range(k + 1, n) if a[i][k]), None)
            if sw is None:
                return 0
            a[k], a[sw] = a[sw], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1] if n else 1


def matmul(a: IntMatrix, b: IntMatrix) -> IntMatrix:
    return [[sum(x * y for x, y in zip(r, c)) for c in zip(*b)] for r in a]


def cokernel(relations: IntMatrix, ngens: int) -> AbelianGroup:
    """``Z^ngens`` modulo the row span of ``relations``."""
    if not relations:
        return AbelianGroup(ngens)
    diag, _, _ = smith_normal_form(relations)
    return AbelianGroup.from_divisors(diag, ngens)


def boundary_matrix(p) -> IntMatrix:
    """Face-by-letter signed occurrence counts."""
    n = max(abs(x) for f in p.faces for x in f)
    rows = []
    for f in p.faces:
        r = [0] * n
        for x in f:
            r[abs(x) - 1] += 1 if x > 0 else -1
        rows.append(r)
    return rows


def h1_of_complex(p) -> AbelianGroup:
    b = boundary_matrix(p)
    return cokernel(b, len(b[0]))


# ----------------------------------------------------------------------
# relator words

_TOKEN = re.compile(r"\s*([A-Za-z])('?)(?:\^(-?\d+|[A-Za-z]'?))?")


class WordError(ValueError):
    pass


def parse_word(text: str, generators: Sequence[str]) -> list[tuple[int, int]]:
    """Parse a word into ``(generator index, exponent)`` pairs.

    Uppercase or a trailing ``'`` inverts a letter, ``^n`` raises to a power,
    ``x^y`` is the conjugate ``y^-1 x y`` and ``e`` is the identity.  An
    equation ``lhs = rhs`` stands for ``lhs rhs^-1``.
    """
    if "=" in text:
        lhs, rhs = text.split("=", 1)
        return parse_word(lhs, generators) + invert(parse_word(rhs, generators))
    index = {g: i for i, g in enumerate(generators)}
    out: list[tuple[int, int]] = []
    pos = 0
    text = text.strip()

    def letter(ch, prime):
        if ch == "e" and "e" not in index:
            return None
        inv = ch.isupper() != bool(prime)
        low = ch.lower()
        if low not in index:
            raise WordError(f"unknown generator {ch!r}")
        return index[low], -1 if inv else 1

    while pos < len(text):
        if text[pos].isspace() or text[pos] in "*·":
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise WordError(f"cannot parse word at {text[pos:]!r}")
        pos = m.end()
        base = letter(m.group(1), m.group(2))
        if base is None:
            continue
        exp = m.group(3)
        if exp is None:
            out.append(base)
        elif re.fullmatch(r"-?\d+", exp):
            out.append((base[0], base[1] * int(exp)))
        else:
            conj = letter(exp[0], exp[1:])
            out += [(conj[0], -conj[1]), base, conj]
    return [t for t in out if t[1]]


def invert(word: list[tuple[int, int]]) -> list[tuple[int, int]]:
    return [(g, -e) for g, e in reversed(word)]


def exponent_sums(word, ngens: int) -> list[int]:
    row = [0] * ngens
    for g, e in word:
        row[g] += e
    return row


def default_generators(n: int) -> list[str]:
    if n == 2:
        return ["s", "t"]
    if n == 3:
        return ["u", "v", "w"]
    return [chr(ord("a") + i) for i in range(n)]


def abelianization(generators: int | Sequence[str], relators: Sequence[str]) -> AbelianGroup:
    """Abelianization of ``<generators | relators>``.

    ``generators`` is a count (names ``s, t`` / ``u, v, w`` / ``a, b, ...``)
    or an explicit list of one-letter names.
    """
    gens = default_generators(generators) if isinstance(generators, int) else list(generators)
    rows = [exponent_sums(parse_word(r, gens), len(gens)) for r in relators]
    return cokernel(rows, len(gens))


# fundamental group presentations of the published complexes
PI1_PRESENTATIONS: dict[str, tuple[int, tuple[str, ...]]] = {
    "V0": (2, ("t s t^2 s' t = s t^2 s t^2 t^s", "s t' s' t^-2 s = t s t^2 t^s s t")),
    "V0_1": (3, ("u = v w' v' u w", "uv = wvwuw", "uvuw = wuvu")),
    "V0_2": (3, ("uv = wvwuw", "wu = uvwv^2", "v = uvw'uwu")),
    "V0_2_check": (3, ("uv = wvwuw", "wu = vuvwv", "wu^2v = vu'w")),
    "V1": (2, ("s^4 t s^-3 t s = t s^2 t", "t = s^2 t s' t' s^2 t' s^-2 t^2 s^2")),
    "V2_1": (2, ("s t^2 = t s t^2 s' t s^2", "t s' t^2 = s^3 t s^2 t^-2 s t' s t s^2")),
    "V2_2": (2, ("s^2 = t^2 s^4 t^-3 s t", "s t = t^2 s^-2 t^-4 s^3")),
    "V2_3": (2, ("s^2 t^3 s^3 t^2 = t^2 s^2", "t^2 = s^2 t^2 s^2 t^2 s^-2 t s")),
    "V2_4": (2, ("s^2 t^2 s t s^2 = t^3 s t", "s = t^3 s t s t' s^2 t s t")),
    "V3": (2, ("s t^3 s t = t^2 s t s^2", "s^2 = t^2 s t s^-2 t s' t^2 s t^3")),
    "V4_1": (3, ("v^2 = u^2", "w^2 u w = u w u^2", "w^2 v u w v u^3 w u^2 = e")),
    "V4_2": (2, ("t^2 s t^3 s t s t s^2 = e", "t^2 s^-2 t' s' t^2 = s^3 t s^2")),
    "Vbar": (2, ("s^2 t = t^2 s^2 t^2 s' t' s t' s", "t = s t s' t s' t^2 s' t^-2 s t' s")),
}

# published first homology groups
PUBLISHED_H1: dict[str, str] = {
    "V0": "Z/15", "V0_1": "Z/3 x Z^2", "V0_2": "(Z/3)^3", "V0_2_check": "(Z/3)^3",
    "V1": "Z/3 x Z", "V2_1": "Z/24", "V2_2": "(Z/3)^2", "V2_3": "Z/3 x Z",
    "V2_4": "Z/24", "V3": "Z/6", "V4_1": "(Z/2)^2 x Z/12", "V4_2": "Z/66", "Vbar": "Z",
}
