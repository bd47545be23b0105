"""Finitely presented groups and HLT coset enumeration over the trivial subgroup.

Relator words use single-letter generators with optional signed integer
exponents, e.g. ``x4`` or ``yxy-1x-3``.  Internally a word is a tuple of
signed 1-based generator indices (``-2`` is the inverse of the second one).
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .groups import PermGroup, closure

DEFAULT_COSET_LIMIT = 5_000

_TOKEN = re.compile(r"([a-zA-Z])(-?\d+)?")


class CosetLimitExceeded(RuntimeError):
    pass


@dataclass(frozen=True)
class Presentation:
    gen_names: tuple[str, ...]
    relators: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        for w in self.relators:
            for x in w:
                if x == 0 or abs(x) > self.n_gens:
                    raise ValueError(f"relator {w} references generator {x} outside 1..{self.n_gens}")

    @property
    def n_gens(self) -> int:
        return len(self.gen_names)

    @classmethod
    def parse(cls, gens: str, relators: list[str] | str) -> "Presentation":
        """``Presentation.parse("x,y", "x4, y2, yxyx")``."""
        names = tuple(g.strip() for g in gens.split(",") if g.strip())
        if isinstance(relators, str):
            relators = [r for r in re.split(r"[,\s]+", relators) if r]
        return cls(names, tuple(parse_word(r, names) for r in relators))

    def format_word(self, w: tuple[int, ...]) -> str:
        return format_word(w, self.gen_names)


def parse_word(text: str, names: tuple[str, ...]) -> tuple[int, ...]:
    text = text.strip()
    pos = 0
    out: list[int] = []
    for m in _TOKEN.finditer(text):
        if m.start() != pos:
            raise ValueError(f"cannot parse word {text!r} at position {pos}")
        pos = m.end()
        letter, exp = m.group(1), m.group(2)
        if letter not in names:
            raise ValueError(f"unknown generator {letter!r} in {text!r}")
        g = names.index(letter) + 1
        e = int(exp) if exp is not None else 1
        if e == 0:
            raise ValueError(f"zero exponent in {text!r}")
        out.extend([g if e > 0 else -g] * abs(e))
    if pos != len(text) or not out:
        raise ValueError(f"cannot parse word {text!r}")
    return tuple(out)


def format_word(w: tuple[int, ...], names: tuple[str, ...]) -> str:
    parts = []
    i = 0
    while i < len(w):
        j = i
        while j < len(w) and w[j] == w[i]:
            j += 1
        e = (j - i) * (1 if w[i] > 0 else -1)
        parts.append(names[abs(w[i]) - 1] + ("" if e == 1 else str(e)))
        i = j
    return "".join(parts)


class _CosetTable:
    def __init__(self, n_gens: int, limit: int):
        self.ncols = 2 * n_gens
        self.limit = limit
        self.table: list[list[int]] = [[-1] * self.ncols]
        self.parent: list[int] = [0]

    @staticmethod
    def col(x: int) -> int:
        return 2 * (x - 1) if x > 0 else 2 * (-x - 1) + 1

    def live(self, c: int) -> bool:
        return self.parent[c] == c

    def define(self, c: int, col: int) -> None:
        n = len(self.table)
        if n >= self.limit:
            raise CosetLimitExceeded(f"presentation too large / non-terminating within {self.limit} cosets")
        self.table.append([-1] * self.ncols)
        self.parent.append(n)
        self.table[c][col] = n
        self.table[n][col ^ 1] = c

    def rep(self, c: int) -> int:
        p = self.parent
        root = c
        while p[root] != root:
            root = p[root]
        while p[c] != root:
            p[c], c = root, p[c]
        return root

    def _merge(self, a: int, b: int, queue: list[int]) -> None:
        a, b = self.rep(a), self.rep(b)
        if a == b:
            return
        if a > b:
            a, b = b, a
        self.parent[b] = a
        queue.append(b)

    def coincidence(self, a: int, b: int) -> None:
        queue: list[int] = []
        self._merge(a, b, queue)
        t = self.table
        i = 0
        while i < len(queue):
            e = queue[i]
            i += 1
            for x in range(self.ncols):
                f = t[e][x]
                if f < 0:
                    continue
                if t[f][x ^ 1] == e:
                    t[f][x ^ 1] = -1
                e1, f1 = self.rep(e), self.rep(f)
                if t[e1][x] >= 0:
                    self._merge(f1, t[e1][x], queue)
                elif t[f1][x ^ 1] >= 0:
                    self._merge(e1, t[f1][x ^ 1], queue)
                else:
                    t[e1][x] = f1
                    t[f1][x ^ 1] = e1

    def scan_and_fill(self, c: int, word: list[int]) -> None:
        t = self.table
        f, b = c, c
        i, j = 0, len(word) - 1
        while True:
            while i <= j and t[f][word[i]] >= 0:
                f = t[f][word[i]]
                i += 1
            if i > j:
                if f != c:
                    self.coincidence(f, c)
                return
            while j >= i and t[b][word[j] ^ 1] >= 0:
                b = t[b][word[j] ^ 1]
                j -= 1
            if j < i:
                self.coincidence(f, b)
                return
            if i == j:
                t[f][word[i]] = b
                t[b][word[i] ^ 1] = f
                return
            self.define(f, word[i])


def enumerate_cosets(p: Presentation, limit: int = DEFAULT_COSET_LIMIT) -> list[list[int]]:
    """Coset table of the trivial subgroup; rows are live cosets renumbered by first definition."""
    ct = _CosetTable(p.n_gens, limit)
    words = [[ct.col(x) for x in w] for w in p.relators]
    c = 0
    while c < len(ct.table):
        if ct.live(c):
            for w in words:
                ct.scan_and_fill(c, w)
                if not ct.live(c):
                    break
            if ct.live(c):
                for x in range(ct.ncols):
                    if ct.table[c][x] < 0:
                        ct.define(c, x)
        c += 1
    live = [k for k in range(len(ct.table)) if ct.live(k)]
    renum = {k: i for i, k in enumerate(live)}
    return [[renum[ct.rep(ct.table[k][x])] for x in range(ct.ncols)] for k in live]


def realize(p: Presentation, limit: int = DEFAULT_COSET_LIMIT) -> PermGroup:
    """Regular permutation representation of the presented group."""
    table = enumerate_cosets(p, limit)
    n = len(table)
    # k -> k.g^-1 is a left action, so generator images compose like the words
    gens = [tuple(table[k][2 * g + 1] for k in range(n)) for g in range(p.n_gens)]
    return closure(n, gens, limit=max(limit, n))


def evaluate(G: PermGroup, word: tuple[int, ...], images: tuple[int, ...] | None = None) -> int:
    """Index of the word evaluated on G's stored generators (or on ``images``)."""
    imgs = images if images is not None else G.gen_indices
    x = 0
    for s in word:
        g = imgs[abs(s) - 1]
        x = int(G.mul[x, g if s > 0 else G.inv[g]])
    return x
