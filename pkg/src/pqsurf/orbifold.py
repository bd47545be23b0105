"""Branching signatures, Riemann-Hurwitz bookkeeping and generating vectors.

A G-cover C -> C/G of a genus g' curve branched in r points with orders
m_1..m_r satisfies 2g(C) - 2 = |G| (2g' - 2 + sum(1 - 1/m_j)).  We write
``t = g' - 1 + R/2`` with ``R = sum(1 - 1/m_j)``, so that g(C) - 1 = |G| t.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import permutations
from typing import TYPE_CHECKING

import numpy as np

from . import kernels
from .groups import Perm, PermGroup, closure_indices

if TYPE_CHECKING:
    from .catalog import CatalogEntry

log = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class Signature:
    base_genus: int
    branch_orders: tuple[int, ...] = ()

    def __post_init__(self):
        if self.base_genus < 0:
            raise ValueError("base genus must be non-negative")
        if any(m < 2 for m in self.branch_orders):
            raise ValueError(f"branch orders must be >= 2, got {self.branch_orders}")
        object.__setattr__(self, "branch_orders", tuple(sorted(int(m) for m in self.branch_orders)))

    @property
    def r(self) -> int:
        return len(self.branch_orders)

    @property
    def R(self) -> Fraction:
        return sum((1 - Fraction(1, m) for m in self.branch_orders), Fraction(0))

    @property
    def t(self) -> Fraction:
        """(g(C) - 1) / |G| for any cover with this signature."""
        return self.base_genus - 1 + self.R / 2

    @property
    def is_etale(self) -> bool:
        return self.r == 0

    @property
    def moduli_dim(self) -> int:
        return 3 * self.base_genus - 3 + self.r

    def orderings(self) -> list[tuple[int, ...]]:
        """Distinct orderings of the branch orders, lexicographic."""
        return sorted(set(permutations(self.branch_orders)))

    def m_label(self) -> str:
        """Exponent notation, e.g. ``(2^2,4^2)``; ``()`` when unramified."""
        parts = []
        for m in sorted(set(self.branch_orders)):
            k = self.branch_orders.count(m)
            parts.append(f"{m}^{k}" if k > 1 else str(m))
        return "(" + ",".join(parts) + ")"

    def __str__(self) -> str:
        return f"[{self.base_genus}; {self.m_label()}]"

    def token(self) -> str:
        """Compact form used in table files, e.g. ``0;(2^2,3)``."""
        return f"{self.base_genus};{self.m_label()}"

    @classmethod
    def from_token(cls, text: str) -> "Signature":
        g, sep, m = text.strip().partition(";")
        if not sep or not g.strip().isdigit():
            raise ValueError(f"bad signature token {text!r}")
        return cls.parse(int(g), m)

    @classmethod
    def parse(cls, base_genus: int, text: str) -> "Signature":
        text = text.strip()
        if not (text.startswith("(") and text.endswith(")")):
            raise ValueError(f"bad signature {text!r}")
        body = text[1:-1].strip()
        orders: list[int] = []
        if body:
            for part in body.split(","):
                m = re.fullmatch(r"\s*(\d+)(?:\^(\d+))?\s*", part)
                if not m:
                    raise ValueError(f"bad signature {text!r}")
                orders.extend([int(m.group(1))] * int(m.group(2) or 1))
        return cls(base_genus, tuple(orders))


def riemann_hurwitz_genus(order: int, sig: Signature) -> Fraction:
    """Genus solving 2g - 2 = |G|(2g' - 2 + R); may be non-integral or negative."""
    return 1 + order * sig.t


def cover_genus(order: int, sig: Signature) -> int | None:
    """Integral non-negative cover genus, or None (the rejection is logged)."""
    g = riemann_hurwitz_genus(order, sig)
    if g.denominator != 1 or g < 0:
        log.info("riemann-hurwitz rejects |G|=%d %s: g=%s", order, sig, g)
        return None
    return int(g)


def _orders_for_R(divs: list[int], R: Fraction, start: int = 0) -> list[tuple[int, ...]]:
    """Non-decreasing tuples from divs[start:] with sum(1 - 1/m) == R."""
    if R == 0:
        return [()]
    out = []
    for i in range(start, len(divs)):
        m = divs[i]
        term = 1 - Fraction(1, m)
        if term > R:
            break
        # all remaining terms are >= term, so at most R/term more entries
        for rest in _orders_for_R(divs, R - term, i):
            out.append((m,) + rest)
    return out


def signatures_with_t(order: int, base_genus: int, t: Fraction) -> list[Signature]:
    """All signatures over a genus-g' base with m_j | order and the given t."""
    R = 2 * (Fraction(t) - base_genus + 1)
    if R < 0:
        return []
    divs = [d for d in range(2, order + 1) if order % d == 0]
    return [Signature(base_genus, ms) for ms in _orders_for_R(divs, R)]


def admissible_signatures(order: int, base_genus: int, target_genus: int) -> list[Signature]:
    """Signatures realizing cover genus ``target_genus`` by Riemann-Hurwitz."""
    if order < 1 or target_genus < 0:
        return []
    return signatures_with_t(order, base_genus, Fraction(target_genus - 1, order))


def signatures_up_to(order: int, base_genus: int, t_max: Fraction, t_min: Fraction = Fraction(0),
                     ramified_only: bool = False) -> list[Signature]:
    """Signatures with t_min < t <= t_max and m_j | order, sorted by (t, orders)."""
    R_max = 2 * (Fraction(t_max) - base_genus + 1)
    if R_max < 0:
        return []
    divs = [d for d in range(2, order + 1) if order % d == 0]
    out: list[Signature] = []

    def rec(start: int, acc: tuple[int, ...], R: Fraction):
        sig = Signature(base_genus, acc)
        if t_min < sig.t and (acc or not ramified_only):
            out.append(sig)
        for i in range(start, len(divs)):
            term = 1 - Fraction(1, divs[i])
            if R + term > R_max:
                break
            rec(i, acc + (divs[i],), R + term)

    rec(0, (), Fraction(0))
    return sorted(out, key=lambda s: (s.t, s.branch_orders))


def t_lower_bound(base_genus: int, ramified: bool) -> Fraction:
    """Smallest positive t over a genus-g' base (ramified or not)."""
    if base_genus == 0:
        return Fraction(1, 84)
    if base_genus == 1:
        return Fraction(1, 4)
    return Fraction(base_genus - 1) + (Fraction(1, 4) if ramified else 0)


# --- generating vectors ----------------------------------------------------------

@dataclass(frozen=True)
class GeneratingVector:
    """Element indices (into G.elements) of a generating vector."""

    hyperbolic: tuple[tuple[int, int], ...]
    branch: tuple[int, ...]

    @classmethod
    def from_row(cls, row, base_genus: int) -> "GeneratingVector":
        row = [int(x) for x in row]
        hyp = tuple((row[2 * i], row[2 * i + 1]) for i in range(base_genus))
        return cls(hyp, tuple(row[2 * base_genus:]))

    def as_row(self) -> tuple[int, ...]:
        return tuple(x for pair in self.hyperbolic for x in pair) + self.branch

    def perms(self, G: PermGroup) -> tuple[list[tuple[Perm, Perm]], list[Perm]]:
        el = G.elements
        return [(el[a], el[b]) for a, b in self.hyperbolic], [el[c] for c in self.branch]


def long_relation(G: PermGroup, v: GeneratingVector) -> int:
    m, inv = G.mul, G.inv
    x = 0
    for a, b in v.hyperbolic:
        x = int(m[m[m[m[x, a], b], inv[a]], inv[b]])
    for c in v.branch:
        x = int(m[x, c])
    return x


def is_generating_vector(G: PermGroup, sig: Signature, v: GeneratingVector, ordered: bool = True) -> bool:
    if len(v.hyperbolic) != sig.base_genus or len(v.branch) != sig.r:
        return False
    got = [int(G.orders[c]) for c in v.branch]
    if (got != list(sig.branch_orders)) if ordered else (sorted(got) != list(sig.branch_orders)):
        return False
    return long_relation(G, v) == 0 and G.generates(v.as_row())


def vector_array(G: PermGroup, sig: Signature, all_orderings: bool = False,
                 backend: str | None = None) -> np.ndarray:
    """Sorted (N, 2g'+r) array of generating vectors.

    With ``all_orderings`` the branch orders may appear in any order (the set
    closed under braid moves); otherwise they follow the sorted signature.
    """
    orderings = sig.orderings() if all_orderings else [sig.branch_orders]
    parts = [kernels.enumerate_vectors(G.mul, G.inv, G.orders, G.maximal_masks, sig.base_genus, o, backend)
             for o in orderings]
    V = np.concatenate(parts) if len(parts) > 1 else parts[0]
    return kernels.sort_rows(V, G.order)


def enumerate_generating_vectors(G: PermGroup, sig: Signature) -> list[GeneratingVector]:
    return [GeneratingVector.from_row(row, sig.base_genus) for row in vector_array(G, sig)]


def stabilizer_indices(G: PermGroup, v: GeneratingVector | tuple[int, ...], base_genus: int | None = None) -> frozenset[int]:
    """Indices of elements with fixed points on the cover (identity included)."""
    branch = v.branch if isinstance(v, GeneratingVector) else tuple(v)[2 * (base_genus or 0):]
    return closure_indices(G, [0, *branch])


def stabilizer_set(G: PermGroup, v: GeneratingVector) -> frozenset[Perm]:
    return frozenset(G.elements[i] for i in stabilizer_indices(G, v))


@dataclass(frozen=True, eq=False)
class OrbifoldDatum:
    group: "CatalogEntry"
    signature: Signature
    vector: GeneratingVector = field(compare=False)

    @cached_property
    def cover_genus(self) -> int:
        g = riemann_hurwitz_genus(self.group.order, self.signature)
        if g.denominator != 1 or g < 0:
            raise ValueError(f"inadmissible datum: g={g}")
        return int(g)

    @property
    def G(self) -> PermGroup:
        return self.group.group

    @cached_property
    def stabilizers(self) -> frozenset[int]:
        return stabilizer_indices(self.G, self.vector)
