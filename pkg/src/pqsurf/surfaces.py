"""Surface candidates (C1 x C2)/G, their singularity baskets and invariants.

Fixed points on a curve are modelled by cosets: over the j-th branch point
the fibre is G/<c_j>, the point g<c_j> has stabilizer generated by
g c_j g^-1, and that generator acts on the tangent line by exp(2 pi i/m_j).
A point pair on C1 x C2 with cyclic stabilizer H of order n > 1 gives a
cyclic quotient singularity 1/n(1,a), a being read off from how a generator
of H rotates the two tangent lines.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from math import comb, gcd

from .groups import PermGroup
from .orbifold import OrbifoldDatum

log = logging.getLogger(__name__)


class InadmissiblePair(ValueError):
    pass


# --- cyclic quotient singularities ------------------------------------------------

@dataclass(frozen=True, order=True)
class SingularityType:
    n: int
    a: int

    def __post_init__(self):
        if not (1 <= self.a < self.n) or gcd(self.a, self.n) != 1:
            raise ValueError(f"1/{self.n}(1,{self.a}) is not a cyclic quotient type")
        a_inv = pow(self.a, -1, self.n)
        object.__setattr__(self, "a", min(self.a, a_inv))

    def __str__(self) -> str:
        return f"1/{self.n}(1,{self.a})"

    @classmethod
    def parse(cls, text: str) -> "SingularityType":
        body = text.strip()
        num, _, rest = body.partition("(")
        if not num.startswith("1/") or not rest.endswith(")"):
            raise ValueError(f"bad singularity type {text!r}")
        one, a = rest[:-1].split(",")
        if one.strip() != "1":
            raise ValueError(f"bad singularity type {text!r}")
        return cls(int(num[2:]), int(a))

    @property
    def hj(self) -> "HJExpansion":
        return hj_expand(self.n, self.a)

    @property
    def is_rdp(self) -> bool:
        return self.a == self.n - 1

    @property
    def k2_correction(self) -> Fraction:
        return k2_correction(self.n, self.a)

    @property
    def euler_contribution(self) -> Fraction:
        """Change of e from the smooth point count: (1 - 1/n) + length of the chain."""
        return 1 - Fraction(1, self.n) + self.hj.length


@dataclass(frozen=True)
class HJExpansion:
    bs: tuple[int, ...]

    @property
    def length(self) -> int:
        return len(self.bs)

    def value(self) -> Fraction:
        x = Fraction(self.bs[-1])
        for b in reversed(self.bs[:-1]):
            x = b - 1 / x
        return x


def hj_expand(n: int, a: int) -> HJExpansion:
    """Continued fraction n/a = b1 - 1/(b2 - ...) with every b_i >= 2."""
    if not (1 <= a < n) or gcd(a, n) != 1:
        raise ValueError(f"need 1 <= a < n coprime, got n={n}, a={a}")
    bs = []
    p, q = n, a
    while q:
        b = -(-p // q)
        bs.append(b)
        p, q = q, b * q - p
    return HJExpansion(tuple(bs))


def discrepancies(bs: tuple[int, ...]) -> tuple[Fraction, ...]:
    """Solve a_{i-1} - b_i a_i + a_{i+1} = b_i - 2 on the exceptional chain (Thomas algorithm)."""
    l = len(bs)
    # tridiagonal: sub = 1, diag = -b_i, sup = 1
    c = [Fraction(0)] * l
    d = [Fraction(0)] * l
    for i in range(l):
        diag = Fraction(-bs[i]) - (c[i - 1] if i else 0)
        rhs = Fraction(bs[i] - 2) - (d[i - 1] if i else 0)
        c[i] = Fraction(1) / diag if i < l - 1 else Fraction(0)
        d[i] = rhs / diag
    a = [Fraction(0)] * l
    for i in reversed(range(l)):
        a[i] = d[i] - (c[i] * a[i + 1] if i < l - 1 else 0)
    return tuple(a)


@lru_cache(maxsize=None)
def k2_correction(n: int, a: int) -> Fraction:
    """(sum a_i E_i)^2 = sum a_i (b_i - 2); non-positive, zero exactly for RDPs."""
    bs = hj_expand(n, a).bs
    return sum((ai * (b - 2) for ai, b in zip(discrepancies(bs), bs)), Fraction(0))


Basket = tuple[tuple[SingularityType, int], ...]


def make_basket(types) -> Basket:
    return tuple(sorted(Counter(types).items()))


def basket_label(basket: Basket) -> str:
    if not basket:
        return "-"
    return "+".join(f"{k}x{t}" if k > 1 else str(t) for t, k in basket)


def parse_basket(text: str) -> Basket:
    """Inverse of :func:`basket_label`."""
    text = text.strip()
    if text in ("", "-"):
        return ()
    types = []
    for part in text.split("+"):
        k, sep, t = part.partition("x")
        if sep:
            types += [SingularityType.parse(t)] * int(k)
        else:
            types.append(SingularityType.parse(part))
    return make_basket(types)


def basket_types_label(basket: Basket) -> str:
    """Types only, as in a 'Type' column: ``1/3(1,1)+1/3(1,2)``."""
    return "+".join(str(t) for t, _ in basket) if basket else "-"


def basket_size(basket: Basket) -> int:
    return sum(k for _, k in basket)


# --- invariants ------------------------------------------------------------------

@dataclass(frozen=True)
class InvariantSet:
    chi: int
    e: int
    k2: int
    pg: int
    q: int
    albdim: int
    moduli_dim: int

    def __post_init__(self):
        assert 12 * self.chi == self.k2 + self.e, "Noether identity violated"
        assert self.chi == 1 - self.q + self.pg


@dataclass(frozen=True)
class GateResult:
    passed: bool
    violations: tuple[str, ...]
    chi: int
    e: int

    def plurigenus(self, n: int, k2: int) -> int:
        return self.chi + comb(n, 2) * k2


def admissibility_gate(k2: int, pg: int, q: int) -> GateResult:
    chi = 1 - q + pg
    bad = []
    if k2 < 1 or chi < 1:
        bad.append("K^2 >= 1 and chi >= 1")
    if k2 > 9 * chi:
        bad.append("BMY: K^2 <= 9 chi")
    if q > 0 and k2 < 2 * pg:
        bad.append("Debarre: K^2 >= 2 p_g")
    if k2 < 2 * chi - 6:
        bad.append("Noether: K^2 >= 2 chi - 6")
    return GateResult(not bad, tuple(bad), chi, 12 * chi - k2)


def plurigenus(n: int, chi: int, k2: int) -> int:
    return chi + comb(n, 2) * k2


def albanese_dimension(g1: int, g2: int) -> int:
    return int(g1 >= 1) + int(g2 >= 1)


# --- candidates -----------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class MixedExtension:
    """Index-2 overgroup G of the acting group, with the embedded copy H and a coset element."""
    overgroup: object  # CatalogEntry
    subgroup: frozenset[int]
    embedding: tuple[int, ...]  # index map K -> overgroup
    tau: int


@dataclass(frozen=True, eq=False)
class SurfaceCandidate:
    kind: str  # "unmixed" | "mixed"
    datum1: OrbifoldDatum
    datum2: OrbifoldDatum
    basket: Basket = ()
    free: bool = True
    extension: MixedExtension | None = field(default=None)

    def __post_init__(self):
        assert self.kind in ("unmixed", "mixed")
        assert self.free == (len(self.basket) == 0)

    @property
    def order(self) -> int:
        if self.kind == "mixed":
            return self.extension.overgroup.order
        return self.datum1.group.order


def pair_unmixed(d1: OrbifoldDatum, d2: OrbifoldDatum) -> SurfaceCandidate:
    if d1.group.key != d2.group.key:
        raise ValueError("unmixed pair needs a common group")
    free = d1.stabilizers & d2.stabilizers == {0}
    basket = () if free else singularity_basket(d1, d2)
    return SurfaceCandidate("unmixed", d1, d2, basket, free)


def _power_index(G: PermGroup, g: int, target: int) -> int | None:
    x = 0
    for k in range(int(G.orders[g])):
        if x == target:
            return k
        x = int(G.mul[x, g])
    return None


def basket_from_rows(G: PermGroup, branch1: tuple[int, ...], branch2: tuple[int, ...]) -> Basket:
    """Singular points of (C1 x C2)/G from the branch elements of both vectors."""
    mul, inv = G.mul, G.inv
    types = []
    for c in branch1:
        mc = int(G.orders[c])
        cyc_c = G.span([c])
        for d in branch2:
            md = int(G.orders[d])
            seen: set[int] = set()
            for g in range(G.order):
                if g in seen:
                    continue
                # double coset <c> g <d>; orbit representative pair (<c>, g<d>)
                dc = {int(mul[mul[x, g], y]) for x in cyc_c for y in G.span([d])}
                seen |= dc
                gamma_q = int(mul[mul[g, d], inv[g]])
                cyc_q = G.span([gamma_q])
                n = len(cyc_c & cyc_q)
                if n == 1:
                    continue
                h = G.power(c, mc // n)  # rotates the first tangent line by exp(2 pi i/n)
                k = _power_index(G, gamma_q, h)
                assert k is not None and k % (md // n) == 0
                a = (k // (md // n)) % n
                types.append(SingularityType(n, a))
    return make_basket(types)


def singularity_basket(d1: OrbifoldDatum, d2: OrbifoldDatum) -> Basket:
    return basket_from_rows(d1.G, d1.vector.branch, d2.vector.branch)


def fixed_point_count(G: PermGroup, branch: tuple[int, ...], h: int) -> Fraction:
    """Fixed points of h on the cover: |C_G(h)| sum_j #{k : c_j^k ~ h} / m_j."""
    if h == 0:
        raise ValueError("identity fixes everything")
    cls = None
    for c in G.conjugacy_classes:
        if h in c:
            cls = c
            break
    total = Fraction(0)
    for c in branch:
        m = int(G.orders[c])
        hits = sum(1 for k in range(m) if G.power(c, k) in cls)
        total += Fraction(hits, m)
    return G.centralizer_order(h) * total


def invariants_free(d1: OrbifoldDatum, d2: OrbifoldDatum) -> InvariantSet:
    N = d1.group.order
    num = (d1.cover_genus - 1) * (d2.cover_genus - 1)
    if num % N:
        raise InadmissiblePair(f"non-integral chi {Fraction(num, N)}")
    chi = num // N
    q = d1.signature.base_genus + d2.signature.base_genus
    return InvariantSet(chi, 4 * chi, 8 * chi, chi - 1 + q, q,
                        albanese_dimension(d1.signature.base_genus, d2.signature.base_genus),
                        d1.signature.moduli_dim + d2.signature.moduli_dim)


def quotient_numbers(order: int, g1: int, g2: int, basket: Basket) -> tuple[Fraction, Fraction]:
    """(K^2, e) of the minimal resolution of (C1 x C2)/G."""
    base = Fraction((g1 - 1) * (g2 - 1), order)
    k2 = 8 * base + sum((k * t.k2_correction for t, k in basket), Fraction(0))
    e = 4 * base + sum((k * t.euler_contribution for t, k in basket), Fraction(0))
    return k2, e


def invariants_quotient(c: SurfaceCandidate) -> InvariantSet:
    if c.kind == "mixed":
        return invariants_mixed(c)
    d1, d2 = c.datum1, c.datum2
    k2, e = quotient_numbers(d1.group.order, d1.cover_genus, d2.cover_genus, c.basket)
    chi = (k2 + e) / 12
    if chi.denominator != 1 or k2.denominator != 1 or e.denominator != 1:
        raise InadmissiblePair(f"invalid basket/genus combination: K^2={k2}, e={e}")
    q = d1.signature.base_genus + d2.signature.base_genus
    chi_i = int(chi)
    return InvariantSet(chi_i, int(e), int(k2), chi_i - 1 + q, q,
                        albanese_dimension(d1.signature.base_genus, d2.signature.base_genus),
                        d1.signature.moduli_dim + d2.signature.moduli_dim)


def invariants_mixed(c: SurfaceCandidate) -> InvariantSet:
    d = c.datum1
    N = c.order
    num = (d.cover_genus - 1) ** 2
    if num % N:
        raise InadmissiblePair(f"non-integral chi {Fraction(num, N)}")
    chi = num // N
    q = d.signature.base_genus
    return InvariantSet(chi, 4 * chi, 8 * chi, chi - 1 + q, q, 2 if q >= 2 else q, d.signature.moduli_dim)


def is_generalized_hyperelliptic(c: SurfaceCandidate) -> bool:
    if c.kind != "unmixed":
        raise ValueError("generalized hyperelliptic type is defined for unmixed candidates only")
    s1, s2 = c.datum1.signature, c.datum2.signature
    return any(a.is_etale and a.base_genus >= 2 and b.base_genus == 0 for a, b in ((s1, s2), (s2, s1)))


# --- mixed actions ----------------------------------------------------------------

def mixed_free(G: PermGroup, H: frozenset[int], sigma_H: frozenset[int], tau: int) -> bool:
    """Freeness of the mixed action: H free on C x C and no g outside H squares into Sigma_H."""
    conj = {G.conj(x, tau) for x in sigma_H}
    if (conj & sigma_H) != {0}:
        return False
    for g in range(G.order):
        if g not in H and int(G.mul[g, g]) in sigma_H:
            return False
    return True


def index_two_embeddings(K: PermGroup, G: PermGroup) -> list[tuple[frozenset[int], tuple[int, ...]]]:
    """Index-2 subgroups of G isomorphic to K, with one isomorphism K -> H each."""
    from .groups import isomorphism, regular_group

    out = []
    for H in G.subgroups:
        if len(H) * 2 != G.order:
            continue
        els = sorted(H)
        pos = {x: i for i, x in enumerate(els)}
        sub_mul = [[pos[int(G.mul[x, y])] for y in els] for x in els]
        R = regular_group(sub_mul, range(len(els)))
        # R's element order differs from the index list; map through left-regular images
        iso = isomorphism(K, R)
        if iso is None:
            continue
        reg_index = {tuple(int(v) for v in sub_mul[i]): i for i in range(len(els))}
        to_H = tuple(els[reg_index[R.elements[int(iso[k])]]] for k in range(K.order))
        out.append((H, to_H))
    return out


def mixed_candidates(catalog, d: OrbifoldDatum) -> list[SurfaceCandidate]:
    K = d.G
    if d.cover_genus < 2:
        return []
    out = []
    for entry in catalog.groups_of_order(2 * K.order):
        G = entry.group
        for H, emb in index_two_embeddings(K, G):
            sigma = frozenset(emb[x] for x in d.stabilizers)
            tau = min(g for g in range(G.order) if g not in H)
            if mixed_free(G, H, sigma, tau):
                ext = MixedExtension(entry, H, emb, tau)
                out.append(SurfaceCandidate("mixed", d, d, (), True, ext))
    return out


__all__ = [
    "SingularityType", "HJExpansion", "hj_expand", "discrepancies", "k2_correction", "InvariantSet",
    "SurfaceCandidate", "pair_unmixed", "singularity_basket", "invariants_free", "invariants_quotient",
    "mixed_candidates", "is_generalized_hyperelliptic", "admissibility_gate",
]
