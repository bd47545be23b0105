"""Hurwitz-move orbits, component counts and family records.

Each side of a construction gets its vectors partitioned into orbits of the
move group (braids, mapping-class moves, point pushes, and conjugation by
G).  Aut(G) then permutes those orbits, and the component count of a family
is the number of Aut(G)-orbits on the relevant orbit pairs, merged under the
factor swap when both sides carry the same group and signature.

Every move below maps the long relation to itself as a free-group identity,
so it is a bijection on the vector set (braids need all orderings of the
branch orders, which is what ``vector_array(..., all_orderings=True)`` gives).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import kernels
from .groups import PermGroup, automorphism_tables
from .orbifold import GeneratingVector, Signature, vector_array
from .surfaces import Basket, InvariantSet, SurfaceCandidate, basket_label

log = logging.getLogger(__name__)


def _P(p: int) -> int:
    return 2 * p


def _I(p: int) -> int:
    return 2 * p + 1


def _K(e: int) -> int:
    return -e - 1


def move_words(genus: int, r: int, conj: tuple[int, ...] = (), inv: np.ndarray | None = None) -> list[list[list[int]]]:
    """Token words of the generating moves for vectors of shape (genus, r)."""
    L = 2 * genus + r

    def ident():
        return [[_P(p)] for p in range(L)]

    moves = []
    for i in range(genus):
        a, b = 2 * i, 2 * i + 1
        m = ident()
        m[a] = [_P(a), _P(b)]  # a -> ab
        moves.append(m)
        m = ident()
        m[b] = [_P(b), _P(a)]  # b -> ba
        moves.append(m)
    for i in range(genus - 1):
        a1, b1, a2, b2 = 2 * i, 2 * i + 1, 2 * i + 2, 2 * i + 3
        x = [_P(a1), _P(b1), _I(a1), _I(b1)]
        xi = [_P(b1), _P(a1), _I(b1), _I(a1)]
        m = ident()  # handle swap
        m[a1], m[b1], m[a2], m[b2] = x + [_P(a2)] + xi, x + [_P(b2)] + xi, [_P(a1)], [_P(b1)]
        moves.append(m)
        m = ident()  # twist along a curve meeting both handles
        m[a1] = [_I(a2), _P(a1), _P(a2)]
        m[b1] = [_I(a2), _I(a1), _P(a2), _P(a1), _P(b1), _P(a1), _P(a2)]
        m[a2] = [_I(a2), _I(a1), _P(a2), _P(a1), _P(a2)]
        m[b2] = [_P(b2), _P(a1), _P(a2)]
        moves.append(m)
    if genus >= 1 and r >= 1:
        a, b, c = 2 * genus - 2, 2 * genus - 1, 2 * genus
        m = ident()  # push the first branch point around the last handle
        m[a] = [_P(a), _P(c)]
        m[b] = [_I(c), _P(b), _P(c)]
        m[c] = [_I(c), _P(b), _P(c), _I(b), _P(c)]
        moves.append(m)
    for j in range(r - 1):
        cj, ck = 2 * genus + j, 2 * genus + j + 1
        m = ident()
        m[cj], m[ck] = [_P(cj), _P(ck), _I(cj)], [_P(cj)]
        moves.append(m)
    for e in conj:
        e_inv = int(inv[e]) if inv is not None else e
        moves.append([[_K(e), _P(p), _K(e_inv)] for p in range(L)])
    return moves


@dataclass(eq=False)
class OrbitData:
    """Vectors of one (group, signature) side with their orbit structure."""

    G: PermGroup
    signature: Signature
    vectors: np.ndarray
    labels: np.ndarray
    backend: str | None = None
    _aut: np.ndarray | None = field(default=None, repr=False)

    @classmethod
    def build(cls, G: PermGroup, sig: Signature, vectors: np.ndarray | None = None,
              backend: str | None = None) -> "OrbitData":
        if vectors is None:
            vectors = vector_array(G, sig, all_orderings=True, backend=backend)
        words = move_words(sig.base_genus, sig.r, G.gen_indices, G.inv)
        labels = kernels.orbit_labels(vectors, G.mul, G.inv, words, backend=backend)
        return cls(G, sig, vectors, labels, backend)

    @property
    def n_orbits(self) -> int:
        return int(self.labels.max()) + 1 if len(self.labels) else 0

    @cached_property
    def reps(self) -> np.ndarray:
        """Row index of the first vector of each orbit."""
        _, first = np.unique(self.labels, return_index=True)
        return first

    @cached_property
    def keys(self) -> np.ndarray:
        return kernels.vector_keys(self.vectors, self.G.order)

    def label_of(self, row) -> int:
        key = kernels.vector_keys(np.asarray(row, dtype=np.int64)[None, :], self.G.order)[0]
        j = int(np.searchsorted(self.keys, key))
        if j >= len(self.keys) or self.keys[j] != key:
            raise KeyError(f"{list(row)} is not a vector of this side")
        return int(self.labels[j])

    def rep_vector(self, label: int) -> GeneratingVector:
        return GeneratingVector.from_row(self.vectors[self.reps[label]], self.signature.base_genus)

    def aut_action(self, auts: np.ndarray) -> np.ndarray:
        """(n_aut, n_orbits) image labels of orbit representatives under each automorphism."""
        if self._aut is None:
            rep_rows = self.vectors[self.reps]
            out = np.empty((len(auts), self.n_orbits), dtype=np.int64)
            for k, phi in enumerate(auts):
                imgs = phi[rep_rows]
                # image rows keep their branch-order pattern, so they are in the set
                for o, row in enumerate(imgs):
                    out[k, o] = self.label_of(row)
            self._aut = out
        return self._aut

    def partition(self) -> list[list[int]]:
        parts: list[list[int]] = [[] for _ in range(self.n_orbits)]
        for i, lab in enumerate(self.labels):
            parts[int(lab)].append(i)
        return parts


_AUT_CACHE: dict[int, np.ndarray] = {}


def aut_tables(G: PermGroup) -> np.ndarray:
    key = id(G)
    if key not in _AUT_CACHE:
        _AUT_CACHE[key] = automorphism_tables(G)
    return _AUT_CACHE[key]


def hurwitz_orbits(G: PermGroup, sig: Signature, vectors: list[GeneratingVector] | np.ndarray,
                   with_automorphisms: bool = True, backend: str | None = None) -> list[list[int]]:
    """Partition of the given vectors (indices into the input) under moves, Inn(G) and Aut(G).

    The input may list vectors in any order and with branch orders in any
    arrangement; orbits are computed on the full braid-closed set.
    """
    rows = np.array([v.as_row() if isinstance(v, GeneratingVector) else tuple(v) for v in vectors],
                    dtype=np.int64).reshape(len(vectors), -1)
    data = OrbitData.build(G, sig, backend=backend)
    labels = np.array([data.label_of(r) for r in rows], dtype=np.int64)
    if with_automorphisms and data.n_orbits > 1:
        act = data.aut_action(aut_tables(G))
        parent = list(range(data.n_orbits))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for row in act:
            for o, img in enumerate(row):
                a, b = find(o), find(int(img))
                if a != b:
                    parent[max(a, b)] = min(a, b)
        labels = np.array([find(int(x)) for x in labels])
    groups: dict[int, list[int]] = {}
    for i, lab in enumerate(labels):
        groups.setdefault(int(lab), []).append(i)
    return sorted(groups.values())


def pair_classes(act1: np.ndarray, act2: np.ndarray, pairs: list[tuple[int, int]], swap: bool) -> dict[tuple[int, int], tuple[int, int]]:
    """Canonical representative of each orbit pair under diagonal Aut(G) (and the swap)."""
    out = {}
    for o1, o2 in pairs:
        imgs = list(zip(act1[:, o1].tolist(), act2[:, o2].tolist()))
        if swap:
            imgs += [(b, a) for a, b in imgs]
        out[(o1, o2)] = min(imgs)
    return out


# --- families --------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class FamilyRecord:
    kind: str  # GH | UnMix | Mix | PQ
    k2: int
    pg: int
    q: int
    group_key: tuple[int, int]
    group_name: str
    signatures: tuple[Signature, ...]
    genera: tuple[int, ...]
    basket: Basket
    dimension: int
    component_count: int
    gh_flag: bool
    albdim: int
    representative: SurfaceCandidate | None = field(default=None, compare=False, repr=False)

    @property
    def key(self) -> tuple:
        return (self.k2, self.pg, self.q, self.kind, self.group_key, self.signatures)

    def sort_key(self) -> tuple:
        return (self.k2, self.group_key[0], self.group_key[1],
                tuple((s.base_genus, s.branch_orders) for s in self.signatures), self.kind,
                basket_label(self.basket))


def family_dimension(c: SurfaceCandidate) -> int:
    if c.kind == "mixed":
        dim = c.datum1.signature.moduli_dim
    else:
        dim = c.datum1.signature.moduli_dim + c.datum2.signature.moduli_dim
    if dim < 0:
        raise ValueError("inadmissible datum: negative moduli dimension")
    return dim


@dataclass(frozen=True, eq=False)
class ClassifiedCandidate:
    """A candidate together with the equivalence class it represents."""

    candidate: SurfaceCandidate
    invariants: InvariantSet
    kind: str
    class_id: tuple


def assemble_families(items: list[ClassifiedCandidate]) -> list[FamilyRecord]:
    """One record per family key; n counts distinct equivalence classes within the key."""
    by_key: dict[tuple, list[ClassifiedCandidate]] = {}
    for it in items:
        c = it.candidate
        if c.kind == "mixed":
            gkey = c.extension.overgroup.key
            sigs = (c.datum1.signature,)
        else:
            gkey = c.datum1.group.key
            sigs = (c.datum1.signature, c.datum2.signature)
        inv = it.invariants
        key = (inv.k2, inv.pg, inv.q, it.kind, gkey, sigs, c.basket)
        by_key.setdefault(key, []).append(it)
    out = []
    for key, group in by_key.items():
        k2, pg, q, kind, gkey, sigs, basket = key
        invs = {g.invariants for g in group}
        if len(invs) != 1:
            raise RuntimeError(f"inconsistent invariants within family {key}")
        rep = group[0].candidate
        entry = rep.extension.overgroup if rep.kind == "mixed" else rep.datum1.group
        if rep.kind == "mixed":
            genera = (rep.datum1.cover_genus, rep.datum1.cover_genus)
        else:
            genera = (rep.datum1.cover_genus, rep.datum2.cover_genus)
        dims = {family_dimension(g.candidate) for g in group}
        assert len(dims) == 1
        n = len({g.class_id for g in group})
        gh = kind == "GH"
        out.append(FamilyRecord(kind, k2, pg, q, gkey, entry.name, sigs, genera, basket, dims.pop(), n, gh,
                                group[0].invariants.albdim, rep))
    out.sort(key=FamilyRecord.sort_key)
    return out
