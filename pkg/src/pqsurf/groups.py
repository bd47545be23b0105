"""Finite permutation groups carried as full, canonically ordered element lists.

Elements are permutations stored as tuples of images.  Every group keeps an
integer multiplication table over the indices of its sorted element list, so
the identity always has index 0 and downstream code can work purely with
small integers.

Product convention: ``compose(p, q)`` is "apply q, then p", i.e.
``compose(p, q)[i] == p[q[i]]``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

Perm = tuple[int, ...]

DEFAULT_CLOSURE_LIMIT = 10_000


class GroupTooLarge(ValueError):
    pass


def identity(degree: int) -> Perm:
    return tuple(range(degree))


def compose(p: Perm, q: Perm) -> Perm:
    return tuple(p[i] for i in q)


def inverse(p: Perm) -> Perm:
    out = [0] * len(p)
    for i, j in enumerate(p):
        out[j] = i
    return tuple(out)


def is_perm(images: Sequence[int]) -> bool:
    return sorted(images) == list(range(len(images)))


def cycle_perm(degree: int, *cycles: Sequence[int]) -> Perm:
    """Build a permutation of ``range(degree)`` from disjoint cycles."""
    img = list(range(degree))
    for cyc in cycles:
        for k, x in enumerate(cyc):
            img[x] = cyc[(k + 1) % len(cyc)]
    if not is_perm(img):
        raise ValueError(f"cycles {cycles} are not disjoint")
    return tuple(img)


@dataclass(frozen=True, eq=False)
class PermGroup:
    degree: int
    gens: tuple[Perm, ...]
    elements: tuple[Perm, ...]

    @property
    def order(self) -> int:
        return len(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __repr__(self) -> str:
        return f"PermGroup(degree={self.degree}, order={self.order}, ngens={len(self.gens)})"

    @cached_property
    def index(self) -> dict[Perm, int]:
        return {p: i for i, p in enumerate(self.elements)}

    @cached_property
    def mul(self) -> np.ndarray:
        """``mul[i, j]`` is the index of ``elements[i] * elements[j]``."""
        n = self.order
        idx = self.index
        table = np.empty((n, n), dtype=np.int32)
        for i, p in enumerate(self.elements):
            for j, q in enumerate(self.elements):
                table[i, j] = idx[compose(p, q)]
        table.setflags(write=False)
        return table

    @cached_property
    def inv(self) -> np.ndarray:
        idx = self.index
        arr = np.array([idx[inverse(p)] for p in self.elements], dtype=np.int32)
        arr.setflags(write=False)
        return arr

    @cached_property
    def orders(self) -> np.ndarray:
        mul = self.mul
        out = np.ones(self.order, dtype=np.int32)
        for i in range(1, self.order):
            k, x = 1, i
            while x != 0:
                x = mul[x, i]
                k += 1
            out[i] = k
        out.setflags(write=False)
        return out

    @cached_property
    def gen_indices(self) -> tuple[int, ...]:
        return tuple(self.index[g] for g in self.gens)

    @cached_property
    def is_abelian(self) -> bool:
        m = self.mul
        return bool(np.array_equal(m, m.T))

    def __contains__(self, p: Perm) -> bool:
        return p in self.index

    # index-level helpers -------------------------------------------------
    def power(self, i: int, k: int) -> int:
        k %= int(self.orders[i])
        x = 0
        for _ in range(k):
            x = int(self.mul[x, i])
        return x

    def conj(self, x: int, g: int) -> int:
        """Index of g x g^-1."""
        return int(self.mul[self.mul[g, x], self.inv[g]])

    def span(self, idxs: Iterable[int]) -> frozenset[int]:
        """Subgroup generated by the given element indices."""
        gens = [i for i in set(idxs) if i != 0]
        seen = {0}
        queue = deque([0])
        mul = self.mul
        while queue:
            x = queue.popleft()
            for g in gens:
                y = int(mul[x, g])
                if y not in seen:
                    seen.add(y)
                    queue.append(y)
        return frozenset(seen)

    def centralizer_order(self, x: int) -> int:
        m = self.mul
        return int(np.count_nonzero(m[x, :] == m[:, x]))

    def conjugacy_class(self, x: int) -> frozenset[int]:
        return frozenset(self.conj(x, g) for g in range(self.order))

    @cached_property
    def conjugacy_classes(self) -> tuple[frozenset[int], ...]:
        seen: set[int] = set()
        out = []
        for x in range(self.order):
            if x not in seen:
                c = self.conjugacy_class(x)
                seen |= c
                out.append(c)
        return tuple(out)

    @cached_property
    def center_order(self) -> int:
        m = self.mul
        return int(sum(1 for x in range(self.order) if np.array_equal(m[x, :], m[:, x])))

    @cached_property
    def derived_order(self) -> int:
        m, inv = self.mul, self.inv
        comms = {int(m[m[m[a, b], inv[a]], inv[b]]) for a in range(self.order) for b in range(self.order)}
        return len(self.span(comms))

    @cached_property
    def generating_prefix(self) -> tuple[int, ...]:
        """Greedy generating set: scan elements in canonical order, keep those enlarging the span."""
        chosen: list[int] = []
        current = frozenset([0])
        for i in range(1, self.order):
            if i not in current:
                chosen.append(i)
                current = self.span(chosen)
                if len(current) == self.order:
                    break
        return tuple(chosen)

    @cached_property
    def subgroups(self) -> tuple[frozenset[int], ...]:
        """All subgroups, sorted by (order, sorted elements)."""
        cyclic: dict[frozenset[int], int] = {}
        for i in range(self.order):
            cyclic.setdefault(self.span([i]), i)
        found: dict[frozenset[int], tuple[int, ...]] = {c: (g,) for c, g in cyclic.items()}
        frontier = dict(found)
        while frontier:
            new: dict[frozenset[int], tuple[int, ...]] = {}
            for s, gens in frontier.items():
                for c, g in cyclic.items():
                    if not c <= s:
                        j = self.span(gens + (g,))
                        if j not in found and j not in new:
                            new[j] = gens + (g,)
            found.update(new)
            frontier = new
        return tuple(sorted(found, key=lambda s: (len(s), sorted(s))))

    @cached_property
    def maximal_subgroups(self) -> tuple[frozenset[int], ...]:
        proper = [s for s in self.subgroups if len(s) < self.order]
        return tuple(s for s in proper if not any(s < t for t in proper))

    @cached_property
    def maximal_masks(self) -> np.ndarray:
        """Boolean membership matrix (n_maximal, order)."""
        masks = np.zeros((len(self.maximal_subgroups), self.order), dtype=np.bool_)
        for k, s in enumerate(self.maximal_subgroups):
            masks[k, list(s)] = True
        masks.setflags(write=False)
        return masks

    def generates(self, idxs: Iterable[int]) -> bool:
        idxs = list(idxs)
        if self.order == 1:
            return True
        return not bool(self.maximal_masks[:, idxs].all(axis=1).any())

    @cached_property
    def fingerprint(self) -> tuple:
        """Cheap isomorphism invariant: class sizes/orders with power maps, center, derived subgroup."""
        ords = self.orders
        rep = {}
        for k, c in enumerate(self.conjugacy_classes):
            for x in c:
                rep[x] = k
        cls = []
        for c in self.conjugacy_classes:
            x = min(c)
            sq = self.conjugacy_classes[rep[int(self.mul[x, x])]]
            cls.append((int(ords[x]), len(c), int(ords[min(sq)]), len(sq)))
        return (self.order, tuple(sorted(cls)), self.center_order, self.derived_order)


def closure(degree: int, gens: Sequence[Perm], limit: int = DEFAULT_CLOSURE_LIMIT) -> PermGroup:
    gens = tuple(tuple(int(x) for x in g) for g in gens)
    for g in gens:
        if len(g) != degree or not is_perm(g):
            raise ValueError(f"{g} is not a permutation of degree {degree}")
    e = identity(degree)
    seen = {e}
    queue = deque([e])
    while queue:
        x = queue.popleft()
        for g in gens:
            y = compose(x, g)
            if y not in seen:
                seen.add(y)
                if len(seen) > limit:
                    raise GroupTooLarge(f"group too large: more than {limit} elements")
                queue.append(y)
    return PermGroup(degree, gens, tuple(sorted(seen)))


def element_order(G: PermGroup, g: Perm) -> int:
    return int(G.orders[G.index[g]])


def conjugacy_closure(G: PermGroup, S: Iterable[Perm]) -> frozenset[Perm]:
    """Smallest subset containing S that is closed under powers and G-conjugation."""
    idx = closure_indices(G, (G.index[s] for s in S))
    return frozenset(G.elements[i] for i in idx)


def closure_indices(G: PermGroup, idxs: Iterable[int]) -> frozenset[int]:
    out: set[int] = set()
    for x in idxs:
        for k in range(int(G.orders[x])):
            p = G.power(x, k)
            if p not in out:
                out |= G.conjugacy_class(p)
    return frozenset(out)


# --- homomorphism search -------------------------------------------------

def _extend(G: PermGroup, H: PermGroup, src: Sequence[int], dst: Sequence[int]) -> dict[int, int] | None:
    """Extend src[k] -> dst[k] to a homomorphism on <src>; None on conflict or non-injectivity."""
    f = {0: 0}
    queue = deque([0])
    gm, hm = G.mul, H.mul
    while queue:
        x = queue.popleft()
        fx = f[x]
        for s, d in zip(src, dst):
            y = int(gm[x, s])
            fy = int(hm[fx, d])
            got = f.get(y)
            if got is None:
                f[y] = fy
                queue.append(y)
            elif got != fy:
                return None
    if len(set(f.values())) != len(f):
        return None
    return f


def _hom_search(G: PermGroup, H: PermGroup, first_only: bool) -> list[np.ndarray]:
    if G.order != H.order:
        return []
    src = G.generating_prefix
    if not src:
        return [np.zeros(1, dtype=np.int32)]
    candidates = [[h for h in range(H.order) if H.orders[h] == G.orders[s]] for s in src]
    found: list[np.ndarray] = []

    def rec(level: int, dst: list[int]) -> bool:
        f = _extend(G, H, src[:level], dst)
        if f is None:
            return False
        if level == len(src):
            arr = np.empty(G.order, dtype=np.int32)
            for k, v in f.items():
                arr[k] = v
            found.append(arr)
            return first_only
        for h in candidates[level]:
            if h in f.values():
                continue
            if rec(level + 1, dst + [h]):
                return True
        return False

    rec(0, [])
    return found


@dataclass(frozen=True)
class Automorphism:
    images: tuple[Perm, ...]
    table: np.ndarray = field(repr=False, compare=False)

    def __call__(self, x: int) -> int:
        return int(self.table[x])


def automorphisms(G: PermGroup) -> list[Automorphism]:
    """All automorphisms, in deterministic order (lexicographic on generator images)."""
    out = []
    for arr in _hom_search(G, G, first_only=False):
        arr.setflags(write=False)
        imgs = tuple(G.elements[arr[i]] for i in G.gen_indices)
        out.append(Automorphism(imgs, arr))
    return out


def automorphism_tables(G: PermGroup) -> np.ndarray:
    """Automorphisms as an (n_aut, order) index array."""
    auts = automorphisms(G)
    return np.stack([a.table for a in auts]) if auts else np.zeros((0, G.order), dtype=np.int32)


def is_isomorphic(G: PermGroup, H: PermGroup) -> bool:
    if G.order != H.order:
        return False
    if G.fingerprint != H.fingerprint:
        return False
    return bool(_hom_search(G, H, first_only=True))


def isomorphism(G: PermGroup, H: PermGroup) -> np.ndarray | None:
    """Index map G -> H of some isomorphism, or None."""
    if G.order != H.order or G.fingerprint != H.fingerprint:
        return None
    res = _hom_search(G, H, first_only=True)
    return res[0] if res else None


def regular_group(mul: np.ndarray, gens: Sequence[int]) -> PermGroup:
    """Left-regular permutation group of an abstract group given by its table."""
    mul = np.asarray(mul)
    perms = [tuple(int(v) for v in mul[g, :]) for g in gens]
    return closure(mul.shape[0], perms)
