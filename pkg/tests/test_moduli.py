import functools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pqsurf import kernels
from pqsurf.moduli import OrbitData, aut_tables, family_dimension, hurwitz_orbits, move_words, pair_classes
from pqsurf.orbifold import OrbifoldDatum, Signature, enumerate_generating_vectors, vector_array
from pqsurf.surfaces import pair_unmixed


@pytest.mark.parametrize("key,sig", [
    ((4, 2), Signature(2)),
    ((6, 1), Signature(0, (2, 2, 3, 3))),
    ((8, 3), Signature(1, (2, 2))),
    ((6, 1), Signature(1, (3,))),
    ((8, 4), Signature(2)),
])
def test_moves_preserve_vector_set(group, key, sig):
    G = group(*key)
    V = vector_array(G, sig, all_orderings=True)
    keys = set(kernels.vector_keys(V, G.order).tolist())
    for move in move_words(sig.base_genus, sig.r, G.gen_indices, G.inv):
        W = kernels.apply_words(V, G.mul, G.inv, move)
        img = kernels.vector_keys(W, G.order)
        assert set(img.tolist()) == keys  # bijection onto the same set
        assert len(np.unique(img)) == len(V)


@pytest.mark.parametrize("key,sig,with_aut,count", [
    ((5, 1), Signature(0, (5, 5, 5)), True, 1),
    ((2, 1), Signature(0, (2,) * 6), True, 1),
    ((4, 2), Signature(0, (2,) * 5), True, 1),
    ((4, 2), Signature(0, (2,) * 5), False, 3),
    ((4, 2), Signature(2), True, 2),
    ((4, 2), Signature(2), False, 2),
])
def test_known_orbit_counts(group, key, sig, with_aut, count):
    G = group(*key)
    vs = enumerate_generating_vectors(G, sig)
    assert len(hurwitz_orbits(G, sig, vs, with_automorphisms=with_aut)) == count


def test_klein_etale_orbits_are_aut_stable(group):
    # Aut(G) permutes the two move orbits without merging them
    G = group(4, 2)
    data = OrbitData.build(G, Signature(2))
    act = data.aut_action(aut_tables(G))
    assert data.n_orbits == 2
    assert set(act.flatten().tolist()) == {0, 1}
    assert all(sorted(row.tolist()) == [0, 1] for row in act)


@functools.lru_cache(maxsize=None)
def _s3():
    from pqsurf.catalog import load_catalog
    return load_catalog().get(6, 1).group


@settings(max_examples=25, deadline=None)
@given(st.randoms(use_true_random=False))
def test_orbit_partition_is_shuffle_invariant(rng):
    G = _s3()
    sig = Signature(0, (2, 2, 3, 3))
    vs = enumerate_generating_vectors(G, sig)
    perm = list(range(len(vs)))
    rng.shuffle(perm)
    base = hurwitz_orbits(G, sig, vs)
    shuffled = hurwitz_orbits(G, sig, [vs[i] for i in perm])
    mapped = sorted(sorted(perm[i] for i in part) for part in shuffled)
    assert mapped == base


def test_orbit_labels_backend_agreement(group):
    G = group(12, 3)
    sig = Signature(0, (2, 3, 3))
    V = vector_array(G, sig, all_orderings=True)
    words = move_words(0, 3, G.gen_indices, G.inv)
    a = kernels.orbit_labels(V, G.mul, G.inv, words, backend="numba")
    b = kernels.orbit_labels(V, G.mul, G.inv, words, backend="numpy")
    assert np.array_equal(a, b)


def test_label_of_rejects_foreign_rows(group):
    G = group(4, 2)
    data = OrbitData.build(G, Signature(2))
    with pytest.raises(KeyError):
        data.label_of([0, 0, 0, 0])
    assert data.label_of(data.vectors[5]) == data.labels[5]


def test_pair_classes_swap_is_idempotent(group):
    G = group(4, 2)
    data = OrbitData.build(G, Signature(0, (2,) * 5))
    act = data.aut_action(aut_tables(G))
    pairs = [(a, b) for a in range(data.n_orbits) for b in range(data.n_orbits)]
    cls = pair_classes(act, act, pairs, swap=True)
    assert all(cls[(a, b)] == cls[(b, a)] for a, b in pairs)
    assert all(cls[c] == c for c in set(cls.values()))
    plain = pair_classes(act, act, pairs, swap=False)
    assert len(set(cls.values())) <= len(set(plain.values()))


@pytest.mark.parametrize("key,s1,s2,dim", [
    ((4, 2), Signature(0, (2,) * 5), Signature(2), 5),
    ((2, 1), Signature(0, (2,) * 6), Signature(2), 6),
    ((6, 1), Signature(1, (3,)), Signature(1, (3,)), 2),
    ((2, 1), Signature(1, (2, 2)), Signature(1, (2, 2)), 4),
])
def test_family_dimension(catalog, key, s1, s2, dim):
    e = catalog.get(*key)
    v1 = enumerate_generating_vectors(e.group, s1)[0]
    v2 = enumerate_generating_vectors(e.group, s2)[0]
    c = pair_unmixed(OrbifoldDatum(e, s1, v1), OrbifoldDatum(e, s2, v2))
    assert family_dimension(c) == dim
