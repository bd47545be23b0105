"""Hot loops: generating-vector enumeration and orbit computation.

Two interchangeable backends work on the integer multiplication table of a
group.  The numba backend does a depth-first search and a union-find; the
numpy backend extends partial tuples level by level (meet-in-the-middle for
unramified handles) and uses scipy's connected components.  Setting
``PQSURF_NO_NUMBA=1`` selects the numpy path; both return identical arrays.

Vectors are rows of element indices laid out as ``a1,b1,...,ag,bg,c1,...,cr``
and are always returned in lexicographic order.  Moves are encoded as one
token word per output position: token ``t >= 0`` is position ``t // 2``
(inverted when ``t`` is odd), ``t < 0`` is the constant element ``-t - 1``.
"""

from __future__ import annotations

import os

import numpy as np

try:  # pragma: no cover - exercised implicitly by whichever backend is active
    from numba import njit
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]
        return lambda f: f

from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

ENV_FLAG = "PQSURF_NO_NUMBA"


def active_backend() -> str:
    if not HAVE_NUMBA or os.environ.get(ENV_FLAG, "").strip() not in ("", "0"):
        return "numpy"
    return "numba"


# --- shared helpers -------------------------------------------------------------

def vector_keys(V: np.ndarray, n: int) -> np.ndarray:
    """Mixed-radix key preserving lexicographic order of rows."""
    L = V.shape[1]
    if n ** max(L, 1) >= 2 ** 62:
        raise OverflowError(f"keys overflow for order {n} and length {L}")
    k = np.zeros(len(V), dtype=np.int64)
    for i in range(L):
        k = k * n + V[:, i]
    return k


def sort_rows(V: np.ndarray, n: int) -> np.ndarray:
    if len(V) == 0:
        return V
    return V[np.argsort(vector_keys(V, n), kind="stable")]


def candidate_table(orders: np.ndarray, genus: int, branch: tuple[int, ...]) -> tuple[np.ndarray, np.ndarray]:
    n = len(orders)
    L = 2 * genus + len(branch)
    cand = np.zeros((max(L, 1), n), dtype=np.int32)
    ncand = np.zeros(max(L, 1), dtype=np.int64)
    for p in range(L):
        if p < 2 * genus:
            els = np.arange(n)
        else:
            els = np.flatnonzero(orders == branch[p - 2 * genus])
        cand[p, : len(els)] = els
        ncand[p] = len(els)
    return cand, ncand


def encode_moves(words: list[list[list[int]]]) -> tuple[np.ndarray, np.ndarray]:
    """Pad token words into (n_moves, L, maxlen) plus lengths."""
    n_moves = len(words)
    L = len(words[0]) if words else 0
    maxlen = max((len(w) for mv in words for w in mv), default=1)
    tok = np.zeros((n_moves, L, maxlen), dtype=np.int64)
    lens = np.zeros((n_moves, L), dtype=np.int64)
    for m, mv in enumerate(words):
        for p, w in enumerate(mv):
            tok[m, p, : len(w)] = w
            lens[m, p] = len(w)
    return tok, lens


# --- numba backend --------------------------------------------------------------

@njit(cache=True)
def _generates(vals, masks):
    for k in range(masks.shape[0]):
        inside = True
        for v in vals:
            if not masks[k, v]:
                inside = False
                break
        if inside:
            return False
    return True


@njit(cache=True)
def _enum_nb(mul, inv, orders, masks, cand, ncand, genus, r, last_order):
    L = 2 * genus + r
    nfree = L - 1 if r > 0 else L
    cap = 1024
    out = np.empty((cap, L), dtype=np.int32)
    count = 0
    vals = np.zeros(L, dtype=np.int32)
    if nfree == 0:
        # a single branch point would have to be the identity
        return out[:0]
    idx = np.zeros(nfree, dtype=np.int64)
    state = np.zeros(nfree + 1, dtype=np.int32)
    level = 0
    while True:
        if idx[level] < ncand[level]:
            v = cand[level, idx[level]]
            idx[level] += 1
            vals[level] = v
            s = state[level]
            if level < 2 * genus:
                if level % 2 == 1:
                    a = vals[level - 1]
                    s = mul[mul[mul[mul[s, a], v], inv[a]], inv[v]]
            else:
                s = mul[s, v]
            state[level + 1] = s
            if level == nfree - 1:
                ok = False
                if r > 0:
                    last = inv[s]
                    if orders[last] == last_order:
                        vals[L - 1] = last
                        ok = True
                elif s == 0:
                    ok = True
                if ok and _generates(vals, masks):
                    if count == cap:
                        bigger = np.empty((2 * cap, L), dtype=np.int32)
                        bigger[:cap] = out
                        out = bigger
                        cap *= 2
                    out[count] = vals
                    count += 1
            else:
                level += 1
                idx[level] = 0
        else:
            if level == 0:
                break
            level -= 1
    return out[:count]


@njit(cache=True)
def _eval_word(mul, inv, row, tok, length):
    x = 0
    for t in range(length):
        w = tok[t]
        if w >= 0:
            y = row[w // 2]
            if w % 2 == 1:
                y = inv[y]
        else:
            y = -w - 1
        x = mul[x, y]
    return x


@njit(cache=True)
def _find(parent, x):
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


@njit(cache=True)
def _orbits_nb(V, keys, n, mul, inv, tok, lens):
    M, L = V.shape
    parent = np.arange(M)
    img = np.zeros(L, dtype=np.int64)
    bad = -1
    for i in range(M):
        row = V[i]
        for m in range(tok.shape[0]):
            key = 0
            for p in range(L):
                img[p] = _eval_word(mul, inv, row, tok[m, p], lens[m, p])
                key = key * n + img[p]
            j = np.searchsorted(keys, key)
            if j >= M or keys[j] != key:
                bad = i
                return parent, bad
            a = _find(parent, i)
            b = _find(parent, j)
            if a != b:
                if a < b:
                    parent[b] = a
                else:
                    parent[a] = b
    for i in range(M):
        parent[i] = _find(parent, i)
    return parent, bad


# --- numpy backend --------------------------------------------------------------

def _generates_np(G_masks: np.ndarray, V: np.ndarray, chunk: int = 50_000) -> np.ndarray:
    if G_masks.shape[0] == 0 or len(V) == 0:
        return np.ones(len(V), dtype=bool)
    keep = np.empty(len(V), dtype=bool)
    for s in range(0, len(V), chunk):
        block = V[s: s + chunk]
        inside = G_masks[:, block].all(axis=2)  # (K, B)
        keep[s: s + chunk] = ~inside.any(axis=0)
    return keep


def _extend_np(mul, inv, cand, ncand, genus, upto):
    """All partial tuples over levels [0, upto) with their running product."""
    parts = np.zeros((1, 0), dtype=np.int32)
    state = np.zeros(1, dtype=np.int32)
    for level in range(upto):
        c = cand[level, : ncand[level]]
        M = len(parts)
        parts = np.concatenate([np.repeat(parts, len(c), axis=0),
                                np.tile(c, M)[:, None].astype(np.int32)], axis=1)
        state = np.repeat(state, len(c))
        if level < 2 * genus:
            if level % 2 == 1:
                a, b = parts[:, level - 1], parts[:, level]
                state = mul[mul[mul[mul[state, a], b], inv[a]], inv[b]]
        else:
            state = mul[state, parts[:, level]]
    return parts, state


def _enum_np(mul, inv, orders, masks, cand, ncand, genus, r, last_order):
    L = 2 * genus + r
    n = mul.shape[0]
    if r > 0:
        parts, state = _extend_np(mul, inv, cand, ncand, genus, L - 1)
        last = inv[state]
        ok = orders[last] == last_order
        V = np.concatenate([parts[ok], last[ok][:, None]], axis=1).astype(np.int32)
    elif genus == 0:
        V = np.zeros((0, 0), dtype=np.int32)
    else:
        # meet in the middle: prefix of genus-1 handles against the last handle
        parts, state = _extend_np(mul, inv, cand, ncand, genus, 2 * genus - 2)
        a, b = np.divmod(np.arange(n * n), n)
        comm = mul[mul[mul[a, b], inv[a]], inv[b]]
        order = np.argsort(comm, kind="stable")
        comm_sorted = comm[order]
        need = inv[state]
        lo = np.searchsorted(comm_sorted, need, side="left")
        hi = np.searchsorted(comm_sorted, need, side="right")
        cnt = hi - lo
        rows = np.repeat(np.arange(len(parts)), cnt)
        offs = np.arange(cnt.sum()) - np.repeat(np.cumsum(cnt) - cnt, cnt)
        pick = order[np.repeat(lo, cnt) + offs]
        V = np.concatenate([parts[rows], a[pick][:, None], b[pick][:, None]], axis=1).astype(np.int32)
    V = V[_generates_np(masks, V)]
    return sort_rows(V, n)


def _orbits_np(V, keys, n, mul, inv, tok, lens):
    M, L = V.shape
    src, dst = [np.arange(M)], [np.arange(M)]
    for m in range(tok.shape[0]):
        key = np.zeros(M, dtype=np.int64)
        for p in range(L):
            x = np.zeros(M, dtype=np.int64)
            for t in tok[m, p, : lens[m, p]]:
                if t >= 0:
                    y = V[:, t // 2]
                    if t % 2 == 1:
                        y = inv[y]
                else:
                    y = -t - 1
                x = mul[x, y]
            key = key * n + x
        j = np.searchsorted(keys, key)
        j_clip = np.minimum(j, M - 1)
        miss = (j >= M) | (keys[j_clip] != key)
        if miss.any():
            return None, int(np.flatnonzero(miss)[0])
        src.append(np.arange(M))
        dst.append(j_clip)
    s, d = np.concatenate(src), np.concatenate(dst)
    graph = coo_matrix((np.ones(len(s), dtype=np.int8), (s, d)), shape=(M, M))
    _, labels = connected_components(graph, directed=True, connection="weak")
    return labels, -1


# --- public entry points ----------------------------------------------------------

def enumerate_vectors(mul: np.ndarray, inv: np.ndarray, orders: np.ndarray, masks: np.ndarray,
                      genus: int, branch: tuple[int, ...], backend: str | None = None) -> np.ndarray:
    """All generating vectors with c_j of order branch[j], sorted lexicographically."""
    backend = backend or active_backend()
    r = len(branch)
    L = 2 * genus + r
    if L == 0:
        return np.zeros((1 if mul.shape[0] == 1 else 0, 0), dtype=np.int32)
    cand, ncand = candidate_table(orders, genus, branch)
    last_order = branch[-1] if r else 0
    mul = np.ascontiguousarray(mul, dtype=np.int32)
    inv = np.ascontiguousarray(inv, dtype=np.int32)
    orders = np.ascontiguousarray(orders, dtype=np.int32)
    masks = np.ascontiguousarray(masks, dtype=np.bool_)
    if backend == "numba":
        V = _enum_nb(mul, inv, orders, masks, cand, ncand, genus, r, last_order)
        return sort_rows(np.ascontiguousarray(V), mul.shape[0])
    return _enum_np(mul, inv, orders, masks, cand, ncand, genus, r, last_order)


class MoveError(RuntimeError):
    pass


def orbit_labels(V: np.ndarray, mul: np.ndarray, inv: np.ndarray, words: list[list[list[int]]],
                 backend: str | None = None) -> np.ndarray:
    """Orbit label per row of the sorted vector array; labels numbered by first occurrence."""
    backend = backend or active_backend()
    M = len(V)
    if M == 0:
        return np.zeros(0, dtype=np.int64)
    n = mul.shape[0]
    keys = vector_keys(V, n)
    if np.any(np.diff(keys) <= 0):
        raise ValueError("vector array must be sorted and duplicate free")
    if not words:
        return np.arange(M)
    tok, lens = encode_moves(words)
    mul64 = np.ascontiguousarray(mul, dtype=np.int64)
    inv64 = np.ascontiguousarray(inv, dtype=np.int64)
    V64 = np.ascontiguousarray(V, dtype=np.int64)
    if backend == "numba":
        roots, bad = _orbits_nb(V64, keys, n, mul64, inv64, tok, lens)
    else:
        roots, bad = _orbits_np(V64, keys, n, mul64, inv64, tok, lens)
    if bad >= 0:
        raise MoveError(f"a move sends vector {V[bad].tolist()} outside the vector set")
    _, first, inverse = np.unique(roots, return_index=True, return_inverse=True)
    rank = np.empty(len(first), dtype=np.int64)
    rank[np.argsort(first)] = np.arange(len(first))
    return rank[inverse]


def apply_words(V: np.ndarray, mul: np.ndarray, inv: np.ndarray, move: list[list[int]]) -> np.ndarray:
    """Image of every row under one move (numpy, used by tests and small callers)."""
    out = np.zeros((len(V), len(move)), dtype=np.int64)
    for p, w in enumerate(move):
        x = np.zeros(len(V), dtype=np.int64)
        for t in w:
            if t >= 0:
                y = V[:, t // 2].astype(np.int64)
                if t % 2 == 1:
                    y = inv[y]
            else:
                y = np.full(len(V), -t - 1, dtype=np.int64)
            x = mul[x, y]
        out[:, p] = x
    return out


def warmup() -> None:
    """Trigger numba compilation on a tiny instance."""
    if active_backend() != "numba":
        return
    mul = np.array([[0, 1], [1, 0]], dtype=np.int32)
    inv = np.array([0, 1], dtype=np.int32)
    orders = np.array([1, 2], dtype=np.int32)
    masks = np.array([[True, False]])
    V = enumerate_vectors(mul, inv, orders, masks, 0, (2, 2))
    orbit_labels(V, mul, inv, [[[-2, 0, -2], [-2, 2, -2]]])
