"""End-to-end classification: grids, vector cache, families and result tables.

A run derives a finite grid of cells (|G|, sig1, sig2) from Riemann-Hurwitz
and the chi constraint, enumerates generating vectors for each side (cached
on disk when a cache directory is given), pairs orbit representatives,
filters by the target invariants and assembles families.

Grid bounds, with t = g' - 1 + R/2 so that g(C) - 1 = |G| t:

* free unmixed: |G| t1 t2 = chi and |G| t_i >= 1;
* mixed: |K| t^2 = 2 chi over base genus q, the overgroup has order 2|K|;
* product-quotient: both sides ramified and 12 chi = 12 |G| t1 t2 +
  sum(k_x + e_x) for some basket whose point orders divide a branch order
  on each side, with K^2 and e inside the admissible range.  Every point
  adds e_x >= 3/2, which bounds |G| t1 t2.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import logging
import os
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from fractions import Fraction
from importlib import resources
from math import floor, gcd, isqrt
from pathlib import Path

import numpy as np

from . import kernels
from .catalog import Catalog, CatalogEntry, CatalogError, CatalogIncomplete, load_catalog
from .groups import PermGroup
from .moduli import ClassifiedCandidate, FamilyRecord, OrbitData, assemble_families, aut_tables, pair_classes
from .orbifold import (OrbifoldDatum, Signature, cover_genus, long_relation, GeneratingVector,
                       signatures_up_to, signatures_with_t, t_lower_bound, vector_array)
from .surfaces import (InadmissiblePair, SingularityType, SurfaceCandidate, MixedExtension, admissibility_gate,
                       basket_label, basket_size, basket_types_label, index_two_embeddings, invariants_quotient,
                       is_generalized_hyperelliptic, mixed_free, pair_unmixed, parse_basket)

log = logging.getLogger(__name__)

ENV_CACHE = "PQSURF_CACHE_DIR"
MODES = ("isogenous", "product-quotient", "both")
FORMATS = ("json", "csv", "markdown")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    chi: int = 1
    pg: int = 2
    q: int = 2
    mode: str = "isogenous"
    ksq: int | None = None
    max_order: int | None = None
    catalog_path: Path | None = None
    cache_dir: Path | None = None
    jobs: int = 1
    include_free: bool = False  # product-quotient mode: also emit free quotients
    backend: str | None = None

    def __post_init__(self):
        if self.chi < 1:
            raise ConfigError("chi must be at least 1")
        if self.pg < 0 or self.q < 0:
            raise ConfigError("p_g and q must be non-negative")
        if self.chi != 1 - self.q + self.pg:
            raise ConfigError(f"inconsistent targets: chi={self.chi} but 1 - q + p_g = {1 - self.q + self.pg}")
        if self.mode not in MODES:
            raise ConfigError(f"mode must be one of {', '.join(MODES)}")
        if self.jobs < 1:
            raise ConfigError("jobs must be positive")
        if self.max_order is not None and self.max_order < 1:
            raise ConfigError("max order must be positive")

    @property
    def k2_min(self) -> int:
        return max(1, 2 * self.pg if self.q > 0 else 1, 2 * self.chi - 6)


# --- grids -----------------------------------------------------------------------

@dataclass(frozen=True, order=True)
class Cell:
    order: int
    sig1: Signature
    sig2: Signature


def _genus_ok(order: int, sig: Signature) -> bool:
    g = cover_genus(order, sig)  # logs integrality rejections
    return g is not None and g >= 2


def _base_splits(q: int):
    return [(a, q - a) for a in range(q // 2 + 1)]


def _ordered(order: int, s1: Signature, s2: Signature) -> Cell:
    return Cell(order, *sorted((s1, s2)))


def free_grid(chi: int, q: int, max_order: int | None = None) -> list[Cell]:
    cells = set()
    for b1, b2 in _base_splits(q):
        for ba, bb in {(b1, b2), (b2, b1)}:
            lo_a, lo_b = t_lower_bound(ba, False), t_lower_bound(bb, False)
            n_max = floor(chi / (lo_a * lo_b))
            if max_order:
                n_max = min(n_max, max_order)
            for N in range(1, n_max + 1):
                # g2 >= 2 means N t2 >= 1, so t1 <= chi / max(N lo_b, 1)
                for s1 in signatures_up_to(N, ba, Fraction(chi) / max(N * lo_b, 1)):
                    if N * s1.t < 1 or not _genus_ok(N, s1):
                        continue
                    for s2 in signatures_with_t(N, bb, Fraction(chi, N) / s1.t):
                        if N * s2.t >= 1 and _genus_ok(N, s2):
                            cells.add(_ordered(N, s1, s2))
    return sorted(cells)


def allowed_types(sig1: Signature, sig2: Signature) -> list[SingularityType]:
    ns = sorted({n for n in range(2, max(sig1.branch_orders + sig2.branch_orders, default=1) + 1)
                 if any(m % n == 0 for m in sig1.branch_orders) and any(m % n == 0 for m in sig2.branch_orders)})
    return sorted({SingularityType(n, a) for n in ns for a in range(1, n) if gcd(a, n) == 1})


def basket_feasible(order: int, sig1: Signature, sig2: Signature, chi: int, k2_min: int, k2_max: int) -> bool:
    """Whether some non-empty basket makes (K^2, e) integral, consistent with chi and in range."""
    base = order * sig1.t * sig2.t
    e_max = 12 * chi - k2_min
    types = [(t.k2_correction, t.euler_contribution) for t in allowed_types(sig1, sig2)]

    def rec(i: int, k2: Fraction, e: Fraction, count: int) -> bool:
        if count and k2 + e == 12 * chi and k2.denominator == 1 and k2_min <= k2 <= k2_max:
            return True
        for j in range(i, len(types)):
            dk, de = types[j]
            if e + de <= e_max and k2 + dk >= k2_min:
                if rec(j, k2 + dk, e + de, count + 1):
                    return True
        return False

    return rec(0, 8 * base, 4 * base, 0)


def pq_grid(chi: int, pg: int, q: int, max_order: int | None = None) -> list[Cell]:
    k2_min = max(1, 2 * pg if q > 0 else 1, 2 * chi - 6)
    bound = (Fraction(12 * chi - k2_min) - Fraction(3, 2)) / 4  # on |G| t1 t2
    if bound <= 0:
        return []
    cells = set()
    for b1, b2 in _base_splits(q):
        for ba, bb in {(b1, b2), (b2, b1)}:
            lo_a, lo_b = t_lower_bound(ba, True), t_lower_bound(bb, True)
            n_max = floor(bound / (lo_a * lo_b))
            if max_order:
                n_max = min(n_max, max_order)
            for N in range(2, n_max + 1):
                for s1 in signatures_up_to(N, ba, bound / max(N * lo_b, 1), ramified_only=True):
                    if N * s1.t < 1 or not _genus_ok(N, s1):
                        continue
                    for s2 in signatures_up_to(N, bb, bound / N / s1.t, ramified_only=True):
                        if N * s2.t < 1 or not _genus_ok(N, s2):
                            continue
                        if basket_feasible(N, s1, s2, chi, k2_min, 9 * chi):
                            cells.add(_ordered(N, s1, s2))
    return sorted(cells)


@dataclass(frozen=True, order=True)
class MixedCell:
    order: int  # of the acting index-2 subgroup
    sig: Signature


def mixed_grid(chi: int, q: int, max_order: int | None = None) -> list[MixedCell]:
    lo = t_lower_bound(q, False)
    k_max = floor(2 * chi / (lo * lo))
    if max_order:
        k_max = min(k_max, max_order // 2)
    cells = []
    for k in range(1, k_max + 1):
        t2 = Fraction(2 * chi, k)
        a, b = isqrt(t2.numerator), isqrt(t2.denominator)
        if a * a != t2.numerator or b * b != t2.denominator:
            continue
        for s in signatures_with_t(k, q, Fraction(a, b)):
            if _genus_ok(k, s):
                cells.append(MixedCell(k, s))
    return sorted(cells)


# --- vector cache ----------------------------------------------------------------

class VectorCache:
    """One .npy file per (group, signature), keyed by the catalog entry's content hash."""

    def __init__(self, root: Path | str | None):
        self.root = Path(root) if root else None
        if self.root:
            self.root.mkdir(parents=True, exist_ok=True)

    def path(self, entry: CatalogEntry, sig: Signature) -> Path:
        h = hashlib.sha256(f"{entry.content_hash()}|{sig.token()}".encode()).hexdigest()[:20]
        return self.root / f"g{entry.order}-{entry.id}-{h}.npy"

    def load(self, entry: CatalogEntry, sig: Signature) -> np.ndarray | None:
        if not self.root:
            return None
        p = self.path(entry, sig)
        if not p.exists():
            return None
        try:
            V = np.load(p, allow_pickle=False)
            width = 2 * sig.base_genus + sig.r
            G = entry.group
            ok = V.ndim == 2 and V.shape[1] == width and V.dtype.kind == "i"
            if ok and len(V):
                ok = V.min() >= 0 and V.max() < G.order
                ok = ok and bool(np.all(np.diff(kernels.vector_keys(V, G.order)) > 0))
                ok = ok and all(long_relation(G, GeneratingVector.from_row(V[i], sig.base_genus)) == 0
                                and G.generates(V[i]) for i in (0, len(V) - 1))
            if not ok:
                raise ValueError("content check failed")
            return V
        except Exception as exc:  # noqa: BLE001 - any unreadable entry is rebuilt
            log.warning("cache entry %s is corrupt (%s); rebuilding", p.name, exc)
            p.unlink(missing_ok=True)
            return None

    def store(self, entry: CatalogEntry, sig: Signature, V: np.ndarray) -> None:
        if not self.root:
            return
        fd, tmp = tempfile.mkstemp(dir=self.root, suffix=".tmp")
        try:
            with os.fdopen(fd, "wb") as f:
                np.save(f, V)
            os.replace(tmp, self.path(entry, sig))
        except BaseException:
            Path(tmp).unlink(missing_ok=True)
            raise


# --- side computation ------------------------------------------------------------

def _has_orders(G: PermGroup, sig: Signature) -> bool:
    present = set(int(x) for x in G.orders)
    return all(m in present for m in sig.branch_orders)


def _side_arrays(G: PermGroup, sig: Signature, V: np.ndarray | None, backend: str | None):
    if V is None:
        V = vector_array(G, sig, all_orderings=True, backend=backend)
    if len(V) == 0:
        return V, np.zeros(0, dtype=np.int64)
    d = OrbitData.build(G, sig, V, backend=backend)
    return V, d.labels


_WORKER_CATALOG: Catalog | None = None


def _worker_init(catalog_path):
    global _WORKER_CATALOG
    _WORKER_CATALOG = load_catalog(catalog_path)


def _worker_side(args):
    order, gid, token, backend = args
    entry = _WORKER_CATALOG.get(order, gid)
    return _side_arrays(entry.group, Signature.from_token(token), None, backend)


class SideStore:
    """Orbit data per (group, signature), computed once per run."""

    def __init__(self, catalog: Catalog, cfg: RunConfig):
        self.catalog = catalog
        self.cfg = cfg
        cache_dir = cfg.cache_dir or os.environ.get(ENV_CACHE) or None
        self.cache = VectorCache(cache_dir)
        self.data: dict[tuple, OrbitData] = {}

    def get(self, entry: CatalogEntry, sig: Signature) -> OrbitData:
        key = (entry.key, sig)
        if key not in self.data:
            self.compute([(entry, sig)])
        return self.data[key]

    def compute(self, requests: list[tuple[CatalogEntry, Signature]]) -> None:
        todo = []
        seen = set()
        for entry, sig in requests:
            key = (entry.key, sig)
            if key in self.data or key in seen:
                continue
            seen.add(key)
            G = entry.group
            if not _has_orders(G, sig):
                self._put(entry, sig, np.zeros((0, 2 * sig.base_genus + sig.r), dtype=np.int64),
                          np.zeros(0, dtype=np.int64))
                continue
            todo.append((entry, sig, self.cache.load(entry, sig)))
        if self.cfg.jobs > 1 and len(todo) > 1:
            with ProcessPoolExecutor(self.cfg.jobs, initializer=_worker_init,
                                     initargs=(self.cfg.catalog_path,)) as ex:
                args = [(e.order, e.id, s.token(), self.cfg.backend) for e, s, _ in todo]
                results = list(ex.map(_worker_side, args))
        else:
            results = [_side_arrays(e.group, s, V, self.cfg.backend) for e, s, V in todo]
        for (entry, sig, cached), (V, labels) in zip(todo, results):
            if cached is None:
                self.cache.store(entry, sig, V)
            self._put(entry, sig, V, labels)

    def _put(self, entry, sig, V, labels):
        self.data[(entry.key, sig)] = OrbitData(entry.group, sig, V, labels, self.cfg.backend)


# --- cell evaluation ----------------------------------------------------------------

def _accept(inv, cfg: RunConfig) -> bool:
    if (inv.chi, inv.pg, inv.q) != (cfg.chi, cfg.pg, cfg.q):
        return False
    return admissibility_gate(inv.k2, inv.pg, inv.q).passed


def evaluate_cell(entry: CatalogEntry, cell: Cell, sides: SideStore, cfg: RunConfig,
                  want_free: bool, want_singular: bool) -> list[ClassifiedCandidate]:
    # the side over the smaller base genus is cheaper and more often empty
    first, second = sorted((cell.sig1, cell.sig2), key=lambda s: (s.base_genus, s))
    if not sides.get(entry, first).n_orbits or not sides.get(entry, second).n_orbits:
        return []
    od1, od2 = sides.get(entry, cell.sig1), sides.get(entry, cell.sig2)
    keep: list[tuple[int, int, SurfaceCandidate, object, str]] = []
    for o1 in range(od1.n_orbits):
        d1 = OrbifoldDatum(entry, cell.sig1, od1.rep_vector(o1))
        for o2 in range(od2.n_orbits):
            d2 = OrbifoldDatum(entry, cell.sig2, od2.rep_vector(o2))
            c = pair_unmixed(d1, d2)
            if (c.free and not want_free) or (not c.free and not want_singular):
                continue
            try:
                inv = invariants_quotient(c)
            except InadmissiblePair as exc:
                log.info("rejected %s %s x %s: %s", entry.label, cell.sig1, cell.sig2, exc)
                continue
            if not _accept(inv, cfg):
                continue
            kind = ("GH" if is_generalized_hyperelliptic(c) else "UnMix") if c.free else "PQ"
            keep.append((o1, o2, c, inv, kind))
    if not keep:
        return []
    auts = aut_tables(entry.group)
    classes = pair_classes(od1.aut_action(auts), od2.aut_action(auts),
                           [(o1, o2) for o1, o2, *_ in keep], swap=cell.sig1 == cell.sig2)
    return [ClassifiedCandidate(c, inv, kind, classes[(o1, o2)]) for o1, o2, c, inv, kind in keep]


def evaluate_mixed(cell: MixedCell, catalog: Catalog, sides: SideStore, cfg: RunConfig) -> list[ClassifiedCandidate]:
    out = []
    for k_entry in catalog.groups_of_order(cell.order):
        od = sides.get(k_entry, cell.sig)
        if not od.n_orbits:
            continue
        K = k_entry.group
        for g_entry in catalog.groups_of_order(2 * cell.order):
            G = g_entry.group
            embs = index_two_embeddings(K, G)
            if not embs:
                continue
            nodes = {}
            for hi, (H, emb) in enumerate(embs):
                emb_arr = np.array(emb, dtype=np.int64)
                tau = min(g for g in range(G.order) if g not in H)
                for o in range(od.n_orbits):
                    v = od.rep_vector(o)
                    d = OrbifoldDatum(k_entry, cell.sig, v)
                    sigma = frozenset(int(emb_arr[x]) for x in d.stabilizers)
                    if mixed_free(G, H, sigma, tau):
                        nodes[(hi, o)] = (d, MixedExtension(g_entry, H, emb, tau))
            if not nodes:
                continue
            roots = _mixed_classes(G, od, embs, list(nodes))
            for (hi, o), (d, ext) in sorted(nodes.items()):
                c = SurfaceCandidate("mixed", d, d, (), True, ext)
                try:
                    inv = invariants_quotient(c)
                except InadmissiblePair as exc:
                    log.info("rejected mixed %s over %s: %s", g_entry.label, k_entry.label, exc)
                    continue
                if _accept(inv, cfg):
                    out.append(ClassifiedCandidate(c, inv, "Mix", (g_entry.key, roots[(hi, o)])))
    return out


def _mixed_classes(G: PermGroup, od: OrbitData, embs, nodes: list[tuple[int, int]]) -> dict:
    """Aut(G)-classes of (index-2 subgroup, K-orbit) pairs."""
    by_set = {H: hi for hi, (H, _) in enumerate(embs)}
    back = []
    for H, emb in embs:
        inv_map = np.full(G.order, -1, dtype=np.int64)
        inv_map[np.array(emb)] = np.arange(len(emb))
        back.append(inv_map)
    parent = {n: n for n in nodes}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    rows = {n: od.vectors[od.reps[n[1]]] for n in nodes}
    for phi in aut_tables(G):
        for hi, o in nodes:
            H, emb = embs[hi]
            hj = by_set[frozenset(int(phi[x]) for x in H)]
            img = back[hj][phi[np.array(emb)[rows[(hi, o)]]]]
            target = (hj, od.label_of(img))
            if target in parent:
                a, b = find((hi, o)), find(target)
                if a != b:
                    parent[max(a, b)] = min(a, b)
    return {n: find(n) for n in nodes}


# --- result tables ---------------------------------------------------------------

@dataclass(frozen=True)
class ResultRow:
    type: str
    k2: int
    pg: int
    q: int
    g1: int
    g2: int
    group: str
    name: str
    sig1: str
    sig2: str
    basket: str
    dim: int
    n: int

    @property
    def group_key(self) -> tuple[int, int]:
        o, i = self.group[2:-1].split(",")
        return int(o), int(i)

    @property
    def match_key(self) -> tuple:
        return (self.type, self.k2, self.pg, self.q, self.group, self.sig1, self.sig2, self.basket)

    def sort_key(self) -> tuple:
        return (self.k2, *self.group_key, self.sig1, self.sig2, self.type, self.basket)

    @property
    def m_label(self) -> str:
        if self.type == "Mix":
            return "-"
        s1, s2 = Signature.from_token(self.sig1), Signature.from_token(self.sig2)
        if self.type == "GH":
            return (s1 if s1.base_genus == 0 else s2).m_label()
        return s1.m_label() + s2.m_label()

    @classmethod
    def from_family(cls, rec: FamilyRecord) -> "ResultRow":
        if rec.kind == "Mix":
            g = rec.genera[0]
            return cls("Mix", rec.k2, rec.pg, rec.q, g, g, _label(rec.group_key), rec.group_name,
                       rec.signatures[0].token(), "", basket_label(rec.basket), rec.dimension, rec.component_count)
        sides = sorted(zip(rec.genera, rec.signatures), key=lambda x: (x[0], x[1]))
        (g1, s1), (g2, s2) = sides
        return cls(rec.kind, rec.k2, rec.pg, rec.q, g1, g2, _label(rec.group_key), rec.group_name,
                   s1.token(), s2.token(), basket_label(rec.basket), rec.dimension, rec.component_count)


def _label(key: tuple[int, int]) -> str:
    return f"G({key[0]},{key[1]})"


COLUMNS = [f.name for f in fields(ResultRow)]


@dataclass
class ResultTable:
    rows: list[ResultRow]
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.rows = sorted(self.rows, key=ResultRow.sort_key)

    def __eq__(self, other):
        return isinstance(other, ResultTable) and self.rows == other.rows and self.meta == other.meta

    def to_json(self) -> str:
        return json.dumps({"meta": self.meta, "rows": [asdict(r) for r in self.rows]}, indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "ResultTable":
        data = json.loads(text)
        return cls([ResultRow(**r) for r in data["rows"]], data.get("meta", {}))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in self.rows:
            w.writerow([getattr(r, c) for c in COLUMNS])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "ResultTable":
        lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
        if not lines:
            return cls([])
        reader = csv.DictReader(lines)
        if reader.fieldnames != COLUMNS:
            raise ValueError(f"expected columns {','.join(COLUMNS)}, got {','.join(reader.fieldnames or [])}")
        rows = []
        for rec in reader:
            vals = {c: (int(rec[c]) if f.type in (int, "int") else rec[c]) for c, f in zip(COLUMNS, fields(ResultRow))}
            rows.append(ResultRow(**vals))
        return cls(rows)

    def to_markdown(self) -> str:
        head = ["Type", "K^2", "g1", "g2", "G", "Id", "m", "Sing.", "#Sing", "dim", "n"]
        out = ["| " + " | ".join(head) + " |", "|" + "---|" * len(head)]
        for r in self.rows:
            b = parse_basket(r.basket)
            cells = [r.type, r.k2, r.g1, r.g2, r.name, r.group, r.m_label, basket_types_label(b),
                     basket_size(b) if b else "-", r.dim, r.n]
            out.append("| " + " | ".join(str(c) for c in cells) + " |")
        return "\n".join(out) + "\n"

    @classmethod
    def load(cls, path: Path | str) -> "ResultTable":
        text = Path(path).read_text()
        return cls.from_json(text) if text.lstrip().startswith("{") else cls.from_csv(text)


def emit(t: ResultTable, fmt: str) -> bytes:
    if fmt == "json":
        return t.to_json().encode()
    if fmt == "csv":
        return t.to_csv().encode()
    if fmt == "markdown":
        return t.to_markdown().encode()
    raise ConfigError(f"unknown format {fmt!r}")


# --- comparison ------------------------------------------------------------------

@dataclass(frozen=True)
class DiffItem:
    kind: str  # missing | extra | mismatch
    key: tuple
    detail: str = ""

    def __str__(self) -> str:
        t, k2, pg, q, grp, s1, s2, b = self.key
        head = f"{self.kind}: {t} K^2={k2} {grp} {s1} {s2} basket {b}"
        return head + (f" ({self.detail})" if self.detail else "")


BUNDLED_EXPECTED = {"table1": "table1.csv", "table2": "table2.csv"}


def expected_path(name: str | Path) -> Path:
    p = Path(name)
    if p.exists():
        return p
    if str(name) in BUNDLED_EXPECTED:
        return Path(str(resources.files("pqsurf.data").joinpath("expected", BUNDLED_EXPECTED[str(name)])))
    raise ConfigError(f"expected table {name} not found")


def compare_expected(t: ResultTable, path: Path | str) -> tuple[list[DiffItem], int]:
    try:
        exp = ResultTable.load(expected_path(path))
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"cannot parse expected table {path}: {exc}") from exc
    got = {r.match_key: r for r in t.rows}
    want = {r.match_key: r for r in exp.rows}
    diff = []
    for k in sorted(want.keys() - got.keys(), key=str):
        diff.append(DiffItem("missing", k))
    for k in sorted(got.keys() - want.keys(), key=str):
        diff.append(DiffItem("extra", k))
    for k in sorted(want.keys() & got.keys(), key=str):
        bad = [f"{c}: expected {getattr(want[k], c)}, got {getattr(got[k], c)}"
               for c in ("g1", "g2", "dim", "n") if getattr(want[k], c) != getattr(got[k], c)]
        if bad:
            diff.append(DiffItem("mismatch", k, "; ".join(bad)))
    return diff, int(bool(diff))


# --- driver ----------------------------------------------------------------------

def _groups(catalog: Catalog, order: int) -> list[CatalogEntry]:
    return catalog.groups_of_order(order)


def _check_orders(catalog: Catalog, orders) -> None:
    missing = sorted(set(orders) - catalog.covered_orders)
    if missing:
        raise CatalogError("catalog incomplete for required orders: " + ", ".join(map(str, missing)))


def collect_candidates(cfg: RunConfig, catalog: Catalog | None = None) -> list[ClassifiedCandidate]:
    """Every candidate passing the target and admissibility filters, with its class id."""
    if catalog is None:
        catalog = load_catalog(cfg.catalog_path)
    iso = cfg.mode in ("isogenous", "both")
    pq = cfg.mode in ("product-quotient", "both")
    want_free = iso or cfg.include_free
    cells = set()
    if want_free:
        cells |= set(free_grid(cfg.chi, cfg.q, cfg.max_order))
    if pq:
        cells |= set(pq_grid(cfg.chi, cfg.pg, cfg.q, cfg.max_order))
    mcells = mixed_grid(cfg.chi, cfg.q, cfg.max_order) if iso else []
    cells = sorted(cells)
    _check_orders(catalog, [c.order for c in cells] + [o for m in mcells for o in (m.order, 2 * m.order)])
    log.info("grid: %d unmixed cells over orders %s, %d mixed cells", len(cells),
             sorted({c.order for c in cells}), len(mcells))

    sides = SideStore(catalog, cfg)
    # first pass: the cheap side of every cell; second pass: the rest where needed
    firsts = []
    for c in cells:
        s = min((c.sig1, c.sig2), key=lambda s: (s.base_genus, s))
        firsts += [(e, s) for e in _groups(catalog, c.order)]
    firsts += [(e, m.sig) for m in mcells for e in _groups(catalog, m.order)]
    sides.compute(firsts)
    seconds = []
    for c in cells:
        s = min((c.sig1, c.sig2), key=lambda s: (s.base_genus, s))
        other = c.sig2 if s == c.sig1 else c.sig1
        seconds += [(e, other) for e in _groups(catalog, c.order) if sides.get(e, s).n_orbits]
    sides.compute(seconds)

    items: list[ClassifiedCandidate] = []
    for c in cells:
        for e in _groups(catalog, c.order):
            items += evaluate_cell(e, c, sides, cfg, want_free, pq)
    for m in mcells:
        items += evaluate_mixed(m, catalog, sides, cfg)
    return items


def classify(cfg: RunConfig, catalog: Catalog | None = None) -> list[FamilyRecord]:
    fams = assemble_families(collect_candidates(cfg, catalog))
    if cfg.ksq is not None:
        fams = [f for f in fams if f.k2 == cfg.ksq]
    return fams


def run_classification(cfg: RunConfig, catalog: Catalog | None = None) -> ResultTable:
    fams = classify(cfg, catalog)
    meta = {"chi": cfg.chi, "pg": cfg.pg, "q": cfg.q, "mode": cfg.mode}
    if cfg.ksq is not None:
        meta["ksq"] = cfg.ksq
    return ResultTable([ResultRow.from_family(f) for f in fams], meta)


__all__ = [
    "RunConfig", "ConfigError", "Cell", "free_grid", "pq_grid", "mixed_grid", "basket_feasible",
    "VectorCache", "ResultRow", "ResultTable", "emit", "compare_expected", "run_classification", "classify",
    "collect_candidates",
    "CatalogIncomplete",
]
