"""Registry of small groups keyed by (order, id), loaded from a presentation file.

File grammar (one directive per line, ``#`` starts a comment)::

    ledger <order> <count>        # catalog claims completeness for <order>
    group <order> <id>            # opens an entry
    name <display name>
    status pinned|conventional|provisional
    gens <letter>[,<letter>...]
    rel <word>                    # repeated; words like x4, yxy-1x-3
    end

See docs/catalog-format.md for the full description.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .coset import DEFAULT_COSET_LIMIT, CosetLimitExceeded, Presentation, evaluate, realize
from .groups import PermGroup, is_isomorphic

log = logging.getLogger(__name__)

STATUSES = ("pinned", "conventional", "provisional")


class CatalogError(ValueError):
    pass


class CatalogIncomplete(CatalogError):
    def __init__(self, order: int):
        super().__init__(f"catalog incomplete for order {order}")
        self.order = order


@dataclass(frozen=True, eq=False)
class CatalogEntry:
    order: int
    id: int
    name: str
    presentation: Presentation
    status: str = "conventional"
    realized: PermGroup | None = field(default=None, repr=False)

    @property
    def key(self) -> tuple[int, int]:
        return (self.order, self.id)

    @property
    def label(self) -> str:
        return f"G({self.order},{self.id})"

    @property
    def group(self) -> PermGroup:
        assert self.realized is not None
        return self.realized

    def content_hash(self) -> str:
        text = f"{self.order}|{self.id}|{self.presentation.gen_names}|{self.presentation.relators}"
        return hashlib.sha256(text.encode()).hexdigest()[:16]


@dataclass(frozen=True, eq=False)
class Catalog:
    entries: tuple[CatalogEntry, ...]
    ledger: dict[int, int]

    @property
    def covered_orders(self) -> frozenset[int]:
        return frozenset(self.ledger)

    def groups_of_order(self, n: int) -> list[CatalogEntry]:
        if n not in self.ledger:
            raise CatalogIncomplete(n)
        return sorted((e for e in self.entries if e.order == n), key=lambda e: e.id)

    def get(self, order: int, id_: int) -> CatalogEntry:
        for e in self.entries:
            if e.key == (order, id_):
                return e
        raise KeyError(f"G({order},{id_}) not in catalog")

    def __len__(self) -> int:
        return len(self.entries)


def groups_of_order(c: Catalog, n: int) -> list[CatalogEntry]:
    return c.groups_of_order(n)


def parse_catalog(text: str, source: str = "<string>") -> tuple[list[dict], dict[int, int]]:
    raw: list[dict] = []
    ledger: dict[int, int] = {}
    cur: dict | None = None
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        head, _, rest = line.partition(" ")
        rest = rest.strip()
        where = f"{source}:{lineno}"
        try:
            if head == "ledger":
                o, c = (int(t) for t in rest.split())
                if o in ledger:
                    raise CatalogError(f"{where}: duplicate ledger line for order {o}")
                ledger[o] = c
            elif head == "group":
                if cur is not None:
                    raise CatalogError(f"{where}: 'group' before 'end'")
                o, i = (int(t) for t in rest.split())
                cur = {"order": o, "id": i, "name": f"G({o},{i})", "status": "conventional",
                       "gens": None, "rels": [], "line": lineno}
            elif cur is None:
                raise CatalogError(f"{where}: '{head}' outside a group block")
            elif head == "name":
                cur["name"] = rest
            elif head == "status":
                if rest not in STATUSES:
                    raise CatalogError(f"{where}: unknown status {rest!r}")
                cur["status"] = rest
            elif head == "gens":
                cur["gens"] = rest
            elif head == "rel":
                cur["rels"].append(rest)
            elif head == "end":
                if cur["gens"] is None:
                    raise CatalogError(f"{where}: group without 'gens'")
                raw.append(cur)
                cur = None
            else:
                raise CatalogError(f"{where}: unknown directive {head!r}")
        except ValueError as exc:
            if isinstance(exc, CatalogError):
                raise
            raise CatalogError(f"{where}: {exc}") from exc
    if cur is not None:
        raise CatalogError(f"{source}: unterminated group block")
    return raw, ledger


def load_catalog(path: str | Path | None = None, coset_limit: int = DEFAULT_COSET_LIMIT) -> Catalog:
    """Parse, realize and verify a catalog file (default: the bundled one)."""
    if path is None:
        text = resources.files("pqsurf.data").joinpath("groups.cat").read_text()
        source = "groups.cat"
    else:
        try:
            text = Path(path).read_text()
        except OSError as exc:
            raise CatalogError(f"cannot read catalog {path}: {exc.strerror or exc}") from exc
        source = str(path)
    raw, ledger = parse_catalog(text, source)
    entries: list[CatalogEntry] = []
    seen: set[tuple[int, int]] = set()
    for r in raw:
        key = (r["order"], r["id"])
        if key in seen:
            raise CatalogError(f"duplicate key G{key}")
        seen.add(key)
        try:
            pres = Presentation.parse(r["gens"], r["rels"])
        except ValueError as exc:
            raise CatalogError(f"G{key}: {exc}") from exc
        try:
            # the catalog's own presentations are checked to close within 200 |G| cosets
            G = realize(pres, limit=max(coset_limit, 200 * r["order"]))
        except CosetLimitExceeded as exc:
            raise CatalogError(f"G{key}: {exc}") from exc
        if G.order != r["order"]:
            raise CatalogError(f"G{key}: presentation does not realize declared order "
                               f"({G.order} != {r['order']})")
        assert all(evaluate(G, w) == 0 for w in pres.relators)
        entries.append(CatalogEntry(r["order"], r["id"], r["name"], pres, r["status"], G))
    entries.sort(key=lambda e: e.key)
    verify_entries(entries, ledger)
    return Catalog(tuple(entries), dict(sorted(ledger.items())))


def verify_entries(entries: list[CatalogEntry], ledger: dict[int, int]) -> None:
    by_order: dict[int, list[CatalogEntry]] = {}
    for e in entries:
        by_order.setdefault(e.order, []).append(e)
    for order, count in ledger.items():
        have = len(by_order.get(order, []))
        if have != count:
            raise CatalogError(f"ledger violation: order {order} declares {count} groups, file has {have}")
    for order, group in by_order.items():
        for i, a in enumerate(group):
            for b in group[i + 1:]:
                if is_isomorphic(a.group, b.group):
                    raise CatalogError(f"{a.label} and {b.label} are isomorphic")
    log.debug("catalog verified: %d entries, %d ledger orders", len(entries), len(ledger))
