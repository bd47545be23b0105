"""Command line interface.

Exit codes: 0 success or match, 1 a diff was found, 2 configuration or
catalog error.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .catalog import CatalogError, load_catalog
from .pipeline import FORMATS, MODES, ConfigError, ResultTable, RunConfig, compare_expected, emit, run_classification

EXIT_OK, EXIT_DIFF, EXIT_CONFIG = 0, 1, 2


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pqsurf", description="Classify chi=1 product-quotient surfaces.")
    ap.add_argument("-v", "--verbose", action="count", default=0)
    sub = ap.add_subparsers(dest="cmd", required=True)

    c = sub.add_parser("classify", help="run the classification and print a table")
    c.add_argument("--chi", type=int, default=1)
    c.add_argument("--pg", type=int, default=2)
    c.add_argument("--q", type=int, default=2)
    c.add_argument("--ksq", type=int, default=None, help="keep only rows with this K^2")
    c.add_argument("--mode", choices=MODES, default="isogenous")
    c.add_argument("--format", choices=FORMATS, default="markdown")
    c.add_argument("--expected", default=None, help="expected table (path, or table1/table2 for the bundled ones)")
    c.add_argument("--cache-dir", type=Path, default=None)
    c.add_argument("--jobs", type=int, default=1)
    c.add_argument("--max-order", type=int, default=None)
    c.add_argument("--catalog", type=Path, default=None)
    c.add_argument("--include-free", action="store_true", help="product-quotient mode: keep free quotients too")
    c.add_argument("-o", "--output", type=Path, default=None)

    cat = sub.add_parser("catalog", help="catalog maintenance")
    cat_sub = cat.add_subparsers(dest="catalog_cmd", required=True)
    v = cat_sub.add_parser("verify", help="realize every presentation and check completeness")
    v.add_argument("--catalog", type=Path, default=None)

    cmp_ = sub.add_parser("compare", help="diff a saved table against an expected one")
    cmp_.add_argument("table", type=Path)
    cmp_.add_argument("--expected", required=True)
    return ap


def _report(diff) -> None:
    for item in diff:
        print(item, file=sys.stderr)
    print(f"{len(diff)} difference(s)" if diff else "tables match", file=sys.stderr)


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    level = logging.WARNING - 10 * min(args.verbose, 2)
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.cmd == "catalog":
            cat = load_catalog(args.catalog)
            print(f"catalog ok: {len(cat)} groups over {len(cat.ledger)} orders")
            return EXIT_OK
        if args.cmd == "compare":
            try:
                table = ResultTable.load(args.table)
            except (OSError, ValueError, KeyError, TypeError) as exc:
                raise ConfigError(f"cannot read {args.table}: {exc}") from exc
            diff, status = compare_expected(table, args.expected)
            _report(diff)
            return status
        cfg = RunConfig(chi=args.chi, pg=args.pg, q=args.q, mode=args.mode, ksq=args.ksq,
                        max_order=args.max_order, catalog_path=args.catalog, cache_dir=args.cache_dir,
                        jobs=args.jobs, include_free=args.include_free)
        table = run_classification(cfg)
        data = emit(table, args.format)
        if args.output:
            args.output.write_bytes(data)
        else:
            sys.stdout.write(data.decode())
        if args.expected:
            diff, status = compare_expected(table, args.expected)
            _report(diff)
            return status
        return EXIT_OK
    except (ConfigError, CatalogError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
