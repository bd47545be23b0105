import logging
from dataclasses import replace
from fractions import Fraction

import numpy as np
import pytest

from pqsurf.orbifold import Signature
from pqsurf.pipeline import (ConfigError, ResultRow, ResultTable, RunConfig, VectorCache, basket_feasible,
                             compare_expected, emit, expected_path, free_grid, mixed_grid, pq_grid,
                             run_classification)


@pytest.mark.parametrize("kw", [
    dict(chi=0, pg=1, q=2),
    dict(chi=1, pg=2, q=3),
    dict(mode="both-ways"),
    dict(jobs=0),
    dict(max_order=0),
    dict(pg=-1, q=-2, chi=0),
])
def test_config_errors(kw):
    with pytest.raises(ConfigError):
        RunConfig(**kw)


def test_free_grid_cells():
    cells = free_grid(1, 2)
    for c in cells:
        assert c.sig1 <= c.sig2
        assert c.order * c.sig1.t * c.sig2.t == 1
        assert c.sig1.base_genus + c.sig2.base_genus == 2
    assert any(c.order == 48 and c.sig1 == Signature(0, (2, 3, 8)) for c in cells)
    assert max(c.order for c in cells) == 84
    assert all(c.order <= 12 for c in free_grid(1, 2, max_order=12))


def test_pq_grid_cells():
    cells = pq_grid(1, 2, 2)
    assert all(c.sig1.r and c.sig2.r for c in cells)
    assert any(c.order == 6 and c.sig1 == c.sig2 == Signature(1, (3,)) for c in cells)
    assert any(c.order == 12 and c.sig1 == c.sig2 == Signature(1, (2,)) for c in cells)


def test_basket_feasibility():
    s = Signature(1, (3,))
    assert basket_feasible(6, s, s, 1, 4, 8)
    s2 = Signature(1, (2,))
    assert basket_feasible(12, s2, s2, 1, 4, 8)
    assert not basket_feasible(12, s2, s2, 1, 7, 8)  # nodes only lower K^2 to 6


def test_mixed_grid():
    cells = mixed_grid(1, 2)
    assert any(m.order == 2 and m.sig == Signature(2) for m in cells)
    for m in cells:
        assert m.sig.base_genus == 2 and m.order * m.sig.t ** 2 == 2  # |K| t^2 = 2 chi


def row(**kw):
    base = dict(type="GH", k2=8, pg=2, q=2, g1=2, g2=5, group="G(4,2)", name="C2^2", sig1="0;(2^5)",
                sig2="2;()", basket="-", dim=5, n=2)
    base.update(kw)
    return ResultRow(**base)


def test_emit_formats():
    empty = ResultTable([])
    assert emit(empty, "csv").decode() == "type,k2,pg,q,g1,g2,group,name,sig1,sig2,basket,dim,n\n"
    t = ResultTable([row(), row(type="PQ", k2=5, group="G(6,1)", name="S3", sig1="1;(3)", sig2="1;(3)",
                             basket="1/3(1,1)+1/3(1,2)", g1=3, g2=3, dim=2, n=1)], {"chi": 1})
    assert ResultTable.from_json(emit(t, "json").decode()) == t
    assert ResultTable.from_csv(emit(t, "csv").decode()).rows == t.rows
    md = emit(t, "markdown").decode()
    assert "| PQ | 5 | 3 | 3 | S3 | G(6,1) | (3)(3) | 1/3(1,1)+1/3(1,2) | 2 | 2 | 1 |" in md
    assert "| GH | 8 | 2 | 5 | C2^2 | G(4,2) | (2^5) | - | - | 5 | 2 |" in md
    with pytest.raises(ConfigError):
        emit(t, "yaml")


def test_rows_are_sorted():
    t = ResultTable([row(k2=8), row(k2=4, type="PQ")])
    assert [r.k2 for r in t.rows] == [4, 8]


def test_bundled_expected_tables_parse():
    t1 = ResultTable.load(expected_path("table1"))
    t2 = ResultTable.load(expected_path("table2"))
    assert len(t1.rows) == 23 and len(t2.rows) == 5
    with pytest.raises(ConfigError):
        expected_path("table9")


def test_compare_detects_injected_count(tmp_path, runs):
    t = runs.table()
    rows = [replace(r, n=3) if (r.group == "G(4,2)" and r.type == "GH") else r for r in t.rows]
    p = tmp_path / "exp.csv"
    p.write_text(ResultTable(rows).to_csv())
    diff, status = compare_expected(t, p)
    assert status == 1
    assert [d.kind for d in diff] == ["mismatch"]
    assert "n: expected 3, got 2" in diff[0].detail


def test_compare_against_empty_file(tmp_path, runs):
    t = runs.table()
    p = tmp_path / "empty.csv"
    p.write_text("# nothing\n")
    diff, status = compare_expected(t, p)
    assert status == 1 and len(diff) == len(t.rows)
    assert all(d.kind == "extra" for d in diff)
    p2 = tmp_path / "same.json"
    p2.write_text(t.to_json())
    assert compare_expected(t, p2) == ([], 0)


def test_compare_bad_expected_file(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("a,b\n1,2\n")
    with pytest.raises(ConfigError):
        compare_expected(ResultTable([]), p)


def test_vector_cache_round_trip_and_corruption(tmp_path, catalog, caplog):
    small = dict(max_order=12)
    cache = tmp_path / "cache"
    t0 = run_classification(RunConfig(**small), catalog)
    t1 = run_classification(RunConfig(cache_dir=cache, **small), catalog)
    files = sorted(cache.glob("*.npy"))
    assert files and t1 == t0
    files[0].write_bytes(b"not a numpy file")
    files[1].write_bytes(np.zeros((3, 1), dtype=np.int64).tobytes())
    with caplog.at_level(logging.WARNING, logger="pqsurf.pipeline"):
        t2 = run_classification(RunConfig(cache_dir=cache, **small), catalog)
    assert t2 == t0
    assert sum("corrupt" in r.message for r in caplog.records) == 2
    assert not list(cache.glob("*.tmp"))


def test_cache_detects_wrong_contents(tmp_path, catalog):
    e = catalog.get(4, 2)
    sig = Signature(2)
    vc = VectorCache(tmp_path)
    np.save(vc.path(e, sig), np.array([[1, 1, 1, 1]], dtype=np.int64))  # not a generating vector
    assert vc.load(e, sig) is None
    assert not vc.path(e, sig).exists()
    assert VectorCache(None).load(e, sig) is None


def test_jobs_do_not_change_output(catalog):
    a = run_classification(RunConfig(max_order=16), catalog)
    b = run_classification(RunConfig(max_order=16, jobs=2), catalog)
    assert emit(a, "json") == emit(b, "json")


def test_numpy_backend_gives_identical_table(catalog, runs):
    ref = runs.table()
    t = run_classification(RunConfig(backend="numpy"), catalog)
    assert emit(t, "json") == emit(ref, "json")


def test_ksq_filter(runs):
    t = runs.table(mode="product-quotient", ksq=4)
    assert {r.k2 for r in t.rows} == {4} and len(t.rows) == 3


def test_free_rows_agree_between_modes(runs):
    # the free quotients found in product-quotient mode are exactly the unmixed isogenous families
    pq = runs.table(mode="product-quotient", include_free=True)
    iso = runs.table()
    free_pq = [r for r in pq.rows if r.basket == "-"]
    unmixed = [r for r in iso.rows if r.type != "Mix"]
    assert free_pq == unmixed


def test_rows_have_consistent_invariants(runs):
    for r in runs.table().rows + runs.table(mode="product-quotient").rows:
        assert (r.pg, r.q) == (2, 2)
        assert r.n >= 1 and r.dim >= 2 and r.g1 <= r.g2
        assert Fraction(r.k2) <= 9
