import json

import pytest

from pqsurf.cli import EXIT_CONFIG, EXIT_DIFF, EXIT_OK, main
from pqsurf.pipeline import ResultTable, expected_path


def test_classify_product_quotient_matches_bundled_table(capsys):
    assert main(["classify", "--mode", "product-quotient", "--format", "csv", "--expected", "table2"]) == EXIT_OK
    out, err = capsys.readouterr()
    assert out.startswith("type,k2,") and len(out.strip().splitlines()) == 6
    assert "tables match" in err


def test_classify_json_to_file(tmp_path, capsys):
    dest = tmp_path / "out.json"
    code = main(["classify", "--max-order", "4", "--format", "json", "-o", str(dest),
                 "--cache-dir", str(tmp_path / "c"), "--jobs", "1"])
    assert code == EXIT_OK
    data = json.loads(dest.read_text())
    assert data["meta"] == {"chi": 1, "pg": 2, "q": 2, "mode": "isogenous"}
    assert {r["group"] for r in data["rows"]} <= {"G(2,1)", "G(3,1)", "G(4,1)", "G(4,2)"}
    assert list((tmp_path / "c").glob("*.npy"))


def test_compare_exit_codes(tmp_path, capsys):
    t2 = ResultTable.load(expected_path("table2"))
    same = tmp_path / "same.csv"
    same.write_text(t2.to_csv())
    assert main(["compare", str(same), "--expected", "table2"]) == EXIT_OK
    fewer = tmp_path / "fewer.csv"
    fewer.write_text(ResultTable(t2.rows[1:]).to_csv())
    assert main(["compare", str(fewer), "--expected", "table2"]) == EXIT_DIFF
    assert "missing: PQ K^2=4" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["classify", "--chi", "1", "--pg", "2", "--q", "3"],
    ["classify", "--jobs", "0"],
    ["classify", "--catalog", "/nonexistent/groups.cat"],
    ["compare", "/nonexistent/table.csv", "--expected", "table1"],
    ["compare", "/nonexistent/table.csv", "--expected", "nope"],
    ["catalog", "verify", "--catalog", "/nonexistent/groups.cat"],
])
def test_config_errors_exit_2(argv, capsys):
    assert main(argv) == EXIT_CONFIG
    assert "error:" in capsys.readouterr().err


def test_incomplete_catalog_exit_2(tmp_path, capsys):
    cat = tmp_path / "tiny.cat"
    cat.write_text("ledger 2 1\ngroup 2 1\nname C2\ngens a\nrel a2\nend\n")
    assert main(["classify", "--catalog", str(cat)]) == EXIT_CONFIG
    assert "incomplete" in capsys.readouterr().err


def test_catalog_verify(capsys):
    assert main(["catalog", "verify"]) == EXIT_OK
    assert "catalog ok: 166 groups" in capsys.readouterr().out


def test_bad_arguments_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["classify", "--format", "yaml"])
    assert exc.value.code == 2
