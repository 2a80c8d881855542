import csv
import json

import pytest

from torus_lp import cli
from torus_lp.lemmas import recheck


def _run(capsys, *argv):
    code = cli.main(list(argv))
    return code, capsys.readouterr().out


def _rows(text):
    return list(csv.DictReader(text.splitlines()))


def test_table_partition_identity(capsys):
    code, out = _run(capsys, "table", "--grid", "10", "--p", "0", "-q")
    assert code == 0
    (row,) = _rows(out)
    assert list(row) == ["p", "L_plus", "U_plus", "L_minus", "U_minus"]
    s_n = round((float(row["U_plus"]) - float(row["L_plus"])) * 1000)
    assert float(row["L_plus"]) + float(row["L_minus"]) + s_n / 1000 == pytest.approx(1, abs=1e-12)


def test_table_parseval_and_roundtrip(capsys, tmp_path):
    out = tmp_path / "t.json"
    code, _ = _run(capsys, "table", "--grid", "300", "--p", "2", "--format", "json",
                   "--out", str(out), "-q")
    assert code == 0
    doc = json.loads(out.read_text())
    (_, lp, up, lm, um), = doc["rows"]
    assert lp + lm <= 1.5 <= up + um
    assert {"S_N", "ledger", "margins", "alpha"} <= set(doc)
    code, text = _run(capsys, "table", "--grid", "300", "--p", "2", "-q")
    (row,) = _rows(text)
    assert float(row["U_plus"]) == up  # repr round-trips exactly


def test_worker_counts_byte_identical(capsys, monkeypatch):
    outs = []
    for w in ("1", "16"):
        code, text = _run(capsys, "table", "--grid", "300", "--workers", w,
                          "--format", "json", "-q")
        assert code == 0
        outs.append(text)
    monkeypatch.setenv("TORUS_LP_WORKERS", "4")
    outs.append(_run(capsys, "table", "--grid", "300", "--format", "json", "-q")[1])
    assert outs[0] == outs[1] == outs[2]


def test_text_format(capsys):
    code, text = _run(capsys, "table", "--grid", "50", "--lipschitz", "paper",
                      "--format", "text", "-q")
    assert code == 0 and "S_N = " in text


def test_coarse_certificate_fails(capsys, tmp_path):
    out = tmp_path / "cert.json"
    code, _ = _run(capsys, "certificate", "--grid", "20", "--out", str(out), "-q")
    assert code in (1, 2)
    doc = json.loads(out.read_text())
    assert doc["verdict"] == "failed"
    assert cli.certificate_exit_code(doc) == code
    assert recheck(doc) == "failed"


def test_certificate_sup_parsing():
    assert cli.parse_sup("grid") == (True, None)
    assert cli.parse_sup("analytic=1.5") == (True, 1.5)
    with pytest.raises(ValueError):
        cli.parse_sup("oracle")


def test_bad_arguments(capsys, tmp_path):
    doc = {"dimension": 1, "terms": [{"coef": 1, "kind": "sin", "k": [2]}]}
    path = tmp_path / "f.json"
    path.write_text(json.dumps(doc))
    with pytest.raises(SystemExit) as exc:
        cli.main(["table", "--eigenfunction", str(path), "--lipschitz", "paper", "-q"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit):
        cli.main(["table", "--lipschitz", "-3", "-q"])
    assert cli.main(["table", "--eigenfunction", str(tmp_path / "missing.json"), "-q"]) == 3


def test_custom_eigenfunction(capsys, tmp_path):
    doc = {"dimension": 2, "terms": [{"coef": 1.0, "kind": "cos", "k": [1, 0]},
                                     {"coef": 0.5, "kind": "sin", "k": [0, 1]}]}
    path = tmp_path / "f.json"
    path.write_text(json.dumps(doc))
    code, text = _run(capsys, "table", "--eigenfunction", str(path), "--grid", "200",
                      "--p", "0,2", "-q")
    assert code == 0
    rows = _rows(text)
    # Parseval: (1 + 0.25) / 2
    assert float(rows[1]["L_plus"]) + float(rows[1]["L_minus"]) <= 0.625
    assert float(rows[1]["U_plus"]) + float(rows[1]["U_minus"]) >= 0.625


def test_io_error(capsys, tmp_path):
    bad = tmp_path / "nope" / "out.csv"
    assert cli.main(["table", "--grid", "4", "--out", str(bad), "-q"]) == 3


def test_oracle_estimate(capsys):
    code, text = _run(capsys, "oracle", "estimate", "--p", "0", "--sign", "plus",
                      "--grid", "400", "-q")
    assert code == 0
    value = float(text.split(":")[1].split()[0])
    assert value == pytest.approx(0.3986, abs=5e-4)


def test_oracle_check_all_deterministic(capsys):
    a = _run(capsys, "oracle", "check-all", "--grid", "300", "--seed", "1", "-q")
    b = _run(capsys, "oracle", "check-all", "--grid", "300", "--seed", "1", "-q")
    assert a[0] == 0 and a == b
    assert "FAIL" not in a[1]
