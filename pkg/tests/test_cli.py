import csv
import json
from pathlib import Path

import pytest

from cscp.cli import main, parse_minsup
from cscp.errors import ConfigError
from cscp.ingest import parse_transactions
from cscp.synth import from_profile
from cscp.ingest import write_transactions

GOLDEN = Path(__file__).parent / "golden"


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@pytest.fixture
def default_config(tmp_path):
    path = tmp_path / "gen.json"
    path.write_text("{}")
    return path


def test_parse_minsup():
    assert parse_minsup("10") == 10
    assert parse_minsup("0.005") * 1000 == 5
    with pytest.raises(ConfigError):
        parse_minsup("ten")


def test_gen_default(tmp_path, default_config):
    out = tmp_path / "data"
    assert main(["gen", "--config", str(default_config), "--out", str(out)]) == 0
    rows = _rows(out / "transactions.csv")
    assert len({r["patient_id"] for r in rows}) == 1000
    assert {r["disease"] for r in rows} == {"Heart-Block", "Hypertension", "Myocarditis", "Cardiac-Arrest", "Bradycardia"}
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["seed"] == 0 and manifest["command"] == "gen"
    assert set(manifest["outputs"]) == {"transactions.csv", "demographics.csv"}
    assert not list(out.glob(".*.tmp"))


def test_gen_rejects_zero_patients(tmp_path, capsys):
    cfg = tmp_path / "gen.json"
    cfg.write_text('{"patient_count": 0}')
    assert main(["gen", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert "patient_count" in capsys.readouterr().err


def test_gen_missing_config_is_io_error(tmp_path):
    assert main(["gen", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path / "o")]) == 3


def test_gen_deterministic(tmp_path, default_config):
    for d in ("a", "b"):
        assert main(["gen", "--config", str(default_config), "--out", str(tmp_path / d), "--seed", "77"]) == 0
    for name in ("transactions.csv", "demographics.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_gen_output_round_trips(tmp_path, default_config):
    main(["gen", "--config", str(default_config), "--out", str(tmp_path)])
    with open(tmp_path / "transactions.csv", newline="") as fh:
        table, report = parse_transactions(fh)
    assert table.total_patients == 1000
    assert report.malformed_rows == [] and report.duplicate_rows_dropped == 0


def test_mine_golden(tmp_path):
    out = tmp_path / "mined"
    code = main(["mine", "--input", str(GOLDEN / "tiny_transactions.csv"), "--minsup", "2", "--maxpass", "2",
                 "--out", str(out)])
    assert code == 0
    assert (out / "itemsets.csv").read_bytes() == (GOLDEN / "tiny_itemsets_expected.csv").read_bytes()
    assert (out / "rules.csv").read_bytes() == (GOLDEN / "tiny_rules_expected.csv").read_bytes()
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["diagnostics"]["ingest"]["duplicate_rows_dropped"] == 1
    assert manifest["config"]["resolved_minsup"] == 2


def test_mine_table5_row(tmp_path):
    table = from_profile([
        ({"Bradycardia", "Cardiac-Arrest"}, 26), ({"Bradycardia"}, 279), ({"Cardiac-Arrest"}, 510),
        ({"Hypertension"}, 185),
    ])
    src = tmp_path / "tx.csv"
    with open(src, "w", newline="") as fh:
        write_transactions(table, fh)
    assert main(["mine", "--input", str(src), "--minsup", "0.005", "--maxpass", "2", "--out", str(tmp_path)]) == 0
    rules = {(r["antecedent"], r["consequent"]): r for r in _rows(tmp_path / "rules.csv")}
    row = rules[("Bradycardia", "Cardiac-Arrest")]
    assert (row["support_count"], row["support_pct"], row["confidence_pct"]) == ("26", "2.60", "8.52")


def test_mine_maxpass_one(tmp_path):
    main(["mine", "--input", str(GOLDEN / "tiny_transactions.csv"), "--minsup", "1", "--maxpass", "1",
          "--out", str(tmp_path)])
    assert _rows(tmp_path / "rules.csv") == []
    assert {r["pass"] for r in _rows(tmp_path / "itemsets.csv")} == {"1"}


@pytest.mark.parametrize("flags", [["--minsup", "1.01"], ["--minsup", "0"], ["--minsup", "2", "--maxpass", "0"],
                                   ["--minsup", "2", "--min-conf", "2"]])
def test_mine_config_errors(tmp_path, flags):
    assert main(["mine", "--input", str(GOLDEN / "tiny_transactions.csv"), *flags, "--out", str(tmp_path)]) == 2


def test_mine_empty_dataset(tmp_path):
    src = tmp_path / "empty.csv"
    src.write_text("patient_id,disease\n")
    assert main(["mine", "--input", str(src), "--minsup", "0.1", "--out", str(tmp_path / "o")]) == 0
    assert (tmp_path / "o" / "itemsets.csv").read_text() == "pass,itemset,support_count,support_pct\n"


def test_mine_bad_header_and_missing_file(tmp_path):
    src = tmp_path / "bad.csv"
    src.write_text("id,dx\nP1,A\n")
    assert main(["mine", "--input", str(src), "--minsup", "1", "--out", str(tmp_path)]) == 2
    assert main(["mine", "--input", str(tmp_path / "missing.csv"), "--minsup", "1", "--out", str(tmp_path)]) == 3


def test_mine_reports_malformed_rows(tmp_path, capsys):
    src = tmp_path / "dirty.csv"
    src.write_text("patient_id,disease\nP1,A\nP2\nP3,B|C\n")
    assert main(["mine", "--input", str(src), "--minsup", "1", "--out", str(tmp_path / "o")]) == 0
    err = capsys.readouterr().err
    assert ":3: skipped malformed row" in err and ":4: skipped malformed row" in err


def _write(path, text):
    path.write_text(text)
    return str(path)


def test_stratify_by_age_target(tmp_path):
    tx = _write(tmp_path / "tx.csv", "patient_id,disease\nP1,Hypertension\nP1,Heart-Block\nP2,Hypertension\n"
                                       "P3,Hypertension\nP3,Heart-Block\nP4,Myocarditis\n")
    demo = _write(tmp_path / "demo.csv", "patient_id,age,sex\nP1,47,F\nP2,48,M\nP3,30,F\nP4,,F\n")
    code = main(["stratify", "--input", tx, "--demographics", demo, "--by", "age", "--age-bands",
                 "0:45,45:50,50:150", "--target", "Hypertension,Heart-Block", "--minsup", "1", "--maxpass", "2",
                 "--out", str(tmp_path / "o")])
    assert code == 0
    rows = [tuple(r.values()) for r in _rows(tmp_path / "o" / "stratified.csv")]
    assert rows == [
        ("0-45", "Hypertension -> Heart-Block", "1", "100.00", "100.00"),
        ("45-50", "Hypertension -> Heart-Block", "2", "50.00", "50.00"),
        ("50-150", "", "0", "", ""),
        ("unknown", "", "1", "", ""),
    ]


def test_stratify_by_sex_all_female(tmp_path):
    tx = _write(tmp_path / "tx.csv", "patient_id,disease\nP1,Bradycardia\nP1,Hypertension\nP2,Bradycardia\n"
                                       "P2,Hypertension\nP3,Hypertension\n")
    demo = _write(tmp_path / "demo.csv", "patient_id,age,sex\nP1,47,F\nP2,48,f\nP3,30,F\n")
    assert main(["stratify", "--input", tx, "--demographics", demo, "--by", "sex", "--minsup", "2",
                 "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "stratified.csv")
    assert [(r["stratum"], r["itemset"], r["confidence_pct"]) for r in rows] == [
        ("female", "Bradycardia -> Hypertension", "100.00"),
        ("female", "Hypertension -> Bradycardia", "66.67"),
        ("male", "", ""),
        ("other", "", ""),
        ("unknown", "", ""),
    ]


def test_stratify_without_demographic_rows(tmp_path):
    tx = _write(tmp_path / "tx.csv", "patient_id,disease\nP1,A\nP1,B\nP2,A\n")
    demo = _write(tmp_path / "demo.csv", "patient_id,age,sex\n")
    assert main(["stratify", "--input", tx, "--demographics", demo, "--by", "age", "--minsup", "1",
                 "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "stratified.csv")
    populated = {r["stratum"] for r in rows if r["patient_count"] != "0"}
    assert populated == {"unknown"}
    assert len({r["stratum"] for r in rows}) == 31


def test_stratify_target_never_frequent(tmp_path, capsys):
    tx = _write(tmp_path / "tx.csv", "patient_id,disease\nP1,A\nP1,B\nP2,A\n")
    demo = _write(tmp_path / "demo.csv", "patient_id,age,sex\nP1,40,F\nP2,41,M\n")
    assert main(["stratify", "--input", tx, "--demographics", demo, "--by", "sex", "--target", "A,B",
                 "--minsup", "5", "--out", str(tmp_path)]) == 0
    assert (tmp_path / "stratified.csv").read_text() == "stratum,itemset,patient_count,support_pct,confidence_pct\n"
    assert "no target itemset is frequent" in capsys.readouterr().err


def test_stratify_bad_flags(tmp_path):
    tx = _write(tmp_path / "tx.csv", "patient_id,disease\nP1,A\n")
    demo = _write(tmp_path / "demo.csv", "patient_id,age,sex\n")
    base = ["stratify", "--input", tx, "--demographics", demo, "--minsup", "1", "--out", str(tmp_path)]
    assert main([*base, "--by", "height"]) == 2
    assert main([*base, "--by", "age", "--age-bands", "0:40,50:150"]) == 2
    assert main([*base, "--by", "age", "--target", "A"]) == 2
