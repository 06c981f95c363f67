"""Command line tests covering every subcommand and exit code."""

import io
import json
import os

import pytest

from fmf.cli import EXIT_INVALID, EXIT_IO, EXIT_OK, EXIT_USAGE, run

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")
SOLAR = os.path.join(FIXTURES, "solarcell.fmf")
FARADAY = os.path.join(FIXTURES, "faraday.fmf")

TABLE3 = """; -*- fmf-version: 1.0 -*-
[*reference]
title: classification example
[quantities]
work: W = 23 kJ
energy: E = 10 keV
calorific value: H = 10 kcal
power: P = 0.01 MW
[*data definitions]
x: X
[*data]
1
"""


def _run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = run(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def test_validate_ok():
    code, out, err = _run("validate", SOLAR, FARADAY)
    assert code == EXIT_OK
    assert f"{SOLAR}: ok" in out and f"{FARADAY}: ok" in out


def test_validate_reports_errors(tmp_path):
    bad = tmp_path / "bad.fmf"
    bad.write_bytes(b"; -*- fmf-version: 1.0 -*-\n[setup]\nkey: 1\n")
    code, out, err = _run("validate", str(bad))
    assert code == EXIT_INVALID
    assert "MISSING_SECTION" in err


def test_validate_strict_escalates_warnings(tmp_path):
    warn = tmp_path / "warn.fmf"
    warn.write_bytes(b"; -*- fmf-version: 1.0 -*-\n[*reference]\ntitle: t\n"
                     b"[*data]\n1\n[*data definitions]\nx: X\n")
    code, _, _ = _run("validate", str(warn))
    assert code == EXIT_OK
    code, _, err = _run("--strict", "validate", str(warn))
    assert code == EXIT_INVALID
    assert "DATA_BEFORE_DEFINITIONS" in err


def test_missing_file_is_io_error():
    code, _, err = _run("validate", "/no/such/file.fmf")
    assert code == EXIT_IO


def test_headline_abort_is_io_error(tmp_path):
    plain = tmp_path / "plain.txt"
    plain.write_bytes(b"not an fmf file\n")
    code, _, err = _run("validate", str(plain))
    assert code == EXIT_IO


def test_usage_error():
    code, _, _ = _run("frobnicate")
    assert code == EXIT_USAGE
    code, _, _ = _run("query", "idx", "--dim", "J")  # missing bounds
    assert code == EXIT_USAGE


def test_describe():
    code, out, _ = _run("describe", FARADAY)
    assert code == EXIT_OK
    assert "table analysis (A): 2 rows" in out
    assert "table primary (P): 6 rows" in out
    assert "fmf-version: 1.0" in out


def test_export_csv_materializes_constant_errors():
    code, out, _ = _run("export", FARADAY, "--table", "P", "--format", "csv")
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[0] == ("t [min],t_err [s],V_{H_2} [cm^3],V_{H_2}_err [cm^3],"
                        "V_{O_2} [cm^3],V_{O_2}_err [cm^3]")
    assert lines[1] == "0,5.0,0.0,0.2,0.0,0.2"
    assert len(lines) == 7


def test_export_records():
    code, out, _ = _run("export", FARADAY, "--table", "A", "--format", "records")
    assert code == EXIT_OK
    record = json.loads(out)
    assert record["table"] == {"name": "analysis", "symbol": "A"}
    assert [c["symbol"] for c in record["columns"]][:2] == ["gas", "N_e"]
    assert record["rows"][0][0] == "H_2"
    assert record["rows"][0][1] == 2
    assert "measurement" in record["metadata"]


def test_export_unknown_table():
    code, _, err = _run("export", FARADAY, "--table", "Z")
    assert code == EXIT_USAGE
    assert "no table" in err


def test_index_and_query(tmp_path):
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    (corpus / "table3.fmf").write_text(TABLE3)
    idx = tmp_path / "idx"
    code, out, _ = _run("index", str(corpus), "-o", str(idx))
    assert code == EXIT_OK
    assert "indexed 4 quantities from 1 files" in out

    code, out, _ = _run("query", str(idx), "--dim", "J",
                        "--min", "1 kJ", "--max", "1 MJ")
    assert code == EXIT_OK
    lines = out.splitlines()
    assert len(lines) == 2
    assert lines[0].split("\t")[2] == "work"
    assert lines[1].split("\t")[2] == "calorific value"


def test_query_incompatible_bounds(tmp_path):
    corpus = tmp_path / "corpus"
    corpus.mkdir()
    (corpus / "table3.fmf").write_text(TABLE3)
    idx = tmp_path / "idx"
    _run("index", str(corpus), "-o", str(idx))
    code, _, err = _run("query", str(idx), "--dim", "J",
                        "--min", "1 m", "--max", "2 m")
    assert code == EXIT_USAGE


def test_query_corrupt_index(tmp_path):
    idx = tmp_path / "idx"
    idx.write_text("garbage\n")
    code, _, err = _run("query", str(idx), "--dim", "J",
                        "--min", "1 J", "--max", "2 J")
    assert code == EXIT_USAGE


def test_fmt_stdout_and_in_place(tmp_path):
    work = tmp_path / "copy.fmf"
    work.write_bytes(open(SOLAR, "rb").read())
    code, out, _ = _run("fmt", str(work), "--stdout")
    assert code == EXIT_OK
    assert out.startswith("; -*- fmf-version: 1.0 -*-")

    code, _, _ = _run("fmt", str(work))
    assert code == EXIT_OK
    once = work.read_bytes()
    code, _, _ = _run("fmt", str(work))
    assert work.read_bytes() == once  # idempotent rewrite


def test_fmt_crlf(tmp_path):
    work = tmp_path / "copy.fmf"
    work.write_bytes(open(SOLAR, "rb").read())
    code, _, _ = _run("fmt", str(work), "--crlf")
    assert code == EXIT_OK
    assert b"\r\n" in work.read_bytes()


def test_currency_table_option(tmp_path):
    rates = tmp_path / "rates.tsv"
    rates.write_text("USD\t1.25\n")
    doc = tmp_path / "price.fmf"
    doc.write_bytes(b"; -*- fmf-version: 1.0 -*-\n[*reference]\ntitle: t\n"
                    b"[shop]\nprice: 10 USD\n"
                    b"[*data definitions]\nx: X\n[*data]\n1\n")
    code, _, err = _run("validate", str(doc))
    assert code == EXIT_OK  # unknown units in metadata stay text, still valid
    code, out, _ = _run("--currency-table", str(rates), "describe", str(doc))
    assert code == EXIT_OK


def test_lenient_prefixes_option(tmp_path):
    doc = tmp_path / "press.fmf"
    doc.write_bytes(b"; -*- fmf-version: 1.0 -*-\n[*reference]\ntitle: t\n"
                    b"[*data definitions]\np: P [hPa]\n[*data]\n1013.25\n")
    code, _, err = _run("validate", str(doc))
    assert code == EXIT_INVALID  # strict tables reject hecto
    code, _, _ = _run("--lenient-prefixes", "validate", str(doc))
    assert code == EXIT_OK
