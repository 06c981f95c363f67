"""Search tests: indexing, interval queries against a linear-scan oracle,
and index persistence."""

import math
import os
import random

import pytest

from fmf.errors import CorruptIndex, IncompatibleBounds
from fmf.reader import parse_document
from fmf.search import (
    IndexEntry,
    index_document,
    load_index,
    make_index,
    query,
    save_index,
)
from fmf.units import QuantityValue, default_registry, feature_vector

from helpers import random_quantity_corpus

FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


def _fixture_doc(name):
    with open(os.path.join(FIXTURES, name), "rb") as fh:
        doc, diags = parse_document(fh.read())
    assert not diags
    return doc


@pytest.fixture(scope="module")
def reg():
    return default_registry()


def test_index_solarcell_fixture(reg):
    doc = _fixture_doc("solarcell.fmf")
    entries = index_document("solarcell.fmf", doc)
    by_key = {e.key: e for e in entries}
    area = by_key["pixel area"]
    assert area.fv.q0 == 5.3e-6
    assert area.fv.exponents == (2, 0, 0, 0, 0, 0, 0)
    assert by_key["illumination intensity"].fv.q0 == 1000.0


def test_tables_not_indexed(reg):
    doc = _fixture_doc("faraday.fmf")
    entries = index_document("faraday.fmf", doc)
    sections = {e.section for e in entries}
    assert all(not s.startswith("*data") for s in sections)
    assert all(s != "*table definitions" for s in sections)


def test_arbitrary_and_monetary_skipped(reg):
    data = (b"; -*- fmf-version: 1.0 -*-\n[*reference]\ntitle: t\n"
            b"[params]\nsignal: 3.0 a.u.\nprice: 19.99 EUR/m**2\n"
            b"length: 2.0 m\n"
            b"[*data definitions]\nx: X\n[*data]\n1\n")
    doc, _ = parse_document(data)
    notices = []
    entries = index_document("f.fmf", doc, notices)
    assert [e.key for e in entries] == ["length"]
    assert len(notices) == 2


def test_list_elements_indexed(reg):
    data = (b"; -*- fmf-version: 1.0 -*-\n[*reference]\ntitle: t\n"
            b"[params]\nreadings: 1.0 V, 2.0 V\n"
            b"[*data definitions]\nx: X\n[*data]\n1\n")
    doc, _ = parse_document(data)
    entries = index_document("f.fmf", doc)
    assert [e.key for e in entries] == ["readings[0]", "readings[1]"]


def _table3_index(reg):
    quantities = [
        ("W", QuantityValue(23.0, reg.parse_unit_expr("kJ"))),
        ("E", QuantityValue(10.0, reg.parse_unit_expr("keV"))),
        ("H", QuantityValue(10.0, reg.parse_unit_expr("kcal"))),
        ("P", QuantityValue(0.01, reg.parse_unit_expr("MW"))),
    ]
    return make_index(IndexEntry("t.fmf", "meta", key, feature_vector(q))
                      for key, q in quantities)


def test_energy_interval_query(reg):
    index = _table3_index(reg)
    lo = QuantityValue(1.0, reg.parse_unit_expr("kJ"))
    hi = QuantityValue(1.0, reg.parse_unit_expr("MJ"))
    hits = query(index, "J", lo, hi, reg)
    assert {e.key for e in hits} == {"W", "H"}
    # results ordered by measure
    assert [e.key for e in hits] == ["W", "H"]


def test_query_bound_checks(reg):
    index = _table3_index(reg)
    j = reg.parse_unit_expr("J")
    kj = QuantityValue(1.0, reg.parse_unit_expr("kJ"))
    meter = QuantityValue(1.0, reg.resolve_name("m"))
    with pytest.raises(IncompatibleBounds):
        query(index, "J", meter, kj, reg)
    with pytest.raises(IncompatibleBounds):
        query(index, "m", kj, kj, reg)
    with pytest.raises(IncompatibleBounds):
        query(index, "J", QuantityValue(2.0, kj.unit), kj, reg)
    with pytest.raises(IncompatibleBounds):
        query(index, "EUR", QuantityValue(1.0, reg.resolve_name("EUR")),
              QuantityValue(2.0, reg.resolve_name("EUR")), reg)


def test_interval_is_closed(reg):
    index = _table3_index(reg)
    w = QuantityValue(23.0, reg.parse_unit_expr("kJ"))
    hits = query(index, "J", w, w, reg)
    assert [e.key for e in hits] == ["W"]


def test_query_against_linear_scan_oracle(reg):
    rng = random.Random(7)
    for _ in range(60):
        records = random_quantity_corpus(rng, reg)
        index = make_index(
            IndexEntry(p, s, k, feature_vector(q)) for p, s, k, q in records)
        # bounds framed around one of the corpus units
        _, _, _, probe = rng.choice(records)
        span = abs(probe.si_value) or 1.0
        lo_v, hi_v = sorted((rng.uniform(-2, 2) * span, rng.uniform(-2, 2) * span))
        lo = QuantityValue(lo_v, probe.unit.__class__(1, probe.unit.dim))
        hi = QuantityValue(hi_v, lo.unit)
        hits = query(index, probe.unit.dim, lo, hi, reg)
        expected = {(p, s, k) for p, s, k, q in records
                    if q.dim.si_exponents == probe.dim.si_exponents
                    and lo_v <= q.si_value <= hi_v}
        assert {(e.path, e.section, e.key) for e in hits} == expected


# --- persistence ---------------------------------------------------------------

def test_save_load_roundtrip(tmp_path, reg):
    doc = _fixture_doc("solarcell.fmf")
    index = make_index(index_document("solarcell.fmf", doc))
    path = tmp_path / "idx"
    save_index(index, path)
    assert load_index(path) == index


def test_load_rejects_bad_magic(tmp_path):
    path = tmp_path / "idx"
    path.write_text("NOT AN INDEX\n")
    with pytest.raises(CorruptIndex):
        load_index(path)


def test_load_rejects_short_lines(tmp_path):
    path = tmp_path / "idx"
    path.write_text("FMFIDX 1\na\tb\tc\n")
    with pytest.raises(CorruptIndex):
        load_index(path)


def test_load_rejects_bad_exponents(tmp_path):
    path = tmp_path / "idx"
    exps = "\t".join(["1/1"] * 6 + ["x/y"])
    path.write_text(f"FMFIDX 1\nf\ts\tk\t1.0\t{exps}\n")
    with pytest.raises(CorruptIndex):
        load_index(path)


def test_load_missing_file(tmp_path):
    with pytest.raises(CorruptIndex):
        load_index(tmp_path / "absent")
