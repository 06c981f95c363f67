"""Feature-vector index over FMF metadata and dimension + interval queries.

Every quantity-valued item in the metadata sections becomes one entry of
(measure in base SI, seven dimension exponents).  A query fixes the seven
exponents exactly (rational equality, no tolerance) and intersects with a
closed interval of SI measures.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from .errors import CorruptIndex, IncompatibleBounds
from .model import DATA_DEF_PREFIX, DATA_PREFIX, TABLE_DEFS, Document
from .units import (
    AffineUnit,
    DimensionVector,
    FeatureVector,
    QuantityValue,
    UnitRegistry,
    default_registry,
    feature_vector,
)
from .values import LIST, QUANTITY

MAGIC = "FMFIDX 1"


@dataclass(frozen=True)
class IndexEntry:
    path: str
    section: str
    key: str
    fv: FeatureVector
    symbol: Optional[str] = field(default=None, compare=False)


@dataclass(frozen=True)
class Index:
    entries: tuple = ()
    built_at: Optional[str] = field(default=None, compare=False)


def _sort_key(entry: IndexEntry):
    return (tuple(entry.fv.exponents), entry.fv.q0, entry.path,
            entry.section, entry.key)


def make_index(entries, built_at: Optional[str] = None) -> Index:
    return Index(tuple(sorted(entries, key=_sort_key)), built_at)


def _is_metadata_section(name: str) -> bool:
    if name == TABLE_DEFS:
        return False
    if name == DATA_PREFIX or name.startswith(DATA_PREFIX + ":"):
        return False
    if name == DATA_DEF_PREFIX or name.startswith(DATA_DEF_PREFIX + ":"):
        return False
    return True


def _entry_for(path, section, key, q: QuantityValue, notices):
    if not isinstance(q.unit, AffineUnit) and q.unit.arbitrary:
        notices.append(f"{path}:[{section}] {key}: arbitrary units, skipped")
        return None
    if q.dim.currency_exponent != 0:
        notices.append(f"{path}:[{section}] {key}: monetary quantity, skipped")
        return None
    if not math.isfinite(q.si_value):
        notices.append(f"{path}:[{section}] {key}: non-finite measure, skipped")
        return None
    return IndexEntry(path, section, key, feature_vector(q), q.symbol)


def index_document(path: str, doc: Document, notices: Optional[list] = None):
    """One entry per quantity-valued metadata item; quantities inside lists
    get the key suffixed with their ordinal.  Tables are data, not metadata,
    and are not indexed."""
    notices = notices if notices is not None else []
    entries = []
    for sec in doc.sections:
        if not _is_metadata_section(sec.name):
            continue
        for item in sec.items:
            node = item.value
            if node is None:
                continue
            if node.tag == QUANTITY:
                entry = _entry_for(path, sec.name, item.key, node.payload, notices)
                if entry:
                    entries.append(entry)
            elif node.tag == LIST:
                for i, el in enumerate(node.payload):
                    if el.tag == QUANTITY:
                        entry = _entry_for(path, sec.name, f"{item.key}[{i}]",
                                           el.payload, notices)
                        if entry:
                            entries.append(entry)
    return entries


def _dim_exponents(dim: Union[DimensionVector, str],
                   registry: Optional[UnitRegistry] = None):
    if isinstance(dim, str):
        registry = registry or default_registry()
        unit = registry.parse_unit_expr(dim)
        dim = unit.dim
    if dim.currency_exponent != 0:
        raise IncompatibleBounds("cannot search a monetary dimension")
    return dim.si_exponents


def query(index: Index, dim, lo: QuantityValue, hi: QuantityValue,
          registry: Optional[UnitRegistry] = None):
    """Entries whose exponents equal dim's and whose SI measure lies in the
    closed interval [lo, hi]; ordered by measure, ties broken by path."""
    exponents = _dim_exponents(dim, registry)
    if tuple(lo.dim.si_exponents) != tuple(exponents) or \
            tuple(hi.dim.si_exponents) != tuple(exponents):
        raise IncompatibleBounds("bounds are not compatible with the queried dimension")
    lo_si, hi_si = lo.si_value, hi.si_value
    if lo_si > hi_si:
        raise IncompatibleBounds("lower bound exceeds upper bound")
    hits = [e for e in index.entries
            if tuple(e.fv.exponents) == tuple(exponents)
            and lo_si <= e.fv.q0 <= hi_si]
    hits.sort(key=lambda e: (e.fv.q0, e.path, e.section, e.key))
    return hits


# ---------------------------------------------------------------------------
# persistence: line records, tab separated
# ---------------------------------------------------------------------------

def save_index(index: Index, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(MAGIC + "\n")
        for e in index.entries:
            exps = "\t".join(f"{x.numerator}/{x.denominator}"
                             for x in e.fv.exponents)
            fh.write(f"{e.path}\t{e.section}\t{e.key}\t{e.fv.q0!r}\t{exps}\n")


def load_index(path) -> Index:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise CorruptIndex(str(exc))
    if not lines or lines[0] != MAGIC:
        raise CorruptIndex("bad magic line")
    entries = []
    for n, line in enumerate(lines[1:], start=2):
        if not line:
            continue
        fields = line.split("\t")
        if len(fields) != 11:
            raise CorruptIndex(f"line {n}: expected 11 fields, got {len(fields)}")
        fpath, section, key, q0_text = fields[:4]
        try:
            q0 = float(q0_text)
            exps = tuple(Fraction(int(num), int(den))
                         for num, den in (f.split("/") for f in fields[4:]))
        except (ValueError, ZeroDivisionError) as exc:
            raise CorruptIndex(f"line {n}: {exc}")
        entries.append(IndexEntry(fpath, section, key, FeatureVector(q0, exps)))
    return make_index(entries)


def build_index(paths, registry: Optional[UnitRegistry] = None,
                notices: Optional[list] = None) -> Index:
    """Parse and index a collection of FMF files."""
    from .reader import parse_path

    entries = []
    for path in paths:
        doc, _ = parse_path(path, registry)
        entries.extend(index_document(str(path), doc, notices))
    return make_index(entries)


def collect_fmf_files(root):
    """All *.fmf files under a directory, sorted for determinism."""
    found = []
    for dirpath, _, filenames in os.walk(root):
        for name in filenames:
            if name.endswith(".fmf"):
                found.append(os.path.join(dirpath, name))
    return sorted(found)
