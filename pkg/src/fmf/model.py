"""In-memory document model: headline, ordered sections of key:value items,
column specifications and resolved tables, plus structural validation.

Everything is immutable after construction and safe to share across threads.
Validation never raises; problems come back as Diagnostic records.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .errors import DanglingSymbol, MissingCounterpart
from .values import ValueNode

DATA_PREFIX = "*data"
DATA_DEF_PREFIX = "*data definitions"
TABLE_DEFS = "*table definitions"
REFERENCE = "*reference"

SUPPORTED_VERSION = "1.0"


@dataclass(frozen=True)
class DelimiterSpec:
    kind: str  # "tab" | "whitespace-run" | "semicolon" | "single-char"
    char: Optional[str] = None  # single-char only

    def __post_init__(self):
        if self.kind == "single-char" and (self.char is None or self.char.isalnum()):
            raise ValueError("single-char delimiter must not be a letter or digit")


TAB = DelimiterSpec("tab")


@dataclass(frozen=True)
class HeadlineParams:
    fmf_version: str
    coding: str = "utf-8"
    delimiter: DelimiterSpec = TAB
    comment_char: str = ";"
    extra: tuple = ()  # unknown headline keys, preserved verbatim

    def __post_init__(self):
        if self.comment_char not in (";", "#"):
            raise ValueError("comment char must be ';' or '#'")


@dataclass(frozen=True)
class Item:
    key: str
    raw_value: str = field(compare=False, default="")
    value: ValueNode = None
    line: int = field(compare=False, default=0)


@dataclass(frozen=True)
class Section:
    name: str  # without brackets
    items: tuple = ()  # of Item
    rows: tuple = ()  # of tuple of ValueNode, *data sections only
    comments: tuple = ()  # (anchor_index, text): comment before n-th entry
    line: int = field(compare=False, default=0)

    @property
    def reserved(self) -> bool:
        return self.name.startswith("*")


@dataclass(frozen=True)
class ErrorSpec:
    kind: str  # "constant" | "column-ref"
    magnitude: Optional[float] = None  # constant only
    unit_text: Optional[str] = None  # constant only
    ref_symbol: Optional[str] = None  # column-ref only


@dataclass(frozen=True)
class ColumnSpec:
    name: str
    symbol: str  # LaTeX notation, verbatim
    dependencies: tuple = ()
    unit_text: Optional[str] = None
    error: Optional[ErrorSpec] = None


@dataclass(frozen=True)
class Table:
    name: str
    symbol: str  # empty for single-table files
    columns: tuple = ()  # of ColumnSpec
    rows: tuple = ()  # of tuple of ValueNode


def resolve_cell(table: Table, row_index: int, col_index: int,
                 registry=None):
    """A table cell as a quantity with its uncertainty binding resolved:
    the column unit applies, constant errors are converted to SI, and
    error-column references pull the per-row value from the linked column.

    Returns None for non-numeric cells (e.g. text columns).
    """
    from .units import LinearUnit, QuantityValue, default_registry, scale_mul
    from fractions import Fraction

    registry = registry or default_registry()
    col = table.columns[col_index]
    cell = table.rows[row_index][col_index]
    if cell.tag not in ("integer", "real"):
        return None
    value = float(cell.payload.value)
    if col.unit_text is not None:
        unit = registry.parse_unit_expr(col.unit_text)
    else:
        unit = LinearUnit(Fraction(1), source_text="")
    uncertainty = None
    error = col.error
    if error is not None:
        if error.kind == "constant":
            eunit = (registry.parse_unit_expr(error.unit_text)
                     if error.unit_text else unit)
            uncertainty = abs(scale_mul(error.magnitude, eunit.si_scale))
        else:
            for j, other in enumerate(table.columns):
                if other.symbol == error.ref_symbol:
                    ref_cell = table.rows[row_index][j]
                    if ref_cell.tag in ("integer", "real"):
                        eunit = (registry.parse_unit_expr(other.unit_text)
                                 if other.unit_text else unit)
                        uncertainty = abs(scale_mul(
                            float(ref_cell.payload.value), eunit.si_scale))
                    break
    return QuantityValue(value, unit, uncertainty, col.symbol)


@dataclass(frozen=True)
class Diagnostic:
    severity: str  # "error" | "warning"
    line: int
    code: str
    message: str

    def __str__(self):
        return f"{self.severity}:{self.line}:{self.code}: {self.message}"


@dataclass(frozen=True)
class Document:
    headline: HeadlineParams
    sections: tuple = ()  # of Section
    tables: tuple = ()  # derived view, populated by the reader

    def section(self, name: str) -> Optional[Section]:
        name = name.strip()
        for sec in self.sections:
            if sec.name == name:
                return sec
        return None


def get_item(doc: Document, section: str, key: str) -> Optional[Item]:
    """Exact match on trimmed section name and key; absent is a value."""
    sec = doc.section(section)
    if sec is None:
        return None
    key = key.strip()
    for item in sec.items:
        if item.key == key:
            return item
    return None


def _data_suffix(name: str, prefix: str) -> Optional[str]:
    """The table symbol of a "*data[: X]" style section name, '' if bare."""
    if name == prefix:
        return ""
    if name.startswith(prefix + ":"):
        return name[len(prefix) + 1:].strip()
    return None


def pair_tables(doc: Document, column_specs=None) -> tuple:
    """Relate "*data definitions" and "*data" sections into Table objects.

    column_specs maps section name to a tuple of ColumnSpec (built by the
    reader); without it, tables carry empty column lists.
    """
    column_specs = column_specs or {}
    defs = {}
    data = {}
    for sec in doc.sections:
        sym = _data_suffix(sec.name, DATA_DEF_PREFIX)
        if sym is not None:
            defs[sym] = sec
            continue
        sym = _data_suffix(sec.name, DATA_PREFIX)
        if sym is not None and not sec.name.startswith(TABLE_DEFS):
            data[sym] = sec

    table_defs = doc.section(TABLE_DEFS)
    if table_defs is None:
        order = [("", "")]
        if set(defs) | set(data) not in ({""}, set()):
            extra = (set(defs) | set(data)) - {""}
            if extra:
                raise DanglingSymbol(
                    f"table symbols {sorted(extra)} without a *table definitions section")
        if not defs and not data:
            return ()
    else:
        order = [(item.key, item.raw_value.strip()) for item in table_defs.items]
        declared = {sym for _, sym in order}
        for sym in set(defs) | set(data):
            if sym not in declared:
                raise DanglingSymbol(f"table symbol {sym!r} is not declared")

    tables = []
    for name, sym in order:
        if sym not in defs:
            raise MissingCounterpart(f"no '*data definitions' for table {sym!r}")
        if sym not in data:
            raise MissingCounterpart(f"no '*data' for table {sym!r}")
        cols = column_specs.get(defs[sym].name, ())
        tables.append(Table(name, sym, tuple(cols), data[sym].rows))
    return tuple(tables)


def _version_tuple(text: str):
    try:
        return tuple(int(p) for p in text.strip().split("."))
    except ValueError:
        return None


def validate(doc: Document, registry=None) -> list:
    """Structural validation; returns diagnostics sorted by (line, code)."""
    from .units import default_registry
    from .errors import UnitError

    registry = registry or default_registry()
    diags = []

    def err(line, code, message):
        diags.append(Diagnostic("error", line, code, message))

    def warn(line, code, message):
        diags.append(Diagnostic("warning", line, code, message))

    version = _version_tuple(doc.headline.fmf_version)
    if version is None:
        err(1, "BAD_VERSION", f"unparseable fmf-version {doc.headline.fmf_version!r}")
    elif version > _version_tuple(SUPPORTED_VERSION):
        warn(1, "VERSION_NEWER",
             f"fmf-version {doc.headline.fmf_version} is newer than supported "
             f"{SUPPORTED_VERSION}; proceeding for backwards compatibility")

    names = set()
    for sec in doc.sections:
        if sec.name in names:
            err(sec.line, "DUPLICATE_SECTION", f"duplicate section [{sec.name}]")
        names.add(sec.name)
        keys = set()
        for item in sec.items:
            if item.key in keys:
                err(item.line, "DUPLICATE_KEY",
                    f"duplicate key {item.key!r} in section [{sec.name}]")
            keys.add(item.key)

    if doc.section(REFERENCE) is None:
        err(0, "MISSING_SECTION", "mandatory section [*reference] is missing")

    has_pair = any(_data_suffix(s.name, DATA_DEF_PREFIX) is not None
                   for s in doc.sections)
    has_data = any(_data_suffix(s.name, DATA_PREFIX) is not None
                   for s in doc.sections)
    if not (has_pair and has_data):
        err(0, "MISSING_SECTION",
            "at least one *data definitions / *data pair is required")

    for table in doc.tables:
        symbols = {c.symbol for c in table.columns}
        for col in table.columns:
            if col.unit_text is not None:
                try:
                    registry.parse_unit_expr(col.unit_text)
                except UnitError:
                    err(0, "UNKNOWN_UNIT",
                        f"column {col.symbol!r}: unresolvable unit {col.unit_text!r}")
            error = col.error
            if error is not None:
                if error.kind == "column-ref" and error.ref_symbol not in symbols:
                    err(0, "BAD_ERROR_REF",
                        f"column {col.symbol!r}: error column {error.ref_symbol!r} "
                        f"not found in table {table.symbol or table.name!r}")
                if error.kind == "constant" and error.unit_text is not None:
                    try:
                        registry.parse_unit_expr(error.unit_text)
                    except UnitError:
                        err(0, "UNKNOWN_UNIT",
                            f"column {col.symbol!r}: unresolvable error unit "
                            f"{error.unit_text!r}")
        width = len(table.columns)
        for i, row in enumerate(table.rows):
            if width and len(row) != width:
                err(0, "ROW_WIDTH",
                    f"table {table.symbol or table.name!r} row {i + 1} has "
                    f"{len(row)} cells, expected {width}")

    diags.sort(key=lambda d: (d.line, d.code))
    return diags
