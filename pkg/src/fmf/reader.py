"""Bytes-to-Document pipeline.

Headline sniffing fixes the comment character, coding and delimiter for the
rest of the file.  Line classification depends on section context: rows only
exist inside "*data" sections, continuations only inside an open
triple-quoted value.  Parsing is fail-safe: apart from a missing headline or
an unsupported coding, every problem degrades to a diagnostic and a best
effort Document is still returned.
"""

from __future__ import annotations

import codecs
import re
from typing import Optional

from .errors import (
    BadColumnSpec,
    BadDelimiter,
    DanglingSymbol,
    MissingCounterpart,
    NoHeadline,
    UnknownCoding,
)
from .model import (
    ColumnSpec,
    DelimiterSpec,
    Diagnostic,
    Document,
    ErrorSpec,
    HeadlineParams,
    Item,
    Section,
    TAB,
    DATA_DEF_PREFIX,
    DATA_PREFIX,
    pair_tables,
)
from .units import UnitRegistry, default_registry
from .values import ValueNode, parse_value

SUPPORTED_CODINGS = ("utf-8", "cp1252")

_HEADLINE_RE = re.compile(r"([;#])\s*-\*-\s*(.*?)\s*-\*-\s*$")


def _make_delimiter(token: str) -> DelimiterSpec:
    if token in ("\\t", "\t", "tab"):
        return TAB
    if token == "whitespace":
        return DelimiterSpec("whitespace-run")
    if token == "semicolon":
        return DelimiterSpec("semicolon")
    if len(token) == 1 and not token.isalnum():
        return DelimiterSpec("single-char", token)
    raise BadDelimiter(f"unrecognized delimiter token {token!r}")


def sniff_headline(first_line: bytes, codings=SUPPORTED_CODINGS,
                   diagnostics=None) -> HeadlineParams:
    """Decode and interpret the Emacs-style headline comment.

    With a diagnostics list, a bad delimiter token degrades to a warning
    and the tab default; without one it raises BadDelimiter.
    """
    try:
        text = first_line.decode("ascii", errors="strict")
    except UnicodeDecodeError:
        # the headline is ASCII by construction; tolerate stray high bytes
        text = first_line.decode("latin-1")
    m = _HEADLINE_RE.match(text.strip())
    if not m:
        raise NoHeadline(f"first line is not an FMF headline: {text.strip()!r}")
    comment_char, body = m.group(1), m.group(2)
    version = None
    coding = "utf-8"
    delimiter = TAB
    extra = []
    for part in body.split(";"):
        part = part.strip()
        if not part:
            continue
        key, _, value = part.partition(":")
        key, value = key.strip(), value.strip()
        if key == "fmf-version":
            version = value
        elif key == "coding":
            coding = value.lower()
        elif key == "delimiter":
            try:
                delimiter = _make_delimiter(value)
            except BadDelimiter:
                if diagnostics is None:
                    raise
                diagnostics.append(Diagnostic(
                    "warning", 1, "BAD_DELIMITER",
                    f"unrecognized delimiter token {value!r}; using tab"))
        else:
            extra.append((key, value))
    if version is None:
        raise NoHeadline("headline does not declare fmf-version")
    if coding not in codings:
        raise UnknownCoding(f"unsupported coding {coding!r}")
    try:
        codecs.lookup(coding)
    except LookupError:
        raise UnknownCoding(f"unknown coding {coding!r}")
    return HeadlineParams(version, coding, delimiter, comment_char, tuple(extra))


def split_row(text: str, delimiter: DelimiterSpec):
    """Split a data line into trimmed cell strings."""
    if delimiter.kind == "tab":
        cells = text.split("\t")
    elif delimiter.kind == "semicolon":
        cells = text.split(";")
    elif delimiter.kind == "single-char":
        cells = text.split(delimiter.char)
    else:  # whitespace-run: maximal runs, never empty cells
        cells = [c for c in re.split(r"[ \t]+", text.strip()) if c]
        return cells
    return [c.strip() for c in cells]


# ---------------------------------------------------------------------------
# column specifications
# ---------------------------------------------------------------------------

def _scan_top_level(text: str, needles):
    """Positions of needle strings outside (), [] and {} nesting."""
    depth = 0
    hits = []
    i = 0
    while i < len(text):
        ch = text[i]
        if ch in "([{":
            depth += 1
        elif ch in ")]}":
            depth -= 1
        elif depth == 0:
            for needle in needles:
                if text.startswith(needle, i):
                    hits.append((i, needle))
                    i += len(needle) - 1
                    break
        i += 1
    return hits


def _take_bracket_unit(text: str):
    """Split "SYM [unit]" -> (sym_part, unit_text or None)."""
    text = text.strip()
    if text.endswith("]"):
        depth = 0
        for i in range(len(text) - 1, -1, -1):
            if text[i] == "]":
                depth += 1
            elif text[i] == "[":
                depth -= 1
                if depth == 0:
                    return text[:i].strip(), text[i + 1:-1].strip()
    return text, None


_NUM_RE = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?$")


def parse_column_spec(name: str, value: str) -> ColumnSpec:
    """Grammar: SYMBOL [ "(" deps ")" ] [ "[" unit "]" ]
    [ ("+-"|"\\pm") (NUMBER | SYMBOL) [ "[" unit "]" ] ].

    A unit bracketed after the error applies to the error; if it is the only
    unit present it applies to the column as well.
    """
    value = value.strip()
    if not value:
        raise BadColumnSpec("empty column specification")

    hits = _scan_top_level(value, ("\\pm", "+-"))
    error_part = None
    if hits:
        pos, needle = hits[0]
        error_part = value[pos + len(needle):].strip()
        value = value[:pos].strip()

    sym_part, unit_text = _take_bracket_unit(value)

    deps = ()
    if sym_part.endswith(")"):
        depth = 0
        for i in range(len(sym_part) - 1, -1, -1):
            if sym_part[i] == ")":
                depth += 1
            elif sym_part[i] == "(":
                depth -= 1
                if depth == 0:
                    inner = sym_part[i + 1:-1]
                    deps = tuple(d.strip() for d in inner.split(","))
                    sym_part = sym_part[:i].strip()
                    break
    symbol = sym_part.strip()
    if not symbol:
        raise BadColumnSpec(f"column spec {value!r} has no symbol")

    error = None
    if error_part is not None:
        if not error_part:
            raise BadColumnSpec("dangling error sign in column spec")
        err_body, err_unit = _take_bracket_unit(error_part)
        if unit_text is None and err_unit is not None:
            # the only unit in the spec applies to column and error alike
            unit_text = err_unit
        if _NUM_RE.fullmatch(err_body.strip()):
            error = ErrorSpec("constant", float(err_body),
                              err_unit if err_unit is not None else unit_text)
        else:
            error = ErrorSpec("column-ref", ref_symbol=err_body.strip())

    return ColumnSpec(name, symbol, deps, unit_text, error)


# ---------------------------------------------------------------------------
# document assembly
# ---------------------------------------------------------------------------

_TRIPLES = ("'''", '"""')


def _open_triple(value: str) -> Optional[str]:
    """The triple quote opened but not closed on this line, if any."""
    stripped = value.lstrip()
    for q in _TRIPLES:
        if stripped.startswith(q) and stripped.count(q) == 1:
            return q
    return None


class _SectionBuilder:
    def __init__(self, name, line):
        self.name = name
        self.line = line
        self.items = []
        self.raw_rows = []  # (line_no, text)
        self.comments = []

    def is_data(self) -> bool:
        return (self.name == DATA_PREFIX or self.name.startswith(DATA_PREFIX + ":")) \
            and not self.name.startswith(DATA_DEF_PREFIX)

    def anchor(self) -> int:
        return len(self.raw_rows) if self.is_data() else len(self.items)


def parse_document(data: bytes,
                   registry: Optional[UnitRegistry] = None):
    """Parse FMF bytes into (Document, diagnostics).

    Raises NoHeadline or UnknownCoding; everything else is a diagnostic.
    """
    registry = registry or default_registry()
    diagnostics = []

    if not data.strip():
        raise NoHeadline("empty input")

    first_line = re.split(rb"\r\n|\r|\n", data, maxsplit=1)[0]
    headline = sniff_headline(first_line, diagnostics=diagnostics)

    try:
        text = data.decode(headline.coding)
    except UnicodeDecodeError:
        text = data.decode(headline.coding, errors="replace")
        diagnostics.append(Diagnostic(
            "warning", 0, "BAD_ENCODING",
            f"invalid {headline.coding} byte sequences replaced"))
    lines = re.split(r"\r\n|\r|\n", text)

    comment_char = headline.comment_char
    builders = []
    current: Optional[_SectionBuilder] = None
    open_quote = None
    pending_key = None
    pending_value = []
    pending_line = 0

    def flush_item():
        nonlocal pending_key, pending_value, open_quote
        if pending_key is None:
            return
        raw = "\n".join(pending_value)
        if open_quote is not None:
            diagnostics.append(Diagnostic(
                "error", pending_line, "UNTERMINATED_QUOTE",
                f"value of {pending_key!r} has an unterminated {open_quote}"))
            open_quote = None
        current.items.append(Item(pending_key, raw, parse_value(raw, registry),
                                  pending_line))
        pending_key = None
        pending_value = []

    for lineno, line in enumerate(lines[1:], start=2):
        if open_quote is not None:
            pending_value.append(line)
            if open_quote in line:
                open_quote = None
                flush_item()
            continue

        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith(comment_char):
            if current is not None:
                current.comments.append((current.anchor(), stripped[1:].strip()))
            continue
        if stripped.startswith("[") and stripped.endswith("]"):
            flush_item()
            current = _SectionBuilder(stripped[1:-1].strip(), lineno)
            builders.append(current)
            continue
        if current is None:
            diagnostics.append(Diagnostic(
                "error", lineno, "CONTENT_BEFORE_SECTION",
                f"content before the first section header: {stripped!r}"))
            continue
        if current.is_data():
            current.raw_rows.append((lineno, line))
            continue
        key, sep, value = line.partition(":")
        if not sep:
            diagnostics.append(Diagnostic(
                "error", lineno, "BAD_ITEM",
                f"line is neither item, header nor comment: {stripped!r}"))
            continue
        pending_key = key.strip()
        pending_line = lineno
        quote = _open_triple(value)
        if quote:
            open_quote = quote
            pending_value = [value.strip()]
        else:
            pending_value = [value.strip()]
            flush_item()

    flush_item()

    # second pass: typed rows and column specs
    column_specs = {}
    sections = []
    order_seen = {}
    for b in builders:
        if b.name.startswith(DATA_DEF_PREFIX):
            specs = []
            for item in b.items:
                try:
                    specs.append(parse_column_spec(item.key, item.raw_value))
                except BadColumnSpec as exc:
                    diagnostics.append(Diagnostic(
                        "error", item.line, "BAD_COLUMN_SPEC", str(exc)))
            column_specs[b.name] = tuple(specs)
        rows = []
        if b.is_data():
            for lineno, raw in b.raw_rows:
                cells = split_row(raw, headline.delimiter)
                rows.append(tuple(parse_value(c, registry) for c in cells))
            suffix = b.name[len(DATA_PREFIX):].lstrip(":").strip()
            def_name = DATA_DEF_PREFIX + (f": {suffix}" if suffix else "")
            if def_name not in order_seen and not any(
                    x.name == def_name for x in builders[:builders.index(b)]):
                if any(x.name == def_name for x in builders):
                    diagnostics.append(Diagnostic(
                        "warning", b.line, "DATA_BEFORE_DEFINITIONS",
                        f"[{b.name}] appears before [{def_name}]"))
        sections.append(Section(b.name, tuple(b.items), tuple(rows),
                                tuple(b.comments), b.line))

    doc = Document(headline, tuple(sections))
    specs_by_section = {}
    for name, specs in column_specs.items():
        specs_by_section[name] = specs
    try:
        tables = pair_tables(doc, specs_by_section)
    except (MissingCounterpart, DanglingSymbol) as exc:
        diagnostics.append(Diagnostic("error", 0, "TABLE_PAIRING", str(exc)))
        tables = ()
    doc = Document(headline, tuple(sections), tables)

    return doc, diagnostics


def parse_path(path, registry: Optional[UnitRegistry] = None):
    with open(path, "rb") as fh:
        return parse_document(fh.read(), registry)
