"""Canonical serialization of a Document back to FMF bytes.

The contract is parse(write(d)) == d structurally and byte idempotence of
write(parse(write(d))).  Values are re-emitted from their typed form; text
that would be misread as another type is quoted.  Uncertainty magnitudes
are verified to survive a reparse and fall back to base-SI spellings when
a short decimal would not.
"""

from __future__ import annotations

import math
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Optional

from .errors import NotValid
from .model import Document, Section, validate
from .units import AffineUnit, BASE_NAMES, QuantityValue, scale_mul
from .values import (
    BOOLEAN,
    COMPLEX,
    INTEGER,
    LIST,
    NumberValue,
    QUANTITY,
    REAL,
    TEXT,
    TIMESTAMP,
    Timestamp,
    Uncertainty,
    ValueNode,
    parse_value,
)


def _fmt_float(x: float) -> str:
    if math.isnan(x):
        return "NaN"
    if math.isinf(x):
        return "+INF" if x > 0 else "-INF"
    return repr(x)


def _fmt_scalar(value) -> str:
    if isinstance(value, int):
        return str(value)
    if isinstance(value, complex):
        im = value.imag
        if value.real == 0:
            return f"{_fmt_float(im)}j"
        sign = "+" if (im >= 0 or math.isnan(im)) else "-"
        return f"{_fmt_float(value.real)}{sign}{_fmt_float(abs(im))}j"
    return _fmt_float(value)


def _exact_decimal(x: float) -> str:
    """The full exact decimal expansion of a binary float."""
    with localcontext() as ctx:
        ctx.prec = 80
        return format(Decimal(x).normalize(), "f")


def _fmt_percent(fraction_value: float) -> str:
    """A percent spelling p with float(Fraction(Decimal(p)) / 100) equal to
    the stored fraction; prefers the short form."""
    short = _fmt_float(fraction_value * 100)
    if float(Fraction(Decimal(short)) / 100) == fraction_value:
        return short
    with localcontext() as ctx:
        ctx.prec = 80
        return format((Decimal(fraction_value) * 100).normalize(), "f")


def _fmt_in_unit(si_magnitude: float, unit) -> Optional[str]:
    """A decimal d with scale_mul(float(d), unit.si_scale) == si_magnitude,
    or None when no short spelling survives the reparse."""
    scale = unit.si_scale
    candidate = float(Fraction(si_magnitude) / Fraction(scale))
    if scale_mul(candidate, scale) == si_magnitude:
        return _fmt_float(candidate)
    return None


def _si_unit_expr(dim) -> str:
    """Canonical base-unit expression for a dimension (scale one)."""
    parts = []
    for name, exp in zip(BASE_NAMES, dim.exponents):
        if exp == 0:
            continue
        if exp == 1:
            parts.append(name)
        else:
            parts.append(f"{name}**{exp}")
    return "*".join(parts) if parts else "rad"


def write_quantity(q: QuantityValue) -> str:
    unit_text = q.unit.source_text or _si_unit_expr(q.dim)
    out = f"{_fmt_float(q.magnitude)} {unit_text}"
    if q.symbol:
        out = f"{q.symbol} = {out}"
    if q.uncertainty is not None:
        if isinstance(q.unit, AffineUnit):
            # affine offsets do not apply to differences; kelvin-scale error
            out += f" +- {_fmt_float(q.uncertainty)} K"
        else:
            short = _fmt_in_unit(q.uncertainty, q.unit)
            if short is not None:
                out += f" +- {short} {unit_text}"
            else:
                out += f" +- {_fmt_float(q.uncertainty)} {_si_unit_expr(q.dim)}"
    return out


def write_timestamp(ts: Timestamp) -> str:
    if ts.is_week_date:
        out = f"{ts.year:04d}-W{ts.week:02d}-{ts.weekday}"
    elif ts.day is not None:
        out = f"{ts.year:04d}-{ts.month:02d}-{ts.day:02d}"
    else:
        out = f"{ts.year:04d}-{ts.month:02d}"
    if ts.hour is not None:
        out += f" {ts.hour:02d}:{ts.minute:02d}"
        if ts.second is not None:
            out += f":{ts.second:02d}"
            if ts.fraction is not None:
                out += "." + _exact_decimal(ts.fraction)[2:]
        if ts.has_offset:
            if ts.offset_minutes == 0:
                out += "Z"
            else:
                sign = "+" if ts.offset_minutes >= 0 else "-"
                mins = abs(ts.offset_minutes)
                out += f"{sign}{mins // 60:02d}:{mins % 60:02d}"
    if ts.uncertainty is not None:
        out += f"+-{write_quantity(ts.uncertainty)}"
    return out


def _write_number(num: NumberValue) -> str:
    out = _fmt_scalar(num.value)
    if num.symbol:
        out = f"{num.symbol} = {out}"
    if num.uncertainty is not None:
        u = num.uncertainty
        if u.kind == "relative":
            out += f" +- {_fmt_percent(u.magnitude)} %"
        else:
            out += f" +- {_fmt_float(u.magnitude)}"
    return out


def _quote_text(text: str) -> str:
    """Quote a text value so that it reparses to itself, using the lightest
    form that works."""
    target = ValueNode(TEXT, text)
    candidates = [text]
    if "\n" not in text:
        if '"' not in text:
            candidates.append(f'"{text}"')
        if "'" not in text:
            candidates.append(f"'{text}'")
    if '"""' not in text and not text.startswith('"') and not text.endswith('"'):
        candidates.append(f'"""{text}"""')
    if "'''" not in text and not text.startswith("'") and not text.endswith("'"):
        candidates.append(f"'''{text}'''")
    for cand in candidates:
        if "\n" in text and cand is text:
            continue
        if parse_value(cand) == target:
            return cand
    # last resort: pad with spaces inside triple quotes
    return f'""" {text} """' if parse_value(f'""" {text} """') == ValueNode(TEXT, f" {text} ") else text


def write_value(node: ValueNode) -> str:
    """Inverse of parse_value up to whitespace normalization."""
    if node.tag == BOOLEAN:
        return "true" if node.payload else "false"
    if node.tag in (INTEGER, REAL, COMPLEX):
        return _write_number(node.payload)
    if node.tag == QUANTITY:
        return write_quantity(node.payload)
    if node.tag == TIMESTAMP:
        return write_timestamp(node.payload)
    if node.tag == LIST:
        return ", ".join(write_value(el) for el in node.payload)
    return _quote_text(node.payload)


def _headline_line(doc: Document) -> str:
    hl = doc.headline
    parts = [f"fmf-version: {hl.fmf_version}"]
    if hl.coding != "utf-8":
        parts.append(f"coding: {hl.coding}")
    if hl.delimiter.kind == "whitespace-run":
        parts.append("delimiter: whitespace")
    elif hl.delimiter.kind == "semicolon":
        parts.append("delimiter: semicolon")
    elif hl.delimiter.kind == "single-char":
        parts.append(f"delimiter: {hl.delimiter.char}")
    for key, value in hl.extra:
        parts.append(f"{key}: {value}")
    return f"{hl.comment_char} -*- {'; '.join(parts)} -*-"


def _delimiter_text(doc: Document) -> str:
    kind = doc.headline.delimiter.kind
    if kind == "tab":
        return "\t"
    if kind == "semicolon":
        return ";"
    if kind == "single-char":
        return doc.headline.delimiter.char
    return "  "  # whitespace-run


def _write_section(sec: Section, delim: str, comment_char: str, lines: list):
    lines.append(f"[{sec.name}]")
    comments = {}
    for anchor, text in sec.comments:
        comments.setdefault(anchor, []).append(text)
    entries = sec.rows if sec.rows else sec.items
    is_data = bool(sec.rows) or (not sec.items and _is_data_name(sec.name))
    n = len(sec.rows) if is_data else len(sec.items)
    for i in range(n + 1):
        for text in comments.get(i, ()):
            lines.append(f"{comment_char} {text}")
        if i == n:
            break
        if is_data:
            lines.append(delim.join(write_value(c) for c in sec.rows[i]))
        else:
            item = sec.items[i]
            lines.append(f"{item.key}: {write_value(item.value)}")


def _is_data_name(name: str) -> bool:
    return (name == "*data" or name.startswith("*data:"))


def write_document(doc: Document, crlf: bool = False) -> bytes:
    """Serialize; refuses documents whose validation reports errors."""
    problems = [d for d in validate(doc) if d.severity == "error"]
    if problems:
        raise NotValid("; ".join(str(p) for p in problems))
    delim = _delimiter_text(doc)
    lines = [_headline_line(doc)]
    for sec in doc.sections:
        _write_section(sec, delim, doc.headline.comment_char, lines)
    eol = "\r\n" if crlf else "\n"
    return (eol.join(lines) + eol).encode(doc.headline.coding)
