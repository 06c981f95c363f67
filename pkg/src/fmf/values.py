"""Typed interpretation of item value text.

The dispatcher is total: anything that is not recognizably a quoted string,
boolean, timestamp, number, quantity or comma list is kept as plain text
(the fail-safe rule).  Every node retains the raw source text, which is
excluded from structural equality.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from typing import Optional

from .errors import (
    NotANumber,
    NotAQuantity,
    NotATimestamp,
    UnknownUnit,
    AffineNotStandalone,
    BadExponent,
)
from .units import QuantityValue, UnitRegistry, default_registry, scale_mul

# tag constants
BOOLEAN = "boolean"
INTEGER = "integer"
REAL = "real"
COMPLEX = "complex"
QUANTITY = "quantity"
TIMESTAMP = "timestamp"
TEXT = "text"
LIST = "list"


@dataclass(frozen=True)
class Uncertainty:
    kind: str  # "absolute" | "relative"
    magnitude: float  # relative stored as a fraction (0.48% -> 0.0048)
    unit_text: Optional[str] = None


@dataclass(frozen=True)
class NumberValue:
    kind: str  # "integer" | "real" | "complex"
    value: object  # int, float or complex
    uncertainty: Optional[Uncertainty] = None
    symbol: Optional[str] = None


@dataclass(frozen=True)
class Timestamp:
    """ISO date or date-time, calendar or week form, with optional offset.

    A missing offset means local time and stays absent; it is never
    resolved to a zone.
    """

    year: int
    month: Optional[int] = None
    day: Optional[int] = None
    week: Optional[int] = None
    weekday: Optional[int] = None
    hour: Optional[int] = None
    minute: Optional[int] = None
    second: Optional[int] = None
    fraction: Optional[float] = None
    offset_minutes: Optional[int] = None  # explicit UTC is 0
    has_offset: bool = False
    uncertainty: Optional[QuantityValue] = None

    @property
    def is_week_date(self) -> bool:
        return self.week is not None


@dataclass(frozen=True)
class ValueNode:
    tag: str
    payload: object
    raw: str = field(compare=False, default="")
    symbol: Optional[str] = None


# ---------------------------------------------------------------------------
# numbers
# ---------------------------------------------------------------------------

_FLOAT = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"
_SPECIAL = r"[+-]?INF|NaN|nan|[+-]?inf"
_INT_RE = re.compile(r"[+-]?\d+")
_REAL_RE = re.compile(_FLOAT)
_SPECIAL_RE = re.compile(_SPECIAL)
# complex: [real part +/-] imaginary part with trailing j/J
_COMPLEX_RE = re.compile(
    r"(?:(?P<re>{f})\s*(?=[+-]))?(?P<im>{f})[jJ]".format(f=_FLOAT))

_SYMBOL_PREFIX_RE = re.compile(r"\s*(?P<sym>[^=\s][^=]*?)\s*=\s*(?P<rest>\S.*)$")
_UNC_SPLIT_RE = re.compile(r"\s*(?:\+-|\\pm)\s*")


def _split_symbol(text: str):
    """Split an optional "symbol = rest" prefix; the symbol is kept verbatim."""
    m = _SYMBOL_PREFIX_RE.match(text)
    if m:
        return m.group("sym"), m.group("rest")
    return None, text.strip()


def _is_integer_text(text: str) -> bool:
    return _INT_RE.fullmatch(text) is not None


def _parse_scalar(text: str):
    """One scalar: int, float, complex or IEEE special. Raises NotANumber."""
    text = text.strip()
    if _INT_RE.fullmatch(text):
        return "integer", int(text)
    if _REAL_RE.fullmatch(text):
        return "real", float(text)
    if _SPECIAL_RE.fullmatch(text):
        return "real", float(text.replace("INF", "inf").replace("NaN", "nan"))
    m = _COMPLEX_RE.fullmatch(text)
    if m:
        re_part = float(m.group("re")) if m.group("re") else 0.0
        return "complex", complex(re_part, float(m.group("im")))
    raise NotANumber(text)


def _percent_fraction(text: str, fallback: float) -> float:
    """Exact decimal division by 100, so 0.48% -> 0.0048 without drift."""
    try:
        return float(Fraction(Decimal(text)) / 100)
    except InvalidOperation:
        return fallback / 100.0


def _parse_uncertainty_tail(tail: str) -> Uncertainty:
    """The part after '+-' for plain numbers: absolute or percent."""
    tail = tail.strip()
    if not tail:
        raise NotANumber("dangling uncertainty sign")
    if tail.endswith("%"):
        body = tail[:-1].strip()
        kind, val = _parse_scalar(body)
        if kind == "complex":
            raise NotANumber(tail)
        return Uncertainty("relative", _percent_fraction(body, float(val)))
    kind, val = _parse_scalar(tail)
    if kind == "complex":
        raise NotANumber(tail)
    return Uncertainty("absolute", float(val))


def parse_number(text: str) -> NumberValue:
    """Numbers per the scalar conventions: sign, decimal dot, exponents,
    trailing-j complex, IEEE specials, optional symbol and uncertainty."""
    symbol, body = _split_symbol(text)
    parts = _UNC_SPLIT_RE.split(body)
    if len(parts) > 2:
        raise NotANumber(text)
    kind, value = _parse_scalar(parts[0])
    uncertainty = None
    if len(parts) == 2:
        if kind == "complex":
            raise NotANumber(text)
        uncertainty = _parse_uncertainty_tail(parts[1])
        if uncertainty.magnitude < 0:
            raise NotANumber(text)
    return NumberValue(kind, value, uncertainty, symbol)


# ---------------------------------------------------------------------------
# quantities
# ---------------------------------------------------------------------------

_NUM_GROUP = r"(?:{f})".format(f=_FLOAT)

# "x UNIT" with optional "+- e UNIT2"
_Q_PLAIN_RE = re.compile(
    r"(?P<val>{f})\s+(?P<unit>\S.*?)"
    r"(?:\s*(?:\+-|\\pm)\s*(?P<err>{f})\s*(?P<eunit>\S.*?))?\s*$".format(f=_FLOAT))

# "(x +- e [%]) UNIT" and "(f +- e [%]) x UNIT"
_Q_PAREN_RE = re.compile(
    r"\(\s*(?P<val>{f})\s*(?:\+-|\\pm)\s*(?P<err>{f})\s*(?P<pct>%)?\s*\)"
    r"\s*(?:(?P<scale>{f})\s+)?(?P<unit>\S.*?)\s*$".format(f=_FLOAT))


def _resolve_unit(text: str, registry: UnitRegistry):
    try:
        return registry.parse_unit_expr(text)
    except (UnknownUnit, AffineNotStandalone, BadExponent):
        raise NotAQuantity(text)


def parse_quantity(text: str, registry: Optional[UnitRegistry] = None) -> QuantityValue:
    """All quantity shapes: "x U", "x U +- e U2", "(x +- e) U",
    "(x +- p%) U" and the scale-factor form "(f +- e) x U"."""
    registry = registry or default_registry()
    symbol, body = _split_symbol(text)

    m = _Q_PAREN_RE.match(body)
    if m:
        val = float(m.group("val"))
        err = float(m.group("err"))
        unit = _resolve_unit(m.group("unit"), registry)
        if m.group("scale"):
            # (f +- e) x U: value f*x in U with relative uncertainty e/f
            x = float(m.group("scale"))
            rel = (err / 100.0 if m.group("pct") else err) / val
            magnitude = val * x
            unc_si = abs(scale_mul(magnitude, unit.si_scale) * rel)
        else:
            magnitude = val
            if m.group("pct"):
                rel = err / 100.0
                unc_si = abs(scale_mul(magnitude, unit.si_scale) * rel)
            else:
                unc_si = abs(scale_mul(err, unit.si_scale))
        return QuantityValue(magnitude, unit, unc_si, symbol)

    m = _Q_PLAIN_RE.match(body)
    if m:
        magnitude = float(m.group("val"))
        unit = _resolve_unit(m.group("unit"), registry)
        unc_si = None
        if m.group("err") is not None:
            err = float(m.group("err"))
            eunit_text = m.group("eunit")
            if eunit_text.strip() == "%":
                unc_si = abs(scale_mul(magnitude, unit.si_scale) * err / 100.0)
            else:
                eunit = _resolve_unit(eunit_text, registry)
                if eunit.dim != unit.dim:
                    raise NotAQuantity(text)
                unc_si = abs(scale_mul(err, eunit.si_scale))
        return QuantityValue(magnitude, unit, unc_si, symbol)

    raise NotAQuantity(text)


def _is_affine(unit) -> bool:
    return hasattr(unit, "si_offset")


# ---------------------------------------------------------------------------
# timestamps
# ---------------------------------------------------------------------------

_DATE_RE = r"(?P<year>\d{4})-(?:W(?P<week>\d{1,2})-(?P<wday>\d)|(?P<month>\d{1,2})(?:-(?P<day>\d{1,2}))?)"
_TIME_RE = (r"(?P<hour>\d{2}):(?P<minute>\d{2})"
            r"(?::(?P<second>\d{2})(?:\.(?P<frac>\d+))?)?")
_OFFSET_RE = r"(?P<utc>Z)|(?P<osign>[+-])(?P<ohour>\d{2}):(?P<omin>\d{2})"

_TIMESTAMP_RE = re.compile(
    r"{d}(?:[T ]{t}(?:{o})?)?$".format(d=_DATE_RE, t=_TIME_RE, o=_OFFSET_RE))


def parse_timestamp(text: str, registry: Optional[UnitRegistry] = None) -> Timestamp:
    """ISO calendar and week dates, optional time, 'Z' or signed offsets,
    optional "+-" temporal uncertainty quantity."""
    registry = registry or default_registry()
    text = text.strip()
    uncertainty = None
    parts = _UNC_SPLIT_RE.split(text)
    if len(parts) == 2:
        text = parts[0].strip()
        try:
            q = parse_quantity(parts[1], registry)
        except NotAQuantity:
            raise NotATimestamp(text)
        if q.dim.exponents != (0, 0, 1, 0, 0, 0, 0, 0):
            raise NotATimestamp(text)
        uncertainty = q
    elif len(parts) > 2:
        raise NotATimestamp(text)

    m = _TIMESTAMP_RE.fullmatch(text)
    if not m:
        raise NotATimestamp(text)
    g = m.groupdict()
    year = int(g["year"])
    month = day = week = weekday = None
    if g["week"]:
        week, weekday = int(g["week"]), int(g["wday"])
        if not (1 <= week <= 53 and 1 <= weekday <= 7):
            raise NotATimestamp(text)
    else:
        month = int(g["month"])
        if not 1 <= month <= 12:
            raise NotATimestamp(text)
        if g["day"]:
            day = int(g["day"])
            if not 1 <= day <= 31:
                raise NotATimestamp(text)
    hour = minute = second = None
    fraction = None
    offset = None
    has_offset = False
    if g["hour"]:
        hour, minute = int(g["hour"]), int(g["minute"])
        if hour > 23 or minute > 59:
            raise NotATimestamp(text)
        if g["second"]:
            second = int(g["second"])
            if second > 60:
                raise NotATimestamp(text)
        if g["frac"]:
            fraction = float("0." + g["frac"])
        if g["utc"]:
            offset, has_offset = 0, True
        elif g["osign"]:
            offset = int(g["ohour"]) * 60 + int(g["omin"])
            if g["osign"] == "-":
                offset = -offset
            if not -1440 <= offset <= 1440:
                raise NotATimestamp(text)
            has_offset = True
    return Timestamp(year, month, day, week, weekday, hour, minute, second,
                     fraction, offset, has_offset, uncertainty)


# ---------------------------------------------------------------------------
# strings and lists
# ---------------------------------------------------------------------------

_TRIPLE_QUOTES = ("'''", '"""')


def parse_string(text: str) -> str:
    """Strip one layer of matched quotes; triple quotes may wrap content that
    itself contains quotes or line breaks."""
    stripped = text.strip()
    for q in _TRIPLE_QUOTES:
        if stripped.startswith(q) and stripped.endswith(q) and len(stripped) >= 6:
            return stripped[3:-3]
    if len(stripped) >= 2 and stripped[0] == stripped[-1] and stripped[0] in "'\"":
        return stripped[1:-1]
    return stripped


def _is_quoted(text: str) -> bool:
    stripped = text.strip()
    for q in _TRIPLE_QUOTES:
        if stripped.startswith(q) and stripped.endswith(q) and len(stripped) >= 6:
            return True
    return (len(stripped) >= 2 and stripped[0] == stripped[-1]
            and stripped[0] in "'\"")


def split_list(text: str):
    """Split on top-level commas; commas inside any quote form are literal."""
    parts = []
    buf = []
    i = 0
    in_quote = None  # None | "'" | '"' | "'''" | '"""'
    while i < len(text):
        ch = text[i]
        if in_quote:
            if text.startswith(in_quote, i):
                buf.append(in_quote)
                i += len(in_quote)
                in_quote = None
                continue
            buf.append(ch)
            i += 1
            continue
        if ch in "'\"":
            triple = ch * 3
            if text.startswith(triple, i):
                in_quote = triple
                buf.append(triple)
                i += 3
            else:
                in_quote = ch
                buf.append(ch)
                i += 1
            continue
        if ch == ",":
            parts.append("".join(buf))
            buf = []
            i += 1
            continue
        buf.append(ch)
        i += 1
    parts.append("".join(buf))
    return parts


_BOOLEANS = {"true": True, "TRUE": True, "True": True,
             "false": False, "FALSE": False, "False": False}


def parse_value(text: str, registry: Optional[UnitRegistry] = None) -> ValueNode:
    """Total dispatcher.  Precedence: quoted string, boolean, timestamp,
    number, quantity, comma list, text fallback."""
    registry = registry or default_registry()
    raw = text
    stripped = text.strip()

    if _is_quoted(stripped):
        return ValueNode(TEXT, parse_string(stripped), raw)

    if stripped in _BOOLEANS:
        return ValueNode(BOOLEAN, _BOOLEANS[stripped], raw)

    try:
        ts = parse_timestamp(stripped, registry)
        return ValueNode(TIMESTAMP, ts, raw)
    except NotATimestamp:
        pass

    try:
        num = parse_number(stripped)
        return ValueNode(num.kind, num, raw, num.symbol)
    except NotANumber:
        pass

    try:
        q = parse_quantity(stripped, registry)
        return ValueNode(QUANTITY, q, raw, q.symbol)
    except NotAQuantity:
        pass

    parts = split_list(stripped)
    if len(parts) > 1 and all(p.strip() for p in parts):
        elems = tuple(parse_value(p.strip(), registry) for p in parts)
        return ValueNode(LIST, elems, raw)

    return ValueNode(TEXT, stripped, raw)
