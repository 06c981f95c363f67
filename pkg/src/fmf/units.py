"""Unit algebra: dimension vectors, the unit/constant registry, prefixes,
affine temperature scales, SI normalization and feature vectors.

Dimensions are tracked over the seven SI base units plus one internal
currency axis (EUR), so monetary quantities like "19.99 EUR/m**2" take part
in the algebra.  Exponent arithmetic is exact (fractions.Fraction), never
floating point.
"""

from __future__ import annotations

import math
import re
from decimal import Decimal, InvalidOperation
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Union

from .errors import (
    AffineNotStandalone,
    BadExponent,
    CurrencyNotComparable,
    IncompatibleDimensions,
    UnknownUnit,
)

BASE_NAMES = ("m", "kg", "s", "A", "K", "mol", "cd", "EUR")

_ZERO8 = (Fraction(0),) * 8


@dataclass(frozen=True)
class DimensionVector:
    """Exponents of (m, kg, s, A, K, mol, cd, EUR)."""

    exponents: tuple = _ZERO8

    @staticmethod
    def base(name: str) -> "DimensionVector":
        i = BASE_NAMES.index(name)
        exps = list(_ZERO8)
        exps[i] = Fraction(1)
        return DimensionVector(tuple(exps))

    def __mul__(self, other: "DimensionVector") -> "DimensionVector":
        return DimensionVector(tuple(a + b for a, b in zip(self.exponents, other.exponents)))

    def __truediv__(self, other: "DimensionVector") -> "DimensionVector":
        return DimensionVector(tuple(a - b for a, b in zip(self.exponents, other.exponents)))

    def __pow__(self, n) -> "DimensionVector":
        n = Fraction(n)
        return DimensionVector(tuple(a * n for a in self.exponents))

    @property
    def is_dimensionless(self) -> bool:
        return all(e == 0 for e in self.exponents)

    @property
    def currency_exponent(self) -> Fraction:
        return self.exponents[7]

    @property
    def si_exponents(self) -> tuple:
        """The seven physical exponents, without the currency axis."""
        return self.exponents[:7]


DIMENSIONLESS = DimensionVector()


@dataclass(frozen=True)
class LinearUnit:
    """A unit (or constant) that maps to SI by a pure scale factor."""

    si_scale: Fraction  # exact rational SI scale
    dim: DimensionVector = DIMENSIONLESS
    source_text: str = field(default="", compare=False)
    arbitrary: bool = False  # "a.u." marker: excluded from comparability

    def __post_init__(self):
        if not (math.isfinite(float(self.si_scale)) and self.si_scale > 0):
            raise ValueError("unit scale must be finite and positive")


@dataclass(frozen=True)
class AffineUnit:
    """A temperature scale with an offset from Kelvin; standalone use only."""

    si_scale: float
    si_offset: float
    source_text: str = field(default="", compare=False)

    @property
    def dim(self) -> DimensionVector:
        return DimensionVector.base("K")


UnitLike = Union[LinearUnit, AffineUnit]


@dataclass(frozen=True)
class QuantityValue:
    """A magnitude with a unit, optional absolute SI uncertainty and symbol."""

    magnitude: float
    unit: UnitLike
    uncertainty: Optional[float] = None  # absolute, in SI units
    symbol: Optional[str] = None

    @property
    def si_value(self) -> float:
        if isinstance(self.unit, AffineUnit):
            return self.magnitude * self.unit.si_scale + self.unit.si_offset
        return scale_mul(self.magnitude, self.unit.si_scale)

    @property
    def dim(self) -> DimensionVector:
        return self.unit.dim


@dataclass(frozen=True)
class FeatureVector:
    """Measure in base SI units plus the seven physical dimension exponents."""

    q0: float
    exponents: tuple  # (q1..q7) as Fractions

    def reconstruct_si(self) -> float:
        """The SI measure implied by q0 and unit exponents (base units have
        scale one, so this is simply q0); kept as the consistency hook."""
        return self.q0


# ---------------------------------------------------------------------------
# Prefixes
# ---------------------------------------------------------------------------

def _ten(k: int) -> Fraction:
    return Fraction(10) ** k


# Verbatim prefix table: "da" maps to 10**2 and there is no "h" entry.
PREFIXES = {
    "Y": _ten(24), "Z": _ten(21), "E": _ten(18), "P": _ten(15), "T": _ten(12),
    "G": _ten(9), "M": _ten(6), "k": _ten(3), "da": _ten(2),
    "d": _ten(-1), "c": _ten(-2), "m": _ten(-3), "mu": _ten(-6), "n": _ten(-9),
    "p": _ten(-12), "f": _ten(-15), "a": _ten(-18), "z": _ten(-21), "y": _ten(-24),
}

# Lenient variant: accept "h" for 10**2 and remap "da" to the SI deca 10**1.
LENIENT_PREFIXES = dict(PREFIXES, h=_ten(2), da=_ten(1))


def _exact(text: str) -> Fraction:
    """Decimal literal to an exact rational."""
    try:
        return Fraction(Decimal(text))
    except InvalidOperation:
        raise UnknownUnit(f"bad number in unit expression: {text!r}")


def si_float(value) -> float:
    """Collapse an exact scale product to a float at the SI boundary."""
    return float(value)


def scale_mul(magnitude: float, scale) -> float:
    """magnitude * si_scale without intermediate float rounding."""
    return float(Fraction(magnitude) * Fraction(scale))


# ---------------------------------------------------------------------------
# Expression parsing
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"""\s*(?:
        (?P<pow>\*\*|\^)
      | (?P<op>[*/()])
      | (?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?)
      | (?P<name>[A-Za-z][A-Za-z0-9_.]*\.?)
      | (?P<bad>\S)
    )""",
    re.VERBOSE,
)


def _tokenize(text):
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None or m.group("bad"):
            raise UnknownUnit(f"bad character in unit expression: {text[pos:]!r}")
        if m.group("pow"):
            tokens.append(("pow", m.group("pow")))
        elif m.group("op"):
            tokens.append(("op", m.group("op")))
        elif m.group("num"):
            tokens.append(("num", m.group("num")))
        else:
            tokens.append(("name", m.group("name")))
        pos = m.end()
    return tokens


class _ExprParser:
    """Recursive-descent parser for unit expressions.

    Grammar: expr := factor (('*'|'/') factor)*, factor := primary
    [('**'|'^') int], primary := number [name] | name | '(' expr ')'.
    Number-name juxtaposition covers defining expressions like
    "149597870691m".  Division is evaluated left to right, so '/' applies
    only to the factor that follows it.
    """

    def __init__(self, tokens, registry):
        self.tokens = tokens
        self.i = 0
        self.registry = registry

    def peek(self):
        return self.tokens[self.i] if self.i < len(self.tokens) else (None, None)

    def next(self):
        tok = self.peek()
        self.i += 1
        return tok

    def parse(self):
        value = self.expr()
        if self.i < len(self.tokens):
            raise UnknownUnit(f"trailing tokens in unit expression: {self.tokens[self.i:]}")
        return value

    def expr(self):
        scale, dim = self.factor()
        while True:
            kind, text = self.peek()
            if kind == "op" and text in "*/":
                self.next()
                s2, d2 = self.factor()
                if text == "*":
                    scale, dim = scale * s2, dim * d2
                else:
                    scale, dim = scale / s2, dim / d2
            else:
                break
        return scale, dim

    def factor(self):
        scale, dim = self.primary()
        kind, _ = self.peek()
        if kind == "pow":
            self.next()
            n = self.exponent()
            scale, dim = scale ** n, dim ** n
        return scale, dim

    def exponent(self) -> int:
        kind, text = self.next()
        if kind == "op" and text == "(":
            n = self.exponent()
            kind2, text2 = self.next()
            if (kind2, text2) != ("op", ")"):
                raise BadExponent("unclosed exponent parenthesis")
            return n
        if kind != "num":
            raise BadExponent(f"expected integer exponent, got {text!r}")
        if not re.fullmatch(r"-?\d+", text):
            raise BadExponent(f"non-integer exponent {text!r}")
        return int(text)

    def primary(self):
        kind, text = self.next()
        if kind == "num":
            scale, dim = _exact(text), DIMENSIONLESS
            # juxtaposed unit name, e.g. "149597870691m"
            kind2, text2 = self.peek()
            if kind2 == "name":
                self.next()
                unit = self.registry.resolve_linear(text2)
                scale, dim = scale * unit.si_scale, dim * unit.dim
            return scale, dim
        if kind == "name":
            unit = self.registry.resolve_linear(text)
            return unit.si_scale, unit.dim
        if kind == "op" and text == "(":
            value = self.expr()
            kind2, text2 = self.next()
            if (kind2, text2) != ("op", ")"):
                raise UnknownUnit("unclosed parenthesis in unit expression")
            return value
        raise UnknownUnit(f"unexpected token {text!r} in unit expression")


# The tokenizer has no '-' operator; a minus directly after '**' or '^' is
# folded into the exponent number before tokenizing.
_NEG_EXP_RE = re.compile(r"(\*\*|\^)\s*-\s*(\d+)")


def _tokenize_negexp(expr: str):
    rewritten = _NEG_EXP_RE.sub(lambda m: m.group(1) + "NEG" + m.group(2), expr)
    out = []
    for kind, text in _tokenize(rewritten):
        if kind == "name" and text.startswith("NEG") and text[3:].isdigit():
            out.append(("num", "-" + text[3:]))
        else:
            out.append((kind, text))
    return out


# ---------------------------------------------------------------------------
# Registry
# ---------------------------------------------------------------------------

# Derived SI units, defined over the base units.
_DERIVED_SI = [
    ("N", "kg*m/s**2"),
    ("Pa", "N/m**2"),
    ("J", "N*m"),
    ("W", "J/s"),
    ("C", "A*s"),
    ("V", "W/A"),
    ("F", "C/V"),
    ("ohm", "V/A"),
    ("S", "A/V"),
    ("Wb", "V*s"),
    ("T", "Wb/m**2"),
    ("H", "Wb/A"),
    ("lm", "cd"),
    ("lx", "lm/m**2"),
    ("Bq", "1/s"),
    ("Gy", "J/kg"),
    ("Sv", "J/kg"),
]

# Mathematical and physical constants, in definition order.
_CONSTANTS = [
    ("pi", "3.1415926535897931"),
    ("c", "299792458.*m/s"),
    ("mu0", "4.e-7*pi*N/A**2"),
    ("eps0", "1/mu0/c**2"),
    ("Grav", "6.67259e-11*m**3/kg/s**2"),
    ("hplanck", "6.6260755e-34*J*s"),
    ("hbar", "hplanck/(2*pi)"),
    ("e", "1.60217733e-19*C"),
    ("me", "9.1093897e-31*kg"),
    ("mp", "1.6726231e-27*kg"),
    ("Nav", "6.0221367e23/mol"),
    ("k", "1.380658e-23*J/K"),
]

# Non-SI units: time, length/area, volume, mass/force, energy/power,
# pressure, plus the linear angle degree.  Order matters: later entries
# may reference earlier ones.
_NON_SI = [
    # time
    ("min", "60*s"),
    ("h", "60*min"),
    ("d", "24*h"),
    ("wk", "7*d"),
    ("yr", "365.25*d"),
    # length and area
    ("AU", "149597870691m"),
    ("Ang", "1.e-10*m"),
    ("Bohr", "4*pi*eps0*hbar**2/me/e**2"),
    ("inch", "2.54*cm"),
    ("ft", "12*inch"),
    ("lyr", "c*yr"),
    ("mi", "5280.*ft"),
    ("nmi", "1852.*m"),
    ("pc", "3.08567758128e16m"),
    ("yd", "3*ft"),
    ("acres", "mi**2/640"),
    ("b", "1.e-28*m**2"),
    ("ha", "10000*m**2"),
    # volume
    ("l", "dm**3"),
    ("dl", "0.1*l"),
    ("cl", "0.01*l"),
    ("ml", "0.001*l"),
    ("tsp", "4.92892159375*ml"),
    ("tbsp", "3*tsp"),
    ("floz", "2*tbsp"),
    ("cup", "8*floz"),
    ("pt", "16*floz"),
    ("qt", "2*pt"),
    ("galUS", "4*qt"),
    ("galUK", "4.54609*l"),
    # mass and force
    ("amu", "1.6605402e-27*kg"),
    ("oz", "28.349523125*g"),
    ("lb", "16*oz"),
    ("ton", "2000*lb"),
    ("dyn", "1.e-5*N"),
    # energy and power
    ("erg", "1.e-7*J"),
    ("eV", "e*V"),
    ("Hartree", "me*e**4/16/pi**2/eps0**2/hbar**2"),
    ("invcm", "hplanck*c/cm"),
    ("Ken", "k*K"),
    ("cal", "4.184*J"),
    ("kcal", "1000*cal"),
    ("cali", "4.1868*J"),
    ("kcali", "1000*cali"),
    ("Btu", "1055.05585262*J"),
    ("hp", "745.7*W"),
    # pressure
    ("bar", "1.e5*Pa"),
    ("dbar", "1.e4*Pa"),
    ("mbar", "1.e2*Pa"),
    ("atm", "101325.*Pa"),
    ("torr", "atm/760"),
    ("psi", "6894.75729317*Pa"),
    # angle
    ("deg", "pi*rad/180"),
]


class UnitRegistry:
    """Immutable after construction; resolution and algebra are pure."""

    def __init__(self, lenient_prefixes: bool = False,
                 currency_rates: Optional[dict] = None):
        self.prefixes = LENIENT_PREFIXES if lenient_prefixes else PREFIXES
        self.units: dict[str, LinearUnit] = {}
        self.affine: dict[str, AffineUnit] = {}
        self.constants: dict[str, LinearUnit] = {}

        for name in BASE_NAMES[:7]:
            self.units[name] = LinearUnit(Fraction(1), DimensionVector.base(name), name)
        self.units["EUR"] = LinearUnit(Fraction(1), DimensionVector.base("EUR"), "EUR")
        # gram: needed so that "kg" also resolves as prefix form and the
        # mass-unit definitions ("28.349523125*g") evaluate.
        self.units["g"] = LinearUnit(Fraction(1, 1000), DimensionVector.base("kg"), "g")
        self.units["kg"] = LinearUnit(Fraction(1), DimensionVector.base("kg"), "kg")
        # angle units are dimensionless
        self.units["rad"] = LinearUnit(Fraction(1), DIMENSIONLESS, "rad")
        self.units["Sr"] = LinearUnit(Fraction(1), DIMENSIONLESS, "Sr")
        # arbitrary units: flagged, excluded from cross-file comparability
        self.units["a.u."] = LinearUnit(Fraction(1), DIMENSIONLESS, "a.u.", arbitrary=True)

        for name, expr in _DERIVED_SI:
            scale, dim = self._eval(expr)
            self.units[name] = LinearUnit(scale, dim, name)
        for name, expr in _CONSTANTS:
            scale, dim = self._eval(expr)
            self.constants[name] = LinearUnit(scale, dim, name)
        for name, expr in _NON_SI:
            scale, dim = self._eval(expr)
            self.units[name] = LinearUnit(scale, dim, name)

        # thermodynamic degrees: affine scales over Kelvin
        self.affine["degC"] = AffineUnit(1.0, 273.15, "degC")
        self.affine["degF"] = AffineUnit(5.0 / 9.0, 459.67 * 5.0 / 9.0, "degF")
        self.affine["degR"] = AffineUnit(5.0 / 9.0, 0.0, "degR")

        if currency_rates:
            for code, rate in currency_rates.items():
                if code == "EUR":
                    continue
                self.units[code] = LinearUnit(
                    Fraction(1) / Fraction(Decimal(str(rate))),
                    DimensionVector.base("EUR"), code)

    # -- resolution --------------------------------------------------------

    def resolve_name(self, name: str) -> UnitLike:
        """Whole-name match against units, constants and affine scales beats
        any prefix split ("cd" is candela, never centi-day)."""
        if not name:
            raise UnknownUnit("empty unit name")
        if name in self.units:
            return self.units[name]
        if name in self.constants:
            return self.constants[name]
        if name in self.affine:
            return self.affine[name]
        for prefix in sorted(self.prefixes, key=len, reverse=True):
            if name.startswith(prefix) and name[len(prefix):] in self.units:
                base = self.units[name[len(prefix):]]
                factor = self.prefixes[prefix]
                return LinearUnit(base.si_scale * factor, base.dim, name,
                                  arbitrary=base.arbitrary)
        raise UnknownUnit(f"unknown unit {name!r}")

    def resolve_linear(self, name: str) -> LinearUnit:
        unit = self.resolve_name(name)
        if isinstance(unit, AffineUnit):
            raise AffineNotStandalone(
                f"{name!r} has an offset and cannot appear in an expression")
        return unit

    def _eval(self, expr: str):
        return _ExprParser(_tokenize_negexp(expr), self).parse()

    def parse_unit_expr(self, text: str) -> UnitLike:
        """Parse a unit expression like "kg*m**2/A**2/s**3".

        Affine units are only accepted completely alone.
        """
        stripped = text.strip()
        if stripped in self.affine:
            return self.affine[stripped]
        try:
            scale, dim = _ExprParser(_tokenize_negexp(stripped), self).parse()
        except ZeroDivisionError:
            raise UnknownUnit(f"division by zero in unit expression {stripped!r}")
        if scale <= 0:
            raise UnknownUnit(f"unit expression {stripped!r} has a non-positive scale")
        arbitrary = _mentions_arbitrary(stripped)
        return LinearUnit(scale, dim, stripped, arbitrary=arbitrary)


def _mentions_arbitrary(text: str) -> bool:
    return "a.u." in text


# ---------------------------------------------------------------------------
# Quantity operations
# ---------------------------------------------------------------------------

def dim_combine(a: DimensionVector, b: DimensionVector, op: str) -> DimensionVector:
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown op {op!r}")


def dim_pow(a: DimensionVector, n) -> DimensionVector:
    return a ** n


def to_si(q: QuantityValue):
    """SI measure and dimension of a quantity; affine units add their offset."""
    return q.si_value, q.dim


def feature_vector(q: QuantityValue) -> FeatureVector:
    dim = q.dim
    if dim.currency_exponent != 0:
        raise CurrencyNotComparable(
            "monetary quantities have no physical feature vector")
    return FeatureVector(q.si_value, dim.si_exponents)


def compatible(a: QuantityValue, b: QuantityValue) -> bool:
    return a.dim == b.dim


def convert(q: QuantityValue, target, registry: Optional[UnitRegistry] = None) -> float:
    """Magnitude of q expressed in the target unit (expression text or unit)."""
    if isinstance(target, str):
        registry = registry or default_registry()
        target = registry.parse_unit_expr(target)
    if target.dim != q.dim:
        raise IncompatibleDimensions(
            f"cannot convert {q.dim} to {target.dim}")
    if isinstance(target, AffineUnit):
        if not isinstance(q.unit, AffineUnit) and q.dim != DimensionVector.base("K"):
            raise IncompatibleDimensions("affine target needs a temperature")
        return (q.si_value - target.si_offset) / target.si_scale
    if isinstance(q.unit, AffineUnit):
        return q.si_value / float(target.si_scale)
    return float(Fraction(q.magnitude) * Fraction(q.unit.si_scale)
                 / Fraction(target.si_scale))


_DEFAULT = None


def default_registry() -> UnitRegistry:
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = UnitRegistry()
    return _DEFAULT
