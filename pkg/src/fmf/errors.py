"""Exception hierarchy for the fmf package.

Parsing of whole files is fail-safe and reports problems as diagnostics;
these exceptions are raised only by the lower-level operations whose
callers are expected to fall back (value dispatch) or abort (headline).
"""


class FmfError(Exception):
    """Base class for all errors raised by this package."""


# --- units ---------------------------------------------------------------

class UnitError(FmfError):
    pass


class UnknownUnit(UnitError):
    pass


class BadExponent(UnitError):
    pass


class AffineNotStandalone(UnitError):
    """Affine temperature units carry an offset and are only legal alone."""


class IncompatibleDimensions(UnitError):
    pass


class CurrencyNotComparable(UnitError):
    """Currency-bearing quantities have no physical feature vector."""


# --- values --------------------------------------------------------------

class ValueParseError(FmfError):
    pass


class NotANumber(ValueParseError):
    pass


class NotAQuantity(ValueParseError):
    pass


class NotATimestamp(ValueParseError):
    pass


class UnterminatedQuote(ValueParseError):
    pass


# --- reader --------------------------------------------------------------

class NoHeadline(FmfError):
    pass


class UnknownCoding(FmfError):
    pass


class BadDelimiter(FmfError):
    pass


class BadColumnSpec(FmfError):
    def __init__(self, message, position=0):
        super().__init__(message)
        self.position = position


# --- document model ------------------------------------------------------

class MissingCounterpart(FmfError):
    pass


class DanglingSymbol(FmfError):
    pass


class NotValid(FmfError):
    """Serialization refused: the document has validation errors."""


# --- search --------------------------------------------------------------

class CorruptIndex(FmfError):
    pass


class IncompatibleBounds(FmfError):
    pass
