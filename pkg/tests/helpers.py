"""Shared test utilities: seeded random document and quantity generators.

The document generator emits source text directly; tests parse it, write
it back and compare.  Generated files are always structurally valid and
free of parse diagnostics, so the serializer accepts them.
"""

import random
import string

# units safe to drop into generated values: linear, unambiguous, no spaces
SAFE_UNITS = [
    "m", "s", "A", "K", "mol", "cd", "kg",
    "V", "W", "J", "Pa", "ohm", "N",
    "mV", "kJ", "ms", "mm", "cm", "km", "mA", "MW", "GPa",
    "m/s", "kg*m**2/A**2/s**3", "J/mol", "W/m**2", "mm**2", "m**-1",
    "eV", "cal", "bar", "atm", "min", "h",
]

_WORDS = ["alpha", "beta", "gamma", "probe", "sample", "run", "detector",
          "left", "right", "ambient", "vacuum", "copper", "glass"]


def _word(rng):
    return rng.choice(_WORDS)


def _number_text(rng):
    kind = rng.randrange(4)
    if kind == 0:
        return str(rng.randint(-10**6, 10**6))
    if kind == 1:
        return repr(rng.uniform(-1e3, 1e3))
    if kind == 2:
        return f"{rng.uniform(-1, 1):.6g}e{rng.randint(-12, 12)}"
    return f"{rng.randint(1, 99)}.{rng.randint(0, 999)}"


def _timestamp_text(rng):
    y, mo, dd = rng.randint(1900, 2100), rng.randint(1, 12), rng.randint(1, 28)
    kind = rng.randrange(5)
    if kind == 0:
        return f"{y:04d}-{mo:02d}-{dd:02d}"
    if kind == 1:
        return f"{y:04d}-W{rng.randint(1, 52):02d}-{rng.randint(1, 7)}"
    hh, mm = rng.randint(0, 23), rng.randint(0, 59)
    base = f"{y:04d}-{mo:02d}-{dd:02d} {hh:02d}:{mm:02d}"
    if kind == 2:
        return base
    if kind == 3:
        return base + f":{rng.randint(0, 59):02d}Z"
    sign = rng.choice("+-")
    return base + f":{rng.randint(0, 59):02d}{sign}{rng.randint(0, 12):02d}:00"


def _quantity_text(rng):
    unit = rng.choice(SAFE_UNITS)
    mag = _number_text(rng)
    kind = rng.randrange(5)
    if kind == 0:
        return f"{mag} {unit}"
    if kind == 1:
        return f"{mag} {unit} +- {abs(rng.uniform(0, 1)):.4g} {unit}"
    if kind == 2:
        return f"({mag} +- {abs(rng.uniform(0, 1)):.4g}) {unit}"
    if kind == 3:
        return f"({mag} +- {rng.randint(1, 40)} %) {unit}"
    return f"X_{{{rng.randint(0, 99)}}} = {mag} {unit}"


def _value_text(rng):
    kind = rng.randrange(12)
    if kind == 0:
        return str(rng.randint(-10**9, 10**9))
    if kind == 1:
        return _number_text(rng)
    if kind == 2:
        return f"{_number_text(rng)} +- {abs(rng.uniform(0, 10)):.4g}"
    if kind == 3:
        return f"Q = {rng.uniform(1, 100):.4g} +- {rng.choice(['0.25', '1', '2.5'])} %"
    if kind == 4:
        return f"{rng.randint(-9, 9)}+{rng.randint(1, 9)}j"
    if kind == 5:
        return rng.choice(["true", "false"])
    if kind == 6:
        return _timestamp_text(rng)
    if kind == 7:
        return _quantity_text(rng)
    if kind == 8:
        return ", ".join(_number_text(rng) for _ in range(rng.randint(2, 5)))
    if kind == 9:
        return " ".join(_word(rng) for _ in range(rng.randint(1, 5)))
    if kind == 10:
        return '"' + " ".join(_word(rng) for _ in range(rng.randint(1, 4))) + '"'
    return f"'''{_word(rng)} {_word(rng)}\n{_word(rng)} spans lines'''"


def _cell_text(rng):
    # data cells: single tokens only, safe under every delimiter
    kind = rng.randrange(4)
    if kind == 0:
        return str(rng.randint(-999, 999))
    if kind == 1:
        return repr(rng.uniform(-100, 100))
    if kind == 2:
        return f"{rng.uniform(0.1, 10):.4g}e{rng.randint(-6, 6)}"
    return _word(rng)


_DELIMITERS = [
    (None, "\t"),             # default tab
    ("whitespace", " "),
    ("semicolon", ";"),
    (",", ","),
    ("|", "|"),
]


def random_document_text(rng: random.Random) -> bytes:
    """A valid FMF file with random sections, items, tables and delimiter."""
    token, sep = rng.choice(_DELIMITERS)
    comment = rng.choice([";", "#"])
    head = ["fmf-version: 1.0"]
    if token is not None:
        head.append(f"delimiter: {token}")
    lines = [f"{comment} -*- {'; '.join(head)} -*-"]

    lines.append("[*reference]")
    lines.append(f"title: {_word(rng)} {_word(rng)} study {rng.randint(1, 99)}")
    lines.append(f"creator: {_word(rng).title()} {_word(rng).title()}")
    lines.append(f"created: {_timestamp_text(rng)}")

    for s in range(rng.randint(0, 3)):
        lines.append(f"[{_word(rng)} {s}]")
        if rng.random() < 0.3:
            lines.append(f"{comment} {_word(rng)} note")
        for i in range(rng.randint(1, 6)):
            lines.append(f"key {i}: {_value_text(rng)}")

    multi = rng.random() < 0.3
    if multi:
        symbols = ["A", "B"][: rng.randint(1, 2)]
        lines.append("[*table definitions]")
        for sym in symbols:
            lines.append(f"table {sym}: {sym}")
        suffixes = [f": {sym}" for sym in symbols]
    else:
        suffixes = [""]

    for suffix in suffixes:
        ncols = rng.randint(1, 4)
        lines.append(f"[*data definitions{suffix}]")
        for c in range(ncols):
            unit = f" [{rng.choice(['m', 's', 'V', 'K', 'A'])}]" if rng.random() < 0.7 else ""
            err = f" +- {rng.uniform(0.01, 1):.2g}" if unit and rng.random() < 0.3 else ""
            lines.append(f"column {c}: C_{c}{err}{unit}")
        lines.append(f"[*data{suffix}]")
        for _ in range(rng.randint(1, 8)):
            lines.append(sep.join(_cell_text(rng) for _ in range(ncols)))

    return ("\n".join(lines) + "\n").encode("utf-8")


def random_quantity_corpus(rng: random.Random, registry, max_size=100):
    """Random (path, section, key, QuantityValue) records over varied units."""
    from fmf.units import QuantityValue

    names = [n for n, u in registry.units.items() if not u.arbitrary
             and u.dim.currency_exponent == 0]
    records = []
    for i in range(rng.randint(1, max_size)):
        unit = registry.units[rng.choice(names)]
        mag = rng.uniform(-1e6, 1e6) * 10 ** rng.randint(-6, 6)
        q = QuantityValue(mag, unit)
        records.append((f"f{i % 7}.fmf", f"sec{i % 3}", f"k{i}", q))
    return records
