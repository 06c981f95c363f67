"""Command line surface: validate, describe, export, index, query, fmt.

Exit codes: 0 success, 1 validation errors, 2 usage errors, 3 I/O or
decode aborts.  Data goes to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from fractions import Fraction

from .errors import FmfError, NoHeadline, UnknownCoding
from .model import Document, Table, validate
from .reader import parse_path
from .search import build_index, collect_fmf_files, load_index, query, save_index
from .units import UnitRegistry, scale_mul
from .values import LIST, QUANTITY, TEXT
from .writer import write_document, write_value

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_USAGE = 2
EXIT_IO = 3


def _load_currency_rates(path):
    rates = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            code, _, rate = line.partition("\t")
            rates[code.strip()] = float(rate)
    return rates


def _registry(args) -> UnitRegistry:
    path = getattr(args, "currency_table", None) or os.environ.get("FMF_CURRENCY_TABLE")
    rates = _load_currency_rates(path) if path else None
    return UnitRegistry(lenient_prefixes=getattr(args, "lenient_prefixes", False),
                        currency_rates=rates)


def _parse_or_exit(path, registry, stderr):
    try:
        return parse_path(path, registry)
    except (NoHeadline, UnknownCoding) as exc:
        print(f"{path}: {exc}", file=stderr)
        raise SystemExit(EXIT_IO)
    except OSError as exc:
        print(f"{path}: {exc}", file=stderr)
        raise SystemExit(EXIT_IO)


def _report(path, diags, strict, stderr) -> bool:
    """Print diagnostics; True when the file should count as failing."""
    failing = False
    for d in diags:
        print(f"{path}:{d.line}: {d.severity}: {d.code}: {d.message}", file=stderr)
        if d.severity == "error" or (strict and d.severity == "warning"):
            failing = True
    return failing


def cmd_validate(args, stdout, stderr) -> int:
    registry = _registry(args)
    failing = False
    for path in args.files:
        doc, parse_diags = _parse_or_exit(path, registry, stderr)
        diags = parse_diags + validate(doc, registry)
        if _report(path, diags, args.strict, stderr):
            failing = True
        else:
            print(f"{path}: ok", file=stdout)
    return EXIT_INVALID if failing else EXIT_OK


def _column_label(col) -> str:
    label = col.symbol
    if col.unit_text:
        label += f" [{col.unit_text}]"
    return label


def cmd_describe(args, stdout, stderr) -> int:
    registry = _registry(args)
    doc, diags = _parse_or_exit(args.file, registry, stderr)
    _report(args.file, diags + validate(doc, registry), args.strict, stderr)
    print(f"fmf-version: {doc.headline.fmf_version}", file=stdout)
    print(f"coding: {doc.headline.coding}", file=stdout)
    print(f"delimiter: {doc.headline.delimiter.kind}", file=stdout)
    for sec in doc.sections:
        print(f"[{sec.name}] {len(sec.items)} items, {len(sec.rows)} rows",
              file=stdout)
    for table in doc.tables:
        name = table.name or "(unnamed)"
        print(f"table {name} ({table.symbol or '-'}): "
              f"{len(table.rows)} rows", file=stdout)
        for col in table.columns:
            print(f"  {col.name}, {_column_label(col)}", file=stdout)
    return EXIT_OK


def _csv_cell(node) -> str:
    if node.tag == TEXT:
        return node.payload
    return write_value(node)


def _export_csv(table: Table, stdout) -> None:
    header = []
    extra_after = {}  # column index -> (header, constant text)
    for i, col in enumerate(table.columns):
        header.append(_column_label(col))
        err = col.error
        if err is not None and err.kind == "constant":
            unit = f" [{err.unit_text}]" if err.unit_text else ""
            extra_after[i] = (f"{col.symbol}_err{unit}", repr(err.magnitude))
    out_header = []
    for i, h in enumerate(header):
        out_header.append(h)
        if i in extra_after:
            out_header.append(extra_after[i][0])
    writer = csv.writer(stdout, lineterminator="\n")
    writer.writerow(out_header)
    for row in table.rows:
        cells = []
        for i, cell in enumerate(row):
            cells.append(_csv_cell(cell))
            if i in extra_after:
                cells.append(extra_after[i][1])
        writer.writerow(cells)


def _json_value(node):
    if node.tag == LIST:
        return [_json_value(el) for el in node.payload]
    if node.tag == TEXT:
        return node.payload
    if node.tag == "boolean":
        return node.payload
    if node.tag in ("integer", "real"):
        return node.payload.value
    return write_value(node)


def _export_records(doc: Document, table: Table, stdout) -> None:
    metadata = {}
    for sec in doc.sections:
        if sec.rows or sec.name.startswith("*data"):
            continue
        metadata[sec.name] = {item.key: _json_value(item.value)
                              for item in sec.items}
    record = {
        "table": {"name": table.name, "symbol": table.symbol},
        "columns": [{"name": c.name, "symbol": c.symbol,
                     "dependencies": list(c.dependencies),
                     "unit": c.unit_text,
                     "error": None if c.error is None else {
                         "kind": c.error.kind,
                         "magnitude": c.error.magnitude,
                         "unit": c.error.unit_text,
                         "ref": c.error.ref_symbol,
                     }}
                    for c in table.columns],
        "rows": [[_json_value(c) for c in row] for row in table.rows],
        "metadata": metadata,
    }
    json.dump(record, stdout, indent=2)
    stdout.write("\n")


def cmd_export(args, stdout, stderr) -> int:
    registry = _registry(args)
    doc, diags = _parse_or_exit(args.file, registry, stderr)
    all_diags = diags + validate(doc, registry)
    if _report(args.file, all_diags, args.strict, stderr):
        return EXIT_INVALID
    table = None
    for t in doc.tables:
        if t.symbol == (args.table or ""):
            table = t
            break
    if table is None:
        print(f"{args.file}: no table with symbol {args.table!r}", file=stderr)
        return EXIT_USAGE
    if args.format == "csv":
        _export_csv(table, stdout)
    else:
        _export_records(doc, table, stdout)
    return EXIT_OK


def cmd_index(args, stdout, stderr) -> int:
    registry = _registry(args)
    paths = collect_fmf_files(args.dir)
    notices = []
    try:
        index = build_index(paths, registry, notices)
    except (NoHeadline, UnknownCoding, OSError) as exc:
        print(str(exc), file=stderr)
        return EXIT_IO
    for note in notices:
        print(note, file=stderr)
    try:
        save_index(index, args.output)
    except OSError as exc:
        print(str(exc), file=stderr)
        return EXIT_IO
    print(f"indexed {len(index.entries)} quantities from {len(paths)} files",
          file=stdout)
    return EXIT_OK


def cmd_query(args, stdout, stderr) -> int:
    from .values import parse_quantity

    registry = _registry(args)
    try:
        index = load_index(args.index)
        lo = parse_quantity(args.min, registry)
        hi = parse_quantity(args.max, registry)
        hits = query(index, args.dim, lo, hi, registry)
    except FmfError as exc:
        print(str(exc), file=stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(str(exc), file=stderr)
        return EXIT_IO
    for e in hits:
        print(f"{e.path}\t[{e.section}]\t{e.key}\t{e.fv.q0!r}", file=stdout)
    return EXIT_OK


def cmd_fmt(args, stdout, stderr) -> int:
    registry = _registry(args)
    doc, diags = _parse_or_exit(args.file, registry, stderr)
    if _report(args.file, diags + validate(doc, registry), args.strict, stderr):
        return EXIT_INVALID
    data = write_document(doc, crlf=args.crlf)
    if args.stdout:
        stdout.write(data.decode(doc.headline.coding))
    else:
        with open(args.file, "wb") as fh:
            fh.write(data)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fmf", description="Parse, validate, export and search "
        "Full-Metadata Format files.")
    parser.add_argument("--strict", action="store_true",
                        help="treat warnings as errors")
    parser.add_argument("--currency-table", metavar="PATH",
                        help="currency rate table (CODE<TAB>rate-per-EUR); "
                        "defaults to $FMF_CURRENCY_TABLE")
    parser.add_argument("--lenient-prefixes", action="store_true",
                        help="accept 'h' as 100 and remap 'da' to 10")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check files and report diagnostics")
    p.add_argument("files", nargs="+")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("describe", help="list sections, tables and columns")
    p.add_argument("file")
    p.set_defaults(func=cmd_describe)

    p = sub.add_parser("export", help="export one table")
    p.add_argument("file")
    p.add_argument("--table", default="", help="table symbol (default: the "
                   "single unnamed table)")
    p.add_argument("--format", choices=("csv", "records"), default="csv")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("index", help="index all .fmf files under a directory")
    p.add_argument("dir")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("query", help="dimension + interval search")
    p.add_argument("index")
    p.add_argument("--dim", required=True, help="unit expression, e.g. J")
    p.add_argument("--min", required=True, help='lower bound, e.g. "1 kJ"')
    p.add_argument("--max", required=True, help='upper bound, e.g. "1 MJ"')
    p.set_defaults(func=cmd_query)

    p = sub.add_parser("fmt", help="canonical rewrite")
    p.add_argument("file")
    p.add_argument("--stdout", action="store_true",
                   help="print instead of rewriting in place")
    p.add_argument("--crlf", action="store_true", help="emit CRLF line endings")
    p.set_defaults(func=cmd_fmt)

    return parser


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args, stdout, stderr)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_IO


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
