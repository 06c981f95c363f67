"""Full-Metadata Format (FMF) toolkit: parse, validate, serialize and
search self-documenting tabular data files with physical units and
measurement uncertainties."""

from .errors import FmfError
from .model import (
    ColumnSpec,
    DelimiterSpec,
    Diagnostic,
    Document,
    ErrorSpec,
    HeadlineParams,
    Item,
    Section,
    Table,
    get_item,
    pair_tables,
    resolve_cell,
    validate,
)
from .reader import parse_document, parse_path, sniff_headline
from .search import Index, IndexEntry, build_index, index_document, load_index, query, save_index
from .units import (
    AffineUnit,
    DimensionVector,
    FeatureVector,
    LinearUnit,
    QuantityValue,
    UnitRegistry,
    compatible,
    convert,
    default_registry,
    feature_vector,
    to_si,
)
from .values import (
    NumberValue,
    Timestamp,
    Uncertainty,
    ValueNode,
    parse_number,
    parse_quantity,
    parse_string,
    parse_timestamp,
    parse_value,
    split_list,
)
from .writer import write_document, write_value

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
