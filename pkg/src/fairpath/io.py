"""Data ingestion and graph file round-tripping."""

import csv
import io as _io
import warnings

import numpy as np

from .errors import DataError
from .graphs import MixedGraph, format_edge_list, parse_edge_list
from .stats import BINARY, CONTINUOUS, Dataset

_MISSING_TOKENS = {"", "na", "nan", "null", "none", "?"}


def load_csv(path, kind_hints=None, return_dropped=False):
    """Load a numeric CSV with a header row into a Dataset.

    Columns whose value set is a subset of {0, 1} are typed binary unless
    ``kind_hints`` (name -> kind) overrides. Rows with any missing cell are
    dropped with a warning carrying the count. Non-numeric cells are errors
    that name the row and column.
    """
    with open(path, "r", newline="", encoding="utf-8") as fh:
        return _load_csv_stream(fh, str(path), kind_hints, return_dropped)


def loads_csv(text, kind_hints=None, return_dropped=False):
    return _load_csv_stream(_io.StringIO(text), "<string>", kind_hints,
                            return_dropped)


def _load_csv_stream(fh, label, kind_hints, return_dropped):
    reader = csv.reader(fh)
    try:
        header = next(reader)
    except StopIteration:
        raise DataError(f"{label}: empty file") from None
    names = [h.strip() for h in header]
    if any(not nm for nm in names):
        raise DataError(f"{label}: blank column name in header")

    rows = []
    dropped = 0
    for lineno, rec in enumerate(reader, start=2):
        if not rec or all(not cell.strip() for cell in rec):
            continue
        if len(rec) != len(names):
            raise DataError(
                f"{label}: row {lineno} has {len(rec)} cells, expected {len(names)}"
            )
        parsed = []
        missing = False
        for col, cell in enumerate(rec):
            cell = cell.strip()
            if cell.lower() in _MISSING_TOKENS:
                missing = True
                break
            try:
                parsed.append(float(cell))
            except ValueError:
                raise DataError(
                    f"{label}: non-numeric cell at row {lineno}, "
                    f"column {names[col]!r}: {cell!r}"
                ) from None
        if missing:
            dropped += 1
            continue
        rows.append(parsed)
    if not rows:
        raise DataError(f"{label}: no data rows")
    if dropped:
        warnings.warn(f"{label}: dropped {dropped} rows with missing cells")

    values = np.asarray(rows, dtype=np.float64)
    hints = {k.lower(): v for k, v in (kind_hints or {}).items()}
    kinds = []
    for j, nm in enumerate(names):
        hint = hints.get(nm.lower())
        if hint is not None:
            if hint not in (BINARY, CONTINUOUS):
                raise DataError(f"bad kind hint for {nm!r}: {hint!r}")
            kinds.append(hint)
        else:
            col = values[:, j]
            kinds.append(BINARY if np.all((col == 0) | (col == 1)) else CONTINUOUS)
    data = Dataset(values, tuple(names), tuple(kinds))
    return (data, dropped) if return_dropped else data


def save_csv(data: Dataset, path) -> None:
    """Write a Dataset back out; binary columns as integers."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(data.names)
        binary = [k == BINARY for k in data.kinds]
        for row in data.values:
            writer.writerow(
                [int(v) if b else repr(float(v)) for v, b in zip(row, binary)]
            )


def load_graph(path) -> MixedGraph:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_edge_list(fh.read())


def save_graph(graph: MixedGraph, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_edge_list(graph))
