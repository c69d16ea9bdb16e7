"""CSV ingestion and JSON/CSV emission.

Floats are always written with 17 significant digits so that every value
survives a write/read round trip exactly. NaN and infinities are refused.
"""

import csv
import io
import json
import math

import numpy as np

from .stats import DataMatrix

SCHEMA_VERSION = 1


class CsvFormatError(ValueError):
    """A CSV cell or row could not be turned into numbers."""

    def __init__(self, message, row=None, column=None):
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column}")
        super().__init__(f"{message} ({', '.join(where)})" if where else message)
        self.row = row
        self.column = column


def format_float(v):
    v = float(v)
    if not math.isfinite(v):
        raise ValueError(f"non-finite value {v!r} cannot be serialized")
    text = format(v, ".17g")
    if not any(ch in text for ch in ".en"):
        text += ".0"
    return text


def _encode(obj, indent, level):
    pad = "\n" + " " * (indent * (level + 1)) if indent else ""
    end = "\n" + " " * (indent * level) if indent else ""
    sep = "," + pad if indent else ", "
    if obj is None or isinstance(obj, (bool, np.bool_)):
        return json.dumps(None if obj is None else bool(obj))
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return format_float(obj)
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{json.dumps(str(k))}: {_encode(obj[k], indent, level + 1)}"
                 for k in sorted(obj, key=str)]
        return "{" + pad + sep.join(items) + end + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        if len(obj) == 0:
            return "[]"
        flat = not any(isinstance(v, (dict, list, tuple, np.ndarray))
                       for v in obj)
        if flat:
            return "[" + ", ".join(_encode(v, 0, level + 1) for v in obj) + "]"
        parts = sep.join(_encode(v, indent, level + 1) for v in obj)
        return "[" + pad + parts + end + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj, indent=2):
    """Deterministic JSON: sorted keys, 17-digit floats, no NaN/Inf."""
    return _encode(obj, indent, 0)


def write_json(path, obj):
    text = dumps(obj) + "\n"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def read_json(path):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def _cell(text, row, column):
    s = text.strip()
    try:
        v = float(s)
    except ValueError:
        raise CsvFormatError(f"non-numeric value {text!r}", row, column) from None
    if not math.isfinite(v):
        raise CsvFormatError(f"missing or non-finite value {text!r}", row, column)
    return v


def ingest_csv(path, response, header=True):
    """Read a rectangular numeric CSV into a DataMatrix.

    Parameters
    ----------
    path : str or path-like
    response : str or int
        Name (needs a header) or 0-based position of the response column.
    header : bool
        Whether the first row holds column names. Without one, covariates
        are named x1..xp.

    Rows and columns in error messages are 1-based as in a spreadsheet.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    rows = [r for r in rows if r and any(c.strip() for c in r)]
    if not rows:
        raise CsvFormatError("empty file")
    names = None
    if header:
        names = [c.strip() for c in rows[0]]
        body, first = rows[1:], 2
    else:
        body, first = rows, 1
    if not body:
        raise CsvFormatError("no data rows")
    width = len(names) if names is not None else len(body[0])
    values = np.empty((len(body), width))
    for i, r in enumerate(body):
        if len(r) != width:
            raise CsvFormatError(
                f"expected {width} fields, found {len(r)}", row=first + i)
        for j, text in enumerate(r):
            values[i, j] = _cell(text, first + i, j + 1)

    if isinstance(response, str) and not response.lstrip("-").isdigit():
        if names is None:
            raise ValueError("a response name needs a header row")
        if response not in names:
            raise ValueError(f"response column {response!r} not in header")
        col = names.index(response)
    else:
        col = int(response)
        if not -width <= col < width:
            raise ValueError(f"response index {col} out of range")
        col %= width
    keep = [j for j in range(width) if j != col]
    if names is not None:
        cov_names = [names[j] for j in keep]
    else:
        cov_names = [f"x{k + 1}" for k in range(len(keep))]
    return DataMatrix(values[:, keep], values[:, col], tuple(cov_names))


def csv_text(header, rows):
    """CSV text with floats at 17 significant digits."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([format_float(v) if isinstance(v, (float, np.floating))
                         else v for v in row])
    return buf.getvalue()


def write_csv(path, header, rows):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(csv_text(header, rows))


def emit_data_csv(path, d, response_name="y"):
    """Write a DataMatrix as CSV with the response in the last column."""
    header = list(d.names) + [response_name]
    rows = [list(map(float, xi)) + [float(yi)] for xi, yi in zip(d.x, d.y)]
    write_csv(path, header, rows)
