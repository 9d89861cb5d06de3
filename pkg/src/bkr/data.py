"""Typed mixed-type tables and their CSV + JSON-schema storage format.

A dataset is a CSV file (UTF-8, comma separated, header row) plus a JSON
sidecar describing each column::

    {"columns": [
        {"name": "price", "type": "numeric"},
        {"name": "zone", "type": "categorical"},
        {"name": "image", "type": "numeric-vector", "dim": 4096},
        {"name": "title", "type": "string", "kernel": "edit-rbf", "lengthscale": 3.0}
    ]}

Vector cells hold ``;``-joined numbers.  An empty cell is missing.
"""

import csv
import json
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, DegenerateKernelError
from .kernels import KERNELS, default_kernel, resolve_kernel

TYPES = ("numeric", "numeric-vector", "categorical", "string")


def _all_equal(values):
    if isinstance(values, list):
        return len(set(values)) == 1
    return bool(np.all(values == values[0]))


@dataclass
class Column:
    """One variable: a name, a type, ``n`` values and a missingness mask.

    ``values`` is a float array of shape ``(n,)`` for ``numeric``, ``(n, d)``
    for ``numeric-vector``, and a ``str`` array otherwise.  ``mask`` is True
    where a value is missing.
    """

    name: str
    kind: str
    values: np.ndarray
    mask: np.ndarray = None
    kernel: str = "auto"
    lengthscale: float = None

    def __post_init__(self):
        if self.kind not in TYPES:
            raise DataError(f"column {self.name!r}: unknown type {self.kind!r}")
        if self.kernel != "auto" and self.kernel not in KERNELS:
            raise DataError(f"column {self.name!r}: unknown kernel {self.kernel!r}")
        if self.kind in ("numeric", "numeric-vector"):
            v = np.asarray(self.values, dtype=float)
            if self.kind == "numeric-vector" and v.ndim == 1:
                v = v[:, None]
            if v.ndim != (1 if self.kind == "numeric" else 2):
                raise DataError(f"column {self.name!r}: bad shape {v.shape} for {self.kind}")
        else:
            v = np.asarray(self.values).astype(str)
            if v.ndim != 1:
                raise DataError(f"column {self.name!r}: labels must be 1-d")
        self.values = v
        if self.mask is None:
            self.mask = np.zeros(len(v), dtype=bool)
        self.mask = np.asarray(self.mask, dtype=bool)
        if self.mask.shape != (len(v),):
            raise DataError(f"column {self.name!r}: mask length does not match values")
        if self.kind in ("numeric", "numeric-vector"):
            present = v[~self.mask]
            if not np.all(np.isfinite(present)):
                raise DataError(f"column {self.name!r}: non-finite numeric entries")

    def __len__(self):
        return len(self.values)

    @property
    def dim(self):
        return self.values.shape[1] if self.kind == "numeric-vector" else None

    @property
    def kernel_kind(self):
        return default_kernel(self.kind) if self.kernel == "auto" else self.kernel

    def take(self, rows):
        rows = np.asarray(rows)
        return Column(self.name, self.kind, self.values[rows], self.mask[rows],
                      self.kernel, self.lengthscale)

    def kernel_spec(self, rows=None):
        """Resolve this column's kernel on the given rows (median heuristic if needed)."""
        v = self.values if rows is None else self.values[rows]
        if self.kind == "string":
            v = list(v)
        if self.lengthscale is None and len(v) and _all_equal(v):
            # no positive distance for the median heuristic
            raise DegenerateKernelError(self.name)
        return resolve_kernel(v, self.kernel_kind, self.lengthscale)

    def schema(self):
        d = {"name": self.name, "type": self.kind}
        if self.kind == "numeric-vector":
            d["dim"] = int(self.dim)
        if self.kernel != "auto":
            d["kernel"] = self.kernel
        if self.lengthscale is not None:
            d["lengthscale"] = self.lengthscale
        return d


@dataclass
class Dataset:
    columns: list = field(default_factory=list)

    def __post_init__(self):
        lengths = {len(c) for c in self.columns}
        if len(lengths) > 1:
            raise DataError(f"columns have unequal lengths {sorted(lengths)}")
        names = [c.name for c in self.columns]
        if len(set(names)) != len(names):
            raise DataError("duplicate column names")

    @property
    def n(self):
        return len(self.columns[0]) if self.columns else 0

    @property
    def names(self):
        return [c.name for c in self.columns]

    def __getitem__(self, key):
        if isinstance(key, str):
            for c in self.columns:
                if c.name == key:
                    return c
            raise KeyError(key)
        return self.columns[key]

    def index(self, name):
        return self.names.index(name)

    def missing(self):
        """``(n, k)`` boolean missingness mask."""
        return np.column_stack([c.mask for c in self.columns])

    def is_complete(self):
        return not self.missing().any()

    def complete_rows(self, names=None):
        cols = self.columns if names is None else [self[c] for c in names]
        return np.flatnonzero(~np.any([c.mask for c in cols], axis=0))

    def select(self, names):
        return Dataset([self[c] for c in names])

    def take(self, rows):
        return Dataset([c.take(rows) for c in self.columns])

    def schema(self):
        return {"columns": [c.schema() for c in self.columns]}


_VEC = re.compile(r"^numeric-vector\((\d+)\)$")


def parse_schema(obj):
    """Normalise a schema dict into a list of column entries."""
    cols = obj["columns"] if isinstance(obj, dict) else obj
    out = []
    for entry in cols:
        entry = dict(entry)
        kind = entry.get("type")
        m = _VEC.match(kind or "")
        if m:
            kind = "numeric-vector"
            entry.setdefault("dim", int(m.group(1)))
        if kind not in TYPES:
            raise DataError(f"schema column {entry.get('name')!r}: unknown type {kind!r}")
        if kind == "numeric-vector" and int(entry.get("dim", 0)) < 1:
            raise DataError(f"schema column {entry['name']!r}: numeric-vector needs dim >= 1")
        entry["type"] = kind
        entry.setdefault("kernel", "auto")
        entry.setdefault("lengthscale", None)
        out.append(entry)
    return out


def _parse_float(text, row, name):
    try:
        x = float(text)
    except ValueError:
        raise DataError(f"row {row}, column {name!r}: cannot parse {text!r} as a number") from None
    if not np.isfinite(x):
        raise DataError(f"row {row}, column {name!r}: non-finite value {text!r}")
    return x


def load_dataset(csv_path, schema_path):
    """Read a CSV file and its JSON schema into a :class:`Dataset`.

    Raises
    ------
    DataError
        On a header/schema mismatch, an unparsable cell or a vector cell of
        the wrong length; the message names the row (1-based, header
        excluded) and column.
    """
    with open(schema_path, encoding="utf-8") as fh:
        schema = parse_schema(json.load(fh))
    with open(csv_path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{csv_path}: empty file") from None
        rows = [r for r in reader if r]
    names = [e["name"] for e in schema]
    if header != names:
        raise DataError(f"CSV header {header} does not match schema columns {names}")
    columns = []
    for j, entry in enumerate(schema):
        name, kind = entry["name"], entry["type"]
        n = len(rows)
        mask = np.zeros(n, dtype=bool)
        if kind == "numeric":
            vals = np.full(n, np.nan)
        elif kind == "numeric-vector":
            vals = np.full((n, int(entry["dim"])), np.nan)
        else:
            vals = np.full(n, "", dtype=object)
        for i, r in enumerate(rows, 1):
            if len(r) != len(names):
                raise DataError(f"row {i}: expected {len(names)} fields, found {len(r)}")
            cell = r[j]
            if cell == "":
                mask[i - 1] = True
                continue
            if kind == "numeric":
                vals[i - 1] = _parse_float(cell, i, name)
            elif kind == "numeric-vector":
                parts = cell.split(";")
                if len(parts) != vals.shape[1]:
                    raise DataError(
                        f"row {i}, column {name!r}: ragged vector of length {len(parts)}, "
                        f"expected {vals.shape[1]}"
                    )
                vals[i - 1] = [_parse_float(p, i, name) for p in parts]
            else:
                vals[i - 1] = cell
        columns.append(Column(name, kind, vals, mask, entry["kernel"], entry["lengthscale"]))
    return Dataset(columns)


def _format_cell(col, i):
    if col.mask[i]:
        return ""
    v = col.values[i]
    if col.kind == "numeric":
        return repr(float(v))
    if col.kind == "numeric-vector":
        return ";".join(repr(float(x)) for x in v)
    return str(v)


def write_dataset(dataset, csv_path, schema_path=None):
    """Write ``dataset`` as CSV (floats in shortest round-trip form) plus JSON schema."""
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(dataset.names)
        for i in range(dataset.n):
            w.writerow([_format_cell(c, i) for c in dataset.columns])
    if schema_path is not None:
        with open(schema_path, "w", encoding="utf-8") as fh:
            json.dump(dataset.schema(), fh, indent=2)
            fh.write("\n")
