"""Versioned CSV reading for the simulation outputs.

The simulation CLI writes CSVs whose first line is a schema tag comment
(for example ``# trimer-sweep-csv v1``) followed by a column-name header and
data rows. This module is the only coupling between the plotting package and
the simulation package: plots consume the files, never the code.
"""

import csv
import math

KNOWN_SCHEMAS = ("trimer-sweep-csv v1",)


class SchemaError(ValueError):
    """CSV does not conform to a recognized schema."""


class Table:
    """Columns of floats (or strings where not numeric) keyed by name."""

    def __init__(self, schema, columns, rows):
        self.schema = schema
        self.columns = columns
        self.rows = rows

    def __len__(self):
        return len(self.rows)

    def column(self, name):
        if name not in self.columns:
            raise SchemaError(f"missing column {name!r}")
        i = self.columns.index(name)
        out = []
        for row in self.rows:
            try:
                out.append(float(row[i]))
            except ValueError:
                out.append(math.nan)
        return out

    def require(self, *names):
        missing = [n for n in names if n not in self.columns]
        if missing:
            raise SchemaError(f"missing column {missing[0]!r}")


def read_table(path):
    with open(path, newline="") as fh:
        header = fh.readline().strip()
        if not header.startswith("# ") or header[2:] not in KNOWN_SCHEMAS:
            raise SchemaError(f"unrecognized CSV schema line {header!r}")
        reader = csv.reader(fh)
        try:
            columns = next(reader)
        except StopIteration:
            raise SchemaError("CSV has no column header") from None
        rows = [row for row in reader if row and any(cell for cell in row)]
    if not rows:
        raise SchemaError("CSV contains no data rows")
    return Table(header[2:], columns, rows)
