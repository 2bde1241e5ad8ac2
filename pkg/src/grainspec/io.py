"""CSV result tables with provenance headers."""
import datetime
import json
import math
import os
from dataclasses import dataclass, field

from . import __version__

SCHEMAS = {
    "bands": ("k_x", "k_y", "band_index", "lambda"),
    "flow": ("t", "branch", "lambda", "count_below_a"),
    "crossings": ("E", "t_E", "lambda"),
    "fill": ("theta", "n", "alpha", "beta", "count", "residual", "interface_count", "center"),
    "scaling": ("n", "theta", "alpha", "beta", "N", "N_over_n", "N_over_nlogn"),
    "align": ("m", "N", "res_x", "res_y"),
    "localize": ("family", "n", "theta", "E", "w", "M", "slope"),
    "muffin": ("j", "xi", "eta", "k", "lambda"),
    "heights": ("height", "index", "lambda"),
    "decouple": ("height", "norm"),
}

INCOMPLETE = "# INCOMPLETE"


def format_value(value):
    """17 significant digits for floats so doubles round-trip exactly."""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        return f"{value:.17g}"
    if hasattr(value, "item"):
        return format_value(value.item())
    return str(value)


@dataclass
class ResultTable:
    schema: str
    rows: list = field(default_factory=list)
    config_sha256: str = ""
    code_version: str = __version__

    def __post_init__(self):
        if self.schema not in SCHEMAS:
            raise ValueError(f"unknown schema {self.schema!r}")

    @property
    def columns(self):
        return SCHEMAS[self.schema]

    def header(self):
        return (f"# schema: {self.schema}\n# config_sha256: {self.config_sha256}\n"
                f"# code_version: {self.code_version}\n" + ",".join(self.columns) + "\n")

    def body(self):
        width = len(self.columns)
        out = []
        for row in self.rows:
            if len(row) != width:
                raise ValueError(f"row {row!r} does not match schema {self.schema}")
            out.append(",".join(format_value(v) for v in row) + "\n")
        return "".join(out)


class TableWriter:
    """Writes the header at once and the body on success.

    If the run fails or is interrupted, the file is closed with a trailing
    ``# INCOMPLETE`` line so partial output is never mistaken for a result.
    The wall-clock timestamp lives in a ``.meta.json`` sidecar so that the
    CSV itself is reproducible byte for byte.
    """

    def __init__(self, path, table):
        self.path, self.table = str(path), table

    def __enter__(self):
        folder = os.path.dirname(os.path.abspath(self.path))
        os.makedirs(folder, exist_ok=True)
        self.fh = open(self.path, "w", encoding="utf-8", newline="")
        self.fh.write(self.table.header())
        self.fh.flush()
        return self

    def __exit__(self, exc_type, exc, tb):
        try:
            if exc_type is None:
                self.fh.write(self.table.body())
            else:
                self.fh.write(INCOMPLETE + "\n")
        finally:
            self.fh.close()
        if exc_type is None:
            meta = {"schema": self.table.schema, "config_sha256": self.table.config_sha256,
                    "code_version": self.table.code_version, "rows": len(self.table.rows),
                    "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat()}
            with open(self.path + ".meta.json", "w", encoding="utf-8") as fh:
                json.dump(meta, fh, indent=2)
                fh.write("\n")
        return False


def read_table(path):
    """(header dict, column names, rows as string lists, complete flag)."""
    header, columns, rows, complete = {}, None, [], True
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.rstrip("\n")
            if line == INCOMPLETE:
                complete = False
            elif line.startswith("# "):
                key, _, value = line[2:].partition(": ")
                header[key] = value
            elif columns is None:
                columns = line.split(",")
            elif line:
                rows.append(line.split(","))
    return header, columns, rows, complete
