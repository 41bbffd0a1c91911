"""Table writers shared by every command.

Floats are written with 17 significant digits so they parse back to the same
double.  Nothing time- or host-dependent goes into the metadata, which keeps
repeated runs byte-identical.  Files are written to a temporary sibling and
renamed into place, so a failed run never leaves a partial file behind.
"""

from __future__ import annotations

import json
import math
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

SCHEMA = "twospinon-table/1"
OUTPUT_DIR_ENV = "TWOSPINON_OUTPUT_DIR"
FORMATS = ("csv", "json")


def fmt_real(x) -> str:
    """17-significant-digit rendering; non-finite values become nan/inf tokens."""
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return format(x, ".17g")


def _json_value(x) -> str:
    s = fmt_real(x)
    return "null" if s in ("nan", "inf", "-inf") else s


@dataclass
class Table:
    columns: list
    rows: list
    metadata: dict = field(default_factory=dict)

    def to_csv(self) -> str:
        meta = json.dumps({"schema": SCHEMA, **self.metadata}, sort_keys=True, default=_plain)
        lines = [f"# {meta}", ",".join(self.columns)]
        lines.extend(",".join(fmt_real(v) for v in row) for row in self.rows)
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        head = json.dumps(
            {"schema": SCHEMA, "metadata": self.metadata, "columns": self.columns},
            sort_keys=True,
            indent=1,
            default=_plain,
        )
        body = ",\n".join("  [" + ", ".join(_json_value(v) for v in row) + "]" for row in self.rows)
        # splice the rows in by hand so every float keeps 17 digits
        return head[:-2] + ',\n "rows": [\n' + body + "\n ]\n}\n"

    def render(self, fmt: str) -> str:
        if fmt == "csv":
            return self.to_csv()
        if fmt == "json":
            return self.to_json()
        raise ValueError(f"unknown format {fmt!r}; expected one of {FORMATS}")


def _plain(obj):
    if hasattr(obj, "item"):
        return obj.item()
    if isinstance(obj, (tuple, set)):
        return list(obj)
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def read_csv(path) -> Table:
    """Parse a file produced by ``Table.to_csv``."""
    text = Path(path).read_text().splitlines()
    meta = json.loads(text[0][2:])
    meta.pop("schema", None)
    columns = text[1].split(",")
    rows = []
    for line in text[2:]:
        rows.append([_parse_cell(c) for c in line.split(",")])
    return Table(columns, rows, meta)


def _parse_cell(cell: str):
    if cell in ("true", "false"):
        return cell == "true"
    try:
        return int(cell)
    except ValueError:
        return float(cell)


def atomic_write(path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except FileNotFoundError:
            pass
        raise
    return path


def resolve_output(path, default_name: str, fmt: str) -> Path:
    """Explicit path if given, else ``default_name.fmt`` in the env-configured directory."""
    if path:
        return Path(path)
    base = Path(os.environ.get(OUTPUT_DIR_ENV, "."))
    return base / f"{default_name}.{fmt}"
