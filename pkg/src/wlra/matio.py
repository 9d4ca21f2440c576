"""Matrix and CSV file I/O.

Matrix text format (shared by every command): first line ``rows cols``,
then ``rows`` lines of ``cols`` space-separated decimal floats, UTF-8,
'.' decimal separator. Floats are written with 17 significant digits so
float64 values round-trip exactly.

CSV output: header row, comma-separated, floats at 17 significant
digits, LF line endings.
"""

from __future__ import annotations

import os
import tempfile
from pathlib import Path

import numpy as np

from .errors import MatrixFormatError
from .linalg import as_matrix


def format_float(x: float) -> str:
    return f"{float(x):.17g}"


def matrix_to_text(a) -> str:
    a = as_matrix(a)
    m, n = a.shape
    lines = [f"{m} {n}"]
    for row in a:
        lines.append(" ".join(format_float(x) for x in row))
    return "\n".join(lines) + "\n"


def text_to_matrix(text: str, source: str = "<string>") -> np.ndarray:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise MatrixFormatError(f"{source}: empty matrix file")
    header = lines[0].split()
    if len(header) != 2:
        raise MatrixFormatError(f"{source}: header must be 'rows cols', got {lines[0]!r}")
    try:
        m, n = int(header[0]), int(header[1])
    except ValueError as exc:
        raise MatrixFormatError(f"{source}: bad header {lines[0]!r}") from exc
    if m < 0 or n < 0:
        raise MatrixFormatError(f"{source}: negative dimensions {m}x{n}")
    body = lines[1:]
    if len(body) != m:
        raise MatrixFormatError(f"{source}: expected {m} rows, found {len(body)}")
    out = np.empty((m, n), dtype=float)
    for i, ln in enumerate(body):
        parts = ln.split()
        if len(parts) != n:
            raise MatrixFormatError(
                f"{source}: row {i + 1} has {len(parts)} entries, expected {n}"
            )
        try:
            out[i, :] = [float(p) for p in parts]
        except ValueError as exc:
            raise MatrixFormatError(f"{source}: row {i + 1} has a non-numeric entry") from exc
    if out.size and not np.isfinite(out).all():
        raise MatrixFormatError(f"{source}: matrix contains non-finite entries")
    return out


def matrix_to_csv_text(a) -> str:
    """Comma-separated form used by ``convert``: no header, one line per row."""
    a = as_matrix(a)
    return "\n".join(",".join(format_float(x) for x in row) for row in a) + "\n"


def csv_text_to_matrix(text: str, source: str = "<string>") -> np.ndarray:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise MatrixFormatError(f"{source}: empty CSV matrix")
    rows = []
    width = None
    for i, ln in enumerate(lines):
        parts = [p.strip() for p in ln.split(",")]
        if width is None:
            width = len(parts)
        elif len(parts) != width:
            raise MatrixFormatError(
                f"{source}: row {i + 1} has {len(parts)} entries, expected {width}"
            )
        try:
            rows.append([float(p) for p in parts])
        except ValueError as exc:
            raise MatrixFormatError(f"{source}: row {i + 1} has a non-numeric entry") from exc
    return np.asarray(rows, dtype=float)


def atomic_write_text(path, text: str) -> None:
    """Write to a temp file in the target directory, then rename. Ensures
    no partial output exists on failure."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def write_matrix(path, a) -> None:
    atomic_write_text(path, matrix_to_text(a))


def read_matrix(path) -> np.ndarray:
    with open(path, "r", encoding="utf-8") as fh:
        return text_to_matrix(fh.read(), source=str(path))


def _format_cell(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return format_float(x)


def csv_text(columns, rows) -> str:
    """Render a table to CSV: header row, LF endings, 17-digit floats."""
    out = [",".join(columns)]
    for row in rows:
        if len(row) != len(columns):
            raise ValueError(f"row width {len(row)} != header width {len(columns)}")
        out.append(",".join(_format_cell(x) for x in row))
    return "\n".join(out) + "\n"


def write_csv(path, columns, rows) -> None:
    atomic_write_text(path, csv_text(columns, rows))
