"""Labeled-matrix text files used for models and gains.

Layout::

    n = 12
    dt = 0.001
    A 12 12
    <row>
    ...

A block header is ``<label> <rows> <cols>`` followed by ``rows`` lines of
``cols`` space-separated numbers. Scalars are ``key = value`` lines.
Numbers are written with 17 significant digits, which round-trips doubles.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .errors import LogFormatError


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def dumps(scalars: dict[str, float | int], blocks: dict[str, np.ndarray]) -> str:
    lines = []
    for key, value in scalars.items():
        lines.append(f"{key} = {value if isinstance(value, int) else _fmt(value)}")
    for label, mat in blocks.items():
        mat = np.atleast_2d(np.asarray(mat, dtype=float))
        rows, cols = mat.shape
        lines.append(f"{label} {rows} {cols}")
        lines.extend(" ".join(_fmt(v) for v in row) for row in mat)
    return "\n".join(lines) + "\n"


def loads(text: str, source: str = "<string>"):
    """Parse a labeled-matrix file into ``(scalars, blocks)``."""
    scalars: dict[str, str] = {}
    blocks: dict[str, np.ndarray] = {}
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    pos = 0
    while pos < len(lines):
        line = lines[pos].strip()
        pos += 1
        if not line or line.startswith("#"):
            continue
        if "=" in line:
            key, _, value = line.partition("=")
            scalars[key.strip()] = value.strip()
            continue
        parts = line.split()
        try:
            label, rows, cols = parts[0], int(parts[1]), int(parts[2])
            if len(parts) != 3:
                raise ValueError
        except (IndexError, ValueError):
            raise LogFormatError(f"{source}:{pos}: bad block header {line!r}") from None
        if label in blocks:
            raise LogFormatError(f"{source}:{pos}: duplicate block {label!r}")
        mat = np.empty((rows, cols))
        for r in range(rows):
            if pos >= len(lines):
                raise LogFormatError(f"{source}: block {label!r} truncated")
            entries = lines[pos].split()
            pos += 1
            if len(entries) != cols:
                raise LogFormatError(f"{source}:{pos}: block {label!r} row {r} has {len(entries)} entries, expected {cols}")
            try:
                mat[r] = [float(v) for v in entries]
            except ValueError:
                raise LogFormatError(f"{source}:{pos}: non-numeric entry in block {label!r}") from None
        blocks[label] = mat
    return scalars, blocks


def write(path: str | Path, scalars, blocks) -> None:
    Path(path).write_text(dumps(scalars, blocks), encoding="utf-8", newline="\n")


def read(path: str | Path):
    path = Path(path)
    return loads(path.read_text(encoding="utf-8"), source=str(path))


def require(blocks: dict, labels, source="<file>"):
    missing = [lab for lab in labels if lab not in blocks]
    if missing:
        raise LogFormatError(f"{source}: missing block(s) {', '.join(missing)}")
