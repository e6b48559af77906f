"""Shared CSV writing with repr-exact floats.

Sweep files are reproducibility artifacts: floats are written with repr so
re-reading a row recovers the original values bit for bit.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np


def format_cell(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


def write_rows(path: str, header: Sequence[str], rows: Sequence[Sequence]) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(format_cell(cell) for cell in row) for row in rows)
    Path(path).write_text("\n".join(lines) + "\n")
