"""Comparison-matrix CSV import and export.

The on-disk format is one aggregated row per ordered pair:

    item_a,item_b,count_a_wins

Unknown labels are appended to the item list in order of first appearance.
A header row is written on export and tolerated on import. Only observed
counts travel through files; virtual priors are applied by the consumer.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np

from .bt import ComparisonMatrix
from .errors import DatasetFormatError


def parse_matrix_csv(text: str) -> tuple[list[str], ComparisonMatrix]:
    """Parse CSV text into item labels and an observed-count matrix."""
    items: list[str] = []
    index: dict[str, int] = {}
    rows: list[tuple[int, int, int]] = []

    def item_id(label: str) -> int:
        if label not in index:
            index[label] = len(items)
            items.append(label)
        return index[label]

    reader = csv.reader(io.StringIO(text))
    for line_number, row in enumerate(reader, start=1):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if line_number == 1 and [c.strip().lower() for c in row[:3]] == ["item_a", "item_b", "count_a_wins"]:
            continue
        if len(row) != 3:
            raise DatasetFormatError(
                f"expected 3 fields item_a,item_b,count_a_wins, got {len(row)}", line_number
            )
        a, b, raw_count = (c.strip() for c in row)
        if not a or not b:
            raise DatasetFormatError("empty item label", line_number)
        if a == b:
            raise DatasetFormatError(f"pair compares item {a!r} with itself", line_number)
        try:
            count = int(raw_count)
        except ValueError:
            raise DatasetFormatError(f"count {raw_count!r} is not an integer", line_number) from None
        if count < 0:
            raise DatasetFormatError(f"negative count {count}", line_number)
        rows.append((item_id(a), item_id(b), count))

    n = len(items)
    counts = np.zeros((n, n), dtype=np.int64)
    for i, j, count in rows:
        counts[i, j] += count
    return items, ComparisonMatrix(counts, prior_count=0)


def read_matrix_csv(path) -> tuple[list[str], ComparisonMatrix]:
    return parse_matrix_csv(Path(path).read_text())


def format_matrix_csv(items: list[str], matrix: ComparisonMatrix) -> str:
    """Render observed counts (priors stripped) back into CSV text."""
    observed = matrix.observed_counts()
    out = io.StringIO()
    writer = csv.writer(out)
    writer.writerow(["item_a", "item_b", "count_a_wins"])
    for i in range(matrix.n):
        for j in range(matrix.n):
            if i != j and observed[i, j] > 0:
                writer.writerow([items[i], items[j], int(observed[i, j])])
    return out.getvalue()


def write_matrix_csv(path, items: list[str], matrix: ComparisonMatrix) -> None:
    Path(path).write_text(format_matrix_csv(items, matrix))
