"""Reading, writing and checking r-largest datasets.

File format (UTF-8 CSV, ``.`` decimal separator)::

    # comment lines start with '#'
    block,x1,x2,x3
    1931,103,99,98
    1935,115,107

One row per block; values are nonincreasing left to right.  Trailing empty
cells make a block shorter than the others.
"""
from __future__ import annotations

import csv
import io
import os
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from .errors import EmptyDataset, OrderViolation, ParseError
from .inference import RLargestSample

__all__ = [
    "load",
    "loads",
    "save",
    "dumps",
    "validate",
    "ValidationReport",
    "venice",
    "venice_maxima",
    "venice_path",
    "VENICE_FILENAME",
]

VENICE_FILENAME = "venice.csv"


def _label(text: str):
    text = text.strip()
    try:
        return int(text)
    except ValueError:
        return text


def loads(text: str, r_cap: Optional[int] = None) -> RLargestSample:
    """Parse dataset text; see :func:`load`."""
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    if not lines:
        raise EmptyDataset("dataset has no header and no rows")
    reader = csv.reader(lines)
    header = [h.strip() for h in next(reader)]
    expected = [f"x{j}" for j in range(1, len(header))]
    if len(header) < 2 or header[0].lower() != "block" or header[1:] != expected:
        raise ParseError(
            f"header must be 'block,x1,...,xR', got {','.join(header)!r}", row="header"
        )
    blocks, labels = [], []
    for cells in reader:
        label = _label(cells[0]) if cells else ""
        values = [c.strip() for c in cells[1:]]
        if len(values) > len(expected):
            raise ParseError(f"{len(values)} values but header has {len(expected)}", row=label)
        while values and values[-1] == "":
            values.pop()
        row = []
        for j, cell in enumerate(values):
            col = expected[j]
            if cell == "":
                raise ParseError("empty cell before the end of the row", row=label, column=col)
            try:
                v = float(cell)
            except ValueError:
                raise ParseError(f"not a number: {cell!r}", row=label, column=col) from None
            if not np.isfinite(v):
                raise ParseError(f"non-finite value {cell!r}", row=label, column=col)
            if row and v > row[-1]:
                raise OrderViolation(
                    f"{v} exceeds the previous value {row[-1]}; rows must be nonincreasing",
                    row=label, column=col,
                )
            row.append(v)
        if not row:
            raise ParseError("row has no values", row=label)
        if r_cap is not None:
            row = row[:r_cap]
        blocks.append(row)
        labels.append(label)
    if not blocks:
        raise EmptyDataset("dataset has a header but no rows")
    return RLargestSample(tuple(blocks), tuple(labels))


def load(path, r_cap: Optional[int] = None) -> RLargestSample:
    """Read a dataset file; keep at most ``r_cap`` values per block."""
    if r_cap is not None and r_cap < 1:
        raise ValueError("r_cap must be >= 1")
    with open(path, encoding="utf-8") as fh:
        return loads(fh.read(), r_cap)


def dumps(sample: RLargestSample, comment: Optional[str] = None) -> str:
    buf = io.StringIO()
    if comment:
        for line in comment.splitlines():
            buf.write(f"# {line}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["block"] + [f"x{j}" for j in range(1, sample.r_max + 1)])
    labels = sample.block_labels or tuple(range(1, sample.m + 1))
    for label, block in zip(labels, sample.blocks):
        cells = [repr(float(v)) for v in block]
        writer.writerow([label] + cells + [""] * (sample.r_max - len(cells)))
    return buf.getvalue()


def save(sample: RLargestSample, path, comment: Optional[str] = None) -> None:
    Path(path).write_text(dumps(sample, comment), encoding="utf-8")


@dataclass
class ValidationReport:
    m: int
    r_counts: dict
    minimum: float
    maximum: float
    duplicate_labels: list
    tied_values: int
    warnings: list = field(default_factory=list)

    @property
    def uniform_r(self) -> Optional[int]:
        return next(iter(self.r_counts)) if len(self.r_counts) == 1 else None


def validate(sample: RLargestSample) -> ValidationReport:
    """Summarize a sample without modifying it."""
    counts = Counter(int(n) for n in sample.lengths)
    allv = np.concatenate(sample.blocks)
    dupes = []
    if sample.block_labels is not None:
        dupes = sorted(str(k) for k, v in Counter(sample.block_labels).items() if v > 1)
    ties = int(sum(np.sum(np.diff(b) == 0) for b in sample.blocks))
    warnings = []
    if sample.m < 2:
        warnings.append("at least 2 blocks required for fitting")
    if dupes:
        warnings.append(f"duplicate block labels: {', '.join(dupes)}")
    if len(counts) > 1:
        warnings.append("ragged blocks: " + ", ".join(f"{n} block(s) with r={r}"
                                                     for r, n in sorted(counts.items())))
    return ValidationReport(
        m=sample.m,
        r_counts=dict(sorted(counts.items())),
        minimum=float(allv.min()),
        maximum=float(allv.max()),
        duplicate_labels=dupes,
        tied_values=ties,
        warnings=warnings,
    )


def _cache_dir() -> Path:
    base = os.environ.get("XDG_CACHE_HOME") or os.path.join(os.path.expanduser("~"), ".cache")
    return Path(base) / "rkappa"


def venice_path() -> Optional[Path]:
    """Location of the full Venice file, or None when it is not installed.

    Looked up in order: ``$RKAPPA_VENICE``, the package data directory, and
    the user cache directory written by ``python -m rkappa.fetch_venice``.
    """
    env = os.environ.get("RKAPPA_VENICE")
    candidates = [Path(env)] if env else []
    candidates.append(Path(str(resources.files("rkappa") / "data" / VENICE_FILENAME)))
    candidates.append(_cache_dir() / VENICE_FILENAME)
    for c in candidates:
        if c.is_file():
            return c
    return None


def venice(r_cap: Optional[int] = None) -> RLargestSample:
    """The ten largest annual sea levels in Venice, 1931-1981 (1935 has six)."""
    path = venice_path()
    if path is None:
        raise FileNotFoundError(
            "the full Venice r-largest series is not installed; run "
            "'python -m rkappa.fetch_venice' or set RKAPPA_VENICE to a CSV file"
        )
    return load(path, r_cap)


def venice_maxima() -> RLargestSample:
    """Bundled Venice annual maxima (51 blocks, one value each)."""
    text = (resources.files("rkappa") / "data" / "venice_maxima.csv").read_text(encoding="utf-8")
    return loads(text)
