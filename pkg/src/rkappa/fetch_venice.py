"""Download the Venice r-largest sea-level series and store it as CSV.

The series ships with the R packages ``ismev`` and ``evd`` on CRAN.  This
script pulls a source tarball, reads ``data/venice.*`` and writes the rkappa
CSV format.  R data files (``.rda``/``.RData``) need the optional ``rdata``
package (``pip install rdata``); text data files need nothing extra.

Usage::

    python -m rkappa.fetch_venice [--dest PATH] [--url URL ...]
"""
from __future__ import annotations

import argparse
import io
import sys
import tarfile
import urllib.request
from pathlib import Path

import numpy as np

from .data_io import VENICE_FILENAME, _cache_dir, dumps
from .inference import RLargestSample

CRAN = "https://cran.r-project.org/src/contrib"
DEFAULT_URLS = (
    f"{CRAN}/ismev_1.42.tar.gz",
    f"{CRAN}/Archive/ismev/ismev_1.42.tar.gz",
    f"{CRAN}/Archive/ismev/ismev_1.41.tar.gz",
    f"{CRAN}/evd_2.3-7.1.tar.gz",
    f"{CRAN}/Archive/evd/evd_2.3-7.tar.gz",
)
FIRST_YEAR = 1931
SOURCE_NOTE = (
    "Venice r-largest annual sea levels (cm), 1931-1981; Smith (1986), Coles (2001).\n"
    "Converted from {source} by rkappa.fetch_venice."
)


def table_to_sample(values, labels=None) -> RLargestSample:
    """Turn a (blocks x r) table, optionally led by a year column, into a sample.

    NaN cells (R's NA) become ragged block ends.
    """
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 2:
        raise ValueError("expected a 2-D table")
    first = arr[:, 0]
    looks_like_years = (
        np.all(np.isfinite(first))
        and np.all(first == np.round(first))
        and np.all(np.diff(first) > 0)
        and 1800 <= first.min() <= 2100
    )
    if looks_like_years:
        labels = [int(v) for v in first]
        arr = arr[:, 1:]
    if labels is None:
        labels = list(range(FIRST_YEAR, FIRST_YEAR + arr.shape[0]))
    labels = [int(v) if str(v).isdigit() else v for v in labels]
    return RLargestSample.from_array(arr, labels)


def _parse_text(raw: bytes):
    rows, labels = [], []
    for line in raw.decode("utf-8", "replace").splitlines():
        parts = line.replace(",", " ").replace(";", " ").split()
        if not parts:
            continue
        try:
            nums = [np.nan if p.strip('"') == "NA" else float(p.strip('"')) for p in parts]
        except ValueError:
            # header line, or a row led by a quoted row name
            try:
                nums = [np.nan if p.strip('"') == "NA" else float(p.strip('"')) for p in parts[1:]]
                labels.append(parts[0].strip('"'))
            except ValueError:
                continue
        rows.append(nums)
    width = max(len(r) for r in rows)
    rows = [r + [np.nan] * (width - len(r)) for r in rows]
    return np.array(rows), (labels if len(labels) == len(rows) else None)


def _parse_rda(raw: bytes):
    try:
        import rdata
    except ImportError as exc:
        raise RuntimeError("reading .rda files needs the 'rdata' package: pip install rdata") from exc
    parsed = rdata.parser.parse_data(raw)
    converted = rdata.conversion.convert(parsed)
    obj = converted.get("venice", next(iter(converted.values())))
    if hasattr(obj, "to_numpy"):
        labels = list(getattr(obj, "index", [])) or None
        return np.asarray(obj.to_numpy(dtype=float)), labels
    return np.asarray(obj, dtype=float), None


def extract_from_tarball(blob: bytes) -> RLargestSample:
    with tarfile.open(fileobj=io.BytesIO(blob), mode="r:*") as tar:
        members = [m for m in tar.getmembers()
                   if m.isfile() and "/data/" in m.name and Path(m.name).stem.lower() == "venice"]
        if not members:
            raise FileNotFoundError("no data/venice.* inside the archive")
        member = members[0]
        raw = tar.extractfile(member).read()
    suffix = Path(member.name).suffix.lower()
    if suffix in (".rda", ".rdata"):
        table, labels = _parse_rda(raw)
    else:
        table, labels = _parse_text(raw)
    return table_to_sample(table, labels)


def fetch(dest=None, urls=DEFAULT_URLS, timeout: float = 60.0) -> Path:
    dest = Path(dest) if dest else _cache_dir() / VENICE_FILENAME
    errors = []
    for url in urls:
        try:
            with urllib.request.urlopen(url, timeout=timeout) as resp:
                blob = resp.read()
            sample = extract_from_tarball(blob)
        except Exception as exc:  # try the next mirror
            errors.append(f"{url}: {exc}")
            continue
        dest.parent.mkdir(parents=True, exist_ok=True)
        dest.write_text(dumps(sample, SOURCE_NOTE.format(source=url)), encoding="utf-8")
        return dest
    raise RuntimeError("could not fetch the Venice data:\n  " + "\n  ".join(errors))


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="python -m rkappa.fetch_venice", description=__doc__.split("\n")[0])
    ap.add_argument("--dest", help=f"output CSV (default: {_cache_dir() / VENICE_FILENAME})")
    ap.add_argument("--url", action="append", help="source tarball URL (repeatable)")
    args = ap.parse_args(argv)
    try:
        path = fetch(args.dest, tuple(args.url) if args.url else DEFAULT_URLS)
    except RuntimeError as exc:
        print(exc, file=sys.stderr)
        return 1
    print(path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
