from __future__ import annotations

import io
import tarfile

import numpy as np
import pytest

from rkappa import data_io
from rkappa.errors import EmptyDataset, OrderViolation, ParseError
from rkappa.fetch_venice import extract_from_tarball, table_to_sample
from rkappa.inference import RLargestSample

GOOD = """# a comment
block,x1,x2,x3
1931,103,99,98
# inline comment line
1935,115,107,
1936,147,130,120
"""


def test_loads_ragged_and_comments():
    s = data_io.loads(GOOD)
    assert s.m == 3 and s.block_labels == (1931, 1935, 1936)
    np.testing.assert_array_equal(s.lengths, [3, 2, 3])
    assert data_io.loads(GOOD, r_cap=1).r_max == 1


def test_order_violation_coordinates():
    with pytest.raises(OrderViolation) as exc:
        data_io.loads("block,x1,x2\n1939,9,8\n1940, 5, 7\n")
    assert exc.value.row == 1940 and exc.value.column == "x2"
    assert "row 1940" in str(exc.value) and "x2" in str(exc.value)


@pytest.mark.parametrize("text,column", [
    ("block,x1,x2\n1,5,nan\n", "x2"),
    ("block,x1,x2\n1,inf,3\n", "x1"),
    ("block,x1,x2\n1,abc,3\n", "x1"),
    ("block,x1,x2,x3\n1,5,,3\n", "x2"),
])
def test_bad_cells(text, column):
    with pytest.raises(ParseError) as exc:
        data_io.loads(text)
    assert exc.value.column == column and exc.value.row == 1


def test_bad_headers_and_empty():
    with pytest.raises(ParseError):
        data_io.loads("year,x1\n1,2\n")
    with pytest.raises(ParseError):
        data_io.loads("block,x2\n1,2\n")
    with pytest.raises(ParseError):
        data_io.loads("block,x1\n1,2,3\n")
    with pytest.raises(EmptyDataset):
        data_io.loads("")
    with pytest.raises(EmptyDataset):
        data_io.loads("# only a comment\nblock,x1\n")


def test_roundtrip(tmp_path):
    s = data_io.loads(GOOD)
    path = tmp_path / "d.csv"
    data_io.save(s, path, comment="made in a test")
    back = data_io.load(path)
    assert back.block_labels == s.block_labels
    for a, b in zip(back.blocks, s.blocks):
        np.testing.assert_array_equal(a, b)
    x = np.random.default_rng(0).normal(size=(5, 3))
    s2 = RLargestSample.from_array(-np.sort(-x, axis=1))
    back2 = data_io.loads(data_io.dumps(s2))
    np.testing.assert_array_equal(back2.to_array(), s2.to_array())


def test_validate():
    rep = data_io.validate(data_io.loads(GOOD))
    assert rep.m == 3 and rep.r_counts == {2: 1, 3: 2}
    assert rep.minimum == 98 and rep.maximum == 147 and rep.uniform_r is None
    single = data_io.validate(data_io.loads("block,x1,x2\n1,3,3\n"))
    assert "at least 2 blocks required for fitting" in single.warnings
    assert single.tied_values == 1
    dup = data_io.validate(data_io.loads("block,x1\n1,3\n1,4\n"))
    assert dup.duplicate_labels == ["1"]


def test_bundled_maxima():
    s = data_io.venice_maxima()
    assert s.m == 51 and s.r_max == 1
    assert s.block_labels[0] == 1931 and s.block_labels[-1] == 1981
    assert s.maxima.max() == 194 and s.maxima.min() == 78


def test_venice_lookup(tmp_path, monkeypatch):
    monkeypatch.setenv("XDG_CACHE_HOME", str(tmp_path / "cache"))
    monkeypatch.delenv("RKAPPA_VENICE", raising=False)
    if data_io.venice_path() is None:
        with pytest.raises(FileNotFoundError, match="fetch_venice"):
            data_io.venice()
    f = tmp_path / "v.csv"
    f.write_text("block,x1,x2\n1931,103,99\n1932,78,78\n")
    monkeypatch.setenv("RKAPPA_VENICE", str(f))
    assert data_io.venice(r_cap=1).r_max == 1


def _tarball(name, payload: bytes) -> bytes:
    buf = io.BytesIO()
    with tarfile.open(fileobj=buf, mode="w:gz") as tar:
        info = tarfile.TarInfo(f"pkg/data/{name}")
        info.size = len(payload)
        tar.addfile(info, io.BytesIO(payload))
    return buf.getvalue()


def test_fetch_conversion_from_text_tarball():
    txt = b'"Year" "r1" "r2" "r3"\n1931 103 99 98\n1932 78 78 74\n1933 121 113 NA\n'
    s = extract_from_tarball(_tarball("venice.txt", txt))
    assert s.block_labels == (1931, 1932, 1933)
    np.testing.assert_array_equal(s.lengths, [3, 3, 2])
    txt = b'"r1" "r2"\n"1931" 103 99\n"1932" 78 78\n'
    s = extract_from_tarball(_tarball("venice.tab", txt))
    assert s.block_labels == (1931, 1932)


def test_table_to_sample_without_years():
    s = table_to_sample(np.array([[5.0, 4.0], [3.0, np.nan]]))
    assert s.block_labels == (1931, 1932) and s.r_max == 2


def test_fetch_missing_member():
    with pytest.raises(FileNotFoundError):
        extract_from_tarball(_tarball("other.txt", b"1 2\n"))
