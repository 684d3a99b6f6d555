"""Tests for report serialization and output files."""
import json
import math

import numpy as np
import pytest

from errors import ValidationError
from storage import Storage, dumps_csv, dumps_json, read_centers, to_jsonable


def test_json_is_stable():
    a = dumps_json({"b": 1.5, "a": [np.float64(0.1), np.int64(2)], "c": math.inf})
    b = dumps_json({"c": math.inf, "a": [0.1, 2], "b": 1.5})
    assert a == b
    assert json.loads(a)["c"] == "inf"
    assert to_jsonable(np.array([1.0, -math.inf])) == [1.0, "-inf"]
    assert to_jsonable(np.bool_(True)) is True


def test_csv_format():
    text = dumps_csv(["l", "coeff"], [(0, 0.1), (1, 1.0 / 3.0)])
    lines = text.split("\r\n")
    assert lines[0] == "l,coeff"
    assert lines[1] == "0,0.10000000000000001"
    assert float(lines[2].split(",")[1]) == 1.0 / 3.0


def test_centers_file_round_trip(tmp_path):
    storage = Storage(str(tmp_path))
    pts = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, 0.0]])
    path = storage.write_centers("centers.txt", 1, pts)
    assert np.array_equal(read_centers(str(path), 1), pts)
    assert storage.written == [str(path)]
    with pytest.raises(ValidationError):
        read_centers(str(path), 2)


@pytest.mark.parametrize("text", [
    "",
    "1 3\n1 0\n0 1\n",
    "1 1\n2 0\n",
    "1 1\nx y\n",
])
def test_bad_centers_files(tmp_path, text):
    path = tmp_path / "bad.txt"
    path.write_text(text)
    with pytest.raises(ValidationError):
        read_centers(str(path))


def test_writes_are_atomic(tmp_path):
    storage = Storage(str(tmp_path / "out"))
    storage.write_json("report.json", {"x": 1})
    storage.write_coefficients("coeffs.csv", [1.0, 0.5])
    assert storage.read_json("report.json") == {"x": 1}
    assert sorted(p.name for p in (tmp_path / "out").iterdir()) == ["coeffs.csv", "report.json"]
