import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from logvar import io
from logvar.grid import Field, Grid


@given(vals=st.lists(st.floats(allow_nan=False, allow_infinity=False, width=64), min_size=9, max_size=9))
def test_roundtrip_bit_exact(vals):
    g = Grid(1, 2.5, 9)
    u = Field(g, np.array(vals))
    back = io.parse_field(io.format_field(u))
    assert back.grid == g
    assert np.array_equal(back.values, u.values)


def test_roundtrip_2d(tmp_path):
    g = Grid(2, 3.0, 9)
    u = Field(g, np.arange(81.0).reshape(9, 9) / 7.0)
    io.write_field(tmp_path / "f.txt", u)
    text = (tmp_path / "f.txt").read_bytes()
    assert text.startswith(b"LOGVAR-FIELD v1 dim=2 n=9 L=3.0\n") and b"\r" not in text
    assert np.array_equal(io.read_field(tmp_path / "f.txt").values, u.values)


@pytest.mark.parametrize("text", ["garbage\n1\n", "LOGVAR-FIELD v1 dim=1 n=3\n0\n0\n0\n", "LOGVAR-FIELD v1 dim=1 n=3 L=1.0\n0\n0\n"])
def test_bad_dumps(text):
    with pytest.raises(io.FieldFormatError):
        io.parse_field(text)


def test_json_cleaning(tmp_path):
    io.write_json(tmp_path / "a.json", {"x": np.float64(1.5), "n": np.int64(2), "b": np.bool_(True), "inf": math.inf, "l": (1, 2)})
    import json

    data = json.loads((tmp_path / "a.json").read_text())
    assert data == {"x": 1.5, "n": 2, "b": True, "inf": "inf", "l": [1, 2]}
    assert len(io.sha256(tmp_path / "a.json")) == 64
