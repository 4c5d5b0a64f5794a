import numpy as np
import pytest

from qnsp.errors import SchemaError
from qnsp.fields import ScalarField
from qnsp.grid import make_grid
from qnsp.snapshot import read_snapshot, write_snapshot


def test_round_trip(tmp_path, rng):
    g = make_grid(2, 32, box_length=3.5)
    vals = rng.standard_normal(g.shape)
    f = ScalarField.from_values(g, vals)
    path = tmp_path / "field.fld"
    write_snapshot(path, f)
    back = read_snapshot(path)
    assert back.grid.dim == 2
    assert back.grid.n == 32
    assert back.grid.length == 3.5
    assert np.max(np.abs(back.values - f.values)) <= 1e-14


def test_round_trip_3d(tmp_path, rng):
    g = make_grid(3, 8)
    f = ScalarField.from_values(g, rng.standard_normal(g.shape))
    path = tmp_path / "f3.fld"
    write_snapshot(path, f)
    assert np.allclose(read_snapshot(path).values, f.values, atol=1e-14)


def test_bad_magic(tmp_path):
    path = tmp_path / "junk.fld"
    path.write_bytes(b"NOTAFIELD" + b"\x00" * 64)
    with pytest.raises(SchemaError):
        read_snapshot(path)


def test_truncated_payload(tmp_path, rng):
    g = make_grid(1, 16)
    f = ScalarField.from_values(g, rng.standard_normal(g.shape))
    path = tmp_path / "t.fld"
    write_snapshot(path, f)
    data = path.read_bytes()
    path.write_bytes(data[:-8])
    with pytest.raises(SchemaError):
        read_snapshot(path)
