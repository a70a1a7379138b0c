from __future__ import annotations

import numpy as np
import pytest

from gmix.arrays import ObservationMatrix, ObservationShape
from gmix.errors import DimensionMismatch
from gmix.rng import philox4x32, standard_normals


def _hex(words):
    return [format(int(w[0]), "08x") for w in words]


@pytest.mark.parametrize(
    "ctr,key,expected",
    [
        ((0, 0, 0, 0), (0, 0), ["6627e8d5", "e169c58d", "bc57ac4c", "9b00dbd8"]),
        ((0xFFFFFFFF,) * 4, (0xFFFFFFFF,) * 2, ["408f276d", "41c83b0e", "a20bc7c6", "6d5451fd"]),
        (
            (0x243F6A88, 0x85A308D3, 0x13198A2E, 0x03707344),
            (0xA4093822, 0x299F31D0),
            ["d16cfe09", "94fdcceb", "5001e420", "24126ea1"],
        ),
    ],
)
def test_philox_known_answers(ctr, key, expected):
    out = philox4x32(tuple(np.array([c], dtype=np.uint64) for c in ctr), key)
    assert _hex(out) == expected


def test_normals_are_counter_addressed():
    full = standard_normals(7, 3, 101)
    assert np.array_equal(full[37:80], standard_normals(7, 3, 43, start=37))
    assert np.array_equal(full[1:2], standard_normals(7, 3, 1, start=1))
    assert not np.array_equal(full, standard_normals(7, 4, 101))
    assert not np.array_equal(full, standard_normals(8, 3, 101))


def test_normals_moments():
    x = standard_normals(2024, 0, 400_000)
    assert abs(x.mean()) < 5 / np.sqrt(x.size)
    assert abs(x.var() - 1) < 0.01
    assert abs(np.mean(x > 1.959964) - 0.025) < 0.002


def test_normals_reject_out_of_range_seed():
    with pytest.raises(ValueError):
        standard_normals(-1, 0, 3)
    with pytest.raises(ValueError):
        standard_normals(0, 1 << 64, 3)


def test_shape_sizes():
    assert ObservationShape.matrix(3, 5).size == 15
    sh = ObservationShape.tensor(4, 2, 3, k=2)
    assert sh.size == 16 + 64
    assert sh.block_slice(3) == slice(16, 80)
    with pytest.raises(ValueError):
        ObservationShape.tensor(4, 1, 2)
    with pytest.raises(ValueError):
        ObservationShape.tensor(200, 4, 4)


def test_observation_validation():
    sh = ObservationShape.matrix(2, 2)
    with pytest.raises(DimensionMismatch):
        ObservationMatrix(sh, [1.0, 2.0, 3.0])
    with pytest.raises(ValueError):
        ObservationMatrix(sh, [1.0, np.nan, 0, 0])
    m = ObservationMatrix(sh, [1, 2, 3, 4])
    with pytest.raises(DimensionMismatch):
        m.check_shape(ObservationShape.matrix(1, 4))
    assert m.as_matrix().tolist() == [[1, 2], [3, 4]]


@pytest.mark.parametrize(
    "shape", [ObservationShape.matrix(3, 4), ObservationShape.tensor(3, 2, 3, k=2)]
)
def test_serialization_round_trip(shape, tmp_path):
    vals = standard_normals(1, 0, shape.size)
    m = ObservationMatrix(shape, vals)
    for other in (
        ObservationMatrix.from_bytes(m.to_bytes()),
        ObservationMatrix.from_json(m.to_json()),
    ):
        assert other.shape == m.shape
        assert np.array_equal(other.values, m.values)
    m.save(tmp_path / "obs.bin")
    assert np.array_equal(ObservationMatrix.load(tmp_path / "obs.bin").values, vals)


def test_binary_layout_header():
    m = ObservationMatrix(ObservationShape.matrix(1, 2), [0.5, -1.0])
    data = m.to_bytes()
    assert data[:4] == b"GMXO"
    assert len(data) == 4 + 4 + 4 + 8 * 4 + 16
    assert np.frombuffer(data[-16:], "<f8").tolist() == [0.5, -1.0]
    with pytest.raises(ValueError):
        ObservationMatrix.from_bytes(data[:-8])
    with pytest.raises(ValueError):
        ObservationMatrix.from_bytes(b"XXXX" + data[4:])


def test_tensor_block_view():
    sh = ObservationShape.tensor(2, 2, 3, k=2)
    m = ObservationMatrix(sh, np.arange(sh.size, dtype=float))
    assert m.block(2).shape == (2, 2)
    assert m.block(3)[1, 0, 1] == 4 + 5
