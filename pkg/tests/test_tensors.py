import numpy as np
import pytest

from dirac import (
    FeatureMap,
    GridSet,
    InvalidArgumentError,
    Kernel,
    SamplingGrid,
    ShapeMismatchError,
    deterministic_sum,
    grid_sample,
    mesh_grid,
    read_tensor,
    write_tensor,
)


class TestFeatureMap:
    def test_shape_and_accessors(self):
        fm = FeatureMap(np.zeros((2, 3, 4)))
        assert fm.channels == 2
        assert fm.dims == (3, 4)

    def test_rejects_nan(self):
        data = np.zeros((1, 2, 2))
        data[0, 0, 0] = np.nan
        with pytest.raises(InvalidArgumentError):
            FeatureMap(data)

    def test_rejects_inf(self):
        data = np.zeros((1, 2, 2))
        data[0, 1, 1] = np.inf
        with pytest.raises(InvalidArgumentError):
            FeatureMap(data)

    def test_rejects_bad_rank(self):
        with pytest.raises(ShapeMismatchError):
            FeatureMap(np.zeros(4))
        with pytest.raises(ShapeMismatchError):
            FeatureMap(np.zeros((2, 2, 2, 2, 2)))

    def test_immutable(self):
        fm = FeatureMap(np.zeros((1, 2, 2)))
        with pytest.raises(ValueError):
            fm.data[0, 0, 0] = 1.0


class TestSamplingGrid:
    def test_accessors(self):
        g = SamplingGrid(np.zeros((2, 4, 5)))
        assert g.coord_dims == 2
        assert g.spatial == (4, 5)

    def test_rejects_non_finite(self):
        coords = np.zeros((2, 2, 2))
        coords[0, 0, 0] = np.inf
        with pytest.raises(InvalidArgumentError):
            SamplingGrid(coords)


class TestGridSet:
    def test_non_empty(self):
        with pytest.raises(InvalidArgumentError):
            GridSet([])

    def test_mismatched_grids_rejected(self):
        a = SamplingGrid(np.zeros((2, 3, 3)))
        b = SamplingGrid(np.zeros((2, 4, 4)))
        with pytest.raises(ShapeMismatchError):
            GridSet([a, b])

    def test_cardinality(self):
        g = SamplingGrid(np.zeros((2, 3, 3)))
        assert len(GridSet([g, g, g])) == 3


class TestMeshGrid:
    def test_identity_coordinates_2x2(self):
        g = mesh_grid((2, 2))
        expected = {
            (0, 0): (0.0, 0.0),
            (0, 1): (0.0, 1.0),
            (1, 0): (1.0, 0.0),
            (1, 1): (1.0, 1.0),
        }
        for (i, j), (x, y) in expected.items():
            assert g.coords[0, i, j] == x
            assert g.coords[1, i, j] == y

    def test_column_range_1x3(self):
        g = mesh_grid((1, 3))
        assert list(g.coords[1, 0]) == [0.0, 1.0, 2.0]

    def test_rejects_single_extent(self):
        with pytest.raises(InvalidArgumentError):
            mesh_grid((3,))

    def test_3d(self):
        g = mesh_grid((2, 3, 4))
        assert g.coord_dims == 3
        assert g.coords[2, 1, 2, 3] == 3.0

    def test_identity_grid_reproduces_source(self):
        rng = np.random.default_rng(1)
        src = FeatureMap(rng.random((2, 5, 7)))
        g = mesh_grid((5, 7))
        for kernel in Kernel:
            out = grid_sample(src, g, kernel)
            assert np.array_equal(out.data, src.data)


class TestDeterministicSum:
    def test_basic(self):
        assert deterministic_sum([1.0, 2.0, 3.0]) == 6.0

    def test_empty(self):
        assert deterministic_sum([]) == 0.0

    def test_matches_sequential_loop_bit_exactly(self):
        values = np.full(10**5, 0.1)
        reference = 0.0
        for v in values:
            reference += float(v)
        assert deterministic_sum(values) == reference

    def test_rejects_non_finite(self):
        with pytest.raises(InvalidArgumentError):
            deterministic_sum([1.0, np.nan])


class TestRawTensorFormat:
    def test_round_trip_bit_identical(self, tmp_path):
        rng = np.random.default_rng(2)
        fm = FeatureMap(rng.standard_normal((3, 4, 5, 6)))
        path = tmp_path / "t.dact"
        write_tensor(path, fm)
        back = read_tensor(path)
        assert back.data.shape == fm.data.shape
        assert np.array_equal(back.data, fm.data)

    def test_header_layout(self, tmp_path):
        fm = FeatureMap(np.ones((1, 2, 3)))
        path = tmp_path / "t.dact"
        write_tensor(path, fm)
        blob = path.read_bytes()
        assert blob[:4] == b"DACT"
        assert blob[4] == 1  # version
        assert blob[5] == 3  # rank
        assert blob[6] == 1  # dtype f64
        extents = np.frombuffer(blob, dtype="<u4", count=3, offset=16)
        assert list(extents) == [1, 2, 3]

    def test_rejects_garbage(self, tmp_path):
        path = tmp_path / "bad.dact"
        path.write_bytes(b"NOPE" + b"\x00" * 20)
        with pytest.raises(InvalidArgumentError):
            read_tensor(path)
