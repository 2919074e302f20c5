import numpy as np
import pytest
from scipy import ndimage

from dirac import (
    FeatureMap,
    InvalidArgumentError,
    RimConfig,
    ShapeMismatchError,
    build_rim_grids,
    mesh_grid,
    rim_transform,
    rim_transform_volume,
    sobel_gradients,
)

SOBEL_ROW = np.array([[-1.0, -2.0, -1.0], [0.0, 0.0, 0.0], [1.0, 2.0, 1.0]])


def oracle_vote_map(img, radii, epsilon=1e-8):
    """Shift-and-histogram oracle: push each pixel's gradient magnitude k
    steps along its unit gradient and bin the landing cells (independent
    scipy-based path)."""
    gx = ndimage.correlate(img, SOBEL_ROW, mode="nearest")
    gy = ndimage.correlate(img, SOBEL_ROW.T, mode="nearest")
    mag = np.hypot(gx, gy)
    ux, uy = gx / (mag + epsilon), gy / (mag + epsilon)
    h, w = img.shape
    votes = np.zeros((h, w))
    for i in range(h):
        for j in range(w):
            for k in radii:
                x = int(np.floor(i + k * ux[i, j] + 0.5))
                y = int(np.floor(j + k * uy[i, j] + 0.5))
                if 0 <= x < h and 0 <= y < w:
                    votes[x, y] += mag[i, j]
    return votes


def ring_image(dims, center, radius, width=1.0, value=1.0):
    x, y = np.meshgrid(np.arange(dims[0]), np.arange(dims[1]), indexing="ij")
    r = np.hypot(x - center[0], y - center[1])
    return np.where(np.abs(r - radius) <= width, value, 0.0)


class TestSobel:
    def test_constant_image_zero_everywhere(self):
        field = sobel_gradients(FeatureMap(np.full((1, 5, 5), 3.0)))
        assert np.all(field.gx.data == 0.0)
        assert np.all(field.gy.data == 0.0)
        assert np.all(field.magnitude.data == 0.0)
        assert np.all(field.unit_x.data == 0.0)
        assert np.all(field.unit_y.data == 0.0)

    def test_horizontal_ramp_interior(self):
        img = np.tile(np.arange(7.0), (5, 1))  # U[n,m] = m
        field = sobel_gradients(FeatureMap(img[None]))
        assert np.allclose(field.gy.data[0, 1:-1, 1:-1], 8.0)
        assert np.allclose(field.gx.data[0, 1:-1, 1:-1], 0.0)
        assert np.allclose(field.unit_y.data[0, 1:-1, 1:-1], 1.0, atol=1e-7)

    def test_matches_scipy_replicate_convolution(self):
        rng = np.random.default_rng(0)
        img = rng.random((6, 7))
        field = sobel_gradients(FeatureMap(img[None]))
        assert np.allclose(
            field.gx.data[0], ndimage.correlate(img, SOBEL_ROW, mode="nearest"), atol=1e-12
        )
        assert np.allclose(
            field.gy.data[0], ndimage.correlate(img, SOBEL_ROW.T, mode="nearest"), atol=1e-12
        )

    def test_unit_norm_bounded(self):
        rng = np.random.default_rng(1)
        field = sobel_gradients(FeatureMap(rng.random((1, 8, 8))))
        norm2 = field.unit_x.data**2 + field.unit_y.data**2
        assert np.all(norm2 <= 1.0 + 1e-9)

    def test_small_extent_rejected(self):
        with pytest.raises(InvalidArgumentError):
            sobel_gradients(FeatureMap(np.ones((1, 2, 5))))


class TestBuildGrids:
    def test_flat_region_equals_mesh(self):
        field = sobel_gradients(FeatureMap(np.full((1, 5, 5), 2.0)))
        grids = build_rim_grids(field, (4,))
        assert np.array_equal(grids[0].coords, mesh_grid((5, 5)).coords)

    def test_unit_gradient_shift_arithmetic(self):
        # Pixel with unit gradient (1, 0), k=5 lands at (i+5, j)
        img = np.zeros((21, 21))
        img[12:, :] = 10.0  # step edge: gradient along +x at row boundary
        field = sobel_gradients(FeatureMap(img[None]))
        grids = build_rim_grids(field, (5,))
        i, j = 11, 10
        assert field.unit_x.data[0, i, j] == pytest.approx(1.0, abs=1e-6)
        assert grids[0].coords[0, i, j] == pytest.approx(i + 5.0, abs=1e-5)
        assert grids[0].coords[1, i, j] == pytest.approx(float(j), abs=1e-6)

    def test_cardinality(self):
        field = sobel_gradients(FeatureMap(np.zeros((1, 4, 4))))
        assert len(build_rim_grids(field, (5, 7))) == 2

    def test_non_positive_radius_rejected(self):
        field = sobel_gradients(FeatureMap(np.zeros((1, 4, 4))))
        with pytest.raises(InvalidArgumentError):
            build_rim_grids(field, (0,))


class TestConfig:
    def test_default_radii(self):
        assert RimConfig().radii == (5, 7, 9, 11, 13, 15)

    def test_full_range(self):
        cfg = RimConfig(full_range=True)
        assert cfg.resolve_radii((6, 9)) == tuple(range(1, 10))

    def test_rejects_descending(self):
        with pytest.raises(InvalidArgumentError):
            RimConfig(radii=(7, 5))

    def test_rejects_bad_epsilon(self):
        with pytest.raises(InvalidArgumentError):
            RimConfig(epsilon=0.0)


class TestTransform:
    def test_constant_image_zero_vs(self):
        _, vs = rim_transform(FeatureMap(np.full((1, 8, 8), 5.0)), RimConfig(radii=(3,)))
        assert np.all(vs.data == 0.0)

    def test_ring_argmax_at_center_single_radius(self):
        img = ring_image((32, 32), (16, 16), 6.0)
        _, vs = rim_transform(FeatureMap(img[None]), RimConfig(radii=(6,)))
        peak = np.unravel_index(np.argmax(vs.data[0]), (32, 32))
        assert abs(peak[0] - 16) <= 1 and abs(peak[1] - 16) <= 1
        oracle = oracle_vote_map(img, (6,))
        opeak = np.unravel_index(np.argmax(oracle), (32, 32))
        assert abs(opeak[0] - 16) <= 1 and abs(opeak[1] - 16) <= 1

    def test_ring_argmax_at_center_default_radii(self):
        img = ring_image((32, 32), (16, 16), 6.0)
        _, vs = rim_transform(FeatureMap(img[None]), RimConfig())
        peak = np.unravel_index(np.argmax(vs.data[0]), (32, 32))
        assert abs(peak[0] - 16) <= 1 and abs(peak[1] - 16) <= 1
        oracle = oracle_vote_map(img, RimConfig().radii)
        assert np.allclose(vs.data[0], oracle, atol=1e-9)

    def test_matches_oracle_on_random_image(self):
        rng = np.random.default_rng(2)
        img = rng.random((12, 12))
        _, vs = rim_transform(FeatureMap(img[None]), RimConfig(radii=(2, 5)))
        assert np.allclose(vs.data[0], oracle_vote_map(img, (2, 5)), atol=1e-9)

    def test_intensity_shift_invariance_of_vs(self):
        rng = np.random.default_rng(3)
        img = rng.random((10, 10))
        cfg = RimConfig(radii=(3,))
        _, vs1 = rim_transform(FeatureMap(img[None]), cfg)
        _, vs2 = rim_transform(FeatureMap(img[None] + 7.5), cfg)
        assert np.allclose(vs1.data, vs2.data, atol=1e-9)

    def test_positive_scaling_argmax_invariance(self):
        img = ring_image((32, 32), (16, 16), 6.0)
        cfg = RimConfig(radii=(6,))
        _, vs = rim_transform(FeatureMap(img[None]), cfg)
        base = np.unravel_index(np.argmax(vs.data[0]), (32, 32))
        for alpha in (0.5, 2.0):
            _, vsa = rim_transform(FeatureMap(alpha * img[None]), cfg)
            assert np.unravel_index(np.argmax(vsa.data[0]), (32, 32)) == base

    def test_radii_set_additivity(self):
        rng = np.random.default_rng(4)
        img = FeatureMap(rng.random((1, 10, 10)))
        vu_a, vs_a = rim_transform(img, RimConfig(radii=(2, 3)))
        vu_b, vs_b = rim_transform(img, RimConfig(radii=(5,)))
        vu_ab, vs_ab = rim_transform(img, RimConfig(radii=(2, 3, 5)))
        assert np.allclose(vs_ab.data, vs_a.data + vs_b.data, atol=1e-9)
        assert np.allclose(vu_ab.data, vu_a.data + vu_b.data, atol=1e-9)

    def test_nonnegativity(self):
        rng = np.random.default_rng(5)
        img = FeatureMap(rng.random((1, 10, 10)))
        vu, vs = rim_transform(img, RimConfig(radii=(3,)))
        assert np.all(vu.data >= 0.0)
        assert np.all(vs.data >= 0.0)

    def test_per_radius_channels(self):
        rng = np.random.default_rng(6)
        img = FeatureMap(rng.random((1, 10, 10)))
        vu, vs = rim_transform(img, RimConfig(radii=(2, 4), per_radius_channels=True))
        assert vu.channels == 2 and vs.channels == 2
        vu_sum, vs_sum = rim_transform(img, RimConfig(radii=(2, 4)))
        assert np.allclose(vs.data.sum(axis=0), vs_sum.data[0], atol=1e-9)

    def test_rejects_volume_input(self):
        with pytest.raises(ShapeMismatchError):
            rim_transform(FeatureMap(np.zeros((1, 2, 8, 8))), RimConfig())


class TestVolume:
    def test_single_slice_matches_2d(self):
        rng = np.random.default_rng(7)
        img = rng.random((1, 1, 9, 9))
        cfg = RimConfig(radii=(3,))
        vu3, vs3 = rim_transform_volume(FeatureMap(img), cfg)
        vu2, vs2 = rim_transform(FeatureMap(img[:, 0]), cfg)
        assert np.array_equal(vs3.data[:, 0], vs2.data)
        assert np.array_equal(vu3.data[:, 0], vu2.data)

    def test_ring_in_one_slice_only(self):
        vol = np.zeros((1, 5, 32, 32))
        vol[0, 3] = ring_image((32, 32), (16, 16), 6.0)
        _, vs = rim_transform_volume(FeatureMap(vol), RimConfig(radii=(6,)))
        per_slice_peak = vs.data[0].reshape(5, -1).max(axis=1)
        assert np.argmax(per_slice_peak) == 3
        assert np.all(per_slice_peak[[0, 1, 2, 4]] == 0.0)

    def test_constant_volume(self):
        _, vs = rim_transform_volume(FeatureMap(np.ones((1, 3, 8, 8))), RimConfig(radii=(2,)))
        assert np.all(vs.data == 0.0)
