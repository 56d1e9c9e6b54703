"""Physical-model estimators against brute-force references."""

import numpy as np
import pytest

from pdehaze import (
    dark_channel,
    estimate_atmospheric_light,
    estimate_transmission,
    multiscale_dark_channel,
    reconstruct,
    synthesize_haze,
)


def dark_channel_reference(image, airlight, radius):
    """Straight triple loop over pixels, truncated patches, and channels."""
    h, w, c = image.shape
    out = np.empty((h, w))
    for r in range(h):
        for col in range(w):
            best = np.inf
            for rr in range(max(0, r - radius), min(h, r + radius + 1)):
                for cc in range(max(0, col - radius), min(w, col + radius + 1)):
                    for k in range(c):
                        best = min(best, image[rr, cc, k] / airlight[k])
            out[r, col] = min(best, 1.0)
    return out


class TestDarkChannel:
    def test_uniform_image_min_over_channels(self, rng):
        img = np.empty((9, 9, 3))
        img[:, :] = (0.2, 0.5, 0.9)
        for radius in (0, 1, 4):
            np.testing.assert_array_equal(dark_channel(img, np.ones(3), radius), 0.2)

    def test_black_sample_per_patch_gives_zero(self, rng):
        img = rng.random((12, 12, 3)) * 0.8 + 0.2
        img[::3, ::3, 0] = 0.0  # radius 2 patches always cover a zero
        np.testing.assert_array_equal(dark_channel(img, np.ones(3), 2), 0.0)

    def test_matches_brute_force(self, rng):
        img = rng.random((8, 8, 3))
        airlight = np.array([0.8, 0.9, 0.7])
        got = dark_channel(img, airlight, 2)
        np.testing.assert_allclose(got, dark_channel_reference(img, airlight, 2), atol=1e-12)

    def test_monotone_nonincreasing_in_radius(self, rng):
        img = rng.random((10, 10, 3))
        a = np.array([0.9, 0.8, 1.0])
        previous = dark_channel(img, a, 0)
        for radius in (1, 2, 4):
            current = dark_channel(img, a, radius)
            assert np.all(current <= previous + 1e-15)
            previous = current

    def test_bounded_by_center_pixel(self, rng):
        img = rng.random((10, 10, 3))
        a = np.array([0.7, 0.95, 0.85])
        center_min = np.min(img / a, axis=2)
        assert np.all(dark_channel(img, a, 3) <= center_min + 1e-15)

    def test_capped_at_one(self):
        img = np.full((5, 5, 3), 0.9)
        out = dark_channel(img, np.full(3, 0.5), 1)  # 0.9 / 0.5 = 1.8 pre-cap
        np.testing.assert_array_equal(out, 1.0)

    def test_rejects_nonpositive_airlight(self, rng):
        img = rng.random((4, 4, 3))
        with pytest.raises(ValueError):
            dark_channel(img, np.array([0.5, 0.0, 0.5]), 1)
        with pytest.raises(ValueError):
            dark_channel(img, np.array([0.5, -0.1, 0.5]), 1)


class TestMultiscale:
    def test_single_radius_weight_one_is_bitwise_single_scale(self, rng):
        img = rng.random((10, 10, 3))
        a = np.array([0.9, 0.9, 0.9])
        np.testing.assert_array_equal(
            multiscale_dark_channel(img, a, [4], [1.0]), dark_channel(img, a, 4)
        )

    def test_uniform_image_matches_single_scale_constant(self):
        img = np.full((8, 8, 3), 0.4)
        out = multiscale_dark_channel(img, np.ones(3), [1, 3], [0.5, 0.5])
        np.testing.assert_allclose(out, 0.4)

    def test_equal_weights_average_the_scales(self, rng):
        img = rng.random((9, 9, 3))
        a = np.array([0.8, 0.85, 0.95])
        expected = 0.5 * dark_channel(img, a, 1) + 0.5 * dark_channel(img, a, 3)
        got = multiscale_dark_channel(img, a, [1, 3], [0.5, 0.5])
        np.testing.assert_allclose(got, expected, atol=1e-15)

    def test_default_weights_are_equal(self, rng):
        img = rng.random((8, 8, 3))
        a = np.ones(3)
        np.testing.assert_array_equal(
            multiscale_dark_channel(img, a, [1, 2, 3]),
            multiscale_dark_channel(img, a, [1, 2, 3], [1 / 3, 1 / 3, 1 / 3]),
        )

    def test_validation(self, rng):
        img = rng.random((6, 6, 3))
        a = np.ones(3)
        with pytest.raises(ValueError, match="nonempty"):
            multiscale_dark_channel(img, a, [])
        with pytest.raises(ValueError, match="weights"):
            multiscale_dark_channel(img, a, [1, 2], [1.0])
        with pytest.raises(ValueError, match="sum to 1"):
            multiscale_dark_channel(img, a, [1, 2], [0.5, 0.6])
        with pytest.raises(ValueError, match="nonnegative"):
            multiscale_dark_channel(img, a, [1, 2], [1.5, -0.5])


class TestAtmosphericLight:
    def test_uniform_image(self):
        img = np.full((10, 10, 3), 0.8)
        dark = dark_channel(img, np.ones(3), 2)
        np.testing.assert_allclose(estimate_atmospheric_light(img, dark), 0.8)

    def test_dominant_white_pixel_selected_alone(self, rng):
        img = rng.random((16, 16, 3)) * 0.7
        img[5, 9] = 1.0
        dark = dark_channel(img, np.ones(3), 0)  # per-pixel dark channel
        a = estimate_atmospheric_light(img, dark, fraction=1.0 / 256.0)
        np.testing.assert_array_equal(a, [1.0, 1.0, 1.0])

    def test_all_black_image_floors_at_5_percent(self):
        img = np.zeros((8, 8, 3))
        dark = dark_channel(img, np.ones(3), 1)
        np.testing.assert_allclose(estimate_atmospheric_light(img, dark), 0.05)

    def test_matches_sorting_reference(self, rng):
        img = rng.random((12, 12, 3))
        dark = dark_channel(img, np.ones(3), 1)
        fraction = 0.03
        count = int(np.ceil(fraction * dark.size))
        # independent selection: sort (value desc, index asc)
        ranked = sorted(range(dark.size), key=lambda i: (-dark.ravel()[i], i))[:count]
        expected = np.clip(img.reshape(-1, 3)[ranked].mean(axis=0), 0.05, 1.0)
        np.testing.assert_allclose(estimate_atmospheric_light(img, dark, fraction), expected)

    def test_fraction_validation(self, rng):
        img = rng.random((4, 4, 3))
        dark = dark_channel(img, np.ones(3), 1)
        for bad in (0.0, -0.1, 1.5):
            with pytest.raises(ValueError):
                estimate_atmospheric_light(img, dark, bad)


class TestTransmission:
    def test_pure_haze(self):
        t = estimate_transmission(np.ones((6, 6)), omega=0.95)
        np.testing.assert_allclose(t, 0.05)

    def test_haze_free(self):
        t = estimate_transmission(np.zeros((6, 6)))
        np.testing.assert_array_equal(t, 1.0)

    def test_pointwise_formula(self, rng):
        dark = rng.random((20, 20))
        t = estimate_transmission(dark, omega=0.95)
        np.testing.assert_allclose(t, 1.0 - 0.95 * dark)

    def test_range_invariant(self, rng):
        for _ in range(20):
            dark = rng.random((15, 15))
            t = estimate_transmission(dark, omega=0.95)
            assert t.min() >= 1.0 - 0.95 - 1e-15
            assert t.max() <= 1.0 + 1e-15

    def test_rejects_out_of_range_dark(self):
        with pytest.raises(ValueError):
            estimate_transmission(np.full((3, 3), 1.2))
        with pytest.raises(ValueError):
            estimate_transmission(np.full((3, 3), -0.1))
        with pytest.raises(ValueError):
            estimate_transmission(np.zeros((3, 3)), omega=0.0)


class TestReconstruct:
    def test_unit_transmission_is_identity(self, rng):
        img = rng.random((7, 7, 3))
        out = reconstruct(img, np.ones((7, 7)), np.array([0.6, 0.7, 0.8]))
        np.testing.assert_array_equal(out, img)

    def test_image_equal_to_airlight_maps_to_airlight(self, rng):
        a = np.array([0.5, 0.6, 0.7])
        img = np.broadcast_to(a, (6, 6, 3)).copy()
        t = 0.1 + 0.9 * rng.random((6, 6))
        out = reconstruct(img, t, a, t_floor=0.1)
        np.testing.assert_allclose(out, img, atol=1e-12)

    def test_forward_model_round_trip(self, rng):
        clean = rng.random((9, 9, 3))
        t = 0.15 + 0.85 * rng.random((9, 9))
        a = np.array([0.75, 0.8, 0.9])
        hazy = synthesize_haze(clean, t, a)
        back = reconstruct(hazy, t, a, t_floor=0.1)
        assert np.max(np.abs(back - clean)) <= 1e-10

    def test_rejects_bad_floor(self, rng):
        img = rng.random((4, 4, 3))
        with pytest.raises(ValueError):
            reconstruct(img, np.ones((4, 4)), np.ones(3), t_floor=0.0)


class TestSynthesize:
    def test_unit_transmission_returns_clean(self, rng):
        clean = rng.random((6, 8, 3))
        out = synthesize_haze(clean, np.ones((6, 8)), np.array([0.9, 0.9, 0.9]))
        np.testing.assert_array_equal(out, clean)

    def test_zero_transmission_returns_airlight(self, rng):
        clean = rng.random((6, 6, 3))
        a = np.array([0.8, 0.7, 0.6])
        out = synthesize_haze(clean, np.zeros((6, 6)), a)
        np.testing.assert_allclose(out, np.broadcast_to(a, out.shape))

    def test_output_is_pointwise_convex_blend(self, rng):
        clean = rng.random((10, 10, 3))
        t = rng.random((10, 10))
        a = np.array([0.7, 0.85, 0.95])
        out = synthesize_haze(clean, t, a)
        lo = np.minimum(clean, np.broadcast_to(a, clean.shape))
        hi = np.maximum(clean, np.broadcast_to(a, clean.shape))
        assert np.all(out >= lo - 1e-12)
        assert np.all(out <= hi + 1e-12)
        assert out.min() >= 0.0 and out.max() <= 1.0
