"""Full-reference metric contracts."""

import math

import numpy as np
import pytest

from pdehaze import compare


class TestCompare:
    def test_identical_images(self, rng):
        img = rng.random((6, 6, 3))
        report = compare(img, img)
        assert report.mse == 0.0
        assert math.isinf(report.psnr)
        assert report.mae == 0.0

    def test_maximal_difference(self):
        report = compare(np.zeros((4, 4, 3)), np.ones((4, 4, 3)))
        assert report.mse == pytest.approx(1.0)
        assert report.psnr == pytest.approx(0.0)
        assert report.mae == pytest.approx(1.0)

    def test_half_difference(self):
        report = compare(np.zeros((5, 5, 1)), np.full((5, 5, 1), 0.5))
        assert report.mse == pytest.approx(0.25)
        assert report.psnr == pytest.approx(10.0 * math.log10(4.0))
        assert report.psnr == pytest.approx(6.0206, abs=1e-4)

    def test_symmetric(self, rng):
        a, b = rng.random((7, 7, 3)), rng.random((7, 7, 3))
        assert compare(a, b) == compare(b, a)

    def test_mae_squared_below_mse(self, rng):
        for _ in range(25):
            a, b = rng.random((6, 6, 3)), rng.random((6, 6, 3))
            report = compare(a, b)
            assert report.mae**2 <= report.mse + 1e-15

    def test_psnr_strictly_decreasing_in_mse(self):
        base = np.zeros((8, 8, 1))
        reports = [compare(base, np.full((8, 8, 1), level)) for level in (0.1, 0.3, 0.6, 1.0)]
        for earlier, later in zip(reports, reports[1:]):
            assert earlier.mse < later.mse
            assert earlier.psnr > later.psnr

    def test_infinite_psnr_iff_zero_mse(self, rng):
        a = rng.random((5, 5, 3))
        near = a.copy()
        near[0, 0, 0] = min(1.0, near[0, 0, 0] + 1e-9)
        report = compare(a, near)
        assert report.mse > 0.0
        assert not math.isinf(report.psnr)

    def test_shape_mismatch(self, rng):
        with pytest.raises(ValueError, match="shape"):
            compare(rng.random((4, 4, 3)), rng.random((4, 5, 3)))

    def test_out_of_range_rejected(self):
        with pytest.raises(ValueError):
            compare(np.full((3, 3, 1), 1.5), np.zeros((3, 3, 1)))
        with pytest.raises(ValueError):
            compare(np.zeros((3, 3, 1)), np.full((3, 3, 1), -0.1))
