import numpy as np
import torch

from tiny_trainer.data import (PSNR_CAP, bicubic_downsample, bicubic_upsample,
                               psnr_y, synthetic_hr_tiles)


def test_synthetic_tiles_shape_and_range(rng):
    tiles = synthetic_hr_tiles(4, 64, 2, rng)
    assert tiles.shape == (4, 3, 64, 64)
    assert float(tiles.min()) >= 0.0
    assert float(tiles.max()) <= 1.0


def test_synthetic_tiles_deterministic():
    a = synthetic_hr_tiles(2, 32, 2, np.random.default_rng(7))
    b = synthetic_hr_tiles(2, 32, 2, np.random.default_rng(7))
    assert torch.equal(a, b)


def test_downsample_then_upsample_shapes(rng):
    hr = synthetic_hr_tiles(2, 64, 4, rng)
    lr = bicubic_downsample(hr, 4)
    assert lr.shape == (2, 3, 16, 16)
    assert bicubic_upsample(lr, 4).shape == hr.shape


def test_psnr_identical_images_capped(rng):
    img = synthetic_hr_tiles(1, 32, 2, rng)
    assert psnr_y(img, img) == PSNR_CAP


def test_psnr_known_value():
    a = torch.zeros(1, 3, 8, 8)
    b = torch.full((1, 3, 8, 8), 0.1)
    # luma difference is exactly 0.1 -> mse 0.01 -> 20 dB
    assert abs(psnr_y(a, b) - 20.0) < 1e-6


def test_bicubic_baseline_is_imperfect_but_strong(rng):
    hr = synthetic_hr_tiles(8, 64, 2, rng)
    lr = bicubic_downsample(hr, 2)
    baseline = psnr_y(bicubic_upsample(lr, 2), hr)
    assert 25.0 < baseline < PSNR_CAP
