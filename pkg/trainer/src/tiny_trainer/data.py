"""Training data: procedural band-limited textures (or an image folder),
bicubic degradation, and Y-channel PSNR.

The synthetic set keeps all spectral content below the LR Nyquist rate, so
the LR patches retain full information and a small network can learn to
out-interpolate bicubic upsampling quickly; CI needs no external data.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np
import torch
import torch.nn.functional as F

PSNR_CAP = 99.0
Y_WEIGHTS = (0.299, 0.587, 0.114)   # BT.601 luma


def synthetic_hr_tiles(count: int, size: int, scale: int,
                       rng: np.random.Generator) -> torch.Tensor:
    """(count, 3, size, size) float tiles in [0, 1], band-limited below the
    LR Nyquist frequency (0.5/scale cycles per HR pixel)."""
    ys, xs = np.meshgrid(np.arange(size), np.arange(size), indexing="ij")
    tiles = np.zeros((count, 3, size, size), dtype=np.float64)
    max_freq = 0.45 / scale
    for t in range(count):
        pattern = np.zeros((size, size))
        for _ in range(6):
            freq = rng.uniform(0.02, max_freq)
            angle = rng.uniform(0.0, math.pi)
            phase = rng.uniform(0.0, 2 * math.pi)
            amp = rng.uniform(0.3, 1.0)
            fx, fy = freq * math.cos(angle), freq * math.sin(angle)
            pattern += amp * np.sin(2 * math.pi * (fx * xs + fy * ys) + phase)
        pattern -= pattern.min()
        if pattern.max() > 0:
            pattern /= pattern.max()
        base = rng.uniform(0.2, 0.5, size=3)
        gain = rng.uniform(0.3, 0.5, size=3)
        for c in range(3):
            tiles[t, c] = base[c] + gain[c] * pattern
    return torch.from_numpy(np.clip(tiles, 0.0, 1.0)).float()


def load_folder_tiles(data_dir: Path, count: int, size: int) -> torch.Tensor:
    """Random crops from the PNG/JPEG images of a directory."""
    from PIL import Image

    paths = sorted(p for p in Path(data_dir).iterdir()
                   if p.suffix.lower() in (".png", ".jpg", ".jpeg", ".bmp"))
    if not paths:
        raise FileNotFoundError(f"no images in {data_dir}")
    rng = np.random.default_rng(0)
    tiles = []
    while len(tiles) < count:
        path = paths[len(tiles) % len(paths)]
        arr = np.asarray(Image.open(path).convert("RGB"), dtype=np.float32) / 255.0
        h, w = arr.shape[:2]
        if h < size or w < size:
            continue
        y = int(rng.integers(0, h - size + 1))
        x = int(rng.integers(0, w - size + 1))
        tiles.append(torch.from_numpy(arr[y:y + size, x:x + size]
                                      ).permute(2, 0, 1))
    return torch.stack(tiles)


def bicubic_downsample(hr: torch.Tensor, scale: int) -> torch.Tensor:
    lr = F.interpolate(hr, scale_factor=1.0 / scale, mode="bicubic",
                       antialias=True, align_corners=False)
    return lr.clamp(0.0, 1.0)


def bicubic_upsample(lr: torch.Tensor, scale: int) -> torch.Tensor:
    sr = F.interpolate(lr, scale_factor=scale, mode="bicubic",
                       align_corners=False)
    return sr.clamp(0.0, 1.0)


def luma(img: torch.Tensor) -> torch.Tensor:
    r, g, b = img[:, 0], img[:, 1], img[:, 2]
    return Y_WEIGHTS[0] * r + Y_WEIGHTS[1] * g + Y_WEIGHTS[2] * b


def psnr_y(a: torch.Tensor, b: torch.Tensor) -> float:
    """PSNR on the luminance channel of [0,1] images; identical inputs cap
    at the 99 dB sentinel."""
    mse = float(((luma(a) - luma(b)) ** 2).mean())
    if mse <= 0.0:
        return PSNR_CAP
    return min(10.0 * math.log10(1.0 / mse), PSNR_CAP)
