"""Train one encoded network and score it: joint intermediate loss under
the doubling weight schedule, then Y-channel PSNR per supervision head.

Fully seeded; on a fixed device and thread count a (genome, budget, seed)
triple reproduces its scores.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch

from .data import (bicubic_downsample, bicubic_upsample, load_folder_tiles,
                   psnr_y, synthetic_hr_tiles)
from .model import ValidationError, build_network
from .schedule import joint_loss_weights


@dataclass
class TrainerConfig:
    patch_size: int = 32            # LR patch side; divisible by 4 and scale
    batch_size: int = 16
    learning_rate: float = 1e-4
    steps_per_budget: int = 100
    train_tiles: int = 128
    val_tiles: int = 16
    data_dir: str | None = None
    device: str = "cpu"

    def __post_init__(self):
        if self.patch_size % 4:
            raise ValueError("patch size must be divisible by 4")


def make_datasets(config: TrainerConfig, scale: int, seed: int):
    # HR tiles are generated at patch_size * scale, so LR patches divide
    # by the scale by construction
    hr_size = config.patch_size * scale
    if config.data_dir:
        tiles = load_folder_tiles(Path(config.data_dir),
                                  config.train_tiles + config.val_tiles,
                                  hr_size)
    else:
        rng = np.random.default_rng(seed)
        tiles = synthetic_hr_tiles(config.train_tiles + config.val_tiles,
                                   hr_size, scale, rng)
    hr_train = tiles[:config.train_tiles]
    hr_val = tiles[config.train_tiles:]
    return (bicubic_downsample(hr_train, scale), hr_train,
            bicubic_downsample(hr_val, scale), hr_val)


def train_and_score(genome: dict, budget: int, seed: int,
                    config: TrainerConfig | None = None) -> dict:
    """Response fields (sans id) for one evaluation request."""
    config = config or TrainerConfig()
    try:
        torch.manual_seed(seed)
        model = build_network(genome).to(config.device)
    except ValidationError as exc:
        return {"status": "error", "message": str(exc)}

    scale = model.scale
    lr_train, hr_train, lr_val, hr_val = make_datasets(config, scale, seed)
    lr_train = lr_train.to(config.device)
    hr_train = hr_train.to(config.device)
    lr_val = lr_val.to(config.device)
    hr_val = hr_val.to(config.device)

    floor = psnr_y(bicubic_upsample(lr_val, scale), hr_val)

    num_blocks = len(model.blocks)
    steps = max(0, budget) * config.steps_per_budget
    steps_per_epoch = max(1, math.ceil(len(lr_train) / config.batch_size))
    optimizer = torch.optim.Adam(model.parameters(), lr=config.learning_rate)
    sampler = torch.Generator(device="cpu").manual_seed(seed)
    l1 = torch.nn.L1Loss()

    model.train()
    for step in range(steps):
        epoch = step // steps_per_epoch
        weights = joint_loss_weights(epoch, num_blocks)
        idx = torch.randint(0, len(lr_train), (config.batch_size,),
                            generator=sampler)
        sr, aux = model(lr_train[idx])
        targets = hr_train[idx]
        loss = weights[-1] * l1(sr, targets)
        for w, head_output in zip(weights[:-1], aux):
            loss = loss + w * l1(head_output, targets)
        if not torch.isfinite(loss):
            return {"status": "error",
                    "message": f"training diverged at step {step}"}
        optimizer.zero_grad()
        loss.backward()
        optimizer.step()

    model.eval()
    with torch.no_grad():
        sr, aux = model(lr_val)
        prefix = [floor]
        for head_output in aux:
            prefix.append(psnr_y(head_output.clamp(0, 1), hr_val))
        prefix.append(psnr_y(sr.clamp(0, 1), hr_val))
    return {"status": "ok", "fitness": prefix[-1], "prefix_fitness": prefix}
