"""Trainable realizations of the three lean residual dense blocks.

All convolutions are bias-free to mirror the analytical cost model.
Every block keeps a dense inner stage (per layer: 1x1 squeeze of the
concatenated features, then a 3x3 conv at the growth width) and ends in a
1x1 fusion to its output width; the local residual connection applies
when input and output widths match.

Shrink: the dense stage as-is.  Group: channel shuffle + group conv
(4 groups) in place of the plain 3x3.  Contextual: the dense stage runs
after a 2x2 average pool, each 3x3 conv is applied ``recursion`` times
with shared weights, and a shared 1x1-to-4x conv + pixel shuffle lifts
every layer output back to full resolution before fusion.
"""

from __future__ import annotations

import torch
from torch import nn

GROUPS = 4


class ValidationError(ValueError):
    pass


def channel_shuffle(x: torch.Tensor, groups: int) -> torch.Tensor:
    b, c, h, w = x.shape
    return (x.view(b, groups, c // groups, h, w)
            .transpose(1, 2).reshape(b, c, h, w))


class _DenseBlock(nn.Module):
    def __init__(self, in_ch: int, layers: int, growth: int, out_ch: int,
                 grouped: bool = False):
        super().__init__()
        self.in_ch, self.out_ch = in_ch, out_ch
        self.grouped = grouped
        self.squeezes = nn.ModuleList(
            nn.Conv2d(in_ch + i * growth, growth, 1, bias=False)
            for i in range(layers))
        self.convs = nn.ModuleList(
            nn.Conv2d(growth, growth, 3, padding=1, bias=False,
                      groups=GROUPS if grouped else 1)
            for _ in range(layers))
        self.fuse = nn.Conv2d(layers * growth, out_ch, 1, bias=False)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        feats = [x]
        for squeeze, conv in zip(self.squeezes, self.convs):
            h = squeeze(torch.cat(feats, dim=1))
            if self.grouped:
                h = channel_shuffle(h, GROUPS)
            feats.append(torch.relu(conv(h)))
        out = self.fuse(torch.cat(feats[1:], dim=1))
        if self.in_ch == self.out_ch:
            out = out + x
        return out


class ShrinkBlock(_DenseBlock):
    def __init__(self, in_ch, layers, growth, out_ch):
        super().__init__(in_ch, layers, growth, out_ch, grouped=False)


class GroupBlock(_DenseBlock):
    def __init__(self, in_ch, layers, growth, out_ch):
        super().__init__(in_ch, layers, growth, out_ch, grouped=True)


class ContextualBlock(nn.Module):
    """Pooled dense stage with recursive shared-weight convs; a shared
    sub-pixel conv returns each layer's features to full resolution."""

    def __init__(self, in_ch: int, layers: int, growth: int, out_ch: int,
                 recursion: int):
        super().__init__()
        self.in_ch, self.out_ch = in_ch, out_ch
        self.recursion = recursion
        self.pool = nn.AvgPool2d(2)
        self.squeezes = nn.ModuleList(
            nn.Conv2d(in_ch + i * growth, growth, 1, bias=False)
            for i in range(layers))
        self.convs = nn.ModuleList(
            nn.Conv2d(growth, growth, 3, padding=1, bias=False)
            for _ in range(layers))
        self.upsample = nn.Conv2d(growth, 4 * growth, 1, bias=False)
        self.shuffle = nn.PixelShuffle(2)
        self.fuse = nn.Conv2d(layers * growth, out_ch, 1, bias=False)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        z = self.pool(x)
        feats = [z]
        lifted = []
        for squeeze, conv in zip(self.squeezes, self.convs):
            h = squeeze(torch.cat(feats, dim=1))
            for _ in range(self.recursion):
                h = torch.relu(conv(h))
            feats.append(h)
            lifted.append(self.shuffle(self.upsample(h)))
        out = self.fuse(torch.cat(lifted, dim=1))
        if self.in_ch == self.out_ch:
            out = out + x
        return out


_BLOCK_TYPES = {"S": ShrinkBlock, "G": GroupBlock, "C": ContextualBlock}
_LAYER_CHOICES = (4, 6, 8)
_WIDTH_CHOICES = (16, 24, 32, 48, 64)


def _check_gene(gene: dict, index: int) -> None:
    if gene.get("type") not in _BLOCK_TYPES:
        raise ValidationError(f"block {index}: unknown type {gene.get('type')!r}")
    if gene.get("layers") not in _LAYER_CHOICES:
        raise ValidationError(f"block {index}: bad layer count {gene.get('layers')!r}")
    for key in ("growth", "out"):
        if gene.get(key) not in _WIDTH_CHOICES:
            raise ValidationError(f"block {index}: bad {key} {gene.get(key)!r}")
    if gene.get("rec") not in (1, 2, 3, 4):
        raise ValidationError(f"block {index}: bad recursion {gene.get('rec')!r}")


class TinyESRN(nn.Module):
    """Head conv, the active blocks in order, global concat + 1x1 fusion,
    and a single sub-pixel reconstruction tail; one lightweight sub-pixel
    head per non-final block provides intermediate supervision.

    All reconstruction paths are residual over bicubic upsampling with
    zero-initialized output convs, so an untrained network reproduces the
    bicubic baseline exactly and every gradient step is refinement.  The
    bicubic skip adds no learnable weights.
    """

    FUSION_CHANNELS = 64

    def __init__(self, genome: dict):
        super().__init__()
        scale = int(genome.get("scale", 2))
        if scale not in (2, 3, 4):
            raise ValidationError(f"bad scale {scale}")
        active = [g for g in genome.get("blocks", []) if g.get("state")]
        if not active:
            raise ValidationError("genome has no active blocks")
        for i, gene in enumerate(active):
            _check_gene(gene, i)

        self.scale = scale
        first_growth = int(active[0]["growth"])
        self.head = nn.Conv2d(3, first_growth, 3, padding=1, bias=False)
        blocks = []
        in_ch = first_growth
        out_widths = []
        for gene in active:
            btype = _BLOCK_TYPES[gene["type"]]
            kwargs = dict(in_ch=in_ch, layers=int(gene["layers"]),
                          growth=int(gene["growth"]), out_ch=int(gene["out"]))
            if gene["type"] == "C":
                kwargs["recursion"] = int(gene["rec"])
            blocks.append(btype(**kwargs))
            in_ch = int(gene["out"])
            out_widths.append(in_ch)
        self.blocks = nn.ModuleList(blocks)
        self.fuse_global = nn.Conv2d(sum(out_widths), self.FUSION_CHANNELS, 1,
                                     bias=False)
        self.tail = nn.Sequential(
            nn.Conv2d(self.FUSION_CHANNELS, 3 * scale * scale, 3, padding=1,
                      bias=False),
            nn.PixelShuffle(scale))
        # supervision heads for all blocks except the last, discarded after
        # scoring (the final block is scored through the real output)
        self.aux_heads = nn.ModuleList(
            nn.Sequential(nn.Conv2d(width, 3 * scale * scale, 3, padding=1,
                                    bias=False),
                          nn.PixelShuffle(scale))
            for width in out_widths[:-1])
        nn.init.zeros_(self.tail[0].weight)
        for head in self.aux_heads:
            nn.init.zeros_(head[0].weight)

    def forward(self, lr: torch.Tensor):
        base = nn.functional.interpolate(lr, scale_factor=self.scale,
                                         mode="bicubic", align_corners=False)
        x = self.head(lr)
        outputs = []
        for block in self.blocks:
            x = block(x)
            outputs.append(x)
        fused = self.fuse_global(torch.cat(outputs, dim=1))
        sr = self.tail(fused) + base
        aux = [head(outputs[i]) + base
               for i, head in enumerate(self.aux_heads)]
        return sr, aux

    def backbone_parameter_count(self) -> int:
        """Learnable weights excluding the supervision heads."""
        total = sum(p.numel() for p in self.parameters())
        aux = sum(p.numel() for p in self.aux_heads.parameters())
        return total - aux


def build_network(genome: dict) -> TinyESRN:
    return TinyESRN(genome)
