"""Analytical parameter and FLOPs accounting.

All arithmetic is exact (Python integers and Fractions); one multiply-add
counts as 2 FLOPs and Multi-Adds = FLOPs / 2.  Bias terms are excluded
everywhere.

Per-block conventions:

* Shrink/group blocks: FLOPs come from the layer inventory and equal
  2 * pixels * params layer by layer (every layer runs at input resolution
  with no weight re-use).
* Contextual blocks: parameters come from the layer inventory; FLOPs use
  the closed form for the pooled, recursive block (quarter-area inner
  stage), which is treated as authoritative and does not depend on the
  block's output width.
* Group convolutions use a fixed group count of 4 with channel shuffle
  (shuffle adds no parameters).
* The contextual block's upsampling stage is a 1x1 conv to 4x channels
  followed by pixel shuffle, shared across the block's dense layers.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .genome import BlockGene, BlockType, Genome, validate

KERNEL_SIZE = 3
GROUP_COUNT = 4
FUSION_CHANNELS = 64


class CostModelError(ValueError):
    pass


@dataclass(frozen=True)
class CostReport:
    params: int
    flops: int
    multi_adds: int
    lr_width: int = 0
    lr_height: int = 0

    def __post_init__(self):
        if self.params < 0 or self.flops < 0:
            raise CostModelError("negative cost")
        if self.flops % 2 != 0 or self.multi_adds != self.flops // 2:
            raise CostModelError("multi_adds must equal flops/2 exactly")


@dataclass(frozen=True)
class ResolutionSpec:
    hr_width: int
    hr_height: int
    scale: int

    def __post_init__(self):
        if self.hr_width % self.scale or self.hr_height % self.scale:
            raise CostModelError(
                f"HR {self.hr_width}x{self.hr_height} not divisible by scale {self.scale}")

    @property
    def lr_width(self) -> int:
        return self.hr_width // self.scale

    @property
    def lr_height(self) -> int:
        return self.hr_height // self.scale

    @property
    def lr_pixels(self) -> int:
        return self.lr_width * self.lr_height


def flops_rdb(conv_layers: int, kernel: int, growth: int, pixels: int) -> int:
    """FLOPs of a plain residual dense block at full resolution:
    2 * growth^2 * pixels * (C*K^2 + C(C+3)/2), exact."""
    if min(conv_layers, kernel, growth, pixels) < 1:
        raise CostModelError("all closed-form arguments must be >= 1")
    c, k = conv_layers, kernel
    bracket = Fraction(c * k * k) + Fraction(c * (c + 3), 2)
    total = 2 * growth * growth * pixels * bracket
    if total.denominator != 1:
        raise CostModelError(f"cost formula undefined for C={c}")
    return int(total)


def flops_crdb(conv_layers: int, kernel: int, growth: int, recursion: int,
               pixels: int) -> int:
    """FLOPs of the pooled, recursive (contextual) block:
    2 * growth^2 * pixels * (C*K^2*R/4 + (C+7)(C+1)/8), exact."""
    if min(conv_layers, kernel, growth, pixels) < 1:
        raise CostModelError("all closed-form arguments must be >= 1")
    if recursion not in (1, 2, 3, 4):
        raise CostModelError(f"recursion {recursion} out of range")
    c, k, r = conv_layers, kernel, recursion
    bracket = Fraction(c * k * k * r, 4) + Fraction((c + 7) * (c + 1), 8)
    total = 2 * growth * growth * pixels * bracket
    if total.denominator != 1:
        raise CostModelError(f"cost formula undefined for C={c}")
    return int(total)


@dataclass(frozen=True)
class LayerRecord:
    kind: str                      # "1x1" | "KxK" | "subpixel"
    in_ch: int
    out_ch: int
    spatial_scale: Fraction        # fraction of the block input's pixel count
    recursion_multiplier: int = 1
    groups: int = 1

    @property
    def kernel(self) -> int:
        return KERNEL_SIZE if self.kind == "KxK" else 1

    @property
    def params(self) -> int:
        total = Fraction(self.in_ch * self.out_ch * self.kernel ** 2, self.groups)
        assert total.denominator == 1, "group count must divide the channel product"
        return int(total)


def block_layer_inventory(gene: BlockGene) -> list[LayerRecord]:
    """Explicit layer enumeration of one active block.

    Dense stage: per layer a 1x1 squeeze (i*growth -> growth) then a KxK
    conv (growth -> growth); a final 1x1 fusion (C*growth -> out).  The
    contextual variant runs the dense stage at quarter area with the KxK
    convs applied ``recursion`` times (shared weights) and adds one 1x1
    sub-pixel upsampling conv (growth -> 4*growth, shared across layers).
    """
    g, c, out = gene.growth, gene.conv_layers, gene.out_channels
    contextual = gene.btype is BlockType.CONTEXTUAL
    groups = GROUP_COUNT if gene.btype is BlockType.GROUP else 1
    inner_scale = Fraction(1, 4) if contextual else Fraction(1)
    rec = gene.recursion if contextual else 1

    records = []
    for i in range(1, c + 1):
        records.append(LayerRecord("1x1", i * g, g, inner_scale))
        records.append(LayerRecord("KxK", g, g, inner_scale, rec, groups))
    if contextual:
        records.append(LayerRecord("subpixel", g, 4 * g, inner_scale))
    records.append(LayerRecord("1x1", c * g, out, Fraction(1)))
    return records


def block_params(gene: BlockGene) -> int:
    """Learnable weights of one block (recursion shares weights; pooling
    does not change parameter counts)."""
    if not gene.state:
        return 0
    return sum(rec.params for rec in block_layer_inventory(gene))


def _inventory_flops(records: Sequence[LayerRecord], pixels: int) -> int:
    total = Fraction(0)
    for rec in records:
        total += (2 * rec.params * rec.recursion_multiplier
                  * rec.spatial_scale * pixels)
    if total.denominator != 1:
        raise CostModelError("non-integral inventory FLOPs")
    return int(total)


def block_cost(gene: BlockGene, pixels: int) -> CostReport:
    """Cost of one block at ``pixels`` input positions."""
    if not gene.state:
        return CostReport(0, 0, 0)
    params = block_params(gene)
    if gene.btype is BlockType.CONTEXTUAL:
        if pixels % 4:
            raise CostModelError("contextual blocks need a pixel count divisible by 4")
        flops = flops_crdb(gene.conv_layers, KERNEL_SIZE, gene.growth,
                           gene.recursion, pixels)
    else:
        flops = _inventory_flops(block_layer_inventory(gene), pixels)
        assert flops == 2 * pixels * params
    return CostReport(params, flops, flops // 2)


@dataclass(frozen=True)
class NetworkCostReport(CostReport):
    per_block: tuple[CostReport, ...] = ()


def head_params(genome: Genome) -> int:
    first = genome.active_blocks[0]
    return 3 * first.growth * KERNEL_SIZE ** 2


def fusion_params(genome: Genome) -> int:
    concat = sum(g.out_channels for g in genome.active_blocks)
    return concat * FUSION_CHANNELS


def tail_params(genome: Genome) -> int:
    # single sub-pixel stage: KxK conv to 3*scale^2 channels + pixel shuffle
    return FUSION_CHANNELS * 3 * genome.scale ** 2 * KERNEL_SIZE ** 2


def network_cost(genome: Genome, res: ResolutionSpec) -> NetworkCostReport:
    """Whole-network cost: active blocks plus head, global fusion and the
    sub-pixel reconstruction tail, all evaluated at LR resolution."""
    violations = validate(genome)
    if violations:
        raise CostModelError("invalid genome: " + "; ".join(violations))
    if genome.scale != res.scale:
        raise CostModelError(
            f"genome scale {genome.scale} != resolution scale {res.scale}")
    pixels = res.lr_pixels
    per_block = tuple(block_cost(g, pixels) for g in genome.blocks)
    params = sum(r.params for r in per_block)
    flops = sum(r.flops for r in per_block)
    for extra in (head_params(genome), fusion_params(genome), tail_params(genome)):
        params += extra
        flops += 2 * extra * pixels
    return NetworkCostReport(params, flops, flops // 2,
                             res.lr_width, res.lr_height, per_block)


def network_cost_json(genome: Genome, res: ResolutionSpec) -> dict:
    """CLI-facing JSON report."""
    report = network_cost(genome, res)
    return {
        "params": report.params,
        "flops": report.flops,
        "multi_adds": report.multi_adds,
        "hr": [res.hr_width, res.hr_height],
        "scale": res.scale,
        "per_block": [
            {"params": r.params, "flops": r.flops, "multi_adds": r.multi_adds}
            for r in report.per_block
        ],
    }


def rdb_reference_cost(res: ResolutionSpec, blocks: int = 4, conv_layers: int = 6,
                       growth: int = 32) -> dict:
    """Diagnostic: plain-RDB backbone cost under our head/fusion/tail.

    Published ~1017K/235.6G baselines for this configuration depend on
    head/tail widths that are not specified anywhere, so no tolerance is
    attached to this figure; it is printed for orientation only.
    """
    pixels = res.lr_pixels
    per_rdb_params = (growth * growth * (conv_layers * KERNEL_SIZE ** 2
                                         + conv_layers * (conv_layers + 3) // 2))
    flops = blocks * flops_rdb(conv_layers, KERNEL_SIZE, growth, pixels)
    params = blocks * per_rdb_params
    head = 3 * growth * KERNEL_SIZE ** 2
    fusion = blocks * growth * FUSION_CHANNELS
    tail = FUSION_CHANNELS * 3 * res.scale ** 2 * KERNEL_SIZE ** 2
    for extra in (head, fusion, tail):
        params += extra
        flops += 2 * extra * pixels
    return {"params": params, "flops": flops, "multi_adds": flops // 2,
            "hr": [res.hr_width, res.hr_height], "scale": res.scale,
            "blocks": blocks, "conv_layers": conv_layers, "growth": growth}
