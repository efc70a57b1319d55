"""Search-space grammar: block genes, fixed-length chromosomes, codecs.

A network is encoded as exactly 20 block genes (active or not) plus a
genome-level upscaling factor.  Three block families exist: shrink (S),
group-convolution (G) and contextual (C, the only one with a recursion
hyperparameter).  Genomes are immutable; variation operators build new
ones.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, replace
from enum import Enum
from typing import Union

import numpy as np

CHROMOSOME_LENGTH = 20
MIN_ACTIVE_BLOCKS = 5
CONV_LAYER_CHOICES = (4, 6, 8)
GROWTH_CHOICES = (16, 24, 32, 48, 64)
OUT_CHANNEL_CHOICES = (16, 24, 32, 48, 64)
RECURSION_CHOICES = (1, 2, 3, 4)
SCALE_CHOICES = (2, 3, 4)

RngLike = Union[int, np.random.Generator]


class BlockType(Enum):
    SHRINK = "S"
    GROUP = "G"
    CONTEXTUAL = "C"

    @classmethod
    def parse(cls, symbol: str) -> "BlockType":
        for member in cls:
            if member.value == symbol:
                return member
        raise GenomeParseError(f"unknown block type {symbol!r}")


BLOCK_TYPES = (BlockType.SHRINK, BlockType.GROUP, BlockType.CONTEXTUAL)


class GenomeParseError(ValueError):
    pass


@dataclass(frozen=True)
class BlockGene:
    """One chromosome position: activity bit plus block architecture."""

    state: bool
    btype: BlockType
    conv_layers: int
    growth: int
    out_channels: int
    recursion: int = 1

    def normalized(self) -> "BlockGene":
        """Force recursion to 1 on non-contextual blocks (grammar closure)."""
        if self.btype is not BlockType.CONTEXTUAL and self.recursion != 1:
            return replace(self, recursion=1)
        return self

    def arch(self) -> tuple:
        return (self.btype, self.conv_layers, self.growth,
                self.out_channels, self.recursion)


@dataclass(frozen=True)
class Genome:
    blocks: tuple[BlockGene, ...]
    scale: int

    @property
    def active_indices(self) -> tuple[int, ...]:
        return tuple(i for i, g in enumerate(self.blocks) if g.state)

    @property
    def active_blocks(self) -> tuple[BlockGene, ...]:
        return tuple(g for g in self.blocks if g.state)

    @property
    def active_count(self) -> int:
        return sum(1 for g in self.blocks if g.state)


# Genotype enumeration: type-major (S, G, C), then conv layers, growth,
# output channels and, for contextual blocks only, recursion.  S and G
# collapse the recursion axis, giving 2*75 + 300 = 450 genotypes.
def _enumerate_genotypes() -> tuple[tuple, ...]:
    archs = []
    for btype in BLOCK_TYPES:
        recs = RECURSION_CHOICES if btype is BlockType.CONTEXTUAL else (1,)
        for layers in CONV_LAYER_CHOICES:
            for growth in GROWTH_CHOICES:
                for out in OUT_CHANNEL_CHOICES:
                    for rec in recs:
                        archs.append((btype, layers, growth, out, rec))
    return tuple(archs)


GENOTYPES = _enumerate_genotypes()
GENOTYPE_COUNT = len(GENOTYPES)
_GENOTYPE_INDEX = {arch: i for i, arch in enumerate(GENOTYPES)}


def genotype_id(gene: BlockGene) -> int:
    """Stable id of a gene's architecture within the 450-way search space."""
    try:
        return _GENOTYPE_INDEX[gene.arch()]
    except KeyError:
        raise ValueError(f"gene outside the search space: {gene!r}") from None


def gene_from_genotype_id(gid: int, state: bool = True) -> BlockGene:
    """Inverse of genotype_id; the state bit is supplied by the caller."""
    if not 0 <= gid < GENOTYPE_COUNT:
        raise ValueError(f"genotype id {gid} out of range [0, {GENOTYPE_COUNT})")
    btype, layers, growth, out, rec = GENOTYPES[gid]
    return BlockGene(state, btype, layers, growth, out, rec)


def as_generator(rng: RngLike) -> np.random.Generator:
    """The engine's documented random source: numpy Generator over PCG64."""
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.Generator(np.random.PCG64(rng))


def _random_gene(rng: np.random.Generator) -> BlockGene:
    state = bool(rng.random() < 0.5)
    btype = BLOCK_TYPES[int(rng.integers(len(BLOCK_TYPES)))]
    layers = CONV_LAYER_CHOICES[int(rng.integers(len(CONV_LAYER_CHOICES)))]
    growth = GROWTH_CHOICES[int(rng.integers(len(GROWTH_CHOICES)))]
    out = OUT_CHANNEL_CHOICES[int(rng.integers(len(OUT_CHANNEL_CHOICES)))]
    rec = RECURSION_CHOICES[int(rng.integers(len(RECURSION_CHOICES)))]
    return BlockGene(state, btype, layers, growth, out, rec).normalized()


def random_genome(rng: RngLike, scale: int) -> Genome:
    """Uniform genome: every field sampled from its enumerated set,
    resampled whole until at least MIN_ACTIVE_BLOCKS genes are active."""
    if scale not in SCALE_CHOICES:
        raise ValueError(f"scale must be one of {SCALE_CHOICES}, got {scale}")
    gen = as_generator(rng)
    while True:
        blocks = tuple(_random_gene(gen) for _ in range(CHROMOSOME_LENGTH))
        genome = Genome(blocks, scale)
        if genome.active_count >= MIN_ACTIVE_BLOCKS:
            return genome


def validate(genome: Genome) -> list[str]:
    """Every violated invariant, as human-readable strings; [] means valid."""
    violations = []
    n = len(genome.blocks)
    if n != CHROMOSOME_LENGTH:
        violations.append(f"chromosome length {n} != {CHROMOSOME_LENGTH}")
    if genome.scale not in SCALE_CHOICES:
        violations.append(f"scale {genome.scale} not in {SCALE_CHOICES}")
    active = genome.active_count
    if active < MIN_ACTIVE_BLOCKS:
        violations.append(f"active blocks {active} < {MIN_ACTIVE_BLOCKS}")
    for i, gene in enumerate(genome.blocks):
        if gene.conv_layers not in CONV_LAYER_CHOICES:
            violations.append(f"block {i}: conv layers {gene.conv_layers} not in {CONV_LAYER_CHOICES}")
        if gene.growth not in GROWTH_CHOICES:
            violations.append(f"block {i}: growth {gene.growth} not in {GROWTH_CHOICES}")
        if gene.out_channels not in OUT_CHANNEL_CHOICES:
            violations.append(f"block {i}: out channels {gene.out_channels} not in {OUT_CHANNEL_CHOICES}")
        if gene.recursion not in RECURSION_CHOICES:
            violations.append(f"block {i}: recursion {gene.recursion} not in {RECURSION_CHOICES}")
        elif gene.btype is not BlockType.CONTEXTUAL and gene.recursion != 1:
            violations.append(f"block {i}: recursion>1 on non-contextual block")
    return violations


_TOKEN_RE = re.compile(r"^([01])([SGC])(\d+)g(\d+)o(\d+)r(\d+)$")


def encode_gene(gene: BlockGene) -> str:
    return (f"{1 if gene.state else 0}{gene.btype.value}{gene.conv_layers}"
            f"g{gene.growth}o{gene.out_channels}r{gene.recursion}")


def encode_text(genome: Genome) -> str:
    """Compact text form, one token per block joined by '-'.

    The upscaling factor is not part of the text form; it travels in the
    JSON form or as a separate argument.
    """
    return "-".join(encode_gene(g) for g in genome.blocks)


def decode_text(text: str, scale: int = 2) -> Genome:
    """Parse the text form.  Structure errors raise GenomeParseError with
    the failing token index; range violations are left for validate()."""
    blocks = []
    for i, token in enumerate(text.strip().split("-")):
        m = _TOKEN_RE.match(token)
        if m is None:
            raise GenomeParseError(f"malformed token {token!r} at index {i}")
        blocks.append(BlockGene(
            state=m.group(1) == "1",
            btype=BlockType.parse(m.group(2)),
            conv_layers=int(m.group(3)),
            growth=int(m.group(4)),
            out_channels=int(m.group(5)),
            recursion=int(m.group(6)),
        ))
    return Genome(tuple(blocks), scale)


def genome_to_json(genome: Genome) -> dict:
    """JSON form with the fixed key names of the external interface."""
    return {
        "scale": genome.scale,
        "blocks": [
            {"state": g.state, "type": g.btype.value, "layers": g.conv_layers,
             "growth": g.growth, "out": g.out_channels, "rec": g.recursion}
            for g in genome.blocks
        ],
    }


def genome_from_json(obj: dict) -> Genome:
    try:
        blocks = tuple(
            BlockGene(bool(b["state"]), BlockType.parse(str(b["type"])),
                      int(b["layers"]), int(b["growth"]), int(b["out"]),
                      int(b["rec"]))
            for b in obj["blocks"]
        )
        return Genome(blocks, int(obj["scale"]))
    except (KeyError, TypeError) as exc:
        raise GenomeParseError(f"bad genome object: {exc}") from exc
