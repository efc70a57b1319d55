import numpy as np
import pytest

from esrn_search.genome import (BlockGene, BlockType, Genome,
                                CHROMOSOME_LENGTH)


def make_gene(state=True, btype=BlockType.SHRINK, layers=4, growth=16,
              out=16, rec=1):
    return BlockGene(state, btype, layers, growth, out, rec)


def uniform_genome(gene: BlockGene, active: int = 5, scale: int = 2) -> Genome:
    """Genome with ``active`` leading copies of one gene, rest inactive."""
    blocks = []
    for i in range(CHROMOSOME_LENGTH):
        blocks.append(BlockGene(i < active, gene.btype, gene.conv_layers,
                                gene.growth, gene.out_channels, gene.recursion))
    return Genome(tuple(blocks), scale)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
