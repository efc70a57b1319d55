import numpy as np
import pytest

from esrn_search.genome import (BLOCK_TYPES, CHROMOSOME_LENGTH, GENOTYPES,
                                GENOTYPE_COUNT, BlockGene, BlockType, Genome,
                                GenomeParseError, decode_text, encode_gene,
                                encode_text, gene_from_genotype_id,
                                genome_from_json, genome_to_json, genotype_id,
                                random_genome, validate)

from conftest import make_gene, uniform_genome


def test_random_genome_deterministic():
    a = random_genome(7, 2)
    b = random_genome(7, 2)
    assert a == b
    assert a.scale == 2
    assert len(a.blocks) == CHROMOSOME_LENGTH
    assert a.active_count >= 5


def test_random_genome_always_valid():
    for seed in range(200):
        assert validate(random_genome(seed, 3)) == []


def test_random_genome_rejects_bad_scale():
    with pytest.raises(ValueError):
        random_genome(0, 5)


def test_block_type_fractions_uniform():
    # over 10,000 genomes each type holds ~1/3 of active genes (+-2%)
    rng = np.random.default_rng(0)
    counts = {t: 0 for t in BLOCK_TYPES}
    total = 0
    for _ in range(10_000):
        for gene in random_genome(rng, 2).active_blocks:
            counts[gene.btype] += 1
            total += 1
    for btype in BLOCK_TYPES:
        assert abs(counts[btype] / total - 1 / 3) < 0.02


def test_validate_reports_low_active_count():
    genome = uniform_genome(make_gene(), active=4)
    assert any("active blocks 4 < 5" in v for v in validate(genome))


def test_validate_reports_recursion_on_non_contextual():
    gene = make_gene(btype=BlockType.SHRINK, rec=3)
    genome = uniform_genome(gene, active=6)
    assert any("recursion>1 on non-contextual" in v for v in validate(genome))


def test_validate_reports_length_and_ranges():
    good = make_gene()
    genome = Genome((good,) * 3, scale=7)
    messages = "\n".join(validate(genome))
    assert "length 3" in messages
    assert "scale 7" in messages
    bad_field = Genome(tuple([BlockGene(True, BlockType.SHRINK, 5, 17, 99, 1)]
                             * 20), 2)
    messages = "\n".join(validate(bad_field))
    assert "conv layers 5" in messages
    assert "growth 17" in messages
    assert "out channels 99" in messages


def test_validate_accepts_valid_genome():
    assert validate(random_genome(11, 4)) == []


def test_normalized_forces_recursion():
    gene = make_gene(btype=BlockType.GROUP, rec=4)
    assert gene.normalized().recursion == 1
    ctx = make_gene(btype=BlockType.CONTEXTUAL, rec=4)
    assert ctx.normalized() is ctx


def test_genotype_id_enumeration_corners():
    assert genotype_id(make_gene(btype=BlockType.SHRINK, layers=4,
                                 growth=16, out=16)) == 0
    last = make_gene(btype=BlockType.CONTEXTUAL, layers=8, growth=64,
                     out=64, rec=4)
    assert genotype_id(last) == GENOTYPE_COUNT - 1 == 449
    assert len(GENOTYPES) == 2 * 75 + 300 == 450


def test_genotype_id_roundtrip_exhaustive():
    for gid in range(GENOTYPE_COUNT):
        gene = gene_from_genotype_id(gid)
        assert genotype_id(gene) == gid
    # ids ignore the state bit
    assert genotype_id(gene_from_genotype_id(42, state=False)) == 42


def test_genotype_id_rejects_out_of_space():
    with pytest.raises(ValueError):
        genotype_id(BlockGene(True, BlockType.SHRINK, 5, 16, 16, 1))
    with pytest.raises(ValueError):
        gene_from_genotype_id(450)


def test_encode_gene_example():
    gene = BlockGene(True, BlockType.CONTEXTUAL, 6, 32, 48, 3)
    assert encode_gene(gene) == "1C6g32o48r3"


def test_decode_inactive_minimal_gene():
    genome = decode_text("-".join(["0S4g16o16r1"] * 20))
    gene = genome.blocks[0]
    assert gene == BlockGene(False, BlockType.SHRINK, 4, 16, 16, 1)


def test_text_roundtrip_fuzz():
    rng = np.random.default_rng(99)
    for _ in range(1000):
        genome = random_genome(rng, 3)
        assert decode_text(encode_text(genome), 3) == genome


def test_decode_malformed_token_reports_index():
    text = "-".join(["1S4g16o16r1"] * 5 + ["garbage"] + ["1S4g16o16r1"] * 14)
    with pytest.raises(GenomeParseError, match="index 5"):
        decode_text(text)


def test_decode_keeps_range_violations_for_validate():
    genome = decode_text("-".join(["1S4g16o16r3"] * 20))
    assert any("recursion>1" in v for v in validate(genome))


def test_json_roundtrip_and_keys():
    genome = random_genome(5, 2)
    obj = genome_to_json(genome)
    assert set(obj) == {"scale", "blocks"}
    assert set(obj["blocks"][0]) == {"state", "type", "layers", "growth",
                                     "out", "rec"}
    assert genome_from_json(obj) == genome


def test_json_rejects_missing_keys():
    with pytest.raises(GenomeParseError):
        genome_from_json({"scale": 2})
