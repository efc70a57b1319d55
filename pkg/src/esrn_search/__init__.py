"""Credit-guided multi-objective evolutionary search over efficient
residual dense blocks for super-resolution networks."""

from ._kernels import BACKEND as KERNEL_BACKEND
from .genome import (BlockGene, BlockType, Genome, decode_text, encode_text,
                     gene_from_genotype_id, genome_from_json, genome_to_json,
                     genotype_id, random_genome, validate)
from .cost_model import (CostReport, ResolutionSpec, block_cost,
                         block_layer_inventory, flops_crdb, flops_rdb,
                         network_cost)
from .credit import CreditMatrix, credit_from_prefix
from .objectives import (ConstraintSpec, ObjectiveVector, constrained_rank,
                         crowding_distance, dominates, non_dominated_sort)
from .evaluator import (CachedEvaluator, EvalRequest, EvalResponse,
                        ExternalEvaluator, SurrogateEvaluator,
                        surrogate_evaluate)
from .evolution import (Individual, Population, SearchConfig, SearchState,
                        continue_search, crossover, guided_mutate,
                        run_search, select_elitism)

__version__ = "0.1.0"
