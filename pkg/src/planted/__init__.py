"""Planted-instance generation and recovery.

Generators for bipartite block-model graphs, planted k-CSP formulas, and
predicate-constraint instances; boolean Fourier analysis of planting laws;
the reduction of constraint instances to the block model; and a subsampled
power iteration solver that runs in time linear in the edges used.
"""
from .instances import (
    BipartiteGraph,
    BlockModelParams,
    GoldreichInstance,
    HiddenPartition,
    PlantedCspInstance,
    PlantingDistribution,
    majority_predicate,
    noisy_xor_weights,
    overlap,
    parity_predicate,
    sample_bipartite_block,
    sample_goldreich,
    sample_planted_csp,
    sat_clause_weights,
    uniform_weights,
)
from .fourier import FourierReport, distribution_complexity, fourier_coefficient, predicate_lowest_degree
from .reduction import (
    ReducedInstance,
    ReductionError,
    TupleIndexer,
    csp_to_bipartite,
    goldreich_to_bipartite,
    partition_to_assignment,
    restrict_clause,
)
from .solver import (
    RecoveryResult,
    SolverConfig,
    SplitGraphs,
    majority_vote_r1,
    power_iteration_baseline,
    spi_solve,
    split_edges,
)
from .harness import SweepRow, SweepSpec, run_sweep, solve_csp_end_to_end, solve_goldreich_end_to_end

__version__ = "0.1.0"
