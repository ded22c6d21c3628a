"""Minimum-weight pattern factors and covers of randomly weighted K_n.

A numpy/scipy workbench around one optimization problem: given a small
pattern graph H and the complete graph on n vertices with i.i.d. random
edge weights, find the cheapest collection of H-copies covering the
vertices, either vertex-disjointly (a factor) or with overlaps allowed (a
cover). Ships exact branch-and-bound solvers with an exhaustive oracle,
greedy and divide-and-conquer constructions, closed-form scaling formulas,
and a reproducible Monte Carlo experiment harness.
"""

from .copies import CopyIndex, PlacedCopy, cheapest_copy, enumerate_copies
from .exact import (
    brute_force_oracle,
    max_coverage_under_budget,
    min_cover,
    min_factor,
)
from .graphs import (
    DensityReport,
    GraphH,
    analyze,
    disjoint_union,
    graph_from_spec,
    named_graph,
    parse_graph,
)
from .heuristic import RecursionParams, divide_conquer_factor, greedy_partial_factor
from .instances import (
    CustomDistribution,
    Exponential,
    RedGreenInstance,
    Uniform01,
    WeightedInstance,
    couple_instance,
    derive_seed,
    red_green_instance,
    sample_instance,
)
from .solutions import (
    BudgetSolution,
    Infeasible,
    TilingSolution,
    parse_solution_record,
    render_solution_record,
    validate_solution,
)
from .theory import (
    TheoryContext,
    cover_lower_exponent,
    first_moment_constant,
    gamma_cdf_bounds,
    jkv_threshold,
    predicted_exponent,
)

__version__ = "0.1.0"
