"""Reduction tests: label conventions against the induced edge law, thinning,
lazy tuple indexing, and assignment decoding."""
import itertools
import math

import numpy as np
import pytest
from scipy import stats

from planted.fourier import distribution_complexity, predicate_lowest_degree
from planted.instances import (
    constant_predicate,
    majority_predicate,
    noisy_xor_weights,
    overlap,
    parity_predicate,
    pattern_index,
    sample_goldreich,
    sample_planted_csp,
    sat_clause_weights,
    uniform_weights,
)
from planted.reduction import (
    ReductionError,
    TupleIndexer,
    csp_to_bipartite,
    goldreich_to_bipartite,
    literal_codes,
    literal_truth_labels,
    partition_to_assignment,
    restrict_clause,
    tuple_truth_labels,
)
from planted.solver import SolverConfig, spi_solve


# ---------------------------------------------------------------------------
# Restriction and literal codes
# ---------------------------------------------------------------------------


def test_restrict_clause_positional():
    clause = ((4, 1), (5, -1), (9, 1))
    assert restrict_clause(clause, {0, 2}) == ((4, 1), (9, 1))
    assert restrict_clause(clause, {0, 1, 2}) == clause
    clause4 = ((0, -1), (1, 1), (2, -1), (3, 1))
    assert restrict_clause(clause4, {1, 3}) == ((1, 1), (3, 1))


def test_literal_codes():
    assert literal_codes(np.array([0, 0, 3]), np.array([1, -1, -1])).tolist() == [0, 1, 7]


def test_truth_label_conventions():
    sigma = np.array([1, -1, 1])
    u = literal_truth_labels(sigma)
    # positive literal of a true variable is TRUE -> label -1
    assert u.tolist() == [-1, 1, 1, -1, -1, 1]
    assert (u[0::2] == -u[1::2]).all()  # antisymmetry


def test_spec_r2_example_labels():
    # clause (x0, not-x1) under sigma = (+1, +1): left vertex is code 0,
    # x0 is TRUE so its label is -1; the tuple {not-x1} has no true literal
    # and gets label +1
    sigma = np.array([1, 1])
    u = literal_truth_labels(sigma)
    assert u[0] == -1
    assert tuple_truth_labels(np.array([[3]]), sigma).tolist() == [1]


# ---------------------------------------------------------------------------
# Induced edge law: same-side probability is delta/2 for odd and even r
# ---------------------------------------------------------------------------


def _same_side_fraction(instance, report):
    """Per-constraint same-side indicator via the production label functions."""
    positions = sorted(report.subset)
    codes = literal_codes(
        instance.clause_vars[:, positions], instance.clause_signs[:, positions]
    )
    u = literal_truth_labels(instance.sigma)
    v = tuple_truth_labels(codes[:, 1:], instance.sigma)
    return float((u[codes[:, 0]] == v).mean())


def test_same_side_fraction_odd_r():
    q = noisy_xor_weights(3, 0.5)  # delta = 1.5, witness size 3
    report = distribution_complexity(q)
    inst = sample_planted_csp(q, 30, 20_000, seed=3)
    frac = _same_side_fraction(inst, report)
    se = math.sqrt(0.75 * 0.25 / inst.m)
    assert abs(frac - report.delta / 2) < 3 * se  # 0.75, not 0.25


def test_same_side_fraction_even_r():
    q = noisy_xor_weights(2, 0.5)
    report = distribution_complexity(q)
    inst = sample_planted_csp(q, 30, 20_000, seed=4)
    frac = _same_side_fraction(inst, report)
    se = math.sqrt(0.75 * 0.25 / inst.m)
    assert abs(frac - report.delta / 2) < 3 * se


def test_projections_below_witness_are_uniform():
    q = noisy_xor_weights(3, 0.5)
    report = distribution_complexity(q)
    inst = sample_planted_csp(q, 30, 20_000, seed=5)
    z = inst.sigma[inst.clause_vars] * inst.clause_signs
    for size in (1, 2):
        for sub in itertools.combinations(sorted(report.subset), size):
            idx = pattern_index(z[:, sub])
            counts = np.bincount(idx, minlength=2**size)
            assert stats.chisquare(counts).pvalue > 0.001


# ---------------------------------------------------------------------------
# Graph construction, thinning, indexing
# ---------------------------------------------------------------------------


def _small_reduced(seed=0, thinning="dedup", **kw):
    q = noisy_xor_weights(3, 0.8)
    inst = sample_planted_csp(q, 12, 400, seed=seed)
    report = distribution_complexity(q)
    return inst, report, csp_to_bipartite(inst, report, thinning=thinning, seed=seed, **kw)


def test_reduced_geometry_and_dedup():
    inst, report, red = _small_reduced()
    g = red.graph
    assert g.n1 == 24
    assert g.n2 == math.comb(24, 2) == red.n2_nominal
    assert len(np.unique(g.edges, axis=0)) == g.num_edges
    assert red.p_equiv == pytest.approx(inst.m / (2 * g.n1 * g.n2))
    assert red.delta == pytest.approx(report.delta)


def test_lazy_indexing_soundness():
    inst, report, red = _small_reduced()
    positions = sorted(report.subset)
    codes = literal_codes(inst.clause_vars[:, positions], inst.clause_signs[:, positions])
    tails = {tuple(sorted(row)) for row in codes[:, 1:].tolist()}
    materialized = {tuple(row) for row in red.indexer.materialized().tolist()}
    assert materialized == tails
    # stable under re-runs
    _, _, red2 = _small_reduced()
    assert np.array_equal(red.indexer.materialized(), red2.indexer.materialized())
    assert np.array_equal(red.graph.edges, red2.graph.edges)


def test_reduced_truth_labels():
    inst, report, red = _small_reduced()
    u, v = red.truth.u, red.truth.v
    assert (u[0::2] == -u[1::2]).all()
    assert np.array_equal(u, literal_truth_labels(inst.sigma))
    assert np.array_equal(v, tuple_truth_labels(red.indexer.materialized(), inst.sigma))


def test_poisson_thinning_keeps_prefix_and_is_seeded():
    inst, report, red_d = _small_reduced(thinning="dedup")
    _, _, red_p = _small_reduced(thinning="poisson")
    assert red_p.graph.num_edges <= red_d.graph.num_edges
    assert red_p.p_equiv <= red_d.p_equiv
    _, _, red_p2 = _small_reduced(thinning="poisson")
    assert np.array_equal(red_p.graph.edges, red_p2.graph.edges)


def test_poisson_edge_inclusion_probability():
    """Slot inclusion under poisson thinning: 1 - exp(-(1-eps) m q_e)."""
    q = noisy_xor_weights(2, 0.5)
    report = distribution_complexity(q)
    n, m, reps = 4, 40, 2000
    qn = q.normalized()
    hits = {1: 0, -1: 0}
    totals = {1: 0, -1: 0}
    for s in range(reps):
        inst = sample_planted_csp(q, n, m, seed=s)
        red = csp_to_bipartite(inst, report, thinning="poisson", epsilon=0.5, seed=s)
        cls = int(inst.sigma[0] * inst.sigma[1])  # parity class of clause (x0, x1)
        totals[cls] += 1
        try:
            t = red.indexer.index_of((2,))  # tuple {x1}
        except KeyError:
            continue
        hits[cls] += bool(((red.graph.edges == (0, t)).all(axis=1)).any())
    n_pairs = n * (n - 1)
    for cls in (1, -1):
        # the weight of clause (x0, x1) depends only on sigma0*sigma1 = cls
        q_e = qn[pattern_index(np.array([[cls, 1]]))[0]] / n_pairs
        p_e = 1.0 - math.exp(-0.5 * m * q_e)
        frac = hits[cls] / totals[cls]
        se = math.sqrt(p_e * (1 - p_e) / totals[cls])
        assert abs(frac - p_e) < 4 * se, (cls, frac, p_e)


def test_reduction_rejects():
    sat = sat_clause_weights(3)
    inst = sample_planted_csp(sat, 10, 50, seed=0)
    with pytest.raises(ReductionError):
        csp_to_bipartite(inst, distribution_complexity(sat))  # r = 1
    uni = uniform_weights(3)
    inst_u = sample_planted_csp(uni, 10, 50, seed=0)
    with pytest.raises(ReductionError):
        csp_to_bipartite(inst_u, distribution_complexity(uni))  # unidentifiable
    with pytest.raises(ReductionError):
        _small_reduced(thinning="bogus")


def test_random_left_literal_mode():
    inst, report, red = _small_reduced(left_literal="random")
    assert red.graph.num_edges > 0
    _, _, red2 = _small_reduced(left_literal="random")
    assert np.array_equal(red.graph.edges, red2.graph.edges)  # seeded


def test_tuple_indexer_contract():
    idx = TupleIndexer(3, 5)
    a = idx.index_of((4, 2), create=True)
    assert idx.index_of((2, 4)) == a  # canonical ordering
    assert idx.tuple_at(a) == (2, 4)
    assert idx.n2_nominal == math.comb(10, 2)
    with pytest.raises(KeyError):
        idx.index_of((0, 2))
    with pytest.raises(ReductionError):
        idx.index_of((2, 3), create=True)  # both literals of variable 1


# ---------------------------------------------------------------------------
# Predicate-constraint reductions
# ---------------------------------------------------------------------------


def test_goldreich_pure_parity_all_edges_same_side():
    pred = parity_predicate(3)
    inst = sample_goldreich(pred, 12, 500, seed=1)
    red = goldreich_to_bipartite(inst, predicate_lowest_degree(pred))
    u, v = red.truth.u, red.truth.v
    e = red.graph.edges
    assert (u[e[:, 0]] == v[e[:, 1]]).all()  # delta = 2: no crossing edges


def test_goldreich_discard_mode_matches_quoted_construction():
    pred = parity_predicate(3)
    inst = sample_goldreich(pred, 12, 500, seed=1)
    red = goldreich_to_bipartite(inst, predicate_lowest_degree(pred), value_handling="discard")
    kept = int((inst.values == 1).sum())
    assert red.p_equiv == pytest.approx(kept / (2.0 * red.graph.n1 * red.n2_nominal))
    # discarded constraints carry only positive literals
    assert (red.graph.edges[:, 0] % 2 == 0).all()


def _noisy_witness3_predicate():
    """P(z) = z0 z1 z2 * s(z3, z4) with s = NAND: every coefficient of size
    below 3 has an unmatched independent factor and vanishes, and the witness
    {0,1,2} carries coefficient E[s] = 1/2. (A +/-1 predicate with all
    degree-1 AND degree-2 coefficients zero is necessarily a pure parity, so
    a noisy witness of size 3 needs width 5.)"""
    table = np.empty(32, dtype=np.int64)
    for z in range(32):
        bits = [1 if (z >> i) & 1 else -1 for i in range(5)]
        s = -1 if (bits[3] == 1 and bits[4] == 1) else 1
        table[z] = bits[0] * bits[1] * bits[2] * s
    return table


def test_goldreich_noisy_predicate_same_side_law():
    table = _noisy_witness3_predicate()
    report = predicate_lowest_degree(table)
    assert (report.r, report.subset) == (3, (0, 1, 2))
    assert report.coefficient == pytest.approx(0.5)

    n = 10
    inst = sample_goldreich(table, n, 40_000, seed=2)
    # oracle: exact same-side probability given sigma, enumerated over all
    # ordered distinct 5-tuples; same-side <=> value * chi_S(sigma tuple) = +1
    sigma = inst.sigma
    positions = sorted(report.subset)
    hits = total = 0
    for vs in itertools.permutations(range(n), 5):
        x = sigma[np.array(vs)]
        b = table[pattern_index(x)]
        chi = np.prod(x[positions])
        hits += b * chi == 1
        total += 1
    target = hits / total

    # measured through the production label machinery (value folded into the
    # first restricted literal, as the reduction does)
    signs = np.ones((inst.m, 3), dtype=np.int64)
    signs[:, 0] = inst.values
    codes = literal_codes(inst.tuple_vars[:, positions], signs)
    u = literal_truth_labels(sigma)
    v = tuple_truth_labels(codes[:, 1:], sigma)
    frac = float((u[codes[:, 0]] == v).mean())
    se = math.sqrt(target * (1 - target) / inst.m)
    assert abs(frac - target) < 3 * se


def test_goldreich_rejects_r1_and_constant():
    maj = sample_goldreich(majority_predicate(3), 10, 100, seed=0)
    with pytest.raises(ReductionError):
        goldreich_to_bipartite(maj, predicate_lowest_degree(majority_predicate(3)))
    const = sample_goldreich(constant_predicate(3), 10, 100, seed=0)
    with pytest.raises(ReductionError):
        goldreich_to_bipartite(const, predicate_lowest_degree(constant_predicate(3)))


# ---------------------------------------------------------------------------
# Assignment decoding
# ---------------------------------------------------------------------------


def test_partition_to_assignment_antisymmetric_input():
    sigma = np.array([1, -1, -1, 1, 1])
    u = literal_truth_labels(sigma)
    assignment, bad = partition_to_assignment(u, seed=0)
    assert bad == 0
    assert overlap(assignment, sigma) == 1.0


def test_partition_to_assignment_all_ones_is_all_coinflips():
    n = 50
    assignment, bad = partition_to_assignment(np.ones(2 * n, dtype=int), seed=3)
    assert bad == n
    a2, _ = partition_to_assignment(np.ones(2 * n, dtype=int), seed=3)
    assert np.array_equal(assignment, a2)
    with pytest.raises(ValueError):
        partition_to_assignment(np.ones(5, dtype=int))


def test_end_to_end_dense_2xor_pipeline():
    n = 200
    q = noisy_xor_weights(2, 0.9)
    inst = sample_planted_csp(q, n, int(100 * n * math.log(n)), seed=6)
    red = csp_to_bipartite(inst, distribution_complexity(q), seed=6)
    res = spi_solve(red.graph, SolverConfig(seed=7, T_factor=3.0), truth=red.truth)
    assignment, bad = partition_to_assignment(res.signs, seed=8)
    assert bad == 0
    assert overlap(assignment, inst.sigma) == 1.0
