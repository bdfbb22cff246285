"""Reduce planted CSPs and predicate-constraint instances to bipartite
block-model graphs.

Left vertices are the 2n literals: code 2v is the positive literal of
variable v, code 2v+1 the negated one. Right vertices are unordered
(r-1)-sets of literal codes, materialized lazily in first-seen order; the
nominal right-side count C(2n, r-1) is carried separately for density
formulas.

Truth-label conventions (fixed so that a clause lands on a same-side edge
exactly when it has an even number of false literals, which happens with
probability delta/2):

* a literal's left label is +1 iff the literal is FALSE under sigma, so
  u[2v] = -sigma_v and u[2v+1] = +sigma_v;
* a tuple's right label is the negated product of its literal values, i.e.
  +1 iff the tuple has an odd number of false literals. For even witness
  sizes this coincides with "even number of true literals"; for odd sizes
  the parity flips (verified against the measured split in the test suite).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fourier import FourierReport
from .instances import BipartiteGraph, GoldreichInstance, HiddenPartition, PlantedCspInstance

__all__ = [
    "TupleIndexer",
    "ReducedInstance",
    "ReductionError",
    "literal_codes",
    "restrict_clause",
    "csp_to_bipartite",
    "goldreich_to_bipartite",
    "partition_to_assignment",
    "literal_truth_labels",
    "tuple_truth_labels",
]


class ReductionError(ValueError):
    pass


def literal_codes(var_ids: np.ndarray, signs: np.ndarray) -> np.ndarray:
    """Dense code of a literal: 2*var for positive, 2*var + 1 for negated."""
    return 2 * np.asarray(var_ids, dtype=np.int64) + (np.asarray(signs) < 0)


class TupleIndexer:
    """Bijection between canonical literal-code tuples and dense right-vertex
    indices. Canonical form is the sorted code tuple; indices are assigned
    contiguously from 0 in order of first appearance."""

    def __init__(self, r: int, n_vars: int):
        self.r = r
        self.n_vars = n_vars
        self.n2_nominal = math.comb(2 * n_vars, r - 1)
        self._index: dict[tuple[int, ...], int] = {}
        self._tuples: list[tuple[int, ...]] = []

    def __len__(self) -> int:
        return len(self._tuples)

    def index_of(self, codes, create: bool = False) -> int:
        key = tuple(sorted(int(c) for c in codes))
        if len({c // 2 for c in key}) != len(key):
            raise ReductionError("tuple repeats a variable")
        if key not in self._index:
            if not create:
                raise KeyError(key)
            self._index[key] = len(self._tuples)
            self._tuples.append(key)
        return self._index[key]

    def tuple_at(self, idx: int) -> tuple[int, ...]:
        return self._tuples[idx]

    def materialized(self) -> np.ndarray:
        """(count, r-1) array of the stored canonical tuples."""
        if not self._tuples:
            return np.empty((0, self.r - 1), dtype=np.int64)
        return np.array(self._tuples, dtype=np.int64)

    @classmethod
    def _from_rows(cls, r: int, n_vars: int, rows: np.ndarray) -> tuple["TupleIndexer", np.ndarray]:
        """Bulk-build from canonical (m, r-1) rows; returns (indexer, ids)."""
        idxr = cls(r, n_vars)
        if len(rows) == 0:
            return idxr, np.empty(0, dtype=np.int64)
        uniq, first, inv = np.unique(rows, axis=0, return_index=True, return_inverse=True)
        order = np.argsort(first, kind="stable")
        rank = np.empty(len(order), dtype=np.int64)
        rank[order] = np.arange(len(order))
        for row in uniq[order]:
            key = tuple(int(c) for c in row)
            idxr._index[key] = len(idxr._tuples)
            idxr._tuples.append(key)
        return idxr, rank[inv.ravel()]


@dataclass(frozen=True)
class ReducedInstance:
    """Block-model view of a constraint set. ``graph.n2`` is the nominal
    tuple count; ``truth``, when present, carries u over all 2n literals and
    v over the materialized tuples only (in index order)."""

    graph: BipartiteGraph
    indexer: TupleIndexer
    delta: float
    p_equiv: float
    truth: HiddenPartition | None

    @property
    def n2_nominal(self) -> int:
        return self.indexer.n2_nominal


def restrict_clause(clause, subset):
    """Sub-tuple of literals at the 0-based positions in ``subset``, in
    position order."""
    positions = sorted(subset)
    return tuple(clause[i] for i in positions)


def literal_truth_labels(sigma: np.ndarray) -> np.ndarray:
    """Left labels over the 2n literal codes: +1 iff the literal is false."""
    sigma = np.asarray(sigma, dtype=np.int64)
    u = np.empty(2 * len(sigma), dtype=np.int64)
    u[0::2] = -sigma
    u[1::2] = sigma
    return u


def tuple_truth_labels(code_rows: np.ndarray, sigma: np.ndarray) -> np.ndarray:
    """Right labels for tuples of literal codes: the negated product of the
    literals' truth values under sigma."""
    code_rows = np.asarray(code_rows, dtype=np.int64)
    sigma = np.asarray(sigma, dtype=np.int64)
    if code_rows.size == 0:
        return np.empty(0, dtype=np.int64)
    vals = sigma[code_rows // 2] * np.where(code_rows % 2 == 0, 1, -1)
    return -vals.prod(axis=1)


def _poisson_keep(m: int, epsilon: float, rng: np.random.Generator) -> int:
    z = int(rng.poisson((1.0 - epsilon) * m))
    return min(z, m)


def _build_reduced(
    n: int,
    r_vars: np.ndarray,
    r_signs: np.ndarray,
    sigma: np.ndarray | None,
    delta: float,
    thinning: str,
    epsilon: float,
    seed: int,
    left_literal: str,
) -> ReducedInstance:
    """Shared core: restricted r-literal clauses -> edges + labels."""
    m, r = r_vars.shape
    if m == 0:
        raise ReductionError("empty instance")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    if thinning == "poisson":
        keep = _poisson_keep(m, epsilon, rng)
        r_vars, r_signs = r_vars[:keep], r_signs[:keep]
    elif thinning != "dedup":
        raise ReductionError(f"unknown thinning mode: {thinning!r}")
    m_kept = len(r_vars)
    if m_kept == 0:
        raise ReductionError("thinning kept no constraints")

    codes = literal_codes(r_vars, r_signs)
    if left_literal == "random":
        # uniform pivot position per clause; only valid for order-symmetric laws
        pivot = rng.integers(0, r, size=m_kept)
        cols = np.arange(r)[None, :].repeat(m_kept, axis=0)
        cols[np.arange(m_kept), pivot] = 0
        cols[np.arange(m_kept), 0] = pivot
        codes = np.take_along_axis(codes, cols, axis=1)
    elif left_literal != "first":
        raise ReductionError(f"unknown left_literal mode: {left_literal!r}")

    left = codes[:, 0]
    tails = np.sort(codes[:, 1:], axis=1)
    indexer, tuple_ids = TupleIndexer._from_rows(r, n, tails)

    pairs = np.column_stack([left, tuple_ids])
    edges = np.unique(pairs, axis=0)
    n1 = 2 * n
    graph = BipartiteGraph(n1, indexer.n2_nominal, edges)
    p_equiv = m_kept / (2.0 * n1 * indexer.n2_nominal)

    truth = None
    if sigma is not None:
        u = literal_truth_labels(sigma)
        v = tuple_truth_labels(indexer.materialized(), sigma)
        truth = HiddenPartition(u, v)
    return ReducedInstance(graph, indexer, delta, p_equiv, truth)


def csp_to_bipartite(
    instance: PlantedCspInstance,
    report: FourierReport,
    thinning: str = "dedup",
    epsilon: float = 0.5,
    seed: int = 0,
    left_literal: str = "first",
) -> ReducedInstance:
    """Restrict each clause to the witness positions and turn it into an edge
    between its first restricted literal and the set of the remaining r-1.

    ``thinning="dedup"`` keeps every constraint and drops duplicate edges;
    ``"poisson"`` first keeps a Poisson((1-epsilon) m) prefix, which makes
    edges independent at the cost of discarding constraints.
    """
    if not report.identifiable:
        raise ReductionError("planting law has no usable witness subset")
    if report.r == 1:
        raise ReductionError("witness size 1: use the majority-vote solver")
    if report.r > instance.k:
        raise ReductionError("witness wider than the clauses")
    positions = sorted(report.subset)
    return _build_reduced(
        instance.n,
        instance.clause_vars[:, positions],
        instance.clause_signs[:, positions],
        instance.sigma,
        report.delta,
        thinning,
        epsilon,
        seed,
        left_literal,
    )


def goldreich_to_bipartite(
    instance: GoldreichInstance,
    report: FourierReport,
    thinning: str = "dedup",
    epsilon: float = 0.5,
    seed: int = 0,
    value_handling: str = "fold",
) -> ReducedInstance:
    """Reduce predicate constraints via their lowest-degree witness.

    Each constraint's witness coordinates form a noisy parity of the observed
    value. ``value_handling="fold"`` absorbs the value into the sign of the
    first restricted literal and keeps every constraint; ``"discard"`` keeps
    only value +1 constraints with all-positive literals.
    """
    if report.r == 0:
        raise ReductionError("constant predicate carries no information")
    if not report.identifiable:
        raise ReductionError("predicate has no usable witness subset")
    if report.r == 1:
        raise ReductionError("witness size 1: use the majority-vote solver")
    positions = sorted(report.subset)
    r_vars = instance.tuple_vars[:, positions]
    r_signs = np.ones_like(r_vars)
    if value_handling == "fold":
        r_signs[:, 0] = instance.values
    elif value_handling == "discard":
        keep = instance.values == 1
        r_vars, r_signs = r_vars[keep], r_signs[keep]
    else:
        raise ReductionError(f"unknown value_handling mode: {value_handling!r}")
    return _build_reduced(
        instance.n,
        r_vars,
        r_signs,
        instance.sigma,
        report.delta,
        thinning,
        epsilon,
        seed,
        "first",
    )


def partition_to_assignment(result: np.ndarray, seed: int = 0) -> tuple[np.ndarray, int]:
    """Collapse a sign vector over 2n literals to one over n variables.

    Per variable the positive-literal sign votes against the negated one;
    zero scores fall back to a seeded coin. Returns the assignment and the
    number of inconsistent literal pairs (both literals on the same side),
    a cheap quality diagnostic.
    """
    result = np.asarray(result, dtype=np.int64)
    if result.ndim != 1 or len(result) % 2:
        raise ValueError("expected a sign vector over 2n literals")
    n = len(result) // 2
    score = result[0::2] - result[1::2]
    coin = np.random.default_rng(np.random.SeedSequence(seed)).integers(0, 2, size=n) * 2 - 1
    assignment = np.where(score > 0, 1, np.where(score < 0, -1, coin)).astype(np.int64)
    inconsistent = int((score == 0).sum())
    return assignment, inconsistent
