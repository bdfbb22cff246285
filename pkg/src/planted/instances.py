"""Seeded generators for bipartite block-model graphs, planted k-CSP formulas,
and predicate-constraint (PRG-style) instances, plus the overlap metric.

All randomness is driven by numpy's PCG64 generator. Every sampler takes a
single 64-bit seed and derives independent substreams with
``np.random.SeedSequence(seed).spawn(...)`` in a fixed, documented order, so
the same seed always reproduces the same instance byte for byte.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "BipartiteGraph",
    "HiddenPartition",
    "BlockModelParams",
    "PlantingDistribution",
    "PlantedCspInstance",
    "GoldreichInstance",
    "sample_bipartite_block",
    "sample_planted_csp",
    "sample_goldreich",
    "overlap",
    "uniform_weights",
    "noisy_xor_weights",
    "sat_clause_weights",
    "parity_predicate",
    "majority_predicate",
    "constant_predicate",
]


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class BipartiteGraph:
    """Sparse bipartite graph: ``edges`` is an (m, 2) int array of 0-based
    (left, right) pairs with no duplicates."""

    n1: int
    n2: int
    edges: np.ndarray

    def __post_init__(self):
        if self.n1 < 1 or self.n2 < 1:
            raise ValueError("n1 and n2 must be at least 1")
        e = np.asarray(self.edges, dtype=np.int64).reshape(-1, 2)
        object.__setattr__(self, "edges", e)
        if len(e) > 0:
            if e[:, 0].min() < 0 or e[:, 0].max() >= self.n1:
                raise ValueError("left endpoint out of range")
            if e[:, 1].min() < 0 or e[:, 1].max() >= self.n2:
                raise ValueError("right endpoint out of range")

    @property
    def num_edges(self) -> int:
        return len(self.edges)


@dataclass(frozen=True)
class HiddenPartition:
    """Ground-truth sign labels for the two vertex sets."""

    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=np.int64)
        v = np.asarray(self.v, dtype=np.int64)
        for name, vec in (("u", u), ("v", v)):
            if not np.isin(vec, (-1, 1)).all():
                raise ValueError(f"{name} entries must be +/-1")
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)


@dataclass(frozen=True)
class BlockModelParams:
    n1: int
    n2: int
    delta: float
    p: float
    seed: int

    def validate(self, require_even: bool = True):
        if not (0.0 <= self.delta <= 2.0) or self.delta == 1.0:
            raise ValueError("delta must lie in [0, 2] and differ from 1")
        if self.p < 0.0:
            raise ValueError("p must be nonnegative")
        if self.delta * self.p > 1.0 or (2.0 - self.delta) * self.p > 1.0:
            raise ValueError("delta*p and (2-delta)*p must be probabilities")
        if self.n1 < 1 or self.n2 < 1:
            raise ValueError("n1 and n2 must be at least 1")
        if require_even and (self.n1 % 2 or self.n2 % 2):
            raise ValueError("n1 and n2 must be even to draw a balanced partition")


@dataclass(frozen=True)
class PlantingDistribution:
    """Unnormalized weight table over literal-value patterns z in {+/-1}^k.

    Index encoding: bit i of the table index is 1 iff z_i = +1, so
    ``weights[0]`` is the all-false pattern and ``weights[2**k - 1]`` the
    all-true one. Weights may be any nonnegative reals; operations normalize.
    """

    k: int
    weights: np.ndarray

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be at least 1")
        w = np.asarray(self.weights, dtype=np.float64)
        if w.shape != (2**self.k,):
            raise ValueError(f"weights must have length 2^k = {2**self.k}")
        if (w < 0).any():
            raise ValueError("weights must be nonnegative")
        if w.sum() <= 0:
            raise ValueError("weight table must not be identically zero")
        object.__setattr__(self, "weights", w)

    def normalized(self) -> np.ndarray:
        return self.weights / self.weights.sum()


@dataclass(frozen=True)
class PlantedCspInstance:
    """m ordered k-clauses of literals over n variables.

    ``clause_vars[c, j]`` is the 0-based variable of the j-th literal of
    clause c and ``clause_signs[c, j]`` its sign (+1 positive, -1 negated).
    Variables never repeat within a clause. ``sigma`` is the planted
    assignment when known.
    """

    n: int
    sigma: np.ndarray | None
    clause_vars: np.ndarray
    clause_signs: np.ndarray

    def __post_init__(self):
        cv = np.asarray(self.clause_vars, dtype=np.int64)
        cs = np.asarray(self.clause_signs, dtype=np.int64)
        if cv.ndim != 2 or cv.shape != cs.shape:
            raise ValueError("clause_vars and clause_signs must be (m, k) arrays")
        object.__setattr__(self, "clause_vars", cv)
        object.__setattr__(self, "clause_signs", cs)
        if self.sigma is not None:
            s = np.asarray(self.sigma, dtype=np.int64)
            if s.shape != (self.n,):
                raise ValueError("sigma must have length n")
            object.__setattr__(self, "sigma", s)

    @property
    def m(self) -> int:
        return self.clause_vars.shape[0]

    @property
    def k(self) -> int:
        return self.clause_vars.shape[1]


@dataclass(frozen=True)
class GoldreichInstance:
    """m predicate constraints: ordered tuples of distinct variables plus the
    predicate's observed value on the planted assignment."""

    n: int
    predicate: np.ndarray
    sigma: np.ndarray | None
    tuple_vars: np.ndarray
    values: np.ndarray

    @property
    def m(self) -> int:
        return self.tuple_vars.shape[0]

    @property
    def k(self) -> int:
        return self.tuple_vars.shape[1]


# ---------------------------------------------------------------------------
# Weight-table and predicate constructors
# ---------------------------------------------------------------------------


def uniform_weights(k: int) -> PlantingDistribution:
    """Flat table: the uninformative planting law."""
    return PlantingDistribution(k, np.ones(2**k))


def noisy_xor_weights(k: int, eta: float) -> PlantingDistribution:
    """Parity-tilted table w(z) = 1 + eta * prod(z); induced bias is 1 + eta."""
    if not -1.0 <= eta <= 1.0:
        raise ValueError("eta must lie in [-1, 1]")
    z = _pattern_table(k)
    return PlantingDistribution(k, 1.0 + eta * z.prod(axis=1))


def sat_clause_weights(k: int) -> PlantingDistribution:
    """Uniform over the 2^k - 1 patterns with at least one true literal."""
    w = np.ones(2**k)
    w[0] = 0.0  # index 0 is the all-false pattern
    return PlantingDistribution(k, w)


def parity_predicate(k: int) -> np.ndarray:
    return _pattern_table(k).prod(axis=1)


def majority_predicate(k: int) -> np.ndarray:
    if k % 2 == 0:
        raise ValueError("majority needs odd k")
    return np.where(_pattern_table(k).sum(axis=1) > 0, 1, -1).astype(np.int64)


def constant_predicate(k: int, value: int = 1) -> np.ndarray:
    if value not in (-1, 1):
        raise ValueError("value must be +/-1")
    return np.full(2**k, value, dtype=np.int64)


def _pattern_table(k: int) -> np.ndarray:
    """(2^k, k) array of +/-1 patterns; row index uses the bit encoding."""
    idx = np.arange(2**k)[:, None]
    return np.where((idx >> np.arange(k)) & 1, 1, -1).astype(np.int64)


def pattern_index(z: np.ndarray) -> np.ndarray:
    """Table index of each +/-1 row of z (bit i set iff z_i = +1)."""
    z = np.asarray(z)
    bits = (z > 0).astype(np.int64)
    return bits @ (1 << np.arange(z.shape[-1], dtype=np.int64))


# ---------------------------------------------------------------------------
# Bipartite block model
# ---------------------------------------------------------------------------


def _bernoulli_indices(length: int, prob: float, rng: np.random.Generator) -> np.ndarray:
    """Positions of successes of independent Bernoulli(prob) trials over
    range(length), by geometric gap skipping: expected O(length * prob) work."""
    if length <= 0 or prob <= 0.0:
        return np.empty(0, dtype=np.int64)
    if prob >= 1.0:
        return np.arange(length, dtype=np.int64)
    chunks = []
    pos = 0
    while pos < length:
        mean = (length - pos) * prob
        n_draw = max(16, int(mean * 1.1 + 6.0 * math.sqrt(mean + 1.0)))
        gaps = rng.geometric(prob, size=n_draw)
        hits = pos + np.cumsum(gaps) - 1
        inside = hits[hits < length]
        chunks.append(inside)
        if len(inside) < len(hits):
            break
        pos = int(hits[-1]) + 1
    return np.concatenate(chunks) if chunks else np.empty(0, dtype=np.int64)


def _balanced_signs(n: int, rng: np.random.Generator) -> np.ndarray:
    base = np.repeat(np.array([1, -1], dtype=np.int64), n // 2)
    return rng.permutation(base)


def sample_bipartite_block(
    params: BlockModelParams,
    partition: HiddenPartition | None = None,
) -> tuple[BipartiteGraph, HiddenPartition]:
    """Draw a bipartite block-model graph.

    Each pair (i, j) appears independently: with probability delta*p when
    u_i = v_j and (2-delta)*p otherwise. When no partition is given a
    uniformly random balanced one is drawn first (n1, n2 must be even).

    Seed substreams, in order: 0 = partition, 1 = edges.
    """
    params.validate(require_even=partition is None)
    part_ss, edge_ss = np.random.SeedSequence(params.seed).spawn(2)
    if partition is None:
        prng = np.random.default_rng(part_ss)
        partition = HiddenPartition(
            _balanced_signs(params.n1, prng), _balanced_signs(params.n2, prng)
        )
    else:
        if len(partition.u) != params.n1 or len(partition.v) != params.n2:
            raise ValueError("partition lengths must match n1, n2")

    # Group rows/columns by label so each of the four probability blocks is a
    # contiguous grid; sample each block as a flat Bernoulli process.
    rng = np.random.default_rng(edge_ss)
    left = [np.flatnonzero(partition.u == 1), np.flatnonzero(partition.u == -1)]
    right = [np.flatnonzero(partition.v == 1), np.flatnonzero(partition.v == -1)]
    p_same, p_cross = params.delta * params.p, (2.0 - params.delta) * params.p
    parts = []
    for li, rows in enumerate(left):
        for ri, cols in enumerate(right):
            prob = p_same if li == ri else p_cross
            flat = _bernoulli_indices(len(rows) * len(cols), prob, rng)
            r, c = np.divmod(flat, max(len(cols), 1))
            parts.append(np.column_stack([rows[r], cols[c]]))
    edges = np.vstack(parts) if parts else np.empty((0, 2), dtype=np.int64)
    order = np.lexsort((edges[:, 1], edges[:, 0]))
    return BipartiteGraph(params.n1, params.n2, edges[order]), partition


# ---------------------------------------------------------------------------
# Planted CSP and predicate constraints
# ---------------------------------------------------------------------------


def _distinct_tuples(
    n: int, k: int, batch: int, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Propose `batch` ordered k-tuples; returns (tuples, valid mask).

    For n well above k, i.i.d. draws filtered for repeats are cheapest; for
    cramped n every proposal is made distinct by taking the first k entries
    of a random permutation. Both give uniform ordered distinct tuples.
    """
    if n >= 4 * k * k:
        cand = rng.integers(0, n, size=(batch, k))
        srt = np.sort(cand, axis=1)
        valid = (np.diff(srt, axis=1) > 0).all(axis=1)
        return cand, valid
    keys = rng.random((batch, n))
    cand = np.argsort(keys, axis=1, kind="stable")[:, :k].astype(np.int64)
    return cand, np.ones(batch, dtype=bool)


def sample_planted_csp(
    q_dist: PlantingDistribution, n: int, m: int, seed: int
) -> PlantedCspInstance:
    """Draw a planted CSP: sigma uniform on {+/-1}^n, then m clauses i.i.d.
    with probability proportional to the weight of the literal-value pattern
    sigma induces on the clause.

    Rejection sampling: propose a uniform ordered distinct k-tuple with
    uniform signs, accept with probability w(pattern) / max(w). The proposal
    is uniform over all clauses, so accepted clauses follow the target law
    exactly. Seed substreams: 0 = sigma, 1 = clause proposals.
    """
    k = q_dist.k
    if n < k:
        raise ValueError("need n >= k")
    w = q_dist.weights
    wmax = float(w.max())
    sig_ss, clause_ss = np.random.SeedSequence(seed).spawn(2)
    sigma = np.random.default_rng(sig_ss).integers(0, 2, size=n) * 2 - 1
    rng = np.random.default_rng(clause_ss)

    accept_rate = float(w.mean()) / wmax
    out_vars = np.empty((m, k), dtype=np.int64)
    out_signs = np.empty((m, k), dtype=np.int64)
    got = 0
    powers = 1 << np.arange(k, dtype=np.int64)
    while got < m:
        need = m - got
        batch = int(need / max(accept_rate, 1e-3) * 1.2) + 16
        row_cost = k if n >= 4 * k * k else n  # see _distinct_tuples
        batch = min(batch, max(4096, 30_000_000 // row_cost))
        cand, valid = _distinct_tuples(n, k, batch, rng)
        signs = rng.integers(0, 2, size=(batch, k)) * 2 - 1
        idx = ((sigma[cand] * signs) > 0).astype(np.int64) @ powers
        accept = valid & (rng.random(batch) * wmax < w[idx])
        rows = np.flatnonzero(accept)[:need]
        out_vars[got : got + len(rows)] = cand[rows]
        out_signs[got : got + len(rows)] = signs[rows]
        got += len(rows)
    return PlantedCspInstance(n, sigma, out_vars, out_signs)


def sample_goldreich(
    predicate: np.ndarray, n: int, m: int, seed: int
) -> GoldreichInstance:
    """Draw m uniform ordered distinct k-tuples and record the predicate's
    value on the planted assignment at each tuple.

    Seed substreams: 0 = sigma, 1 = tuples.
    """
    table = np.asarray(predicate, dtype=np.int64)
    k = int(round(math.log2(len(table))))
    if len(table) != 2**k or not np.isin(table, (-1, 1)).all():
        raise ValueError("predicate must be a +/-1 table of length 2^k")
    if n < k:
        raise ValueError("need n >= k")
    sig_ss, tup_ss = np.random.SeedSequence(seed).spawn(2)
    sigma = np.random.default_rng(sig_ss).integers(0, 2, size=n) * 2 - 1
    rng = np.random.default_rng(tup_ss)

    out = np.empty((m, k), dtype=np.int64)
    got = 0
    while got < m:
        batch = (m - got) + (m - got) // 4 + 16
        cand, valid = _distinct_tuples(n, k, batch, rng)
        rows = np.flatnonzero(valid)[: m - got]
        out[got : got + len(rows)] = cand[rows]
        got += len(rows)
    values = table[pattern_index(sigma[out])]
    return GoldreichInstance(n, table, sigma, out, values)


# ---------------------------------------------------------------------------
# Evaluation
# ---------------------------------------------------------------------------


def overlap(signs: np.ndarray, truth: np.ndarray) -> float:
    """|signs . truth| / n: 1.0 iff the vectors agree up to a global flip."""
    signs = np.asarray(signs, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if signs.shape != truth.shape:
        raise ValueError("length mismatch")
    return float(abs(signs @ truth) / len(truth))
