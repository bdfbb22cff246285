"""Subsampled power iteration and baselines.

The solver never forms the n1 x n2 matrix. Each of the T edge-disjoint
sub-graphs stores its edges plus the set of right vertices it actually
touches, and the centered products are computed implicitly:

    y = (A - qJ)^T x  is carried as (yhat on the support, L = sum(x)),
        the full vector being yhat - q L everywhere;
    x' = (A - qJ) y   expands to  A yhat - q (sum yhat) - q L deg + q^2 L n2,

so one iteration costs O(edges + support + n1) regardless of n2. The dense
reference mode materializes the same sub-matrices for differential testing.
"""
from __future__ import annotations

import math
from contextlib import contextmanager
from dataclasses import dataclass

import numpy as np

from .instances import BipartiteGraph, PlantedCspInstance

__all__ = [
    "SubGraph",
    "SplitGraphs",
    "SparseRightVec",
    "SolverConfig",
    "RecoveryResult",
    "SolverError",
    "split_edges",
    "apply_mt",
    "apply_m",
    "right_norm",
    "spi_solve",
    "majority_vote_r1",
    "power_iteration_baseline",
    "allocation_audit",
]

# Any intermediate with norm below this aborts the solve.
NORM_ABORT = 1e-12


class SolverError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# Allocation audit: a test hook recording the length of every dense array the
# implicit path allocates, to prove no length-n2 vector is ever created.
# ---------------------------------------------------------------------------

_AUDIT_SINK: list | None = None


@contextmanager
def allocation_audit():
    global _AUDIT_SINK
    prev, sink = _AUDIT_SINK, []
    _AUDIT_SINK = sink
    try:
        yield sink
    finally:
        _AUDIT_SINK = prev


def _track(size: int):
    if _AUDIT_SINK is not None:
        _AUDIT_SINK.append(int(size))


# ---------------------------------------------------------------------------
# Edge splitting
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SubGraph:
    """One sub-matrix: edge arrays plus the right-support and row degrees."""

    rows: np.ndarray
    cols: np.ndarray
    support: np.ndarray  # sorted unique right endpoints
    col_rank: np.ndarray  # per-edge index into support
    row_degrees: np.ndarray  # length n1

    @property
    def num_edges(self) -> int:
        return len(self.rows)


@dataclass(frozen=True)
class SplitGraphs:
    n1: int
    n2: int
    T: int
    q: float
    subs: list[SubGraph]


def _make_sub(n1: int, rows: np.ndarray, cols: np.ndarray) -> SubGraph:
    support, col_rank = np.unique(cols, return_inverse=True)
    degrees = np.bincount(rows, minlength=n1).astype(np.float64)
    for arr in (rows, cols, support, col_rank, degrees):
        _track(arr.size)
    return SubGraph(rows, cols, support, col_rank.ravel(), degrees)


def split_edges(graph: BipartiteGraph, T: int, seed, p: float | None = None) -> SplitGraphs:
    """Assign each edge to one of T sub-graphs uniformly and independently.

    The centering constant is q = p / T with p the given overall density or,
    when omitted, the observed density m / (n1 n2).
    """
    if T < 2:
        raise ValueError("need T >= 2")
    m = graph.num_edges
    rng = np.random.default_rng(seed)
    assignment = rng.integers(0, T, size=m)
    order = np.argsort(assignment, kind="stable")
    counts = np.bincount(assignment, minlength=T)
    bounds = np.concatenate([[0], np.cumsum(counts)])
    subs = []
    for t in range(T):
        sel = order[bounds[t] : bounds[t + 1]]
        subs.append(_make_sub(graph.n1, graph.edges[sel, 0], graph.edges[sel, 1]))
    if p is None:
        p = m / (graph.n1 * graph.n2)
    return SplitGraphs(graph.n1, graph.n2, T, p / T, subs)


# ---------------------------------------------------------------------------
# Implicit centered products
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SparseRightVec:
    """Values on a sorted support; the represented full vector is
    values - q*L on the support and -q*L elsewhere."""

    support: np.ndarray
    values: np.ndarray


def _weighted_bincount(idx, weights, minlength):
    # bincount of an empty index array yields int64 even with float weights
    out = np.bincount(idx, weights=weights, minlength=minlength)
    return out.astype(np.float64, copy=False)


def apply_mt(sub: SubGraph, x: np.ndarray, q: float) -> tuple[SparseRightVec, float]:
    """(A - qJ)^T x without touching n2: returns (yhat, L)."""
    vals = _weighted_bincount(sub.col_rank, x[sub.rows], len(sub.support))
    _track(vals.size)
    return SparseRightVec(sub.support, vals), float(x.sum())


def right_norm(yhat: SparseRightVec, L: float, q: float, n2: int) -> float:
    """2-norm of the full vector yhat - q L 1."""
    on = yhat.values - q * L
    off = q * L
    return math.sqrt(float(on @ on) + (n2 - len(yhat.values)) * off * off)


def right_dot(
    yhat: SparseRightVec, L: float, q: float, dense: np.ndarray, dense_sum: float | None = None
) -> float:
    """Dot product of the represented vector with a full dense vector; only
    support-sized slices of ``dense`` are materialized."""
    if dense_sum is None:
        dense_sum = float(dense.sum())
    return float(yhat.values @ dense[yhat.support].astype(np.float64)) - q * L * dense_sum


def _lookup(yhat: SparseRightVec, cols: np.ndarray) -> np.ndarray:
    if len(yhat.support) == 0:
        return np.zeros(len(cols))
    pos = np.searchsorted(yhat.support, cols)
    pos = np.minimum(pos, len(yhat.support) - 1)
    hit = yhat.support[pos] == cols
    out = np.where(hit, yhat.values[pos], 0.0)
    _track(out.size)
    return out


def apply_m(
    sub: SubGraph, yhat: SparseRightVec, L: float, q: float, n2_nominal: int
) -> np.ndarray:
    """(A - qJ)(yhat - q L 1) as the exact four-term sum:

        A yhat - q (sum yhat) 1 - q L (A 1) + q^2 L n2 1

    Cost is linear in the sub-graph's edges plus the support of yhat plus n1.
    """
    vals_at_edges = _lookup(yhat, sub.cols)
    n1 = len(sub.row_degrees)
    out = _weighted_bincount(sub.rows, vals_at_edges, n1)
    _track(out.size)
    ssum = float(yhat.values.sum())
    out -= q * ssum
    out -= (q * L) * sub.row_degrees
    out += (q * q * L) * n2_nominal
    return out


# ---------------------------------------------------------------------------
# Subsampled power iteration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SolverConfig:
    """Knobs for one solve. T = ceil(T_factor * ln n1), rounded up to even;
    the per-coordinate majority is voted over the window of iterates given as
    fractions of the iterate list (default: the second half)."""

    T_factor: float = 10.0
    majority_window: tuple[float, float] = (0.5, 1.0)
    seed: int = 0
    p_override: float | None = None
    mode: str = "implicit_sparse"
    dense_max_n2: int = 10_000

    def resolve_T(self, n1: int) -> int:
        T = max(2, math.ceil(self.T_factor * math.log(max(n1, 2))))
        return T + (T % 2)

    def window_slice(self, n_iterates: int) -> slice:
        lo, hi = self.majority_window
        if not (0.0 <= lo < hi <= 1.0):
            raise ValueError("majority_window must satisfy 0 <= lo < hi <= 1")
        start = int(math.floor(lo * n_iterates))
        stop = max(start + 1, int(math.ceil(hi * n_iterates)))
        return slice(start, min(stop, n_iterates))


@dataclass
class RecoveryResult:
    signs: np.ndarray | None
    status: str  # "ok" or "degenerate"
    overlap: float | None
    u_trace: list[float]
    v_trace: list[float] | None
    iterations: int
    edges_used: int
    T: int
    ops_edge_touches: int

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def to_dict(self) -> dict:
        return {
            "signs": None if self.signs is None else [int(s) for s in self.signs],
            "status": self.status,
            "overlap": self.overlap,
            "U_trace": self.u_trace,
            "V_trace": self.v_trace,
            "iterations": self.iterations,
            "edges_used": self.edges_used,
            "T": self.T,
            "ops_edge_touches": self.ops_edge_touches,
        }


def _signs_of(x: np.ndarray) -> np.ndarray:
    # fixed convention: sgn(0) = +1
    return np.where(x >= 0, 1, -1).astype(np.int8)


def spi_solve(
    graph: BipartiteGraph,
    config: SolverConfig | None = None,
    truth=None,
    x0: np.ndarray | None = None,
) -> RecoveryResult:
    """Recover the left partition by power iteration over fresh sub-matrices.

    Each round multiplies by a new centered sub-matrix transpose and then the
    next one forward, normalizing in between; the output is the per-coordinate
    majority of the sign vectors over the configured window. When ``truth``
    is given, the per-iteration correlations with the hidden labels are
    recorded (the right-side trace only when the right labels cover all of
    n2). A zero-norm intermediate aborts with status "degenerate".

    Seed substreams: 0 = edge split, 1 = initial vector.
    """
    config = config or SolverConfig()
    n1, n2, m = graph.n1, graph.n2, graph.num_edges
    T = config.resolve_T(n1)
    n_it = T // 2
    config.window_slice(n_it)  # validate the window up front
    u = v = None
    if truth is not None:
        u = np.asarray(truth.u, dtype=np.float64)
        if len(truth.v) == n2:
            v = truth.v  # read support-sized slices only; never copied whole

    def failed(ops: int) -> RecoveryResult:
        return RecoveryResult(None, "degenerate", None, [], None if v is None else [],
                              0, m, T, ops)

    if m == 0:
        return failed(0)

    p = config.p_override if config.p_override is not None else m / (n1 * n2)
    split_ss, x0_ss = np.random.SeedSequence(config.seed).spawn(2)
    split = split_edges(graph, T, split_ss, p=p)
    q = split.q
    ops = 2 * m  # split assignment + per-sub degree pre-computation

    if x0 is None:
        x = (np.random.default_rng(x0_ss).integers(0, 2, size=n1) * 2 - 1) / math.sqrt(n1)
    else:
        x = np.asarray(x0, dtype=np.float64)
        x = x / np.linalg.norm(x)
    _track(x.size)

    dense_mats = None
    if config.mode == "dense_reference":
        if n2 > config.dense_max_n2:
            raise ValueError("dense_reference mode limited to small n2")
        dense_mats = []
        for sub in split.subs:
            a = np.zeros((n1, n2))
            a[sub.rows, sub.cols] = 1.0
            dense_mats.append(a)
    elif config.mode != "implicit_sparse":
        raise ValueError(f"unknown mode: {config.mode!r}")

    u_trace: list[float] = []
    v_trace: list[float] = []
    zs = np.empty((n_it, n1), dtype=np.int8)
    _track(zs.size)
    vsum = float(v.sum()) if v is not None else 0.0

    for i in range(n_it):
        sub_a, sub_b = split.subs[2 * i], split.subs[2 * i + 1]
        ops += sub_a.num_edges + sub_b.num_edges
        if dense_mats is None:
            yhat, L = apply_mt(sub_a, x, q)
            ny = right_norm(yhat, L, q, n2)
            if ny < NORM_ABORT:
                return failed(ops)
            if v is not None:
                v_trace.append(right_dot(yhat, L, q, v, vsum) / ny)
            xu = apply_m(sub_b, yhat, L, q, n2)
        else:
            a_t, b_t = dense_mats[2 * i], dense_mats[2 * i + 1]
            yu = a_t.T @ x - q * x.sum()
            ny = float(np.linalg.norm(yu))
            if ny < NORM_ABORT:
                return failed(ops)
            if v is not None:
                v_trace.append(float(v @ yu) / ny)
            xu = b_t @ yu - q * yu.sum()
        nx = float(np.linalg.norm(xu))
        if nx < NORM_ABORT * max(ny, 1.0):
            return failed(ops)
        x = xu / nx
        if u is not None:
            u_trace.append(float(u @ x))
        zs[i] = _signs_of(x)

    window = config.window_slice(n_it)
    votes = zs[window].astype(np.int64).sum(axis=0)
    signs = np.where(votes >= 0, 1, -1).astype(np.int64)
    _track(signs.size)

    ov = None
    if u is not None:
        ov = float(abs(signs @ u) / n1)
    return RecoveryResult(signs, "ok", ov, u_trace, None if v is None else v_trace,
                          n_it, m, T, ops)


# ---------------------------------------------------------------------------
# Baselines
# ---------------------------------------------------------------------------


def majority_vote_r1(
    instance: PlantedCspInstance, subset, seed: int = 0
) -> tuple[np.ndarray, int]:
    """Witness-size-1 solver: each variable takes the sign it shows more
    often at the witness position; zero counts fall back to a seeded coin.
    Returns (assignment, number of coin flips). The assignment matches the
    planted one up to a global flip."""
    subset = tuple(subset)
    if len(subset) != 1:
        raise ValueError("majority vote needs a single witness position")
    pos = subset[0]
    counts = np.bincount(
        instance.clause_vars[:, pos],
        weights=instance.clause_signs[:, pos].astype(np.float64),
        minlength=instance.n,
    )
    coin = np.random.default_rng(np.random.SeedSequence(seed)).integers(0, 2, size=instance.n) * 2 - 1
    assignment = np.where(counts > 0, 1, np.where(counts < 0, -1, coin)).astype(np.int64)
    return assignment, int((counts == 0).sum())


def power_iteration_baseline(
    graph: BipartiteGraph, iterations: int, seed: int, p: float | None = None
) -> np.ndarray:
    """Plain power iteration on the full centered matrix (no subsampling):
    x <- normalize(M M^T x). Returns the signs of the final iterate."""
    if iterations < 1:
        raise ValueError("need iterations >= 1")
    n1, n2, m = graph.n1, graph.n2, graph.num_edges
    if m == 0:
        raise SolverError("graph has no edges")
    q = p if p is not None else m / (n1 * n2)
    sub = _make_sub(n1, graph.edges[:, 0], graph.edges[:, 1])
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    x = (rng.integers(0, 2, size=n1) * 2 - 1) / math.sqrt(n1)
    for _ in range(iterations):
        yhat, L = apply_mt(sub, x, q)
        ny = right_norm(yhat, L, q, n2)
        if ny < NORM_ABORT:
            raise SolverError("zero-norm iterate")
        xu = apply_m(sub, yhat, L, q, n2)
        nx = float(np.linalg.norm(xu))
        if nx < NORM_ABORT * max(ny, 1.0):
            raise SolverError("zero-norm iterate")
        x = xu / nx
    return np.where(x >= 0, 1, -1).astype(np.int64)
