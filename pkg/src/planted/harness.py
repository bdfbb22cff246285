"""End-to-end pipelines and density sweeps.

The CSP pipeline: analyze the weight table, route witness-size-1 laws to the
majority vote, everything else through the block-model reduction and the
subsampled iteration, and map the recovered literal partition back to an
assignment. Sweeps scan multiples of the theoretical density threshold and
record recovery rates to CSV.
"""
from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .fourier import ZERO_TOL, FourierReport, all_coefficients, distribution_complexity, predicate_lowest_degree
from .instances import (
    BlockModelParams,
    GoldreichInstance,
    PlantedCspInstance,
    PlantingDistribution,
    overlap,
    sample_bipartite_block,
    sample_goldreich,
    sample_planted_csp,
)
from .reduction import csp_to_bipartite, goldreich_to_bipartite, partition_to_assignment
from .solver import RecoveryResult, SolverConfig, majority_vote_r1, spi_solve

__all__ = [
    "EndToEndReport",
    "solve_csp_end_to_end",
    "solve_goldreich_end_to_end",
    "SweepSpec",
    "SweepRow",
    "run_sweep",
    "write_sweep_csv",
    "CSV_HEADER",
    "threshold_density",
]


@dataclass
class EndToEndReport:
    status: str  # "ok" | "unidentifiable" | "degenerate"
    r: int | None
    subset: tuple[int, ...]
    delta: float | None
    route: str  # "majority" | "spi" | "none"
    overlap: float | None
    coin_flips: int
    inconsistent_pairs: int
    solver: RecoveryResult | None

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "r": self.r if self.r is not None else "inf",
            "S": list(self.subset),
            "delta": self.delta,
            "route": self.route,
            "overlap": self.overlap,
            "coin_flips": self.coin_flips,
            "inconsistent_pairs": self.inconsistent_pairs,
            "solver": None if self.solver is None else self.solver.to_dict(),
        }


def _run_reduced(reduced, seed, config, sigma):
    res = spi_solve(reduced.graph, replace(config, seed=seed), truth=reduced.truth)
    if not res.ok:
        return None, res, 0
    assignment, bad = partition_to_assignment(res.signs, seed=seed + 1)
    return assignment, res, bad


def solve_csp_end_to_end(
    instance: PlantedCspInstance,
    weights: PlantingDistribution,
    seed: int = 0,
    thinning: str = "dedup",
    epsilon: float = 0.5,
    config: SolverConfig | None = None,
    try_all_witnesses: bool = False,
) -> tuple[np.ndarray | None, EndToEndReport]:
    """Analyze -> reduce -> solve -> decode. Returns (assignment, report);
    the assignment matches the planted one up to a global flip.

    With ``try_all_witnesses`` every minimal-size witness subset is tried and
    the decoding with the fewest inconsistent literal pairs wins (for laws
    whose witness is ambiguous).
    """
    config = config or SolverConfig()
    report = distribution_complexity(weights)
    if not report.identifiable:
        return None, EndToEndReport("unidentifiable", None, (), None, "none", None, 0, 0, None)

    sigma = instance.sigma
    if report.r == 1:
        assignment, flips = majority_vote_r1(instance, report.subset, seed=seed)
        ov = overlap(assignment, sigma) if sigma is not None else None
        return assignment, EndToEndReport(
            "ok", 1, report.subset, report.delta, "majority", ov, flips, 0, None
        )

    candidates = [report]
    if try_all_witnesses:
        coefs = all_coefficients(weights.normalized(), weights.k)
        from itertools import combinations

        candidates = []
        for subset in combinations(range(weights.k), report.r):
            c = coefs[sum(1 << i for i in subset)]
            if abs(c) > ZERO_TOL:
                candidates.append(FourierReport(report.r, subset, float(c), 1.0 + 2**weights.k * c))

    best = None
    for cand in candidates:
        reduced = csp_to_bipartite(instance, cand, thinning=thinning, epsilon=epsilon, seed=seed)
        assignment, res, bad = _run_reduced(reduced, seed, config, sigma)
        if assignment is None:
            entry = (math.inf, cand, None, res, 0)
        else:
            entry = (bad, cand, assignment, res, bad)
        if best is None or entry[0] < best[0]:
            best = entry
    _, chosen, assignment, res, bad = best
    if assignment is None:
        return None, EndToEndReport(
            "degenerate", chosen.r, chosen.subset, chosen.delta, "spi", None, 0, 0, res
        )
    ov = overlap(assignment, sigma) if sigma is not None else None
    return assignment, EndToEndReport(
        "ok", chosen.r, chosen.subset, chosen.delta, "spi", ov, 0, bad, res
    )


def solve_goldreich_end_to_end(
    instance: GoldreichInstance,
    seed: int = 0,
    thinning: str = "dedup",
    epsilon: float = 0.5,
    config: SolverConfig | None = None,
    value_handling: str = "fold",
) -> tuple[np.ndarray | None, EndToEndReport]:
    """Predicate-constraint pipeline; witness size 1 folds the observed value
    into a 1-clause stream and majority-votes it."""
    config = config or SolverConfig()
    report = predicate_lowest_degree(instance.predicate)
    if report.r == 0 or not report.identifiable:
        return None, EndToEndReport("unidentifiable", report.r, (), None, "none", None, 0, 0, None)

    sigma = instance.sigma
    if report.r == 1:
        pos = report.subset[0]
        one_clauses = PlantedCspInstance(
            instance.n,
            sigma,
            instance.tuple_vars[:, pos : pos + 1],
            instance.values[:, None],
        )
        assignment, flips = majority_vote_r1(one_clauses, (0,), seed=seed)
        ov = overlap(assignment, sigma) if sigma is not None else None
        return assignment, EndToEndReport(
            "ok", 1, report.subset, report.delta, "majority", ov, flips, 0, None
        )

    reduced = goldreich_to_bipartite(
        instance, report, thinning=thinning, epsilon=epsilon, seed=seed, value_handling=value_handling
    )
    assignment, res, bad = _run_reduced(reduced, seed, config, sigma)
    if assignment is None:
        return None, EndToEndReport(
            "degenerate", report.r, report.subset, report.delta, "spi", None, 0, 0, res
        )
    ov = overlap(assignment, sigma) if sigma is not None else None
    return assignment, EndToEndReport(
        "ok", report.r, report.subset, report.delta, "spi", ov, 0, bad, res
    )


# ---------------------------------------------------------------------------
# Density sweeps
# ---------------------------------------------------------------------------

CSV_HEADER = "multiplier,trials,exact_rate,mean_overlap,mean_runtime_ms,mean_edges"


def threshold_density(n1: int, n2: int, delta: float) -> float:
    """Reference density p0 = ln(n1) / ((delta-1)^2 sqrt(n1 n2)); sweeps scan
    multiples of it so the unknown recovery constant is the x-axis."""
    return math.log(n1) / ((delta - 1.0) ** 2 * math.sqrt(n1 * n2))


@dataclass(frozen=True)
class SweepSpec:
    """One experiment grid. ``family`` selects the instance kind:

    * "sbm": params n1, n2, delta; density p = multiplier * p0.
    * "csp": params n, weights (PlantingDistribution); the clause count is
      the multiplier times the threshold-equivalent count for the reduced
      graph geometry (witness size 1 scales n ln n instead).
    * "goldreich": params n, predicate; as for "csp".
    """

    family: str
    multipliers: tuple[float, ...]
    trials: int
    seed: int = 0
    n1: int = 0
    n2: int = 0
    delta: float = 0.0
    n: int = 0
    weights: PlantingDistribution | None = None
    predicate: tuple[int, ...] = ()
    solver: SolverConfig = field(default_factory=SolverConfig)
    workers: int = 1

    def validate(self):
        if self.family not in ("sbm", "csp", "goldreich"):
            raise ValueError(f"unknown family: {self.family!r}")
        if not self.multipliers or any(m <= 0 for m in self.multipliers):
            raise ValueError("multipliers must be positive")
        if self.trials < 1:
            raise ValueError("need trials >= 1")


@dataclass(frozen=True)
class SweepRow:
    multiplier: float
    trials: int
    exact_rate: float
    mean_overlap: float
    mean_runtime_ms: float
    mean_edges: float


def _csp_clause_budget(spec: SweepSpec, mult: float) -> tuple[int, FourierReport]:
    if spec.family == "csp":
        report = distribution_complexity(spec.weights)
    else:
        report = predicate_lowest_degree(np.array(spec.predicate, dtype=np.int64))
    if not report.identifiable:
        raise ValueError("sweep family has an unidentifiable planting law")
    n = spec.n
    if report.r == 1:
        m0 = n * math.log(n) / (report.delta - 1.0) ** 2
    else:
        n1 = 2 * n
        n2 = math.comb(2 * n, report.r - 1)
        m0 = 2.0 * math.sqrt(n1 * n2) * math.log(n1) / (report.delta - 1.0) ** 2
    return max(1, int(round(mult * m0))), report


def _sweep_trial(spec: SweepSpec, mi: int, ti: int) -> tuple[int, int, float, int, float]:
    """One (multiplier, trial) cell; returns (mi, ti, overlap, edges, ms)."""
    mult = spec.multipliers[mi]
    seed = int(np.random.SeedSequence([spec.seed, mi, ti]).generate_state(1)[0])
    t0 = time.perf_counter()
    if spec.family == "sbm":
        p = mult * threshold_density(spec.n1, spec.n2, spec.delta)
        p = min(p, 1.0 / max(spec.delta, 2.0 - spec.delta))
        graph, part = sample_bipartite_block(
            BlockModelParams(spec.n1, spec.n2, spec.delta, p, seed)
        )
        res = spi_solve(graph, replace(spec.solver, seed=seed + 1, p_override=p), truth=part)
        ov = res.overlap if res.ok else 0.0
        edges = graph.num_edges
    else:
        m, report = _csp_clause_budget(spec, mult)
        if spec.family == "csp":
            inst = sample_planted_csp(spec.weights, spec.n, m, seed)
            _, rep = solve_csp_end_to_end(inst, spec.weights, seed=seed + 1, config=spec.solver)
        else:
            inst = sample_goldreich(np.array(spec.predicate, dtype=np.int64), spec.n, m, seed)
            _, rep = solve_goldreich_end_to_end(inst, seed=seed + 1, config=spec.solver)
        ov = rep.overlap if rep.status == "ok" else 0.0
        edges = rep.solver.edges_used if rep.solver is not None else m
    ms = (time.perf_counter() - t0) * 1000.0
    return mi, ti, float(ov), int(edges), ms


def run_sweep(spec: SweepSpec) -> list[SweepRow]:
    """All multiplier x trial cells, aggregated per multiplier. Trials are
    independent; with workers > 1 they run in a process pool and results are
    merged in deterministic (multiplier, trial) order."""
    spec.validate()
    jobs = [(mi, ti) for mi in range(len(spec.multipliers)) for ti in range(spec.trials)]
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            results = list(pool.map(_sweep_trial, [spec] * len(jobs), *zip(*jobs)))
    else:
        results = [_sweep_trial(spec, mi, ti) for mi, ti in jobs]
    results.sort(key=lambda r: (r[0], r[1]))

    rows = []
    for mi, mult in enumerate(spec.multipliers):
        cells = [r for r in results if r[0] == mi]
        ovs = np.array([c[2] for c in cells])
        rows.append(
            SweepRow(
                multiplier=float(mult),
                trials=spec.trials,
                exact_rate=float((ovs == 1.0).mean()),
                mean_overlap=float(ovs.mean()),
                mean_runtime_ms=float(np.mean([c[4] for c in cells])),
                mean_edges=float(np.mean([c[3] for c in cells])),
            )
        )
    return rows


def write_sweep_csv(rows: list[SweepRow], path, include_timing: bool = True):
    """Fixed-schema CSV. With ``include_timing=False`` the runtime column is
    written as 0.0 so reruns with the same seed are byte-identical."""
    with open(path, "w") as fh:
        fh.write(CSV_HEADER + "\n")
        for row in rows:
            ms = row.mean_runtime_ms if include_timing else 0.0
            fh.write(
                f"{row.multiplier:.6g},{row.trials},{row.exact_rate:.6g},"
                f"{row.mean_overlap:.6g},{ms:.6g},{row.mean_edges:.6g}\n"
            )
