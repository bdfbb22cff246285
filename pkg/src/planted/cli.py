"""Command-line interface.

Subcommands: gen-sbm, gen-csp, gen-goldreich, analyze-q, reduce, solve,
solve-csp, sweep. Exit codes: 0 success, 1 usage error, 2 solve failure,
3 I/O error. All outputs are deterministic given the seed (sweeps write a
zeroed runtime column unless --timing wall is passed).
"""
from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict

import numpy as np

from . import files
from .fourier import distribution_complexity
from .harness import SweepSpec, run_sweep, solve_csp_end_to_end, write_sweep_csv
from .instances import (
    BlockModelParams,
    PlantingDistribution,
    noisy_xor_weights,
    sample_bipartite_block,
    sample_goldreich,
    sample_planted_csp,
    sat_clause_weights,
    uniform_weights,
)
from .reduction import ReductionError, csp_to_bipartite
from .solver import SolverConfig, spi_solve

__all__ = ["main"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _weights_from_args(args) -> PlantingDistribution:
    if args.weights is not None:
        vals = np.array([float(w) for w in args.weights.split(",")])
        k = int(round(np.log2(len(vals))))
        return PlantingDistribution(k, vals)
    if args.preset == "uniform":
        return uniform_weights(args.k)
    if args.preset == "noisy-xor":
        return noisy_xor_weights(args.k, args.eta)
    if args.preset == "sat":
        return sat_clause_weights(args.k)
    raise UsageError("provide --weights or --preset")


def _add_weight_flags(sub):
    sub.add_argument("--weights", help="comma-separated 2^k weight table")
    sub.add_argument("--preset", choices=["uniform", "noisy-xor", "sat"])
    sub.add_argument("--k", type=int, default=3, help="clause width for presets")
    sub.add_argument("--eta", type=float, default=0.5, help="noisy-xor tilt")


def _add_solver_flags(sub):
    sub.add_argument("--t-factor", type=float, default=10.0)
    sub.add_argument("--window", default="0.5,1.0", help="majority window as lo,hi fractions")
    sub.add_argument("--mode", choices=["implicit_sparse", "dense_reference"], default="implicit_sparse")


def _solver_config(args) -> SolverConfig:
    lo, hi = (float(x) for x in args.window.split(","))
    return SolverConfig(
        T_factor=args.t_factor, majority_window=(lo, hi), seed=args.seed, mode=args.mode
    )


def _emit(args, text: str):
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
        if not args.quiet:
            print(f"wrote {args.output}")
    else:
        print(text)


def _build_parser() -> _Parser:
    parser = _Parser(prog="planted", description=__doc__.splitlines()[0])
    subs = parser.add_subparsers(dest="command", required=True)

    def add(name, **kw):
        sub = subs.add_parser(name, **kw)
        sub.add_argument("--seed", type=int, default=0)
        sub.add_argument("--output", "-o", default=None)
        sub.add_argument("--format", choices=["json", "csv"], default=None)
        sub.add_argument("--quiet", "-q", action="store_true")
        return sub

    g = add("gen-sbm", help="write a block-model instance file")
    g.add_argument("--n1", type=int, required=True)
    g.add_argument("--n2", type=int, required=True)
    g.add_argument("--delta", type=float, required=True)
    g.add_argument("--p", type=float, required=True)
    g.add_argument("--no-truth", action="store_true")

    g = add("gen-csp", help="write a planted CSP instance file")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--m", type=int, required=True)
    _add_weight_flags(g)

    g = add("gen-goldreich", help="write a predicate-constraint instance file")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--predicate", required=True, help="comma-separated +/-1 table of length 2^k")

    g = add("analyze-q", help="lowest-degree witness of a weight table")
    _add_weight_flags(g)

    g = add("reduce", help="CSP instance file -> block-model instance file")
    g.add_argument("--input", "-i", required=True)
    g.add_argument("--thinning", choices=["dedup", "poisson"], default="dedup")
    g.add_argument("--epsilon", type=float, default=0.5)

    g = add("solve", help="recover the left partition of a block-model file")
    g.add_argument("--input", "-i", required=True)
    _add_solver_flags(g)

    g = add("solve-csp", help="end-to-end planted CSP recovery from a file")
    g.add_argument("--input", "-i", required=True)
    g.add_argument("--thinning", choices=["dedup", "poisson"], default="dedup")
    g.add_argument("--epsilon", type=float, default=0.5)
    _add_solver_flags(g)

    g = add("sweep", help="density sweep from a TOML/JSON spec to CSV")
    g.add_argument("--config", "-c")
    g.add_argument("--timing", choices=["none", "wall"], default="none")
    g.add_argument("--print-config", action="store_true", help="print default spec and exit")

    return parser


def _load_sweep_config(path) -> dict:
    raw = open(path, "rb").read()
    try:
        try:
            import tomllib  # py >= 3.11
        except ModuleNotFoundError:
            import tomli as tomllib
        return tomllib.loads(raw.decode())
    except Exception:
        return json.loads(raw.decode())


_SWEEP_DEFAULTS = {
    "family": "sbm",
    "multipliers": [0.5, 1, 2, 4, 8, 16, 24, 32],
    "trials": 5,
    "seed": 0,
    "n1": 500,
    "n2": 500,
    "delta": 1.8,
    "n": 100,
    "weights": [],
    "predicate": [],
    "workers": 1,
    "solver": {"T_factor": 10.0, "majority_window": [0.5, 1.0]},
}


def _sweep_spec_from_config(cfg: dict) -> SweepSpec:
    merged = {**_SWEEP_DEFAULTS, **cfg}
    solver_cfg = {**_SWEEP_DEFAULTS["solver"], **merged.get("solver", {})}
    solver = SolverConfig(
        T_factor=float(solver_cfg["T_factor"]),
        majority_window=tuple(solver_cfg["majority_window"]),
    )
    weights = None
    if merged["weights"]:
        vals = np.array(merged["weights"], dtype=np.float64)
        weights = PlantingDistribution(int(round(np.log2(len(vals)))), vals)
    return SweepSpec(
        family=merged["family"],
        multipliers=tuple(float(m) for m in merged["multipliers"]),
        trials=int(merged["trials"]),
        seed=int(merged["seed"]),
        n1=int(merged["n1"]),
        n2=int(merged["n2"]),
        delta=float(merged["delta"]),
        n=int(merged["n"]),
        weights=weights,
        predicate=tuple(int(v) for v in merged["predicate"]),
        solver=solver,
        workers=int(merged["workers"]),
    )


def _cmd_gen_sbm(args) -> int:
    params = BlockModelParams(args.n1, args.n2, args.delta, args.p, args.seed)
    graph, truth = sample_bipartite_block(params)
    files.write_sbm(
        args.output or "sbm.jsonl",
        graph,
        delta=args.delta,
        p=args.p,
        seed=args.seed,
        truth=None if args.no_truth else truth,
    )
    if not args.quiet:
        print(f"wrote {args.output or 'sbm.jsonl'} ({graph.num_edges} edges)")
    return 0


def _cmd_gen_csp(args) -> int:
    weights = _weights_from_args(args)
    inst = sample_planted_csp(weights, args.n, args.m, args.seed)
    files.write_csp(args.output or "csp.jsonl", inst, weights, args.seed)
    if not args.quiet:
        print(f"wrote {args.output or 'csp.jsonl'} ({inst.m} clauses)")
    return 0


def _cmd_gen_goldreich(args) -> int:
    table = np.array([int(v) for v in args.predicate.split(",")], dtype=np.int64)
    inst = sample_goldreich(table, args.n, args.m, args.seed)
    files.write_goldreich(args.output or "goldreich.jsonl", inst, args.seed)
    if not args.quiet:
        print(f"wrote {args.output or 'goldreich.jsonl'} ({inst.m} constraints)")
    return 0


def _cmd_analyze_q(args) -> int:
    report = distribution_complexity(_weights_from_args(args))
    _emit(args, json.dumps(report.to_dict()))
    return 0


def _cmd_reduce(args) -> int:
    csp = files.read_csp(args.input)
    report = distribution_complexity(csp.weights)
    try:
        reduced = csp_to_bipartite(
            csp.instance, report, thinning=args.thinning, epsilon=args.epsilon, seed=args.seed
        )
    except ReductionError as exc:
        print(f"cannot reduce: {exc}", file=sys.stderr)
        return 2
    files.write_reduced(args.output or "reduced.jsonl", reduced, seed=args.seed)
    if not args.quiet:
        print(f"wrote {args.output or 'reduced.jsonl'} ({reduced.graph.num_edges} edges)")
    return 0


def _cmd_solve(args) -> int:
    data = files.read_sbm(args.input)
    config = _solver_config(args)
    p = data.header.get("p")
    if p is not None:
        config = SolverConfig(**{**asdict(config), "p_override": float(p)})
    res = spi_solve(data.graph, config, truth=data.truth)
    _emit(args, json.dumps(res.to_dict()))
    return 0 if res.ok else 2


def _cmd_solve_csp(args) -> int:
    csp = files.read_csp(args.input)
    assignment, report = solve_csp_end_to_end(
        csp.instance,
        csp.weights,
        seed=args.seed,
        thinning=args.thinning,
        epsilon=args.epsilon,
        config=_solver_config(args),
    )
    payload = report.to_dict()
    payload["assignment"] = None if assignment is None else [int(a) for a in assignment]
    _emit(args, json.dumps(payload))
    return 0 if report.status == "ok" else 2


def _cmd_sweep(args) -> int:
    if args.print_config:
        print(json.dumps(_SWEEP_DEFAULTS, indent=2))
        return 0
    if not args.config:
        raise UsageError("sweep requires --config (or --print-config)")
    spec = _sweep_spec_from_config(_load_sweep_config(args.config))
    rows = run_sweep(spec)
    out = args.output or "sweep.csv"
    if args.format == "json":
        with open(out, "w") as fh:
            json.dump([asdict(r) for r in rows], fh)
    else:
        write_sweep_csv(rows, out, include_timing=args.timing == "wall")
    if not args.quiet:
        print(f"wrote {out} ({len(rows)} rows)")
    return 0


_COMMANDS = {
    "gen-sbm": _cmd_gen_sbm,
    "gen-csp": _cmd_gen_csp,
    "gen-goldreich": _cmd_gen_goldreich,
    "analyze-q": _cmd_analyze_q,
    "reduce": _cmd_reduce,
    "solve": _cmd_solve,
    "solve-csp": _cmd_solve_csp,
    "sweep": _cmd_sweep,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        parser.print_usage(sys.stderr)
        return 1
    except SystemExit as exc:  # argparse --help
        return int(exc.code or 0)
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
