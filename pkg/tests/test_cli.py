"""CLI tests: determinism, round-trips, exit codes, file formats."""
import json
import math

import numpy as np
import pytest

from planted import files
from planted.cli import main
from planted.fourier import distribution_complexity
from planted.instances import noisy_xor_weights, sample_planted_csp
from planted.reduction import csp_to_bipartite
from planted.solver import SolverConfig, spi_solve


def _run(*argv):
    return main(list(argv))


def test_gen_sbm_deterministic(tmp_path):
    a, b = tmp_path / "a.jsonl", tmp_path / "b.jsonl"
    for path in (a, b):
        assert _run("gen-sbm", "--n1", "100", "--n2", "100", "--delta", "1.8",
                    "--p", "0.2", "--seed", "7", "-o", str(path), "-q") == 0
    assert a.read_bytes() == b.read_bytes()
    data = files.read_sbm(a)
    assert data.graph.n1 == 100 and data.truth is not None


def test_analyze_q_uniform_reports_inf(tmp_path, capsys):
    assert _run("analyze-q", "--preset", "uniform", "--k", "3") == 0
    out = json.loads(capsys.readouterr().out)
    assert out["r"] == "inf"


def test_analyze_q_explicit_weights(capsys):
    assert _run("analyze-q", "--weights", "0,1,1,1,1,1,1,1") == 0
    out = json.loads(capsys.readouterr().out)
    assert out["r"] == 1 and out["S"] == [0]
    assert out["delta"] == pytest.approx(8 / 7)


def test_gen_csp_solve_csp_roundtrip(tmp_path, capsys):
    n = 200
    m = int(100 * n * math.log(n))
    f = tmp_path / "csp.jsonl"
    assert _run("gen-csp", "--n", str(n), "--m", str(m), "--preset", "noisy-xor",
                "--k", "2", "--eta", "0.9", "--seed", "3", "-o", str(f), "-q") == 0
    assert _run("solve-csp", "-i", str(f), "--seed", "5", "--t-factor", "3.0", "-q") == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["status"] == "ok"
    assert rep["overlap"] == 1.0


def test_reduce_then_solve_matches_in_memory(tmp_path, capsys):
    n = 200
    m = int(100 * n * math.log(n))
    csp_f = tmp_path / "csp.jsonl"
    red_f = tmp_path / "reduced.jsonl"
    _run("gen-csp", "--n", str(n), "--m", str(m), "--preset", "noisy-xor",
         "--k", "2", "--eta", "0.9", "--seed", "3", "-o", str(csp_f), "-q")
    assert _run("reduce", "-i", str(csp_f), "--seed", "4", "-o", str(red_f), "-q") == 0
    assert _run("solve", "-i", str(red_f), "--seed", "6", "--t-factor", "3.0", "-q") == 0
    cli_res = json.loads(capsys.readouterr().out)
    assert cli_res["status"] == "ok"

    # in-memory replica: same instance, reduction seed, and solver settings
    q = noisy_xor_weights(2, 0.9)
    inst = sample_planted_csp(q, n, m, seed=3)
    red = csp_to_bipartite(inst, distribution_complexity(q), seed=4)
    p_realized = red.graph.num_edges / (red.graph.n1 * red.graph.n2)
    mem = spi_solve(
        red.graph,
        SolverConfig(T_factor=3.0, seed=6, p_override=p_realized),
        truth=red.truth,
    )
    assert cli_res["signs"] == [int(s) for s in mem.signs]
    assert cli_res["U_trace"] == mem.u_trace

    meta = files.read_sbm(red_f).reduced_meta
    assert meta is not None
    assert meta["n2_nominal"] == red.n2_nominal
    assert meta["indexer_size"] == len(red.indexer)


def test_gen_sbm_solve_matches_in_memory(tmp_path, capsys):
    from planted.instances import BlockModelParams, sample_bipartite_block

    f = tmp_path / "sbm.jsonl"
    params = BlockModelParams(200, 200, 1.8, 0.3, 11)
    _run("gen-sbm", "--n1", "200", "--n2", "200", "--delta", "1.8", "--p", "0.3",
         "--seed", "11", "-o", str(f), "-q")
    assert _run("solve", "-i", str(f), "--seed", "13", "-q") == 0
    cli_res = json.loads(capsys.readouterr().out)

    g, part = sample_bipartite_block(params)
    mem = spi_solve(g, SolverConfig(seed=13, p_override=params.p), truth=part)
    assert cli_res["signs"] == [int(s) for s in mem.signs]
    assert cli_res["overlap"] == mem.overlap
    assert cli_res["V_trace"] == mem.v_trace


def test_reduce_rejects_majority_route(tmp_path):
    f = tmp_path / "sat.jsonl"
    _run("gen-csp", "--n", "30", "--m", "100", "--preset", "sat", "--k", "3",
         "--seed", "1", "-o", str(f), "-q")
    assert _run("reduce", "-i", str(f), "-o", str(tmp_path / "x.jsonl"), "-q") == 2


def test_gen_goldreich_roundtrip(tmp_path):
    f = tmp_path / "g.jsonl"
    assert _run("gen-goldreich", "--n", "20", "--m", "200",
                "--predicate", ",".join(["1", "-1", "-1", "1"]),
                "--seed", "2", "-o", str(f), "-q") == 0
    data = files.read_goldreich(f)
    assert data.instance.m == 200 and data.instance.k == 2
    expect = data.instance.sigma[data.instance.tuple_vars].prod(axis=1)
    assert np.array_equal(data.instance.values, expect)  # parity table


def test_exit_codes(tmp_path):
    assert _run("no-such-command") == 1
    assert _run("gen-sbm", "--bogus-flag") == 1
    assert _run("solve", "-i", str(tmp_path / "missing.jsonl")) == 3
    # degenerate solve: zero-density graph
    f = tmp_path / "empty.jsonl"
    _run("gen-sbm", "--n1", "10", "--n2", "10", "--delta", "1.8", "--p", "0.0",
         "--seed", "0", "-o", str(f), "-q")
    assert _run("solve", "-i", str(f), "-q", "-o", str(tmp_path / "r.json")) == 2


def test_solve_csp_unidentifiable_exits_2(tmp_path):
    f = tmp_path / "uniform.jsonl"
    _run("gen-csp", "--n", "20", "--m", "100", "--preset", "uniform", "--k", "3",
         "--seed", "1", "-o", str(f), "-q")
    assert _run("solve-csp", "-i", str(f), "-q", "-o", str(tmp_path / "r.json")) == 2
    assert json.loads((tmp_path / "r.json").read_text())["status"] == "unidentifiable"


def test_sweep_cli_toml_and_determinism(tmp_path):
    cfg = tmp_path / "sweep.toml"
    cfg.write_text(
        'family = "sbm"\nmultipliers = [2.0, 12.0]\ntrials = 3\nseed = 5\n'
        "n1 = 128\nn2 = 128\ndelta = 1.8\n\n[solver]\nT_factor = 5.0\n"
    )
    out1, out2 = tmp_path / "s1.csv", tmp_path / "s2.csv"
    assert _run("sweep", "-c", str(cfg), "-o", str(out1), "-q") == 0
    assert _run("sweep", "-c", str(cfg), "-o", str(out2), "-q") == 0
    assert out1.read_bytes() == out2.read_bytes()
    lines = out1.read_text().strip().splitlines()
    assert lines[0] == "multiplier,trials,exact_rate,mean_overlap,mean_runtime_ms,mean_edges"
    assert len(lines) == 3


def test_sweep_cli_json_config_fallback(tmp_path):
    cfg = tmp_path / "sweep.json"
    cfg.write_text(json.dumps({
        "family": "sbm", "multipliers": [10.0], "trials": 2, "seed": 1,
        "n1": 128, "n2": 128, "delta": 1.8, "solver": {"T_factor": 5.0},
    }))
    out = tmp_path / "s.csv"
    assert _run("sweep", "-c", str(cfg), "-o", str(out), "-q") == 0
    assert out.exists()


def test_sweep_print_config(capsys):
    assert _run("sweep", "--print-config") == 0
    cfg = json.loads(capsys.readouterr().out)
    assert "multipliers" in cfg and "family" in cfg


def test_sweep_requires_config():
    assert _run("sweep") == 1


def test_csp_file_roundtrip(tmp_path):
    q = noisy_xor_weights(3, 0.5)
    inst = sample_planted_csp(q, 15, 50, seed=9)
    f = tmp_path / "c.jsonl"
    files.write_csp(f, inst, q, seed=9)
    back = files.read_csp(f)
    assert back.instance.n == 15
    assert np.array_equal(back.instance.clause_vars, inst.clause_vars)
    assert np.array_equal(back.instance.clause_signs, inst.clause_signs)
    assert np.array_equal(back.instance.sigma, inst.sigma)
    assert np.array_equal(back.weights.weights, q.weights)
