import json

import pytest

from flowtune.cli import main
from flowtune.fixtures import fixture_text
from flowtune.model import is_valid, load_economy


def write(path, payload):
    if isinstance(payload, (dict, list)):
        path.write_text(json.dumps(payload))
    else:
        path.write_text(payload)
    return str(path)


@pytest.fixture
def torch_file(tmp_path):
    return write(tmp_path / "torch.json", fixture_text("minecraft_torch"))


def test_gen_writes_valid_economy_and_report(tmp_path):
    config = write(tmp_path / "cfg.json", {"nodes": {"source": 1, "pool": 1, "drain": 1}, "seed": 2})
    out = tmp_path / "econ.json"
    assert main(["gen", config, "--out", str(out), "--quiet"]) == 0
    graph = load_economy(out.read_bytes())
    assert is_valid(graph)
    report = json.loads((tmp_path / "econ.json.report.json").read_text())
    assert report == {"valid": True, "generations": report["generations"], "final_fitness": 0}


def test_gen_infeasible_config_exits_nonzero(tmp_path):
    config = write(
        tmp_path / "cfg.json",
        {"nodes": {"random_gate": 1, "pool": 2}, "max_steps": 300, "seed": 1},
    )
    out = tmp_path / "econ.json"
    code = main(["gen", config, "--out", str(out), "--quiet"])
    assert code == 2
    report = json.loads((tmp_path / "econ.json.report.json").read_text())
    assert report["valid"] is False
    assert report["final_fitness"] > 0


def test_gen_missing_config_file(tmp_path):
    assert main(["gen", str(tmp_path / "nope.json"), "--out", str(tmp_path / "x"), "--quiet"]) == 2


def test_gen_unknown_kind(tmp_path):
    config = write(tmp_path / "cfg.json", {"nodes": {"sorcerer": 2}})
    assert main(["gen", config, "--out", str(tmp_path / "x"), "--quiet"]) == 2


def test_sim_prints_final_means_and_writes_trace(tmp_path, capsys, torch_file):
    trace_path = tmp_path / "trace.csv"
    code = main(["sim", torch_file, "--steps", "16", "--trace", str(trace_path)])
    assert code == 0
    out = capsys.readouterr().out
    assert "torch_pool: 60.000 ± 0.000" in out
    lines = trace_path.read_text().strip().split("\n")
    assert lines[0] == "run,step,node_id,amount"
    assert "0,16,torch_pool,60" in lines


def test_sim_multiple_runs_of_deterministic_economy_are_identical(tmp_path, torch_file):
    trace_path = tmp_path / "trace.csv"
    assert main(["sim", torch_file, "--steps", "5", "--runs", "3", "--trace", str(trace_path), "--quiet"]) == 0
    lines = trace_path.read_text().strip().split("\n")[1:]
    by_run = {}
    for line in lines:
        run, rest = line.split(",", 1)
        by_run.setdefault(run, []).append(rest)
    assert by_run["0"] == by_run["1"] == by_run["2"]


def test_sim_rejects_zero_steps(tmp_path, torch_file):
    assert main(["sim", torch_file, "--steps", "0", "--quiet"]) == 1


def test_sim_rejects_invalid_economy(tmp_path):
    bad = write(
        tmp_path / "bad.json",
        {"nodes": [{"id": "s", "kind": "source"}, {"id": "p", "kind": "pool"}], "edges": []},
    )
    assert main(["sim", bad, "--steps", "3", "--quiet"]) == 2


def test_balance_absolute_objective(tmp_path, torch_file):
    objective = write(
        tmp_path / "obj.json",
        {
            "kind": "absolute",
            "pool": "torch_pool",
            "value": 60,
            "step": 16,
            "sim_length": 16,
            "runs": 2,
            "alpha": 0.01,
            "population": 6,
            "max_generations": 30,
            "seed": 3,
        },
    )
    out = tmp_path / "balanced.json"
    report_path = tmp_path / "report.json"
    code = main(["balance", torch_file, "--objective", objective, "--out", str(out), "--report", str(report_path), "--quiet"])
    assert code == 0
    report = json.loads(report_path.read_text())
    assert report["balanced"] is True
    assert report["best_fitness"] >= 1.0
    assert is_valid(load_economy(out.read_bytes()))


def test_balance_inter_pair_mage_archer(tmp_path):
    mage_file = write(tmp_path / "mage.json", fixture_text("mage"))
    archer_file = write(tmp_path / "archer.json", fixture_text("archer"))
    objective = write(
        tmp_path / "obj.json",
        {
            "kind": "inter_pair",
            "pool": "damage_pool",
            "pool2": "damage_pool",
            "step": 30,
            "sim_length": 30,
            "runs": 10,
            "alpha": 0.05,
            "population": 10,
            "max_generations": 100,
            "seed": 7,
        },
    )
    out1, out2 = tmp_path / "mage_b.json", tmp_path / "archer_b.json"
    code = main([
        "balance", mage_file, "--second", archer_file, "--objective", objective,
        "--out", str(out1), "--out2", str(out2), "--quiet",
    ])
    assert code == 0
    report = json.loads((tmp_path / "mage_b.json.report.json").read_text())
    assert report["best_fitness"] >= 1.0
    assert is_valid(load_economy(out1.read_bytes()))
    assert is_valid(load_economy(out2.read_bytes()))


def test_balance_second_with_absolute_is_usage_error(tmp_path, torch_file):
    objective = write(
        tmp_path / "obj.json",
        {"kind": "absolute", "pool": "torch_pool", "value": 60, "step": 4, "sim_length": 4},
    )
    code = main([
        "balance", torch_file, "--second", torch_file,
        "--objective", objective, "--out", str(tmp_path / "o.json"), "--quiet",
    ])
    assert code == 1


def test_balance_unknown_pool_is_domain_error(tmp_path, torch_file):
    objective = write(
        tmp_path / "obj.json",
        {"kind": "absolute", "pool": "gold_pool", "value": 60, "step": 4, "sim_length": 4},
    )
    assert main(["balance", torch_file, "--objective", objective, "--out", str(tmp_path / "o.json"), "--quiet"]) == 2


def test_balance_timeout_exits_two(tmp_path, torch_file):
    objective = write(
        tmp_path / "obj.json",
        {
            "kind": "absolute", "pool": "torch_pool", "value": 59, "step": 16,
            "sim_length": 16, "runs": 1, "alpha": 0.0, "population": 4,
            "max_generations": 2, "seed": 1,
        },
    )
    # 59 torches is unreachable exactly (production is a multiple of the
    # craft output), so alpha=0 cannot be satisfied
    assert main(["balance", torch_file, "--objective", objective, "--out", str(tmp_path / "o.json"), "--quiet"]) == 2


def test_bench_zero_graphs_writes_empty_table(tmp_path):
    spec = write(tmp_path / "spec.json", {"graphs": 0})
    out = tmp_path / "bench.csv"
    assert main(["bench", spec, "--out", str(out), "--quiet"]) == 0
    assert out.read_text() == "alpha,balanced_pct,improved_pct,initial_balanced_pct,median_generations\n"
    detail = json.loads((tmp_path / "bench.csv.json").read_text())
    assert detail["rows"] == [] and detail["graphs_generated"] == 0


def test_bench_small_sweep(tmp_path):
    spec = write(
        tmp_path / "spec.json",
        {
            "graphs": 2,
            "node_range": [5, 8],
            "alphas": [0.05, 0.0],
            "population": 6,
            "max_generations": 8,
            "runs": 3,
            "generator_max_steps": 20000,
            "seed": 12,
        },
    )
    out = tmp_path / "bench.csv"
    assert main(["bench", spec, "--out", str(out), "--quiet"]) == 0
    lines = out.read_text().strip().split("\n")
    assert len(lines) == 3
    detail = json.loads((tmp_path / "bench.csv.json").read_text())
    assert detail["graphs_generated"] + len(detail["failures"]) == 2
    assert {row["alpha"] for row in detail["rows"]} == {0.05, 0.0}


def test_bench_rejects_unknown_keys(tmp_path):
    spec = write(tmp_path / "spec.json", {"graphs": 1, "bogus": True})
    assert main(["bench", spec, "--out", str(tmp_path / "b.csv"), "--quiet"]) == 2


def test_usage_error_on_unknown_flag():
    assert main(["sim", "--nonsense"]) == 1


@pytest.mark.parametrize(
    "argv_builder",
    [
        lambda tmp, torch: ["gen", write(tmp / "c.json", {"nodes": {"source": 2, "pool": 2, "drain": 1}, "seed": 4}), "--out", str(tmp / "g.json"), "--quiet"],
        lambda tmp, torch: ["sim", torch, "--steps", "12", "--runs", "2", "--trace", str(tmp / "t.csv"), "--quiet"],
        lambda tmp, torch: [
            "balance", torch,
            "--objective", write(tmp / "o.json", {"kind": "absolute", "pool": "torch_pool", "value": 44, "step": 10, "sim_length": 10, "runs": 2, "alpha": 0.05, "population": 5, "max_generations": 10, "seed": 6}),
            "--out", str(tmp / "b.json"), "--quiet",
        ],
        lambda tmp, torch: [
            "bench", write(tmp / "s.json", {"graphs": 1, "node_range": [5, 6], "alphas": [0.05], "population": 4, "max_generations": 4, "runs": 2, "seed": 5}),
            "--out", str(tmp / "bench.csv"), "--quiet",
        ],
    ],
    ids=["gen", "sim", "balance", "bench"],
)
def test_outputs_are_byte_identical_across_reruns(tmp_path, torch_file, argv_builder):
    first_dir = tmp_path / "first"
    second_dir = tmp_path / "second"
    outputs = {}
    for directory in (first_dir, second_dir):
        directory.mkdir()
        argv = argv_builder(directory, torch_file)
        main(argv)
        outputs[directory] = {
            p.name: p.read_bytes() for p in sorted(directory.iterdir()) if p.suffix in (".json", ".csv")
        }
    assert outputs[first_dir] == outputs[second_dir]
