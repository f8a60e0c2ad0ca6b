import json

from lclsim.cli import main
from lclsim.graph import PortedGraph, dumps_canonical


def run_cli(argv):
    return main(argv)


def test_gen_regular_tree(tmp_path, capsys):
    out = tmp_path / "tree.json"
    code = run_cli(["gen", "regular-tree", "--delta", "4", "--radius", "3",
                    "--out", str(out)])
    assert code == 0
    g = PortedGraph.load(out)
    assert g.n == 53
    assert "n=53" in capsys.readouterr().out


def test_gen_cycle_and_symlower(tmp_path):
    assert run_cli(["gen", "cycle", "--n", "5",
                    "--out", str(tmp_path / "c5.json")]) == 0
    assert PortedGraph.load(tmp_path / "c5.json").n == 5
    prefix = str(tmp_path / "pair")
    assert run_cli(["gen", "symlower", "--delta", "3", "--r", "2",
                    "--out-prefix", prefix]) == 0
    t = PortedGraph.load(prefix + "_t.json")
    tp = PortedGraph.load(prefix + "_tprime.json")
    assert t.n == tp.n == 10


def test_run_pipeline_exit_zero(tmp_path):
    tree = tmp_path / "tree.json"
    run_cli(["gen", "regular-tree", "--delta", "4", "--radius", "3",
             "--out", str(tree)])
    out = tmp_path / "labels.json"
    code = run_cli(["run", "--algorithm", "weak-family-to-weak2",
                    "--graph", str(tree), "--k", "2", "--c", "3",
                    "--seed", "7", "--out", str(out)])
    assert code == 0
    obj = json.loads(out.read_text())
    assert obj["report"]["fail_nodes"] == []
    assert set(obj["labels"].values()) <= {1, 2}
    assert "provenance" in obj and obj["provenance"]["seed"] == 7


def test_run_solve_pointers(tmp_path):
    tree = tmp_path / "tree.json"
    run_cli(["gen", "regular-tree", "--delta", "4", "--radius", "4",
             "--out", str(tree)])
    code = run_cli(["run", "--algorithm", "solve-pointers",
                    "--graph", str(tree), "--seed", "1",
                    "--out", str(tmp_path / "p.json")])
    assert code == 0


def test_run_deterministic_given_seed(tmp_path):
    tree = tmp_path / "tree.json"
    run_cli(["gen", "cycle", "--n", "24", "--out", str(tree)])
    out = tmp_path / "labels.json"
    argv = ["run", "--algorithm", "solve-pointers", "--graph", str(tree),
            "--seed", "3", "--out", str(out)]
    assert run_cli(argv) == 0
    first = out.read_bytes()
    assert run_cli(argv) == 0
    assert out.read_bytes() == first


def test_speedup_command_canonical(tmp_path):
    out = tmp_path / "rep.json"
    code = run_cli(["speedup", "--direction", "1", "--delta", "4",
                    "--b", "1", "--c", "2", "--t", "1", "--f", "1/40",
                    "--grid", "10", "--algorithm", "own-bit",
                    "--out", str(out)])
    assert code == 0
    obj = json.loads(out.read_text())
    assert obj["p"]["exact"] == "1/16"
    assert obj["p_prime"]["exact"] == "1/4"
    assert obj["inequality_holds"] is True


def test_speedup_budget_exit(tmp_path):
    code = run_cli(["speedup", "--direction", "2", "--delta", "6",
                    "--b", "2", "--c", "2", "--t", "1",
                    "--algorithm", "random", "--out", str(tmp_path / "x.json")])
    assert code == 3


def test_bounds_tables(tmp_path, capsys):
    assert run_cli(["bounds", "recurrence", "--c0", "2", "--p0", "1/16",
                    "--t", "2", "--delta", "4", "--format", "json",
                    "--out", str(tmp_path / "r.json")]) == 0
    rows = json.loads((tmp_path / "r.json").read_text())["rows"]
    assert len(rows) == 3 and all(r["agrees_with_iteration"] for r in rows)

    assert run_cli(["bounds", "zero-round", "--c", "2", "3", "--delta", "4",
                    "--format", "csv", "--out", str(tmp_path / "z.csv")]) == 0
    lines = (tmp_path / "z.csv").read_text().strip().splitlines()
    assert lines[0].startswith("c,delta") and len(lines) == 3

    assert run_cli(["bounds", "global", "--n", "4096", "--t", "0",
                    "--b", "1"]) == 0
    out = capsys.readouterr().out
    assert '"condition_holds":true' in out.replace(" ", "")

    assert run_cli(["bounds", "id-collision", "--n", "1000", "8"]) == 0


def test_config_file(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(dumps_canonical({
        "version": 1,
        "command": "gen cycle",
        "n": 6,
        "out": str(tmp_path / "c.json"),
    }))
    assert run_cli(["--config", str(cfg)]) == 0
    assert PortedGraph.load(tmp_path / "c.json").n == 6


def test_config_version_rejected(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(dumps_canonical({"version": 99, "command": "gen cycle", "n": 6}))
    assert run_cli(["--config", str(cfg)]) == 2


def test_config_unknown_key_rejected(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(dumps_canonical({
        "version": 1, "command": "gen cycle", "n": 6, "bogus_knob": 1,
    }))
    assert run_cli(["--config", str(cfg)]) == 2


def test_bad_parameters_exit_config(tmp_path):
    assert run_cli(["gen", "regular-tree", "--delta", "3", "--radius", "2",
                    "--out", str(tmp_path / "t.json")]) == 2
    assert run_cli(["run", "--algorithm", "nope", "--graph", "missing.json"]) == 2
