import json

import pytest

from kpartite.cli import main
from kpartite.extremal import h0
from kpartite.harness import engineered_instance
from kpartite.hypergraph import PartiteHypergraph
from kpartite.instance_io import read_instance, save_instance


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def _payload(out):
    return json.loads(out)


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name, H in [("k33", PartiteHypergraph.complete(3, 3)), ("h0", h0(3, 2, (1, 1, 1))),
                    ("eng", engineered_instance(3, 10, 2)), ("iso", PartiteHypergraph.empty(3, 2))]:
        paths[name] = str(tmp_path / f"{name}.txt")
        save_instance(H, paths[name])
    bad = tmp_path / "bad.txt"
    bad.write_text("k 3\nn two\n")
    paths["bad"] = str(bad)
    return paths


def test_gen_to_file_and_stdout(tmp_path, capsys):
    out_path = tmp_path / "g.txt"
    assert run(capsys, "gen", "h0", "--k", "3", "--n", "2", "--d", "1,1,1", "-o", str(out_path))[0] == 0
    assert read_instance(out_path) == h0(3, 2, (1, 1, 1))
    code, out, _ = run(capsys, "gen", "random_p", "--k", "3", "--n", "3", "--p", "0.5", "--seed", "4")
    assert code == 0 and out.startswith("# random_p")
    code, out2, _ = run(capsys, "gen", "random_p", "--k", "3", "--n", "3", "--p", "0.5", "--seed", "4")
    assert out == out2
    assert run(capsys, "gen", "engineered", "--k", "3", "--n", "8")[0] == 0


def test_gen_rejects_bad_parameters(capsys):
    code, _, err = run(capsys, "gen", "random_p", "--k", "3", "--n", "3")
    assert code == 2 and "p" in err
    assert run(capsys, "gen", "h0", "--k", "3", "--n", "2", "--d", "1,x")[0] == 2


def test_codegree(files, capsys):
    code, out, _ = run(capsys, "codegree", files["k33"], "--json")
    assert code == 0 and _payload(out)["min_codegree"] == 3
    assert "\n" not in out.strip()


def test_obstruct(files, capsys):
    code, out, _ = run(capsys, "obstruct", files["h0"])
    p = _payload(out)
    assert code == 0 and p["found"] and p["theorem_case"] == "case_i"
    p = _payload(run(capsys, "obstruct", files["k33"])[1])
    assert not p["found"]


def test_solve(files, capsys):
    code, out, _ = run(capsys, "solve", files["k33"])
    assert code == 0 and _payload(out)["status"] == "perfect_matching"
    code, out, _ = run(capsys, "solve", files["h0"])
    assert code == 0 and _payload(out)["status"] == "no_perfect_matching"
    code, out, _ = run(capsys, "solve", files["h0"], "--max")
    assert code == 0 and _payload(out)["size"] == 1


def test_solve_timeout(tmp_path, capsys):
    path = tmp_path / "hard.txt"
    save_instance(h0(5, 6, (3, 3, 3, 3, 1)), path)
    code, out, _ = run(capsys, "solve", str(path), "--timeout", "0")
    assert code == 1 and _payload(out)["status"] == "timeout"


def test_pipeline_command(files, capsys):
    code, out, _ = run(capsys, "pipeline", files["eng"])
    assert code == 0 and _payload(out)["status"] == "perfect_matching"
    code, out, _ = run(capsys, "pipeline", files["h0"])
    assert code == 1 and _payload(out)["status"] == "obstruction"
    assert run(capsys, "pipeline", files["iso"])[0] == 2
    assert run(capsys, "pipeline", files["eng"], "--alpha", "0.4")[0] == 2


def test_absorb_command(files, capsys):
    code, out, _ = run(capsys, "absorb", files["k33"], "--seed", "1")
    assert code == 0 and _payload(out)["status"] == "perfect_matching"
    code, out, _ = run(capsys, "absorb", files["h0"])
    assert code == 1
    assert run(capsys, "absorb", files["k33"], "--p-override", "2")[0] == 2


def test_check_theorem_command(files, capsys):
    code, out, _ = run(capsys, "check-theorem", files["h0"])
    p = _payload(out)
    assert code == 0 and p["theorem_case"] == "case_i" and p["pm_exists"] is False


def test_closeness_command(files, capsys):
    code, out, _ = run(capsys, "closeness", files["h0"], "--mode", "exact")
    p = _payload(out)
    assert code == 0 and p["cost"] == 0 and p["eps_close"]


def test_sweep_command(tmp_path, capsys):
    grid = tmp_path / "grid.json"
    grid.write_text(json.dumps([{"kind": "complete", "k": 3, "n": 3}, {"kind": "h0", "k": 3, "n": 2}]))
    out_csv = tmp_path / "rows.csv"
    code, out, _ = run(capsys, "sweep", str(grid), "-o", str(out_csv))
    assert code == 0 and _payload(out)["rows"] == 2 and out_csv.exists()
    grid.write_text("{}")
    assert run(capsys, "sweep", str(grid))[0] == 2
    assert run(capsys, "sweep", str(tmp_path / "missing.json"))[0] == 2


def test_bad_inputs(files, capsys):
    code, _, err = run(capsys, "codegree", files["bad"])
    assert code == 2 and err
    assert run(capsys, "codegree", "/nonexistent/file")[0] == 2
    with pytest.raises(SystemExit):
        main(["frobnicate"])
