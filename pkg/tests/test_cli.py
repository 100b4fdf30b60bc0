import json
import math

import pytest

from pctsp.cli import main
from pctsp.hardness import TwoSatInstance
from pctsp.instance import Instance, save_instance


@pytest.fixture
def square_file(tmp_path, square_k2):
    path = tmp_path / "square.json"
    save_instance(square_k2, path)
    return path


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_solve_and_verify_round_trip(tmp_path, capsys, square_file):
    tour = tmp_path / "tour.json"
    code, out, _ = run(capsys, "solve", square_file, "--sub-order", "exact", "--sub-glue", "exact", "--out", tour)
    assert code == 0
    assert f"cost {2 + 2 * math.sqrt(2):.10f}" in out
    assert "guarantee 2" in out
    code, out, _ = run(capsys, "verify", square_file, tour)
    assert code == 0 and out.startswith("ok")


def test_solve_explicit_order(tmp_path, capsys, square_file):
    good = tmp_path / "sigma.json"
    good.write_text(json.dumps({"sigma": [1, 0]}))
    code, out, _ = run(capsys, "solve", square_file, "--order", good)
    assert code == 0 and "sigma 1 0" in out
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"sigma": [0, 0]}))
    assert run(capsys, "solve", square_file, "--order", bad)[0] == 2


def test_parse_failure(tmp_path, capsys):
    p = tmp_path / "x.json"
    p.write_text("{not json")
    code, _, err = run(capsys, "solve", p)
    assert code == 2 and "error" in err
    assert run(capsys, "solve", tmp_path / "missing.json")[0] == 2
    assert run(capsys, "no-such-command")[0] == 2


def test_non_metric_guarantee_exit3(tmp_path, capsys):
    inst = Instance.matrix([[0, 1, 5, 1], [1, 0, 1, 1], [5, 1, 0, 1], [1, 1, 1, 0]], [0, 1, 0, 1])
    p = tmp_path / "nm.json"
    save_instance(inst, p)
    assert run(capsys, "solve", p, "--require-guarantee")[0] == 3
    code, out, _ = run(capsys, "solve", p)
    assert code == 0 and "guarantee heuristic" in out
    assert run(capsys, "check-metric", p)[0] == 3


def test_verify_rejects_bad_tour(tmp_path, capsys, square_file):
    t = tmp_path / "t.json"
    t.write_text(json.dumps({"order": [0, 2, 1, 3]}))
    code, out, _ = run(capsys, "verify", square_file, t)
    assert code == 3 and "not ok" in out


def test_exact_command(tmp_path, capsys, square_file):
    code, out, _ = run(capsys, "exact", square_file, "--out", tmp_path / "o.json")
    assert code == 0 and "optimal yes" in out
    assert run(capsys, "verify", square_file, tmp_path / "o.json")[0] == 0


def test_gen_random_round_trip(tmp_path, capsys):
    p = tmp_path / "r.json"
    assert run(capsys, "gen-random", "--n", 12, "--k", 3, "--seed", 4, "--out", p)[0] == 0
    assert run(capsys, "check-metric", p)[0] == 0
    assert run(capsys, "gen-random", "--n", 12, "--k", 5, "--seed", 4)[0] == 2
    assert run(capsys, "gen-random", "--n", 12, "--k", 3)[0] == 2  # seed is mandatory
    svg = tmp_path / "r.svg"
    assert run(capsys, "solve", p, "--svg", svg)[0] == 0
    assert svg.read_text().startswith("<svg")


def test_gen_reduction(tmp_path, capsys):
    sat = tmp_path / "f.2sat"
    sat.write_text(TwoSatInstance(2, ((1, -2), (1, 2))).to_text())
    code, out, _ = run(capsys, "gen-reduction", sat, "--out", tmp_path / "red", "--svg", tmp_path / "red.svg")
    assert code == 0
    assert "points 35" in out
    rows = [line for line in out.splitlines() if line[:1] in "01" and line.split()[-1] in ("yes", "no")]
    assert len(rows) == 4 and all(r.endswith("yes") for r in rows)
    inst_file = tmp_path / "red.instance.json"
    side = json.loads((tmp_path / "red.sidecar.json").read_text())
    assert set(side) >= {"color_names", "roles", "params"}
    assert set(side["params"]) == {"a", "b", "l", "W"}
    assert side["color_names"]["0"] == "R_1"
    code, out, _ = run(capsys, "solve", inst_file)
    assert code == 0


def test_gen_reduction_m1_exit3(tmp_path, capsys):
    sat = tmp_path / "one.2sat"
    sat.write_text("p 2sat 2 1\n1 2\n")
    code, _, err = run(capsys, "gen-reduction", sat)
    assert code == 3 and "l >= 30a" in err
    bad = tmp_path / "bad.2sat"
    bad.write_text("p 2sat 2 2\n1 1\n1 2\n")
    assert run(capsys, "gen-reduction", bad)[0] == 2


def test_gadget_table_command(capsys):
    code, out, _ = run(capsys, "gadget-table", "--a", 15, "--n", 2)
    assert code == 0
    rows = {line.split()[0]: [float(x) for x in line.split()[1:]] for line in out.splitlines()[1:]}
    assert rows["FF"][2] == pytest.approx(2 * math.sqrt(229) - 30, abs=1e-8)
    assert rows["TT"][0] == pytest.approx(rows["TF"][0], abs=1e-9) == pytest.approx(rows["FT"][0], abs=1e-9)
    assert rows["FF"][0] > max(rows[c][0] for c in ("TT", "TF", "FT"))
    assert run(capsys, "gadget-table", "--n", 1)[0] == 2


def test_ratio_study_command(tmp_path, capsys):
    out_csv = tmp_path / "r.csv"
    code, _, err = run(capsys, "ratio-study", "--sizes", 6, "--ks", 2, 3, "--trials", 2, "--seed", 0, "--out", out_csv)
    assert code == 0
    lines = out_csv.read_text().splitlines()
    assert lines[0] == "n,k,seed,approx_cost,oracle_cost,ratio,order_ms,glue_ms,oracle_ms"
    assert len(lines) == 5
    assert "max_ratio" in err
