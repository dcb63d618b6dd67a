import json

import pytest

from triflip.cli import run


def call(capsys, *argv):
    code = run([str(a) for a in argv])
    out = capsys.readouterr().out.strip()
    return code, out


@pytest.fixture
def inst_file(tmp_path, capsys):
    path = tmp_path / "inst.json"
    assert call(capsys, "gen", "--n", 7, "--m", 3, "--k", 2, "--seed", 3, "-o", path)[0] == 0
    return path


def test_gen_to_stdout(capsys):
    code, out = call(capsys, "gen", "--n", 6, "--m", 2, "--k", 1)
    assert code == 0 and len(json.loads(out)["triangulations"]) == 2


def test_exact_then_verify(capsys, inst_file, tmp_path):
    sol = tmp_path / "sol.json"
    code, out = call(capsys, "exact", inst_file, "-o", sol, "--jobs", 1)
    res = json.loads(out)
    assert code == 0 and res["optimal"] and res["status"] == "OPTIMAL"
    assert res["objective"] == res["lower_bound"]
    code, out = call(capsys, "verify", inst_file, sol)
    assert code == 0 and json.loads(out) == {"valid": True, "objective": res["objective"], "first_violation": None}

    # break the first flip: verification fails with exit status 2
    data = json.loads(sol.read_text())
    for path in data["paths"]:
        if path["flips"]:
            path["flips"][0]["add"] = [[0, 1]]
            break
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(data))
    code, out = call(capsys, "verify", inst_file, bad)
    assert code == 2 and not json.loads(out)["valid"]


def test_solve_improve_trim(capsys, inst_file, tmp_path):
    sol = tmp_path / "sol.json"
    code, out = call(capsys, "solve", inst_file, "-o", sol, "--jobs", 1, "--trim-r", 2, "--happy")
    first = json.loads(out)
    assert code == 0 and first["lower_bound"] <= first["objective"]
    code, out = call(capsys, "improve", inst_file, sol, "--proximity-k", 3, "--trim-r", 1)
    res = json.loads(out)
    assert code == 0 and res["objective"] <= res["previous_objective"] == first["objective"]


def test_distance_and_lb(capsys, inst_file):
    code, out = call(capsys, "distance", inst_file, "--from", 0, "--to", 1, "--string-bound")
    d = json.loads(out)
    assert code == 0 and d["exact"] and d["distance"] == len(d["flips"]) == d["lower_bound"]
    code, out = call(capsys, "lb", inst_file, "--jobs", 1)
    lb = json.loads(out)
    assert code == 0 and lb["distances"][0][1] == d["distance"] and lb["lower_bound"] >= d["distance"]


def test_svg_and_bound_table(capsys, inst_file, tmp_path):
    code, out = call(capsys, "svg", inst_file, "--triangulation", 1)
    assert code == 0 and "<svg" in out and out.count("<circle") == 7
    sol = tmp_path / "sol.json"
    call(capsys, "exact", inst_file, "-o", sol, "--jobs", 1)
    code, out = call(capsys, "svg", inst_file, "--solution", sol, "-o", tmp_path / "c.svg")
    assert code == 0 and "<svg" in (tmp_path / "c.svg").read_text()
    table = tmp_path / "table.txt"
    code, out = call(capsys, "bound-table", "--max-len", 9, "-o", table)
    assert code == 0 and json.loads(out)["max_len"] == 9 and table.exists()
    code, _ = call(capsys, "distance", inst_file, "--from", 0, "--to", 2, "--string-bound", "--bound-table", table)
    assert code == 0


def test_keep_cnf(capsys, inst_file, tmp_path):
    keep = tmp_path / "keep"
    code, _ = call(capsys, "exact", inst_file, "--jobs", 1, "--confirm", "--keep-cnf", keep)
    files = list(keep.iterdir())
    assert code == 0 and files and all(f.suffix in (".cnf", ".wcnf") for f in files)


@pytest.mark.parametrize(
    "argv, kind",
    [
        (["exact", "missing.json"], "missing-file"),
        (["distance", "{inst}", "--from", "0", "--to", "9"], "bad-argument"),
        (["solve", "{inst}", "--time-limit", "-1"], "bad-argument"),
        (["solve", "{inst}", "--trim-r", "0"], "bad-argument"),
        (["svg", "{inst}", "--triangulation", "5"], "bad-argument"),
        (["lb", "{inst}", "--bound-table", "nope.txt"], "missing-file"),
    ],
)
def test_errors(capsys, inst_file, argv, kind):
    code, out = call(capsys, *[a.replace("{inst}", str(inst_file)) for a in argv])
    assert code == 1 and json.loads(out)["error"] == kind


def test_bad_instance(capsys, tmp_path):
    p = tmp_path / "x.json"
    p.write_text('{"points_x": [0], "points_y": [0]}')
    code, out = call(capsys, "exact", p)
    assert code == 1 and json.loads(out)["error"] == "bad-instance"


def test_usage_error():
    with pytest.raises(SystemExit) as e:
        run(["frobnicate"])
    assert e.value.code == 2
