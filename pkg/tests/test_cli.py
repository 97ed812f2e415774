import json

from partrank.cli import generate_instance, main
from partrank.instance import load

from conftest import FIXTURES


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_gen_is_deterministic_and_parseable(capsys):
    code, out1, _ = run(capsys, "gen", "3", "2", "0.8", "0.5", "--seed", "7")
    assert code == 0
    code, out2, _ = run(capsys, "gen", "3", "2", "0.8", "0.5", "--seed", "7")
    assert out1 == out2
    A = load(out1.encode())
    assert A.mu == 3 and A.nu == 2


def test_gen_matches_library_generator(capsys):
    code, out, _ = run(capsys, "gen", "2", "2", "1.0", "0.0",
                       "--field", "gf101", "--seed", "3")
    assert code == 0
    A = load(out.encode())
    B = generate_instance(2, 2, 1.0, 0.0, "gf101", 3)
    assert A.edge_keys() == B.edge_keys()


def test_solve_fixture_with_verify(capsys):
    code, out, _ = run(capsys, "solve", str(FIXTURES / "e5.json"), "--verify")
    assert code == 0
    doc = json.loads(out)
    assert doc["rank"] == 4
    assert doc["stats"]["augmentations"] >= 1
    assert len(doc["completion"]) == 4
    assert set(doc["witness"]) == {"X", "Y"}


def test_solve_missing_file(capsys):
    code, _, err = run(capsys, "solve", "/nonexistent/nope.json")
    assert code == 2
    assert "error" in err


def test_check_roundtrip(tmp_path, capsys):
    code, out, _ = run(capsys, "solve", str(FIXTURES / "e4.json"))
    assert code == 0
    matching = json.loads(out)["matching"]
    mfile = tmp_path / "m.json"
    mfile.write_text(json.dumps(matching))
    code, out, _ = run(capsys, "check", str(FIXTURES / "e4.json"), str(mfile))
    assert code == 0
    doc = json.loads(out)
    assert doc["ok"] is True and doc["r"] == 4


def test_check_rejects_bad_matching(tmp_path, capsys):
    mfile = tmp_path / "m.json"
    # all four blocks of e4: an all-rank-2 cycle, not a matching
    mfile.write_text(json.dumps([
        {"alpha": a, "beta": b} for a in (1, 2) for b in (1, 2)
    ]))
    code, out, _ = run(capsys, "check", str(FIXTURES / "e4.json"), str(mfile))
    assert code == 0
    doc = json.loads(out)
    assert doc["ok"] is False and doc["violated"]


def test_check_rejects_absent_block(tmp_path, capsys):
    mfile = tmp_path / "m.json"
    mfile.write_text(json.dumps([{"alpha": 1, "beta": 2}]))
    code, _, err = run(capsys, "check", str(FIXTURES / "e1.json"), str(mfile))
    assert code == 2
    assert "absent block" in err


def test_oracle_commands(capsys):
    code, out, _ = run(capsys, "oracle", str(FIXTURES / "e5.json"))
    assert code == 0
    assert json.loads(out)["rank"] == 4
    code, out, _ = run(capsys, "oracle", str(FIXTURES / "e5.json"), "--brute")
    assert code == 0
    doc = json.loads(out)
    assert doc["rank"] == 4 and doc["method"] == "brute_force"


def test_usage_error_exit_code(capsys):
    assert main(["frobnicate"]) == 2
    capsys.readouterr()


def test_trace_goes_to_stderr(capsys):
    code, out, err = run(capsys, "solve", str(FIXTURES / "e5.json"), "--trace")
    assert code == 0
    json.loads(out)
    assert err.strip()
