import json
import subprocess
import sys

import numpy as np
import pytest

from lrmp.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_enumerate(capsys):
    code, out, err = run(capsys, "enumerate", "-L", "3", "-N", "2")
    assert code == 0
    data = json.loads(out)
    assert data["size"] == 6 and data["configurations"][0] == [2, 0, 0]
    assert json.loads(err)["subcommand"] == "enumerate"


def test_solve_had(capsys):
    code, out, _ = run(capsys, "solve", "--builtin", "had", "-L", "2", "-N", "2", "-x", "1,2")
    assert code == 0
    np.testing.assert_allclose(json.loads(out)["pi"], [1 / 9, 4 / 9, 4 / 9], rtol=1e-12)


def test_solve_single_site(capsys):
    code, out, _ = run(capsys, "solve", "-L", "1", "-N", "3")
    assert code == 0
    assert json.loads(out)["pi"] == [1.0]


def test_solve_reducible(tmp_path, capsys):
    rates = tmp_path / "u.json"
    rates.write_text(json.dumps([[0, 0], [0, 1]]))
    code, _, err = run(capsys, "solve", "--rates", str(rates), "-L", "3", "-N", "1")
    assert code == 2
    assert "reducible" in err


def test_solve_capacity(monkeypatch, capsys):
    monkeypatch.setenv("LRMP_CAPACITY", "10")
    code, _, _ = run(capsys, "solve", "-L", "5", "-N", "5")
    assert code == 2


def test_malformed_inputs(tmp_path, capsys):
    assert run(capsys, "solve", "-L", "2", "-N", "1", "-x", "1,a")[0] == 1
    assert run(capsys, "solve", "-L", "2", "-N", "1", "-x", "1,2,3")[0] == 1
    bad = tmp_path / "bad.json"
    bad.write_text("[[0, 0], [1]]")
    assert run(capsys, "solve", "--rates", str(bad), "-L", "2", "-N", "1")[0] == 1
    assert run(capsys, "solve", "--builtin", "nonsense", "-L", "2", "-N", "1")[0] == 1
    assert run(capsys, "solve", "-L", "0", "-N", "1")[0] == 1
    assert run(capsys, "solve", "-N", "1")[0] == 1


def test_output_file_and_manifest(tmp_path, capsys):
    out = tmp_path / "pi.json"
    code, stdout, _ = run(capsys, "solve", "--builtin", "had", "-L", "2", "-N", "1", "--out", str(out))
    assert code == 0 and stdout == ""
    assert json.loads(out.read_text())["pi"] == pytest.approx([0.5, 0.5])
    manifest = json.loads((tmp_path / "pi.json.manifest.json").read_text())
    assert manifest["subcommand"] == "solve"
    assert manifest["parameters"]["builtin"] == "had"
    assert manifest["tolerances"]["residual"] == 1e-10
    assert manifest["output"] == str(out)


def test_check_had_palrmp(capsys):
    code, out, _ = run(capsys, "check", "--builtin", "had", "--variant", "palrmp")
    assert code == 0
    report = json.loads(out)
    assert report["verdict"] == "pass"
    assert report["extracted"]["phi"][:3] == pytest.approx([1.0, 0.5, 1 / 3])


def test_check_product(capsys):
    code, out, _ = run(capsys, "check", "--builtin", "product:m,1/(n+1)", "--variant", "hpalrmp")
    assert code == 3
    assert json.loads(out)["verdict"] == "fail"
    code, _, _ = run(capsys, "check", "--builtin", "product:m,1/(n+1)", "--variant", "slrmp")
    assert code == 0


def test_check_all(capsys):
    code, out, _ = run(capsys, "check", "--builtin", "had")
    assert code == 0
    assert set(json.loads(out)) == {"palrmp", "hpalrmp", "hpalrmp_alt", "slrmp"}


def test_check_tolerance_recorded(capsys):
    _, _, err = run(capsys, "check", "--builtin", "had", "--variant", "palrmp", "--tol", "1e-6")
    assert json.loads(err)["tolerances"]["condition_rtol"] == 1e-6


def test_construct(capsys):
    code, out, _ = run(capsys, "construct", "--g", "inv-factorial", "--variant", "palrmp", "--nmax", "4")
    assert code == 0
    data = json.loads(out)
    np.testing.assert_allclose(np.array(data["rates"])[1], [1, 1 / 2, 1 / 3, 1 / 4, 1 / 5])

    code, out, _ = run(capsys, "construct", "--g", "ones", "--variant", "hpalrmp")
    u = json.loads(out)["rates"]
    assert u[1][1] != u[2][1]

    code, out, _ = run(capsys, "construct", "--g", "ones", "--variant", "slrmp", "--nmax", "5")
    assert code == 0
    assert json.loads(out)["one_point"]["weights"] == [1.0] * 6


def test_construct_slrmp_then_check(tmp_path, capsys):
    out = tmp_path / "u.json"
    code, stdout, _ = run(capsys, "construct", "--g", "ones", "--variant", "slrmp", "--nmax", "5")
    out.write_text(json.dumps(json.loads(stdout)["rates"]))
    assert run(capsys, "check", "--rates", str(out), "--variant", "hpalrmp")[0] == 3
    assert run(capsys, "check", "--rates", str(out), "--variant", "slrmp")[0] == 0


def test_construct_rejects_bad_g(capsys):
    assert run(capsys, "construct", "--g", "[1, 0, 1]", "--variant", "palrmp")[0] == 1
    assert run(capsys, "construct", "--g", "[1, 2, 1]", "--variant", "palrmp", "--nmax", "3")[0] == 1


def test_had(capsys):
    code, out, _ = run(capsys, "had", "-L", "2", "-N", "2", "-x", "1,2")
    assert code == 0
    data = json.loads(out)
    assert data["marginal"][0] == pytest.approx([4 / 9, 4 / 9, 1 / 9])
    assert data["bijection_ok"] is True


def test_had_sweep(capsys):
    code, out, _ = run(capsys, "had", "-L", "3", "-x", "1,2,3", "--sweep", "3")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "N,current" and len(lines) == 4


def test_had_capacity(monkeypatch, capsys):
    monkeypatch.setenv("LRMP_CAPACITY", "5")
    assert run(capsys, "had", "-L", "3", "-N", "3")[0] == 2


def test_simulate(capsys):
    code, out, err = run(capsys, "simulate", "--builtin", "had", "-L", "3", "-N", "2", "-x", "1,2,3",
                         "--events", "2e4", "--seed", "42")
    assert code == 0
    data = json.loads(out)
    assert data["empirical"]["events"] == 20000
    assert data["tv_exact"] < 0.05
    assert json.loads(err)["seed"] == 42


def test_simulate_empty(capsys):
    code, out, _ = run(capsys, "simulate", "-L", "3", "-N", "0")
    assert code == 0
    assert json.loads(out)["empirical"]["pi"] == [1.0]


def test_simulate_initial(capsys):
    assert run(capsys, "simulate", "-L", "2", "-N", "2", "--initial", "[0, 2]", "--events", "10")[0] == 0
    assert run(capsys, "simulate", "-L", "2", "-N", "2", "--initial", "[0, 1]")[0] == 1


def test_generator_csv(capsys):
    code, out, _ = run(capsys, "generator", "--builtin", "had", "-L", "2", "-N", "1")
    assert code == 0
    assert out.splitlines()[0] == "row,col,rate"


def test_module_entry_point():
    result = subprocess.run([sys.executable, "-m", "lrmp", "enumerate", "-L", "2", "-N", "1"],
                            capture_output=True, text=True)
    assert result.returncode == 0
    assert json.loads(result.stdout)["size"] == 2
