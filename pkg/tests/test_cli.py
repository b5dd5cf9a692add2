import json
import subprocess
import sys

import pytest

from chainbell import cli


def run(*argv):
    return cli.run(list(argv))


def test_verify_sos_degree_one_passes():
    code, text = run("verify-sos", "--n", "2..6", "--degree", "1")
    report = json.loads(text)
    assert code == 0 and report["verdict"] == "pass"
    assert set(report) == {"command", "config", "results", "verdict", "version", "seed", "wall_ms"}
    assert max(r["symbolic_residual"] for r in report["results"]) < 1e-10


def test_verify_sos_dual_second_degree():
    code, text = run("verify-sos", "--n", "3", "--degree", "2", "--variant", "dual")
    assert code == 0


def test_verify_sos_cap():
    code, text = run("verify-sos", "--n", "64", "--degree", "2")
    assert code == 2 and "cap" in text


def test_selftest_exact():
    code, text = run("selftest", "--n", "5", "--jitter", "0", "--seed", "1")
    res = json.loads(text)["results"][0]
    assert code == 0
    assert res["fidelity"] == pytest.approx(1.0, abs=1e-12)
    assert max(res["distances"].values()) < 1e-8


def test_selftest_degenerate_exit_code():
    code, text = run("selftest", "--n", "4", "--theta", "1.5707963267948966")
    assert code == 3 and "degenerate" in text


def test_randomness_and_odd_rejection():
    code, text = run("randomness", "--n", "4")
    res = json.loads(text)["results"][0]
    assert code == 0
    assert list(res["probabilities"].values()) == pytest.approx([0.25] * 4, abs=1e-12)
    assert res["min_entropy_bits"] == pytest.approx(2.0, abs=1e-7)
    assert run("randomness", "--n", "3")[0] == 2


def test_violation_table():
    code, text = run("violation", "--n", "2..8")
    rows = json.loads(text)["results"]
    assert code == 0
    assert [r["classical_bruteforce"] for r in rows] == [2 * n - 2 for n in range(2, 9)]
    assert all(r["bruteforce_match"] for r in rows)


def test_robustness_n2_out_of_range_and_fallback():
    report = json.loads(run("robustness", "--n", "2..3")[1])
    assert report["results"][0]["verdict"] == "out of formula range"
    report = json.loads(run("robustness", "--n", "2", "--chsh-fallback")[1])
    assert report["results"][0]["verdict"] == "pass"


def test_failing_verdict_gives_exit_one():
    code, text = run("violation", "--n", "3", "--num-tol", "1e-30")
    assert code == 1 and json.loads(text)["verdict"] == "fail"


def test_determinism_across_threads(monkeypatch):
    args = ("robustness", "--n", "3..5", "--samples", "4", "--jitter", "0.02", "--seed", "7", "--no-wall-time")
    a = run(*args)
    monkeypatch.setenv("CHAINBELL_THREADS", "3")
    b = run(*args)
    assert a == b


def test_float_format_17_digits():
    assert cli.to_json(0.1) == "0.10000000000000001"
    assert cli.to_json(2.0) == "2.0"
    assert cli.to_json({"b": 1, "a": [True, None]}) == '{\n  "a": [\n    true,\n    null\n  ],\n  "b": 1\n}'


def test_csv_and_text_formats():
    code, text = run("violation", "--n", "2", "--format", "csv")
    assert text.splitlines()[0] == "n,key,value"
    assert "2,quantum_bound,2.8284271247461903" in text
    code, text = run("violation", "--n", "2", "--format", "text")
    assert text.rstrip().endswith("verdict: pass")


def test_config_file(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# sweep\nn = 3..4\nsamples = 2\njitter = 0.01\n")
    report = json.loads(run("robustness", "--config", str(cfg))[1])
    assert [r["n"] for r in report["results"]] == [3, 4]
    assert report["results"][0]["samples"] == 2
    # command-line flags override the file
    report = json.loads(run("robustness", "--config", str(cfg), "--n", "5")[1])
    assert [r["n"] for r in report["results"]] == [5]
    cfg.write_text("nonsense = 1\n")
    assert run("robustness", "--config", str(cfg))[0] == 2


def test_dump_directory(tmp_path):
    code, _ = run("verify-sos", "--n", "2", "--dump", str(tmp_path))
    text = (tmp_path / "sos_n2_deg1_primary.txt").read_text()
    lines = text.splitlines()
    assert lines[0] == "2.82842712474619+0.0i\t1"
    assert "-1.0+0.0i\tA2 B2" in lines


@pytest.mark.parametrize("argv", [["violation", "--n", "1"], ["violation", "--n", "x"], ["selftest", "--junk-dims", "0x2"]])
def test_usage_errors(argv):
    assert cli.run(argv)[0] == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "chainbell", "violation", "--n", "2"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["results"][0]["classical_bruteforce"] == 2
    proc = subprocess.run([sys.executable, "-m", "chainbell", "violation", "--bogus"], capture_output=True, text=True)
    assert proc.returncode == 2
