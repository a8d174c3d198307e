import json
import subprocess
import sys

import pytest

from prismcoh.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr().out


def test_verify_prism_passes(capsys):
    code, out = run(capsys, "verify-prism", "--p", "3")
    assert code == 0
    assert "exactness p=3 modulus=0" in out


def test_unsupported_prime_is_a_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["verify-prism", "--p", "4"])
    assert exc.value.code == 2
    assert "unsupported prime 4" in capsys.readouterr().err


def test_carry_suite_needs_an_order_nine_element(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["verify-cochain", "--suite", "lemma3.5", "--group", "c3xc3"])
    assert exc.value.code == 2
    assert "lifts to Z/9" in capsys.readouterr().err


def test_carry_suite_exit_code_reflects_failures(capsys):
    code, out = run(capsys, "verify-cochain", "--suite", "carry", "--group", "c9", "--json")
    env = json.loads(out)
    assert code == 1 and env["ok"] is False
    failed = [it["label"] for r in env["reports"] for it in r["items"] if it["status"] == "fail"]
    assert len(failed) == 1 and failed[0].startswith("(vi)")


def test_suite_aliases_agree(capsys):
    _, a = run(capsys, "verify-cochain", "--suite", "carry", "--group", "c9", "--json", "--no-timing")
    _, b = run(capsys, "verify-cochain", "--suite", "lemma3.5", "--group", "c9", "--json", "--no-timing")
    strip = lambda s: {k: v for k, v in json.loads(s).items() if k != "command"}
    assert strip(a) == strip(b)


def test_json_is_deterministic_without_timing(capsys):
    argv = ["compute-cohomology", "--module", "m4mod3", "--degree", "2", "--json", "--no-timing", "--seed", "7"]
    _, first = run(capsys, *argv)
    _, second = run(capsys, *argv)
    assert first == second
    env = json.loads(first)
    assert env["schema_version"] == 1 and env["seed"] == 7
    assert "timing" not in first


def test_compute_cohomology_checks_the_prediction(capsys):
    code, out = run(capsys, "compute-cohomology", "--module", "m3mod3", "--degree", "1", "--json")
    env = json.loads(out)
    assert code == 0
    assert env["dimensions"]["H"] == sum(p["orbits"] * p["dimension"] for p in env["pieces"])


def test_report_only_commands_exit_zero(capsys):
    code, out = run(capsys, "h3-bockstein-report", "--n", "1", "--json", "--no-timing")
    env = json.loads(out)
    assert code == 0
    assert {it["status"] for r in env["reports"] for it in r["items"]} == {"report-only"}


def test_degree_cap_is_a_usage_error(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["compute-cohomology", "--group", "c9xc9", "--degree", "2"])
    assert exc.value.code == 2


def test_out_file(tmp_path, capsys):
    target = tmp_path / "report.json"
    code, out = run(capsys, "verify-cochain", "--suite", "matrixrep", "--json", "--out", str(target))
    assert code == 0 and out == ""
    assert json.loads(target.read_text())["ok"] is True


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "prismcoh.cli", "verify-cochain", "--suite", "matrixrep"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert "0 fail" in proc.stdout
