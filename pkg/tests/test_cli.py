import json
import os
import subprocess
import sys

import pytest
import yaml

from skewflow import cli, jobs

DATA = os.path.join(os.path.dirname(__file__), "data")

SMALL = """\
system:
  builtin: ex_nues1
horizon:
  n_max: 20
analyses:
  - type: es
    mu: 1
  - type: datko
    rho: 0.5
    gauge: {power: 2}
"""


# --- job parsing ----------------------------------------------------------

def test_parse_and_echo():
    job = jobs.parse_job(SMALL)
    assert [a["name"] for a in job.analyses] == ["00_es", "01_datko"]
    again = jobs.parse_job(job.dump())
    assert again.to_dict() == job.to_dict()


def test_strict_errors_carry_line_numbers():
    text = SMALL + "  - type: es\n    mu: -2\n    colour: red\nextra: 1\n"
    with pytest.raises(jobs.JobError) as info:
        jobs.parse_job(text)
    errs = info.value.errors
    lines = [ln for ln, _, _ in errs]
    assert lines == sorted(lines)
    msgs = " ".join(m for _, _, m in errs)
    assert "colour" in msgs or any("colour" in p for _, p, _ in errs)
    assert any(ln == 13 for ln in lines)     # the bad mu
    assert len(errs) >= 3


def test_lenient_mode_warns_and_drops_unknown_keys():
    job = jobs.parse_job(SMALL + "extra: 1\n", strict=False)
    assert job.warnings and "extra" in job.warnings[0]


@pytest.mark.parametrize("text", [
    "system: {builtin: nope}\nanalyses: [{type: es, mu: 1}]\n",
    "system: {builtin: ex_nues1}\nanalyses: [{type: magic}]\n",
    "system: {builtin: ex_nues1}\nanalyses: []\n",
    "system: {builtin: ex_nues1, steps: [[[1]]]}\nanalyses: [{type: es, mu: 1}]\n",
    "system: {builtin: ex_nues1}\nhorizon: {n_max: 1}\nanalyses: [{type: es, mu: 1}]\n",
    "system: {builtin: ex_nues1}\nanalyses: [{type: datko, rho: 1, gauge: {cubic: 2}}]\n",
    "system: {builtin: ex_nues1}\nanalyses: [{type: trichotomy, nu: [-1, 1]}]\n",
])
def test_invalid_jobs(text):
    with pytest.raises(jobs.JobError):
        jobs.parse_job(text)


def test_missing_file():
    with pytest.raises(jobs.JobError):
        jobs.parse_job("/nonexistent/job.yaml")


def test_run_collects_errors_per_analysis():
    text = """\
system:
  steps: [[[0, 1], [1, 0]], [[0, 1], [1, 0]], [[0, 1], [1, 0]], [[0, 1], [1, 0]]]
horizon: {n_max: 4}
analyses:
  - type: dichotomy
    projectors: [[[1, 0], [0, 0]], [[0, 0], [0, 1]]]
    nu1: -1
    nu2: 1
  - type: growth
"""
    report = jobs.run(jobs.parse_job(text))
    data = report.to_dict()
    assert data["analyses"][0]["status"] == "error"
    assert data["analyses"][0]["error"]["kind"] == "InvarianceError"
    assert data["analyses"][1]["status"] == "ok"
    assert data["summary"]["00_dichotomy"] == "error"


def test_emit_writes_files(tmp_path):
    report = jobs.run(jobs.parse_job(SMALL))
    paths = jobs.emit(report, str(tmp_path))
    names = sorted(os.path.basename(p) for p in paths)
    assert names == ["00_es.csv", "01_datko.csv", "job.yaml", "report.json"]
    header = (tmp_path / "00_es.csv").read_text().splitlines()[0]
    assert header == "n,coefficient,max_ratio,verdict"
    data = json.loads((tmp_path / "report.json").read_text())
    assert data["provenance"]["tool"] == "skewflow"
    assert yaml.safe_load((tmp_path / "job.yaml").read_text())["system"]["builtin"] == "ex_nues1"


def test_every_analysis_type_runs_from_data_jobs():
    seen = set()
    for name in sorted(os.listdir(DATA)):
        job = jobs.parse_job(os.path.join(DATA, name))
        report = jobs.run(job).to_dict()
        for block in report["analyses"]:
            assert block["status"] == "ok", (name, block)
            seen.add(block["type"])
    assert seen == set(jobs.ANALYSIS_KEYS)


# --- command line ---------------------------------------------------------

def write(tmp_path, text=SMALL):
    path = tmp_path / "job.yaml"
    path.write_text(text)
    return str(path)


def test_analyze_to_stdout(tmp_path, capsys):
    assert cli.main(["analyze", write(tmp_path)]) == 0
    data = json.loads(capsys.readouterr().out)
    assert data["summary"] == {"00_es": True, "01_datko": True}


def test_emit_csv_only(tmp_path, capsys):
    out = tmp_path / "out"
    assert cli.main(["emit-csv", write(tmp_path), "--out", str(out)]) == 0
    assert sorted(p.name for p in out.iterdir()) == ["00_es.csv", "01_datko.csv"]


def test_invalid_job_exit_code(tmp_path, capsys):
    assert cli.main(["analyze", write(tmp_path, SMALL + "bogus: 1\n")]) == 2
    assert "line" in capsys.readouterr().err
    assert cli.main(["analyze", write(tmp_path, SMALL + "bogus: 1\n"), "--lenient"]) == 0


def test_analysis_error_exit_code(tmp_path, capsys):
    text = """\
system:
  steps: [[[0, 1], [1, 0]], [[0, 1], [1, 0]], [[0, 1], [1, 0]], [[0, 1], [1, 0]]]
horizon: {n_max: 4}
analyses:
  - type: dichotomy
    projectors: {coordinate: [[0], [1]]}
    nu1: -1
    nu2: 1
"""
    assert cli.main(["analyze", write(tmp_path, text)]) == 1
    data = json.loads(capsys.readouterr().out)
    assert data["analyses"][0]["error"]["kind"] == "InvarianceError"


def test_check_axioms_builtin(capsys):
    assert cli.main(["check-axioms", "--builtin", "ex_ce", "--param", "variant=corrected",
                     "--count", "10"]) == 0
    assert "cocycle residual" in capsys.readouterr().out
    cli.main(["check-axioms", "--builtin", "ex_ce", "--param", "variant=shifted", "--count", "10"])
    assert "False" in capsys.readouterr().out


def test_estimate_builtin(capsys):
    assert cli.main(["estimate", "--builtin", "ex_nues1", "--n-max", "30"]) == 0
    out = capsys.readouterr().out
    value = float(out.split("stable exponent: ")[1].split()[0])
    assert abs(value - 3.0) < 1e-3


def test_bad_param_and_builtin(capsys):
    assert cli.main(["check-axioms", "--builtin", "ex_nues1", "--param", "novalue"]) == 2
    assert cli.main(["check-axioms", "--builtin", "missing"]) == 2
    assert cli.main(["check-axioms"]) == 2


def test_list_builtins(capsys):
    assert cli.main(["list-builtins"]) == 0
    assert "ex_nued" in capsys.readouterr().out


def test_seed_override_changes_provenance(tmp_path, capsys):
    cli.main(["analyze", write(tmp_path), "--seed", "42"])
    assert json.loads(capsys.readouterr().out)["provenance"]["seed"] == 42


def test_console_script_installed():
    out = subprocess.run([sys.executable, "-m", "skewflow.cli", "--version"],
                         capture_output=True, text=True, check=True)
    assert out.stdout.startswith("skewflow ")
