import json
import subprocess
import sys

from binoa.cli import EXIT_ERROR, EXIT_INDETERMINATE, EXIT_OK, main
from binoa.core import format_oat
from binoa.store import load_archive


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def fields(text):
    return dict(line.split(": ", 1) for line in text.split("\n\n")[0].splitlines())


def strip_time(text):
    return "\n".join(l for l in text.splitlines() if not l.startswith("time: "))


def test_rank(capsys, tmp_path):
    code, out, _ = run(capsys, "rank", "--n", 8, "--t", 4)
    assert code == EXIT_OK
    f = fields(out)
    assert f["rank"] == "163"
    lp = tmp_path / "sys.lp"
    code, out, _ = run(capsys, "rank", "--n", 4, "--t", 2, "--export", lp)
    assert code == EXIT_OK and lp.read_text().startswith("LP1")


def test_verify_nr(capsys, tmp_path, nr):
    path = tmp_path / "nr.oat"
    code, out, _ = run(capsys, "nr", "--out", path)
    assert code == EXIT_OK and path.exists()
    code, out, _ = run(capsys, "verify", "--in", path, "--strength", 5)
    f = fields(out)
    assert code == EXIT_OK
    assert f["ok"] == "True" and f["index"] == "8" and f["simple"] == "True"


def test_verify_failure_and_bad_file(capsys, tmp_path, nr):
    path = tmp_path / "nr.oat"
    path.write_text(format_oat(nr))
    code, out, _ = run(capsys, "verify", "--in", path, "--strength", 6)
    # a failed check is still a conclusive answer
    assert code == EXIT_OK and fields(out)["ok"] == "False" and "violation" in fields(out)
    bad = tmp_path / "bad.oat"
    bad.write_text("4 2 2 1\n0 0\n0 x\n1 0\n1 1\n")
    code, _, err = run(capsys, "verify", "--in", bad)
    assert code == EXIT_ERROR and err.startswith("error:") and "line 3" in err
    code, _, err = run(capsys, "verify", "--in", tmp_path / "missing.oat")
    assert code == EXIT_ERROR


def test_table(capsys):
    code, out, _ = run(capsys, "table", "--tmin", 4, "--tmax", 5, "--nmax", 16)
    assert code == EXIT_OK
    assert " 13         128         256" in out
    assert fields(out)["omega(11,5)"] == "open: 192 <= ω(11,5) <= 256"
    code, out, _ = run(capsys, "table", "--explain", 12, 4)
    assert "ω(12,4) = 128" in out


def test_exit_codes_and_json(capsys, tmp_path):
    side = tmp_path / "r.json"
    code, out, _ = run(capsys, "solve", "--n", 8, "--t", 4, "--lambda", 6, "--budget", "0.5",
                       "--json", side)
    assert code == EXIT_INDETERMINATE
    data = json.loads(side.read_text())
    assert data["status"] == "INDETERMINATE" and data["exit_code"] == EXIT_INDETERMINATE
    code, out, _ = run(capsys, "solve", "--n", 7, "--t", 4, "--lambda", 7, "--budget", 60,
                       "--json", side)
    assert code == EXIT_OK and fields(out)["status"] == "UNSAT"
    assert json.loads(side.read_text())["exit_code"] == EXIT_OK
    code, _, err = run(capsys, "solve", "--n", 4, "--t", 4, "--lambda", 1, "--budget", 1)
    assert code == EXIT_ERROR and "error:" in err


def test_classify_chain(capsys, tmp_path):
    out_path = tmp_path / "c.cls"
    code, out, _ = run(capsys, "classify", "--n", 6, "--t", 4, "--lambda", 6, "--budget", 120,
                       "--out", out_path)
    f = fields(out)
    assert code == EXIT_OK and f["chain"] == "a=5:4 a=6:9" and f["classes"] == "9"
    assert len(load_archive(out_path).classes) == 9
    code, out, _ = run(capsys, "extend", "--in", out_path, "--budget", 120)
    assert code == EXIT_OK and fields(out)["classes"] == "4"


def test_reports_are_reproducible(capsys, tmp_path):
    job = tmp_path / "job.json"
    job.write_text(json.dumps({"n": 6, "t": 4, "lambda": 6, "mode": "enumerate", "budgetSeconds": 120}))
    archive = tmp_path / "c.cls"
    outs, blobs = [], []
    for workers in (1, 1, 2):
        code, out, _ = run(capsys, "solve", "--job", job, "--workers", workers, "--split", 2,
                           "--out", archive)
        assert code == EXIT_OK
        outs.append(strip_time(out))
        blobs.append(archive.read_bytes())
    # same job, same settings: byte-identical apart from the timing line
    assert outs[0] == outs[1]
    # the worker count is echoed but changes nothing else
    assert outs[0].replace("workers: 1", "workers: 2") == outs[2]
    assert blobs[0] == blobs[1] == blobs[2]
    assert fields(out)["classes"] == "9"


def test_job_missing_keys(capsys, tmp_path):
    job = tmp_path / "job.json"
    job.write_text(json.dumps({"n": 6}))
    code, _, err = run(capsys, "solve", "--job", job)
    assert code == EXIT_ERROR and "lacks" in err


def test_ci_and_pmax_and_bound(capsys):
    code, out, _ = run(capsys, "ci", "--hex", "6996", "--n", 4)
    f = fields(out)
    assert code == EXIT_OK and f["weight"] == "8" and f["ci_order"] == "3"
    code, out, _ = run(capsys, "pmax", "--n", 7, "--t", 4, "--lambda", 7)
    assert fields(out)["pmax"] == "3"
    code, out, _ = run(capsys, "bound", "--n", 11, "--t", 4)
    assert fields(out)["min_lambda"] == "6"


def test_console_script():
    r = subprocess.run([sys.executable, "-m", "binoa.cli", "rank", "--n", "7", "--t", "4"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and "rank: 99" in r.stdout
