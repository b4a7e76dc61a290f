import csv
import subprocess
import sys

import pytest

from vkg.cli import main
from vkg.errors import ScanFailed


def _rows(path):
    with open(path) as fh:
        return list(csv.reader(fh))


def _cfg(tmp_path, text):
    path = tmp_path / "run.cfg"
    path.write_text(text)
    return str(path)


def test_coeffs_table(tmp_path):
    assert main(["coeffs", "--out", str(tmp_path), "--quiet"]) == 0
    rows = _rows(tmp_path / "coeffs.csv")
    assert rows[0] == ["signs", "n3_re", "n3_im", "q3_re", "q3_im"]
    assert ["+-++", "0", "-0.5", "0", "-0.333333333333"] in rows
    assert ["++-+", "0", "-0.5", "0", "-1"] in rows
    assert len(rows) == 7
    assert "det=4/3" in (tmp_path / "coeffs_verdict.txt").read_text()


def test_spectrum_origin_row(tmp_path):
    cfg = _cfg(tmp_path, "alpha = 1\n")
    assert main(["spectrum", "--config", cfg, "--out", str(tmp_path), "--quiet"]) == 0
    rows = _rows(tmp_path / "spectrum.csv")
    origin = [r for r in rows[1:] if float(r[0]) == 0.0]
    assert len(origin) == 1
    vals = [float(x) for x in origin[0]]
    assert vals[1:5] == [0.0, 1.0, 0.0, -1.0]


def test_phases_files(tmp_path):
    assert main(["phases", "--out", str(tmp_path), "--quiet"]) == 0
    p2 = _rows(tmp_path / "phases2.csv")
    p3 = _rows(tmp_path / "phases3.csv")
    assert len(p2[0]) == 2 + 8 and len(p3[0]) == 3 + 16
    assert min(float(v) for r in p2[1:] for v in r[2:]) > 0.5


def test_simulate_writes_artifacts(tmp_path):
    cfg = _cfg(tmp_path, "L = 40\nn_modes = 256\nt_end = 5\ndt = 0.05\nstride = 5\n")
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path), "--quiet"]) == 0
    rows = _rows(tmp_path / "trajectory.csv")
    assert rows[0][0] == "t" and len(rows) == 22
    assert (tmp_path / "decay.svg").exists()
    assert (tmp_path / "snapshot_final.csv").exists()
    assert (tmp_path / "effective_config.txt").exists()


def test_simulate_blowup_exit_code(tmp_path):
    cfg = _cfg(tmp_path, "L = 40\nn_modes = 256\nt_end = 5\nepsilon = 4\n")
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path), "--quiet"]) == 3


def test_lifespan_sorted_with_note(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("VKG_THREADS", "2")
    cfg = _cfg(tmp_path, "L = 40\nn_modes = 256\nt_end = 5\nepsilon = 4\n")
    assert main(["lifespan", "--config", cfg, "--out", str(tmp_path)]) == 0
    rows = _rows(tmp_path / "lifespan.csv")
    eps = [float(r[0]) for r in rows[1:]]
    assert eps == sorted(eps) == [1.0, 2.0, 4.0]
    assert "not verifiable" in (tmp_path / "lifespan_report.txt").read_text()
    assert "not verifiable" in capsys.readouterr().out


def test_verify_passes(tmp_path):
    assert main(["verify", "--out", str(tmp_path), "--quiet"]) == 0
    text = (tmp_path / "verify.txt").read_text()
    assert "FAIL" not in text and text.count("PASS") >= 10


@pytest.mark.parametrize("text", ["alpha = 0\n", "alpha = 1\nalpha = 1\n", "bogus = 1\n"])
def test_config_errors_exit_2(tmp_path, text):
    assert main(["coeffs", "--config", _cfg(tmp_path, text), "--out", str(tmp_path)]) == 2


def test_too_narrow_cutoff_exit_3(tmp_path):
    # a cut-off this small leaves almost no grid points in the critical band
    cfg = _cfg(tmp_path, "L = 40\nn_modes = 256\nt_end = 1\nk0 = 0.001\n")
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path), "--quiet"]) == 3


def test_scan_failure_exit_3(tmp_path, monkeypatch):
    import vkg.simulator

    def fail(*args, **kwargs):
        raise ScanFailed("no admissible rate")

    monkeypatch.setattr(vkg.simulator, "validate_cutoff", fail)
    cfg = _cfg(tmp_path, "L = 40\nn_modes = 256\nt_end = 1\n")
    assert main(["simulate", "--config", cfg, "--out", str(tmp_path), "--quiet"]) == 3


def test_unknown_subcommand_and_module_entry(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["dance"])
    assert exc.value.code == 2
    proc = subprocess.run(
        [sys.executable, "-m", "vkg.cli", "coeffs", "--out", str(tmp_path), "--quiet"], capture_output=True
    )
    assert proc.returncode == 0 and proc.stdout == b""
