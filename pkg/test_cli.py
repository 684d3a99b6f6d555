"""End-to-end tests of the sbfctl command line."""
import json
import subprocess
import sys
from pathlib import Path

ROOT = Path(__file__).resolve().parent


def run_command(args, timeout=300):
    """Run main.py with args and return (code, stdout, stderr)."""
    try:
        result = subprocess.run([sys.executable, str(ROOT / "main.py"), *args],
                                capture_output=True, text=True, timeout=timeout, cwd=ROOT)
        return result.returncode, result.stdout, result.stderr
    except subprocess.TimeoutExpired:
        return 1, "", "Command timed out"


def test_coeffs_table(tmp_path):
    code, stdout, stderr = run_command(["coeffs", "--family", "gaussian", "--sigma", "1",
                                        "--n", "2", "--lmax", "50", "--out", str(tmp_path)])
    assert code == 0, stderr
    lines = stdout.splitlines()
    assert lines[0] == "l,coeff"
    assert len(lines) == 52
    assert (tmp_path / "coeffs.csv").read_text().splitlines() == lines
    report = json.loads((tmp_path / "coeffs.json").read_text())
    assert report["config"]["family"] == "gaussian"


def test_unknown_flag_is_usage_error(tmp_path):
    code, _, stderr = run_command(["coeffs", "--bogus", "--out", str(tmp_path)])
    assert code == 2
    assert stderr.startswith("UsageError:")


def test_missing_config(tmp_path):
    code, _, stderr = run_command(["rates", "--config", str(tmp_path / "missing.toml"),
                                   "--out", str(tmp_path)])
    assert code == 2
    assert "config not found" in stderr


def test_invalid_kernel_parameter(tmp_path):
    code, _, stderr = run_command(["coeffs", "--family", "nope", "--out", str(tmp_path)])
    assert code == 2
    assert stderr.startswith("InvalidFamily:")


def test_synthetic_besov(tmp_path):
    code, stdout, stderr = run_command(["besov", "--synthetic", "3", "0", "--r", "1", "3.5",
                                        "--out", str(tmp_path)])
    assert code == 0, stderr
    assert stdout.splitlines() == ["r=1.0: member", "r=3.5: non-member"]


def test_runs_are_deterministic(tmp_path):
    args = ["interpolate", "--family", "gaussian", "--sigma", "8", "--n", "2",
            "--generator", "uniform", "--count", "40", "--seed", "5"]
    outputs = []
    for name in ("first", "second"):
        out = tmp_path / name
        code, _, stderr = run_command(args + ["--out", str(out)])
        assert code == 0, stderr
        outputs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
    assert outputs[0] == outputs[1]
    assert "network.json" in outputs[0]


def test_bernstein_poly_positional_form(tmp_path):
    code, stdout, stderr = run_command(["frames", "--bernstein-poly", "1", "2", "1", "32",
                                        "--draws", "8", "--out", str(tmp_path)])
    assert code == 0, stderr
    assert stdout.startswith("bernstein slope=")
    rows = (tmp_path / "bernstein_poly.csv").read_text().splitlines()
    assert rows[0] == "L,max_ratio"
    assert [r.split(",")[0] for r in rows[1:]] == ["8", "16", "32"]
    report = json.loads((tmp_path / "frames.json").read_text())
    assert report["config"]["dim_n"] == 1
    assert report["config"]["gamma"] == 1.0


def test_bernstein_poly_needs_four_values(tmp_path):
    code, _, stderr = run_command(["frames", "--bernstein-poly", "1", "2", "--out", str(tmp_path)])
    assert code == 2
    assert stderr.startswith("UsageError:")
