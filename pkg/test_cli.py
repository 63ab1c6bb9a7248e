"""
Signal files, parameter estimation and the command-line surface.
"""
import json

import numpy as np
import pytest
from click.testing import CliRunner
from scipy.integrate import trapezoid

import handlers.solve
import main as entry
from conftest import bumps
from core.config import load_config, validate_config
from core.grid import Grid, HVParams
from main import cli
from services.optimizer import SolveFailedError
from services.parameters import HeuristicInput, dataset_height, estimate_params
from utils.signal_io import SignalFormatError, load_signal, read_matrix, write_signal

FAST = ["--nt", "10", "--kmax", "1", "--max-iters", "5", "--kappa", "0.1", "--lambda", "0.01",
        "--epsilon", "0.001"]


@pytest.fixture
def signal_files(tmp_path):
    x = np.linspace(0.0, 1.0, 41)
    paths = []
    for i, center in enumerate((0.3, 0.45, 0.6)):
        path = tmp_path / f"s{i}.csv"
        write_signal(path, bumps(x, [center], [0.08], [1.0]))
        paths.append(path)
    return paths


@pytest.fixture
def quiet_env(tmp_path, monkeypatch):
    monkeypatch.setenv("HV_LOG_FILE", str(tmp_path / "hv.log"))
    monkeypatch.setenv("HV_OUTPUT_DIR", str(tmp_path / "out"))
    for name in ("HV_LOG_LEVEL", "HV_MAX_ITERS", "HV_KMAX", "HV_MAX_WORKERS"):
        monkeypatch.delenv(name, raising=False)


def test_load_signal_resamples(tmp_path):
    path = tmp_path / "peak.csv"
    path.write_text("# a single peak\n0\n0\n\n1\n0\n0\n", encoding="utf-8")
    signal = load_signal(path, 8)
    assert signal.shape == (9,)
    assert signal[4] == 1.0 and signal.argmax() == 4
    assert signal[0] == signal[-1] == 0.0


def test_two_column_signal_on_grid_nodes(tmp_path):
    x = np.linspace(0.0, 1.0, 11)
    values = np.sin(3 * x)
    path = tmp_path / "xy.csv"
    write_signal(path, values, x)
    assert np.array_equal(load_signal(path, 10), values)

    shifted = tmp_path / "shifted.csv"
    write_signal(shifted, values, 2.0 + 4.0 * x)
    assert np.allclose(load_signal(shifted, 10), values, atol=1e-12)


def test_signal_round_trip_is_bit_exact(tmp_path, rng):
    values = rng.normal(size=33)
    path = tmp_path / "noise.csv"
    write_signal(path, values)
    assert np.array_equal(load_signal(path, 32), values)


@pytest.mark.parametrize("text, line", [
    ("1\n2\nabc\n4\n5\n", 3),
    ("0,1\n0.5,2\n1,3,4\n", 3),
    ("1\n2\n3\ninf\n5\n", 4),
])
def test_malformed_rows_name_their_line(tmp_path, text, line):
    path = tmp_path / "bad.csv"
    path.write_text(text, encoding="utf-8")
    with pytest.raises(SignalFormatError) as info:
        load_signal(path, 8)
    assert info.value.line == line
    assert f"bad.csv:{line}" in str(info.value)


def test_short_and_unordered_signals_rejected(tmp_path):
    short = tmp_path / "short.csv"
    short.write_text("1\n2\n3\n4\n", encoding="utf-8")
    with pytest.raises(SignalFormatError):
        load_signal(short, 8)

    unordered = tmp_path / "unordered.csv"
    unordered.write_text("0,1\n0.2,1\n0.2,2\n0.6,1\n1,0\n", encoding="utf-8")
    with pytest.raises(SignalFormatError):
        load_signal(unordered, 8)


def test_estimate_params():
    assert estimate_params(HeuristicInput(H=1.0, W=1.0, L=1.0)) == HVParams(0.01, 0.02, 0.2)
    ecg = estimate_params(HeuristicInput(H=300.0, W=0.1, L=0.1))
    assert ecg.kappa == pytest.approx(90000.0)
    assert ecg.lambda_ == pytest.approx(1800.0)
    assert ecg.epsilon == pytest.approx(180.0)


def test_dataset_height_is_mean_pairwise_distance(smooth_signal):
    grid = Grid(nx=50, nt=1)
    signals = [smooth_signal(grid, count=2) for _ in range(4)]
    n = len(signals)
    pairwise = sum(
        trapezoid((a - b) ** 2, dx=grid.dx) for a in signals for b in signals
    ) / n**2
    assert dataset_height(signals, grid) == pytest.approx(np.sqrt(pairwise), rel=1e-10)


def test_distance_between_identical_files(quiet_env, signal_files):
    a = signal_files[0]
    result = CliRunner().invoke(cli, ["distance", "--f0", str(a), "--f1", str(a), *FAST])
    assert result.exit_code == 0, result.output
    assert result.output.strip() == "0"


def test_solve_writes_fields_and_report(quiet_env, signal_files, tmp_path):
    a = signal_files[0]
    out = tmp_path / "geodesic"
    result = CliRunner().invoke(cli, ["solve", "--f0", str(a), "--f1", str(a), "--out", str(out), *FAST])
    assert result.exit_code == 0, result.output

    report = json.loads((out / "report.json").read_text(encoding="utf-8"))
    assert report["converged"] and report["iterations"] == 1
    assert report["distance"] == 0.0
    assert report["grid"] == {"nx": 40, "nt": 10}
    assert report["bounds"]["jac_ok"]
    for name in ("f", "v", "z"):
        assert read_matrix(out / f"{name}.csv").shape == (11, 41)


def test_distance_matrix_is_symmetric(quiet_env, signal_files, tmp_path):
    out = tmp_path / "matrix"
    args = ["distance-matrix", *map(str, signal_files), "--out", str(out), "--workers", "2", *FAST]
    result = CliRunner().invoke(cli, args)
    assert result.exit_code == 0, result.output

    matrix = read_matrix(out / "distances.csv")
    assert matrix.shape == (3, 3)
    assert np.array_equal(matrix, matrix.T)
    assert np.all(np.diag(matrix) == 0.0)
    assert np.all(matrix[np.triu_indices(3, 1)] > 0)


def test_demo_degeneracy_table(quiet_env):
    result = CliRunner().invoke(cli, ["demo-degeneracy", "--H", "23", "--s", "0.1", "--lambda", "1"])
    assert result.exit_code == 0, result.output
    assert "competitor < linear" in result.output
    assert "halving:" in result.output and "(decrease)" in result.output


def test_estimate_params_command(quiet_env):
    result = CliRunner().invoke(cli, ["estimate-params", "--H", "300", "--W", "0.1", "--L", "0.1"])
    assert result.exit_code == 0, result.output
    weights = json.loads(result.output.strip().splitlines()[-1])
    assert weights["kappa"] == pytest.approx(90000.0)
    assert weights["lambda"] == pytest.approx(1800.0)
    assert weights["epsilon"] == pytest.approx(180.0)


def test_estimate_params_from_dataset(quiet_env, signal_files):
    args = ["estimate-params", "--W", "0.1", "--L", "0.2"]
    for path in signal_files:
        args += ["--dataset", str(path)]
    result = CliRunner().invoke(cli, args)
    assert result.exit_code == 0, result.output
    assert json.loads(result.output.strip().splitlines()[-1])["H"] > 0


def test_frames_at_requested_times(quiet_env, signal_files, tmp_path):
    a, b = signal_files[:2]
    out = tmp_path / "frames"
    args = ["frames", "--f0", str(a), "--f1", str(b), "--out", str(out),
            "--times", "0", "--times", "0.5", "--times", "1", *FAST]
    result = CliRunner().invoke(cli, args)
    assert result.exit_code == 0, result.output

    frames = read_matrix(out / "frames.csv")
    assert frames.shape == (3, 42)
    assert frames[:, 0].tolist() == [0.0, 0.5, 1.0]
    assert np.allclose(frames[0, 1:], load_signal(a, 40), rtol=0, atol=1e-12)
    assert np.allclose(frames[-1, 1:], load_signal(b, 40), rtol=0, atol=1e-12)


def test_exit_codes(quiet_env, signal_files, tmp_path, monkeypatch):
    a = str(signal_files[0])
    missing = str(tmp_path / "nowhere.csv")
    assert entry.main(["distance", "--f0", missing, "--f1", a, *FAST]) == entry.EXIT_IO
    assert entry.main(["distance", "--f0", a, "--f1", a, "--nt", "10"]) == entry.EXIT_USAGE
    assert entry.main(["bogus"]) == entry.EXIT_USAGE

    def failing(*args, **kwargs):
        raise SolveFailedError({"k=0": "trajectories cross"})

    monkeypatch.setattr(handlers.solve, "solve", failing)
    assert entry.main(["distance", "--f0", a, "--f1", a, *FAST]) == entry.EXIT_SOLVER


def test_degenerate_metric_is_a_usage_error(quiet_env, signal_files):
    a = str(signal_files[0])
    args = ["distance", "--f0", a, "--f1", a, "--kappa", "1", "--epsilon", "0"]
    assert entry.main(args) == entry.EXIT_USAGE


def test_config_validation(monkeypatch):
    monkeypatch.setenv("HV_LOG_LEVEL", "loud")
    assert not validate_config(load_config())

    monkeypatch.setenv("HV_LOG_LEVEL", "debug")
    monkeypatch.setenv("HV_MAX_ITERS", "0")
    config = load_config()
    assert validate_config(config)
    assert config["HV_MAX_ITERS"] == 200 and config["HV_LOG_LEVEL"] == "DEBUG"
