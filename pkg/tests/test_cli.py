"""Command-line tests: every subcommand end to end, the exit-code
contract, and byte determinism of the file outputs."""

import json

import numpy as np
import pytest

from manolab.cli import run_cli


CONFIG_TEXT = """
# small linear-regression run used by the CLI tests
task = linreg
n_samples = 64
in_dim = 6
out_dim = 3
optimizer = mano
total_steps = 40
warmup_steps = 8
batch_size = 16
lr_max = 0.003
cadence = 10
snapshot_every = 10
seed = 0
"""


@pytest.fixture()
def config_path(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text(CONFIG_TEXT)
    return path


def _train(config_path, out):
    code = run_cli(["train", "--config", str(config_path), "--out", str(out)])
    assert code == 0
    return out


class TestTrain:
    def test_writes_trajectory_and_snapshots(self, config_path, tmp_path, capsys):
        out = _train(config_path, tmp_path / "run")
        assert (out / "trajectory.csv").is_file()
        snaps = sorted(p.name for p in (out / "snapshots").iterdir())
        assert snaps[0] == "step000000_layer0.weight.npz"
        assert "trajectory.csv" in capsys.readouterr().out

    def test_byte_deterministic(self, config_path, tmp_path):
        a = _train(config_path, tmp_path / "a")
        b = _train(config_path, tmp_path / "b")
        assert (a / "trajectory.csv").read_bytes() == (b / "trajectory.csv").read_bytes()

    def test_missing_config_exits_one_naming_path(self, tmp_path, capsys):
        code = run_cli(
            ["train", "--config", str(tmp_path / "ghost.cfg"), "--out", str(tmp_path)]
        )
        assert code == 1
        err = capsys.readouterr().err
        assert err.startswith("error:")
        assert "ghost.cfg" in err


class TestConverge:
    def test_bound_holds_and_csv_deterministic(self, tmp_path, capsys):
        args = ["converge", "--m", "8", "--steps", "50"]
        code = run_cli(args + ["--out", str(tmp_path / "a")])
        assert code == 0
        assert "HOLDS" in capsys.readouterr().out
        code = run_cli(args + ["--out", str(tmp_path / "b")])
        assert code == 0
        assert (
            (tmp_path / "a" / "convergence.csv").read_bytes()
            == (tmp_path / "b" / "convergence.csv").read_bytes()
        )

    def test_csv_header(self, tmp_path):
        run_cli(["converge", "--m", "6", "--steps", "20", "--out", str(tmp_path)])
        first = (tmp_path / "convergence.csv").read_text().splitlines()[0]
        assert first == "step,f,grad_norm,S_t,min_sin_phi"

    def test_stochastic_skips_bound(self, tmp_path, capsys):
        code = run_cli(
            ["converge", "--m", "6", "--steps", "20", "--stochastic",
             "--noise", "0.1", "--out", str(tmp_path)]
        )
        assert code == 0
        assert "skipped" in capsys.readouterr().out

    def test_rectangular_skips_bound(self, tmp_path, capsys):
        code = run_cli(
            ["converge", "--m", "6", "--n", "4", "--steps", "20",
             "--out", str(tmp_path)]
        )
        assert code == 0
        assert "skipped" in capsys.readouterr().out

    def test_softmax_objective_runs(self, tmp_path, capsys):
        code = run_cli(
            ["converge", "--objective", "softmax", "--m", "6", "--steps", "20",
             "--out", str(tmp_path)]
        )
        assert code == 0
        assert "bound" in capsys.readouterr().out


class TestBench:
    def test_json_stable_apart_from_timings(self, tmp_path, capsys):
        args = ["bench", "--shapes", "8,4x16", "--reps", "100", "--seed", "3"]
        assert run_cli(args + ["--out", str(tmp_path / "a")]) == 0
        assert run_cli(args + ["--out", str(tmp_path / "b")]) == 0
        timing_keys = {"mean_ns", "median_ns", "p95_ns"}

        def stripped(path):
            rows = json.loads(path.read_text())
            return [{k: v for k, v in r.items() if k not in timing_keys} for r in rows]

        assert stripped(tmp_path / "a" / "bench.json") == stripped(
            tmp_path / "b" / "bench.json"
        )
        out = capsys.readouterr().out
        assert "median" in out

    def test_kernel_filter(self, tmp_path):
        run_cli(
            ["bench", "--shapes", "8", "--reps", "100", "--kernels", "mano",
             "--out", str(tmp_path)]
        )
        rows = json.loads((tmp_path / "bench.json").read_text())
        assert [r["kernel"] for r in rows] == ["mano"]

    def test_bad_shape_list(self, tmp_path, capsys):
        code = run_cli(["bench", "--shapes", ",", "--out", str(tmp_path)])
        assert code == 1
        assert "error:" in capsys.readouterr().err


class TestSpectraAndGeodesic:
    @pytest.fixture()
    def snapshot_dir(self, config_path, tmp_path):
        out = _train(config_path, tmp_path / "run")
        return out / "snapshots"

    def test_spectra_output(self, snapshot_dir, tmp_path, capsys):
        code = run_cli(
            ["spectra", "--snapshots", str(snapshot_dir), "--out", str(tmp_path / "s")]
        )
        assert code == 0
        reports = json.loads((tmp_path / "s" / "spectra.json").read_text())
        assert len(reports) == 4  # steps 0,10,20,30 for the single weight
        assert reports[0]["layer"] == "layer0.weight"
        sig = reports[0]["sigma_update"]
        assert len(sig) == 3
        assert all(a >= b for a, b in zip(sig, sig[1:]))

    def test_spectra_deterministic(self, snapshot_dir, tmp_path):
        for name in ("a", "b"):
            run_cli(
                ["spectra", "--snapshots", str(snapshot_dir),
                 "--out", str(tmp_path / name)]
            )
        assert (
            (tmp_path / "a" / "spectra.json").read_bytes()
            == (tmp_path / "b" / "spectra.json").read_bytes()
        )

    def test_geodesic_output(self, snapshot_dir, tmp_path, capsys):
        code = run_cli(
            ["geodesic", "--snapshots", str(snapshot_dir), "--manifold", "oblique",
             "--out", str(tmp_path / "g")]
        )
        assert code == 0
        lines = (tmp_path / "g" / "geodesic.csv").read_text().strip().splitlines()
        assert lines[0] == "layer,pair_index,distance"
        assert len(lines) == 4  # three consecutive pairs
        assert "mean oblique distance" in capsys.readouterr().out

    def test_geodesic_deterministic(self, snapshot_dir, tmp_path):
        for name in ("a", "b"):
            run_cli(
                ["geodesic", "--snapshots", str(snapshot_dir), "--manifold",
                 "sphere", "--out", str(tmp_path / name)]
            )
        assert (
            (tmp_path / "a" / "geodesic.csv").read_bytes()
            == (tmp_path / "b" / "geodesic.csv").read_bytes()
        )

    def test_missing_snapshot_dir(self, tmp_path, capsys):
        code = run_cli(
            ["spectra", "--snapshots", str(tmp_path / "none"), "--out", str(tmp_path)]
        )
        assert code == 1
        assert "not found" in capsys.readouterr().err


class TestFlops:
    def test_prints_table(self, capsys):
        assert run_cli(["flops", "--m", "16", "--n", "8"]) == 0
        out = capsys.readouterr().out
        assert "1408" in out  # 11 * 16 * 8
        assert "mano/base" in out

    def test_optional_json(self, tmp_path):
        run_cli(["flops", "--m", "16", "--out", str(tmp_path)])
        row = json.loads((tmp_path / "flops.json").read_text())
        assert row["m"] == 16 and row["n"] == 16
        assert row["mano_flops"] == 11 * 256


class TestExitCodes:
    def test_help_is_zero(self, capsys):
        assert run_cli(["--help"]) == 0
        assert "train" in capsys.readouterr().out

    def test_unknown_command_is_one(self, capsys):
        assert run_cli(["orthogonalize"]) == 1

    def test_no_command_is_one(self, capsys):
        assert run_cli([]) == 1
