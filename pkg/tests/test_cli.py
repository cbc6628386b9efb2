"""Command-line interface tests: subcommands and exit-code mapping."""

import numpy as np
import pytest

import cqibeam.cli as cli
from cqibeam.errors import NumericalError

GOOD_CONFIG = (
    "n_antennas = 8\n"
    "n_ports = 4\n"
    "n_user = 2\n"
    "rounds = 4\n"
    "trials = 2\n"
    "codebook_size = 8\n"
    "eigen_profile = 4.0, 1.0\n"
    "methods = proposed, codeword\n"
)


@pytest.fixture
def config_path(tmp_path):
    path = tmp_path / "exp.cfg"
    path.write_text(GOOD_CONFIG, encoding="utf-8")
    return path


class TestSimulate:
    def test_success_writes_csv(self, config_path, tmp_path, capsys):
        out = tmp_path / "results.csv"
        rc = cli.main(["simulate", "--config", str(config_path),
                       "--out", str(out)])
        assert rc == 0
        assert out.exists()
        captured = capsys.readouterr()
        assert "proposed" in captured.out
        assert str(out) in captured.out

    def test_seed_override_changes_results(self, config_path, tmp_path,
                                           capsys):
        out_a = tmp_path / "a.csv"
        out_b = tmp_path / "b.csv"
        assert cli.main(["simulate", "--config", str(config_path),
                         "--seed", "1", "--out", str(out_a)]) == 0
        assert cli.main(["simulate", "--config", str(config_path),
                         "--seed", "2", "--out", str(out_b)]) == 0
        assert out_a.read_bytes() != out_b.read_bytes()
        capsys.readouterr()

    def test_unknown_key_exits_2(self, tmp_path, capsys):
        path = tmp_path / "bad.cfg"
        path.write_text("bandwidth = 20\n", encoding="utf-8")
        assert cli.main(["simulate", "--config", str(path)]) == 2
        assert "configuration error" in capsys.readouterr().err

    def test_invalid_value_exits_2(self, tmp_path, capsys):
        path = tmp_path / "bad.cfg"
        path.write_text("rounds = 0\n", encoding="utf-8")
        assert cli.main(["simulate", "--config", str(path)]) == 2
        capsys.readouterr()

    def test_missing_config_exits_4(self, tmp_path, capsys):
        missing = tmp_path / "nope.cfg"
        assert cli.main(["simulate", "--config", str(missing)]) == 4
        assert "I/O failure" in capsys.readouterr().err

    def test_numerical_failure_exits_3(self, config_path, monkeypatch,
                                       capsys):
        def boom(config):
            raise NumericalError("synthetic solver breakdown")
        monkeypatch.setattr(cli, "run_experiment", boom)
        assert cli.main(["simulate", "--config", str(config_path)]) == 3
        assert "numerical failure" in capsys.readouterr().err


class TestBetacheck:
    def test_smoke(self, capsys):
        rc = cli.main(["betacheck", "--antennas", "16", "--samples", "1000",
                       "--ports", "4", "--codebook", "16"])
        assert rc == 0
        out = capsys.readouterr().out
        assert "mismatch mean" in out
        assert "theory" in out

    def test_invalid_dimensions_exit_2(self, capsys):
        rc = cli.main(["betacheck", "--antennas", "4", "--ports", "16",
                       "--samples", "1000"])
        assert rc == 2
        capsys.readouterr()


class TestConvergence:
    def test_writes_trace(self, config_path, tmp_path, capsys):
        out = tmp_path / "trace.csv"
        rc = cli.main(["convergence", "--config", str(config_path),
                       "--out", str(out)])
        assert rc == 0
        lines = out.read_text(encoding="utf-8").strip().split("\n")
        assert lines[0] == "iteration,objective"
        assert len(lines) >= 2
        objectives = [float(row.split(",")[1]) for row in lines[1:]]
        assert np.all(np.diff(objectives) <= 1e-9)
        capsys.readouterr()

    def test_stdout_default(self, config_path, capsys):
        rc = cli.main(["convergence", "--config", str(config_path)])
        assert rc == 0
        assert capsys.readouterr().out.startswith("iteration,objective")
