import sys
import os
import json
from unittest.mock import MagicMock, patch

import numpy as np
import pytest

# Add parent directory to path for imports
sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..'))

import main
from src.czset.constrained_zonotope import ConstrainedZonotope, Zonotope
from src.czset.set_io import write_sets
from src.dcprog.enclosure import EnclosureKind
from src.harness.monte_carlo import RunMetrics
from src.utils.errors import ConfigError


def fake_results(violations=0):
    metrics = RunMetrics(t_cpu_ms=2.0, a_box=0.5, containment_violations=violations, empty_stages=0,
                         runs=1, steps=1, per_run_a_box=[0.5])
    summaries = [{"run": 0, "a_box": 0.5, "mean_step_ms": 2.0, "violations": violations, "empty_stages": 0}]
    return metrics, summaries


@pytest.fixture
def mock_run():
    with patch("main.run_monte_carlo") as run, patch("main.RunDiagnostics") as diag:
        run.return_value = fake_results()
        diag.return_value = MagicMock(get_report=MagicMock(return_value=None))
        yield run


def test_run_uses_benchmark_defaults(mock_run, tmp_path):
    out = tmp_path / "quad.csv"
    assert main.main(["run", "--example", "quad2d", "--out", str(out)]) == main.EXIT_OK
    run_cfg = mock_run.call_args[0][0]
    assert (run_cfg.steps, run_cfg.runs, run_cfg.phi_c, run_cfg.phi_g, run_cfg.seed) == (40, 100, 3, 8, 2021)
    assert run_cfg.enclosure_kind == EnclosureKind.PARALLELOTOPE and run_cfg.workers == 1

    with open(tmp_path / "quad.summary.json") as f:
        summary = json.load(f)
    assert summary["metrics"]["a_box"] == 0.5
    assert "| Verdict | PASS |" in (tmp_path / "quad.report.md").read_text()


def test_run_flags_override_defaults(mock_run, tmp_path):
    argv = ["run", "--example", "attitude", "--steps", "3", "--runs", "2", "--phi-c", "4", "--phi-g", "12",
            "--seed", "9", "--no-consistency", "--out", str(tmp_path / "a.csv")]
    assert main.main(argv) == main.EXIT_OK
    run_cfg = mock_run.call_args[0][0]
    assert (run_cfg.steps, run_cfg.runs, run_cfg.phi_c, run_cfg.phi_g, run_cfg.seed) == (3, 2, 4, 12, 9)
    assert not run_cfg.consistency_enabled
    assert run_cfg.stage_enclosure["forecast"] == "box"


def test_explicit_enclosure_applies_everywhere(mock_run, tmp_path):
    argv = ["run", "--example", "attitude", "--enclosure", "partope", "--out", str(tmp_path / "a.csv")]
    assert main.main(argv) == main.EXIT_OK
    run_cfg = mock_run.call_args[0][0]
    assert run_cfg.enclosure_kind == EnclosureKind.PARALLELOTOPE and run_cfg.stage_enclosure == {}


def test_failed_metrics_exit_code(mock_run, tmp_path):
    mock_run.return_value = fake_results(violations=2)
    assert main.main(["run", "--example", "quad2d", "--out", str(tmp_path / "q.csv")]) == main.EXIT_FAILED


def test_errors_exit_code(mock_run, tmp_path, capsys):
    mock_run.side_effect = ConfigError("bad run")
    assert main.main(["run", "--example", "quad2d", "--out", str(tmp_path / "q.csv")]) == main.EXIT_ERROR
    assert "[!] ConfigError: bad run" in capsys.readouterr().out


def test_invalid_steps_exit_code(mock_run):
    assert main.main(["run", "--example", "quad2d", "--steps", "0"]) == main.EXIT_ERROR
    mock_run.assert_not_called()


def test_targets_below_dimension_exit_code(mock_run, capsys):
    assert main.main(["run", "--example", "attitude", "--phi-g", "3"]) == main.EXIT_ERROR
    assert "[!] ConfigError: phi_g=3 is below the state dimension 4" in capsys.readouterr().out
    mock_run.assert_not_called()


def test_run_help_names_wall_clock_column(capsys):
    with pytest.raises(SystemExit):
        main.main(["run", "--help"])
    assert "stage_time_ms" in capsys.readouterr().out


def test_unknown_example_is_usage_error():
    with pytest.raises(SystemExit) as err:
        main.main(["run", "--example", "pendulum"])
    assert err.value.code == 2


def test_hull_command(tmp_path, capsys):
    path = tmp_path / "sets.txt"
    write_sets(path, [
        Zonotope(np.eye(2), [1.0, 0.0]),
        ConstrainedZonotope(np.eye(2), np.zeros(2), [[1.0, 1.0]], [1.0]),
    ])
    assert main.main(["hull", str(path)]) == main.EXIT_OK
    out = capsys.readouterr().out
    assert "[.] set 0 (n=2, n_g=2, n_h=0)" in out
    assert "[.] set 1 (n=2, n_g=2, n_h=1)" in out


def test_hull_missing_file():
    assert main.main(["hull", "/nonexistent/sets.txt"]) == main.EXIT_ERROR


def test_selftest_delegates():
    with patch("main.run_selftest", return_value=0) as selftest:
        assert main.main(["selftest"]) == 0
    selftest.assert_called_once()


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
