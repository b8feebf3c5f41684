"""End-to-end tests of the command-line front end (in-process)."""

from __future__ import annotations

from textwrap import dedent

import pytest

from caccsim.cli import main
from caccsim.gaintable import load_table


@pytest.fixture(scope="module")
def cli_env(tmp_path_factory):
    """Config files plus a small table built through the CLI itself."""
    root = tmp_path_factory.mktemp("cli")

    def write(name, text):
        path = root / name
        path.write_text(dedent(text), encoding="utf-8")
        return str(path)

    env = {
        "root": root,
        "axes": write(
            "axes.ini",
            """
            [axes]
            dr = 10,20
            vi = 10,14
            vj = 10,14
            """,
        ),
        "candidates": write(
            "candidates.ini",
            """
            [candidates]
            gamma = 2,5
            k = 0.1
            """,
        ),
        "build": write(
            "build.ini",
            """
            [build]
            t_max = 60
            """,
        ),
        "run_short": write(
            "run_short.ini",
            """
            [build]
            t_max = 20
            """,
        ),
        "same_lane": write(
            "same_lane.ini",
            """
            [build]
            safety_mode = same_lane
            """,
        ),
        "baselines": write(
            "baselines.ini",
            """
            [fixed_consensus]
            gamma = 1.0
            k = 0.1

            [linear_feedback]
            k_a = 1.0
            k_v = 0.58
            k_d = 0.1
            standstill_gap = 1.0
            """,
        ),
        "scenario_hit": write(
            "scenario_hit.ini",
            """
            [scenario]
            id = hit
            dr0 = 20
            vi0 = 14
            vj0 = 14
            duration = 60
            controller = lookup
            """,
        ),
        "scenario_unsafe": write(
            "scenario_unsafe.ini",
            """
            [scenario]
            id = cutin
            dr0 = -30
            vi0 = 18
            vj0 = 10
            duration = 10
            controller = fixed_consensus

            [controller_params]
            gamma = 5.0
            k = 0.1
            """,
        ),
        "table": str(root / "table.txt"),
    }

    rc = main([
        "build-table",
        "--axes", env["axes"],
        "--candidates", env["candidates"],
        "--config", env["build"],
        "--out", env["table"],
    ])
    assert rc == 0
    return env


def test_build_table_output(cli_env, capsys):
    rc = main([
        "build-table",
        "--axes", cli_env["axes"],
        "--candidates", cli_env["candidates"],
        "--config", cli_env["build"],
        "--out", str(cli_env["root"] / "rebuild.txt"),
    ])
    out = capsys.readouterr().out
    assert rc == 0
    assert "built 8 cells" in out
    assert "8 valid" in out


def test_build_table_workers_flag_gives_identical_bytes(cli_env):
    out2 = cli_env["root"] / "parallel.txt"
    rc = main([
        "build-table",
        "--axes", cli_env["axes"],
        "--candidates", cli_env["candidates"],
        "--config", cli_env["build"],
        "--out", str(out2),
        "--workers", "2",
    ])
    assert rc == 0
    serial = (cli_env["root"] / "table.txt").read_bytes()
    assert out2.read_bytes() == serial


def test_inspect_table_summary(cli_env, capsys):
    rc = main(["inspect-table", cli_env["table"]])
    out = capsys.readouterr().out
    assert rc == 0
    assert "gain table 2x2x2 (8 cells, 8 valid)" in out
    assert "tie rule:" in out
    assert "dr axis (m): 10, 20" in out


def test_inspect_table_cell_peek(cli_env, capsys):
    rc = main(["inspect-table", cli_env["table"], "--cell", "1", "1", "1"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "cell (1, 1, 1)" in out
    assert "gamma=5" in out


def test_inspect_table_cell_out_of_bounds(cli_env, capsys):
    rc = main(["inspect-table", cli_env["table"], "--cell", "9", "0", "0"])
    err = capsys.readouterr().err
    assert rc == 2
    assert "outside" in err


def test_run_lookup_hit(cli_env, capsys):
    out_dir = cli_env["root"] / "run_hit"
    rc = main([
        "run",
        "--scenario", cli_env["scenario_hit"],
        "--config", cli_env["build"],
        "--table", cli_env["table"],
        "--out-dir", str(out_dir),
    ])
    out = capsys.readouterr().out
    assert rc == 0
    assert "scenario hit: controller=lookup fallback=no" in out
    assert "gains: gamma=5 k=0.1" in out
    assert (out_dir / "hit_lookup.csv").exists()


def test_run_safety_violation_fails(cli_env, capsys):
    out_dir = cli_env["root"] / "run_unsafe"
    rc = main([
        "run",
        "--scenario", cli_env["scenario_unsafe"],
        "--config", cli_env["same_lane"],
        "--out-dir", str(out_dir),
    ])
    captured = capsys.readouterr()
    assert rc == 1
    assert "safety violated: yes" in captured.out
    assert "allow-unsafe" in captured.err
    assert (out_dir / "cutin_fixed_consensus.csv").exists()


def test_run_allow_unsafe_overrides_exit_code(cli_env, capsys):
    out_dir = cli_env["root"] / "run_unsafe_ok"
    rc = main([
        "run",
        "--scenario", cli_env["scenario_unsafe"],
        "--config", cli_env["same_lane"],
        "--out-dir", str(out_dir),
        "--allow-unsafe",
    ])
    captured = capsys.readouterr()
    assert rc == 0
    assert "safety violated: yes" in captured.out


def test_run_lookup_without_table_raises(cli_env, tmp_path):
    with pytest.raises(ValueError, match="table"):
        main([
            "run",
            "--scenario", cli_env["scenario_hit"],
            "--config", cli_env["build"],
            "--out-dir", str(tmp_path / "x"),
        ])


def test_suite_writes_reports(cli_env, capsys):
    out_dir = cli_env["root"] / "suite"
    rc = main([
        "suite",
        "--table", cli_env["table"],
        "--config", cli_env["run_short"],
        "--baselines", cli_env["baselines"],
        "--out-dir", str(out_dir),
    ])
    out = capsys.readouterr().out
    assert rc == 0
    assert "benchmark suite summary" in out
    assert (out_dir / "comparison.csv").exists()
    assert (out_dir / "summary.txt").exists()
    csvs = sorted(p.name for p in out_dir.glob("scenario*_*.csv"))
    assert len(csvs) == 12


def test_stability_explicit_pair(capsys):
    rc = main(["stability", "--gamma", "3", "--k", "0.1"])
    out = capsys.readouterr().out
    assert rc == 0
    assert "max|G|=" in out
    assert "stable" in out


def test_stability_unstable_pair(capsys):
    rc = main(["stability", "--gamma", "1", "--k", "1.2"])
    out = capsys.readouterr().out
    assert rc == 1
    assert "UNSTABLE" in out


def test_stability_table_mode(cli_env, capsys):
    rc = main(["stability", "--table", cli_env["table"]])
    out = capsys.readouterr().out
    assert rc == 0
    assert "distinct stored gain pairs" in out
    assert "all stable" in out


def test_stability_requires_arguments(capsys):
    rc = main(["stability"])
    err = capsys.readouterr().err
    assert rc == 2
    assert "--gamma" in err


def test_missing_subcommand_is_usage_error():
    with pytest.raises(SystemExit):
        main([])
