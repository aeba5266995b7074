"""Command-line behavior: exit codes, written files, printed paths."""

from pathlib import Path

import pytest

from splitbell_plots.cli import main

DATA = Path(__file__).parent / "data"


def test_sweep_curves_with_exact_overlay(tmp_path, capsys):
    out = tmp_path / "fig"
    rc = main(
        [
            "sweep-curves",
            str(DATA / "sweep_default.csv"),
            "--exact",
            str(DATA / "exact_default.csv"),
            "--output",
            str(out),
        ]
    )
    assert rc == 0
    printed = capsys.readouterr().out.splitlines()
    assert printed == [str(out) + ".png", str(out) + ".svg"]
    for path in printed:
        assert Path(path).stat().st_size > 0


def test_sector_heatmap_renders(tmp_path, capsys):
    out = tmp_path / "sectors.png"
    rc = main(["sector-heatmap", str(DATA / "probs_default.csv"), "--output", str(out)])
    assert rc == 0
    assert capsys.readouterr().out.splitlines() == [str(out)]
    assert out.stat().st_size > 0


def test_format_flag_restricts_output(tmp_path, capsys):
    out = tmp_path / "fig"
    rc = main(
        [
            "sweep-curves",
            str(DATA / "sweep_default.csv"),
            "--output",
            str(out),
            "--format",
            "svg",
        ]
    )
    assert rc == 0
    assert capsys.readouterr().out.splitlines() == [str(out) + ".svg"]
    assert list(tmp_path.iterdir()) == [tmp_path / "fig.svg"]


def test_missing_input_file_exits_one(tmp_path, capsys):
    rc = main(["sweep-curves", str(tmp_path / "absent.csv"), "--output", str(tmp_path / "x")])
    assert rc == 1
    assert "error:" in capsys.readouterr().err


def test_wrong_schema_exits_one(tmp_path, capsys):
    rc = main(
        [
            "sweep-curves",
            str(DATA / "probs_default.csv"),
            "--output",
            str(tmp_path / "x"),
        ]
    )
    assert rc == 1
    assert "header mismatch" in capsys.readouterr().err


def test_no_arguments_is_a_usage_error():
    with pytest.raises(SystemExit) as excinfo:
        main([])
    assert excinfo.value.code == 2


def test_unknown_format_is_a_usage_error(tmp_path):
    with pytest.raises(SystemExit) as excinfo:
        main(
            [
                "sweep-curves",
                str(DATA / "sweep_default.csv"),
                "--output",
                str(tmp_path / "x"),
                "--format",
                "pdf",
            ]
        )
    assert excinfo.value.code == 2
