"""End-to-end CLI behavior: exit codes, overrides, echoed config."""

from __future__ import annotations

from floqlux.cli import main

MINIMAL = 'task = "static-spectrum"\n[grid]\nphi_dc = "0.48:0.52:3"\n'


def _write(tmp_path, text=MINIMAL, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_happy_path_exit_zero(tmp_path, capsys):
    cfg = _write(tmp_path)
    code = main(["static-spectrum", "--config", str(cfg),
                 "--out", str(tmp_path / "out")])
    assert code == 0
    out = capsys.readouterr().out
    assert 'task = "static-spectrum"' in out  # canonical echo
    assert "wrote" in out
    assert (tmp_path / "out" / "static-spectrum.csv").exists()


def test_missing_config_file(tmp_path, capsys):
    code = main(["floquet", "--config", str(tmp_path / "nope.cfg")])
    assert code == 1
    assert "nope.cfg" in capsys.readouterr().err


def test_config_error_exit_one(tmp_path, capsys):
    cfg = _write(tmp_path, 'task = "floquet"\n[gird]\nxi = "0"\n')
    assert main(["floquet", "--config", str(cfg)]) == 1
    assert "did you mean 'grid'" in capsys.readouterr().err


def test_task_mismatch_exit_one(tmp_path, capsys):
    cfg = _write(tmp_path)
    assert main(["floquet", "--config", str(cfg)]) == 1
    assert "static-spectrum" in capsys.readouterr().err


def test_bad_usage_exit_one(capsys):
    assert main(["static-spectrum"]) == 1  # --config is required
    assert main(["frobnicate", "--config", "x"]) == 1
    capsys.readouterr()


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0
    assert "static-spectrum" in capsys.readouterr().out


def test_overwrite_refusal_exit_three(tmp_path, capsys):
    cfg = _write(tmp_path)
    args = ["static-spectrum", "--config", str(cfg), "--out", str(tmp_path / "o")]
    assert main(args) == 0
    assert main(args) == 3
    assert "overwrite" in capsys.readouterr().err
    assert main(args + ["--overwrite"]) == 0


def test_partial_failure_exit_two(tmp_path, capsys):
    text = (
        'task = "ramsey"\n'
        "[grid]\nphi_dc = 0.451\nxi = 0.0855831\nomega = 0.7743211\n"
        "[ramsey]\nomega0 = 1.013950289332\nstep = 2e-9\n"
    )
    cfg = _write(tmp_path, text)
    code = main(["ramsey", "--config", str(cfg), "--out", str(tmp_path / "o")])
    assert code == 2
    err = capsys.readouterr().err
    assert "AliasingError" in err


def test_workers_env_fallback(tmp_path, monkeypatch, capsys):
    cfg = _write(tmp_path)
    monkeypatch.setenv("FF_WORKERS", "2")
    code = main(["static-spectrum", "--config", str(cfg),
                 "--out", str(tmp_path / "o")])
    assert code == 0
    assert "workers = 2" in capsys.readouterr().out

    monkeypatch.setenv("FF_WORKERS", "zero")
    assert main(["static-spectrum", "--config", str(cfg),
                 "--out", str(tmp_path / "o2")]) == 1


def test_workers_flag_beats_env(tmp_path, monkeypatch, capsys):
    cfg = _write(tmp_path)
    monkeypatch.setenv("FF_WORKERS", "4")
    code = main(["static-spectrum", "--config", str(cfg),
                 "--out", str(tmp_path / "o"), "--workers", "1"])
    assert code == 0
    assert "workers = 1" in capsys.readouterr().out


def test_format_override(tmp_path, capsys):
    cfg = _write(tmp_path)
    code = main(["static-spectrum", "--config", str(cfg),
                 "--out", str(tmp_path / "o"), "--format", "json"])
    assert code == 0
    assert (tmp_path / "o" / "static-spectrum.json").exists()
    assert not (tmp_path / "o" / "static-spectrum.csv").exists()
    capsys.readouterr()
