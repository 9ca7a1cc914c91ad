"""Sweep orchestration: determinism, caching, exports, failure masking."""

from __future__ import annotations

import dataclasses
import json
from pathlib import Path

import numpy as np
import pytest

from floqlux import (
    CircuitParams,
    ConfigError,
    ExportError,
    FluxBias,
    GridSpec,
    PolaritonSpec,
    ProbeSpec,
    RamseySpec,
    RunConfig,
    config_hash,
    diagonalize_static,
    export,
    import_result,
    parse_config,
    run_sweep,
)


@pytest.fixture()
def small_cfg(tmp_path):
    return RunConfig(
        task="floquet",
        grid=GridSpec(phi_dc=(0.48, 0.5), xi=(0.0, 0.04), omega=(0.4,)),
        output=str(tmp_path / "out"),
    )


def test_row_order_and_axis_columns(small_cfg):
    res = run_sweep(small_cfg)
    assert res.axis_names == ("phi_dc", "xi", "omega")
    assert res.rows.shape[0] == small_cfg.grid.size
    # lexicographic over (phi_dc, xi, omega)
    want = [(0.48, 0.0), (0.48, 0.04), (0.5, 0.0), (0.5, 0.04)]
    got = [tuple(r) for r in res.rows[:, :2]]
    assert got == want
    assert not res.mask.any()


def test_single_cell_matches_direct_call(tmp_path, params):
    cfg = RunConfig(task="static-spectrum", grid=GridSpec(phi_dc=(0.47,)),
                    output=str(tmp_path / "o"))
    res = run_sweep(cfg)
    spec = diagonalize_static(params, FluxBias(0.47))
    assert res.column("f01")[0] == pytest.approx(spec.transition(0, 1), abs=1e-15)
    assert res.column("n01_abs")[0] == pytest.approx(abs(spec.n_elements[0, 1]), abs=1e-15)


def test_worker_count_invariance(small_cfg, tmp_path):
    a = dataclasses.replace(small_cfg, output=str(tmp_path / "w1"), workers=1)
    b = dataclasses.replace(small_cfg, output=str(tmp_path / "w3"), workers=3)
    ra, rb = run_sweep(a), run_sweep(b)
    assert ra == rb
    for fmt in ("csv", "json", "plotdata"):
        pa = export(ra, tmp_path / "ea", fmt)[0].read_bytes()
        pb = export(rb, tmp_path / "eb", fmt)[0].read_bytes()
        assert pa == pb


def test_cache_resumability(small_cfg):
    first = run_sweep(small_cfg)
    assert np.all(first.timings > 0)
    second = run_sweep(small_cfg)
    assert second == first
    assert np.all(second.timings == 0)  # every cell came from cache


def test_cache_partial_invalidation(small_cfg, tmp_path):
    first = run_sweep(small_cfg)
    cells = sorted((tmp_path / "out" / ".cells").rglob("*.json"))
    assert len(cells) == small_cfg.grid.size
    cells[2].unlink()
    again = run_sweep(small_cfg)
    assert again == first
    assert int(np.count_nonzero(again.timings)) == 1  # only the evicted cell


def test_corrupt_cache_recomputed(small_cfg):
    first = run_sweep(small_cfg)
    cells = sorted((Path(small_cfg.output) / ".cells").rglob("*.json"))
    cells[0].write_text("{not json")
    again = run_sweep(small_cfg)
    assert again == first


def test_config_hash_ignores_execution_keys(small_cfg):
    other = dataclasses.replace(small_cfg, output="elsewhere", workers=7,
                                format="json", overwrite=True)
    assert config_hash(other) == config_hash(small_cfg)
    physics = dataclasses.replace(small_cfg, grid=GridSpec(phi_dc=(0.49,)))
    assert config_hash(physics) != config_hash(small_cfg)


def test_csv_layout(small_cfg, tmp_path):
    res = run_sweep(small_cfg)
    path = export(res, tmp_path / "csv", "csv")[0]
    lines = path.read_text().splitlines()
    assert len(lines) == small_cfg.grid.size + 2
    header = lines[0].split(",")
    assert header[:3] == ["phi_dc", "xi", "omega"]
    assert header[-1] == "mask"
    units = lines[1].split(",")
    assert units[0] == "Phi0" and units[-1] == "bool"
    assert all(len(line.split(",")) == len(header) for line in lines[2:])


def test_json_roundtrip(small_cfg, tmp_path):
    res = run_sweep(small_cfg)
    path = export(res, tmp_path / "json", "json")[0]
    assert import_result(path) == res
    doc = json.loads(path.read_text())
    assert doc["schema_version"] == res.schema_version


def test_plotdata_long_form(small_cfg, tmp_path):
    res = run_sweep(small_cfg)
    path = export(res, tmp_path / "plot", "plotdata")[0]
    lines = path.read_text().splitlines()
    assert lines[0] == "x,y,value,series"
    assert len(lines) == 1 + len(res.columns) * res.rows.shape[0]
    series = {line.split(",")[3] for line in lines[1:]}
    # the third axis is folded into the series labels
    assert any("omega=" in s for s in series)


def test_export_overwrite_refusal(small_cfg, tmp_path):
    res = run_sweep(small_cfg)
    export(res, tmp_path / "once", "csv")
    with pytest.raises(ExportError, match="overwrite"):
        export(res, tmp_path / "once", "csv")
    export(res, tmp_path / "once", "csv", overwrite=True)


def test_masked_failure_rows(tmp_path):
    # a step too coarse for the beat leaves that cell masked with a reason
    cfg = RunConfig(
        task="ramsey",
        grid=GridSpec(phi_dc=(0.451,), xi=(0.0855831,), omega=(0.7743211,)),
        ramsey=RamseySpec(omega0=1.013950289332, step=2e-9),
        output=str(tmp_path / "o"),
    )
    res = run_sweep(cfg)
    assert res.mask[0]
    assert "AliasingError" in res.reasons[0]
    assert np.all(np.isnan(res.rows[0, 3:]))
    # masked cells are not cached: the rerun recomputes them
    again = run_sweep(cfg)
    assert again.timings[0] > 0
    path = export(res, tmp_path / "e", "csv")[0]
    assert path.read_text().splitlines()[2].endswith(",1")


def test_ramsey_grid_validation(tmp_path):
    cfg = RunConfig(task="ramsey", grid=GridSpec(phi_dc=(0.45, 0.5)),
                    output=str(tmp_path / "o"))
    with pytest.raises(ConfigError, match="single drive point"):
        run_sweep(cfg)


def test_spectroscopy_grid_validation(tmp_path):
    cfg = RunConfig(task="spectroscopy",
                    grid=GridSpec(phi_dc=(0.45, 0.5), xi=(0.0, 0.1), omega=(0.5,)),
                    output=str(tmp_path / "o"))
    with pytest.raises(ConfigError, match="grid xi"):
        run_sweep(cfg)


def test_polariton_level_validation(tmp_path):
    cfg = RunConfig(task="polariton", circuit=CircuitParams(n_levels=3),
                    output=str(tmp_path / "o"))
    with pytest.raises(ConfigError, match="n_levels"):
        run_sweep(cfg)


def test_polariton_missing_data_file(tmp_path):
    cfg = RunConfig(task="polariton",
                    polariton=PolaritonSpec(data_file=str(tmp_path / "absent.txt")),
                    output=str(tmp_path / "o"))
    with pytest.raises(ConfigError, match="not found"):
        run_sweep(cfg)


def test_spectroscopy_axes_and_extra(tmp_path):
    cfg = RunConfig(
        task="spectroscopy",
        grid=GridSpec(phi_dc=(0.49, 0.5), xi=(0.0,), omega=(0.5,)),
        probe=ProbeSpec(omega_p=(0.70, 0.72, 0.74), sweep="phi_dc"),
        output=str(tmp_path / "o"),
    )
    res = run_sweep(cfg)
    assert res.axis_names == ("phi_dc", "omega_p")
    assert res.rows.shape == (6, 3)
    assert res.extra["fixed"] == {"xi": 0.0, "omega": 0.5}
    assert len(res.extra["branches"]["points"]) == 2
    assert np.all((res.column("p1") >= 0) & (res.column("p1") <= 1))


def test_every_task_runs_with_defaults(tmp_path):
    # validation completeness: all-defaults config plus required sections
    for task in ("static-spectrum", "floquet", "spectral-function", "polariton",
                 "coherence", "sweetspot", "ramsey"):
        cfg = parse_config(f'task = "{task}"\n')
        cfg = dataclasses.replace(cfg, output=str(tmp_path / task))
        res = run_sweep(cfg)
        assert res.rows.shape[0] >= 1
        assert not res.mask.any(), (task, res.reasons)


def test_spectroscopy_runs_with_defaults_small_probe(tmp_path):
    cfg = parse_config(
        'task = "spectroscopy"\n[probe]\nomega_p = "0.6:0.9:4"\n')
    cfg = dataclasses.replace(cfg, output=str(tmp_path / "sp"))
    res = run_sweep(cfg)
    assert res.rows.shape == (4, 3)
    assert not res.mask.any()
