"""Config parsing, validation messages, and canonical emission."""

from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from floqlux import ConfigError, GridSpec, RunConfig, emit_config, parse_config

MINIMAL = 'task = "static-spectrum"\n'

FULL = """
# run plan for a driven coherence map
task = "coherence"
output = "runs/cmap"
workers = 4
format = "json"
overwrite = true

[circuit]
e_c = 1.17
e_j = 2.65
e_l = 0.54

[grid]
phi_dc = 0.451
xi = "0:0.12:13"          # linspace range
omega = [0.7, 0.75, 0.8]

[noise]
a_dc = 7.5e-6
a_ac = 6e-6
tan_delta_c = 2.8e-6
temperature = 0.085
"""


def test_minimal_config_fills_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.task == "static-spectrum"
    assert cfg.grid == GridSpec()
    assert cfg.workers == 1
    assert cfg.format == "csv"
    assert cfg.circuit.e_c == 1.17


def test_full_config_values():
    cfg = parse_config(FULL)
    assert cfg.task == "coherence"
    assert cfg.workers == 4
    assert cfg.overwrite is True
    assert len(cfg.grid.xi) == 13
    assert cfg.grid.xi[0] == 0.0
    assert cfg.grid.xi[-1] == pytest.approx(0.12)
    assert cfg.grid.omega == (0.7, 0.75, 0.8)
    assert cfg.noise.temperature == 0.085


def test_roundtrip_equality():
    for text in (MINIMAL, FULL):
        cfg = parse_config(text)
        again = parse_config(emit_config(cfg))
        assert again == cfg
        # emission is a fixed point
        assert emit_config(again) == emit_config(cfg)


def test_physics_only_drops_execution_keys():
    a = parse_config(FULL)
    b = parse_config(emit_config(a).replace('workers = 4', 'workers = 9'))
    assert emit_config(a, physics_only=True) == emit_config(b, physics_only=True)
    assert "output" not in emit_config(a, physics_only=True)


def test_unknown_key_suggestion():
    with pytest.raises(ConfigError, match=r"line 3.*'xii'.*did you mean 'xi'"):
        parse_config('task = "floquet"\n[grid]\nxii = 0.1\n')


def test_unknown_section_suggestion():
    with pytest.raises(ConfigError, match=r"unknown section \[gird\]; did you mean \'grid\'"):
        parse_config('task = "floquet"\n[gird]\nphi_dc = 0.5\n')


def test_duplicate_key_rejected():
    with pytest.raises(ConfigError, match="duplicate"):
        parse_config('task = "floquet"\n[grid]\nxi = 0.1\nxi = 0.2\n')


def test_missing_value_position():
    with pytest.raises(ConfigError, match="line 3, column 9"):
        parse_config('task = "floquet"\n[grid]\nphi_dc =\n')


def test_missing_task_has_no_position():
    with pytest.raises(ConfigError, match=r"^missing required key 'task'$"):
        parse_config("[grid]\nphi_dc = 0.5\n")


def test_unknown_task_lists_choices():
    with pytest.raises(ConfigError, match="ramsey"):
        parse_config('task = "quasiblorp"\n')


def test_bad_number_reported_with_position():
    with pytest.raises(ConfigError, match="line 3"):
        parse_config('task = "floquet"\n[circuit]\ne_c = fast\n')


def test_bad_workers_rejected():
    with pytest.raises(ConfigError, match="workers"):
        parse_config('task = "floquet"\nworkers = 0\n')


def test_bad_format_rejected():
    with pytest.raises(ConfigError, match="format"):
        parse_config('task = "floquet"\nformat = "xml"\n')


def test_empty_grid_axis_rejected():
    with pytest.raises(ConfigError, match="non-empty"):
        parse_config('task = "floquet"\n[grid]\nxi = []\n')


def test_comment_inside_quoted_string_preserved():
    cfg = parse_config('task = "floquet"\noutput = "runs/#7"  # real comment\n')
    assert cfg.output == "runs/#7"


def test_linspace_endpoints_exact():
    cfg = parse_config('task = "floquet"\n[grid]\nomega = "0.2:0.8:4"\n')
    assert cfg.grid.omega[0] == 0.2
    assert cfg.grid.omega[-1] == 0.8
    assert len(cfg.grid.omega) == 4


@settings(max_examples=30, deadline=None)
@given(
    workers=st.integers(1, 32),
    xi=st.lists(st.floats(0, 0.2, allow_nan=False), min_size=1, max_size=5),
    fmt=st.sampled_from(["csv", "json", "plotdata"]),
)
def test_emit_parse_roundtrip_random(workers, xi, fmt):
    cfg = RunConfig(task="floquet", grid=GridSpec(xi=tuple(xi)),
                    workers=workers, format=fmt)
    assert parse_config(emit_config(cfg)) == cfg
