import filecmp
import math
import os

import pytest

from grainspec import cli
from grainspec.config import SCHEMA, ConfigError, load_config, parse_config
from grainspec.discretize import GridError
from grainspec.eigensolve import ConvergenceError, FactorizationError
from grainspec.experiments import ConstructionError, DecouplingError, FlowError
from grainspec.io import INCOMPLETE, SCHEMAS, ResultTable, TableWriter, format_value, read_table
from grainspec.muffin import CutDiscError, MuffinError

CONFIGS = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "configs")
MINIMAL = "potential = cosine\nA = 30\nh = 1/32\nn = 4\n"

# one out-of-range value for every key that carries a load-time check
BAD_VALUES = {
    "A": "-1", "profile_r": "0.7", "profile_w": "0", "h": "0.3", "n": "0",
    "momentum_grid": "4", "flow_n": "0", "t_steps": "8", "energies": "0",
    "thetas": "0.1, 2", "eps": "-1", "m_max": "0", "aef_n": "1",
    "scaling_theta": "2", "n_list": "6, 4, 8", "width_fraction": "1.5",
    "align_theta": "0", "align_t": "1", "align_eps": "1.5", "nu": "0", "horizon": "2",
    "localize_n": "1", "localize_theta": "0", "localize_boxes": "8, 1",
    "r": "0.5", "theta": "1.2", "tan_theta": "3/2", "y_max": "0",
    "heights": "10, 5", "box_h": "0.3", "gap_index": "0",
    "barrier_heights": "100, 10", "decouple_r": "0", "decouple_tan": "2",
    "decouple_n": "0", "decouple_h": "0.3", "workers": "0",
}


def _config(extra="", subcommand=None):
    return parse_config(MINIMAL + extra, subcommand=subcommand)


def test_minimal_config_parses():
    cfg = _config()
    assert cfg["A"] == 30 and float(cfg["h"]) == 1 / 32 and cfg["n"] == 4
    assert cfg["momentum_grid"] == 16


def test_mesh_rule_error():
    with pytest.raises(ConfigError) as err:
        parse_config(MINIMAL.replace("1/32", "0.3"))
    assert "mesh rule" in str(err.value) and "line 3" in str(err.value)


def test_duplicate_key_lists_both_lines():
    with pytest.raises(ConfigError) as err:
        parse_config(MINIMAL + "A = 20\n")
    assert "line 5" in str(err.value) and "line 2" in str(err.value)


def test_unknown_key_and_section():
    with pytest.raises(ConfigError) as err:
        parse_config(MINIMAL + "colour = blue\n[nowhere]\n")
    assert len(err.value.errors) == 2


def test_all_errors_are_collected():
    text = "potential = cosine\nh = 0.3\nn = 0\nbogus = 1\n"
    with pytest.raises(ConfigError) as err:
        parse_config(text)
    joined = "\n".join(err.value.errors)
    for needle in ("mesh rule", "n must be", "bogus", "missing required key 'A'"):
        assert needle in joined


def test_wrong_section_is_rejected():
    with pytest.raises(ConfigError, match="belongs to section"):
        parse_config(MINIMAL + "[muffin]\nmomentum_grid = 16\n")


@pytest.mark.parametrize("key", sorted(k for k, spec in SCHEMA.items() if spec[3]))
def test_precondition_audit(key):
    assert key in BAD_VALUES, f"no bad value recorded for checked key {key}"
    section = SCHEMA[key][0]
    text = MINIMAL.replace(f"{key} = ", "# ") if key in ("A", "h", "n") else MINIMAL
    text += f"[{section}]\n{key} = {BAD_VALUES[key]}\n"
    with pytest.raises(ConfigError) as err:
        parse_config(text)
    line = len(text.splitlines())
    assert any(e.startswith(f"line {line}:") for e in err.value.errors)


def test_subcommand_requirements():
    with pytest.raises(ConfigError, match="thetas"):
        _config(subcommand="fill")
    with pytest.raises(ConfigError, match="exactly one"):
        _config("[muffin]\nr = 0.1\ny_max = 10\ntheta = 0.3\ntan_theta = 1/2\n", "muffin")
    with pytest.raises(ConfigError, match="disc_h"):
        _config("[muffin]\nr = 0.1\ny_max = 10\ntheta = 0.3\ndisc_h = 1/100\n", "muffin")
    with pytest.raises(ConfigError, match="alpha"):
        _config("[scaling]\nalpha = 60\nbeta = 50\n")


def test_hash_ignores_run_settings():
    a = _config("[run]\nworkers = 4\n")
    b = _config()
    assert a.sha256 == b.sha256
    assert _config("[bands]\nmomentum_grid = 32\n").sha256 != b.sha256


def test_reference_configs_load():
    for name, sub in (("reference.cfg", "fill"), ("muffin_resonant.cfg", "muffin"),
                      ("muffin_irrational.cfg", "muffin"), ("muffin_heights.cfg", "muffin")):
        load_config(os.path.join(CONFIGS, name), sub)


def test_format_round_trip():
    for v in (0.1, 1 / 3, math.pi * 1e-300, -2.5e17, 44.736383699391176):
        assert float(format_value(v)) == v
    assert format_value(float("nan")) == "nan" and format_value(7) == "7"


def test_fill_schema_leading_columns():
    assert SCHEMAS["fill"][:6] == ("theta", "n", "alpha", "beta", "count", "residual")


def test_table_round_trip(tmp_path):
    table = ResultTable("decouple", [(10.0, 0.5), (100.0, 1 / 3)], "abc")
    path = tmp_path / "t.csv"
    with TableWriter(path, table):
        pass
    header, cols, rows, complete = read_table(path)
    assert complete and header["schema"] == "decouple" and header["config_sha256"] == "abc"
    assert cols == ["height", "norm"]
    assert [float(r[1]) for r in rows] == [0.5, 1 / 3]
    assert (tmp_path / "t.csv.meta.json").exists()


def test_row_width_is_checked():
    with pytest.raises(ValueError):
        ResultTable("decouple", [(1.0,)]).body()


def _write_cfg(tmp_path, extra=""):
    path = tmp_path / "c.cfg"
    path.write_text(MINIMAL.replace("1/32", "1/8") + extra)
    return str(path)


ALIGN = "[align]\nalign_theta = 0.05\nalign_t = 0.5\nalign_eps = 0.2\nhorizon = 4000\n"


def test_cli_align_is_deterministic(tmp_path, capsys):
    cfg = _write_cfg(tmp_path, ALIGN)
    out1, out2 = str(tmp_path / "a1.csv"), str(tmp_path / "a2.csv")
    assert cli.main(["align", "--config", cfg, "--out", out1]) == 0
    assert cli.main(["align", "--config", cfg, "--out", out2, "--workers", "2"]) == 0
    assert filecmp.cmp(out1, out2, shallow=False)
    _, cols, rows, complete = read_table(out1)
    assert complete and cols == list(SCHEMAS["align"]) and rows


def test_cli_fill_columns(tmp_path):
    cfg = _write_cfg(tmp_path, "[fill]\nthetas = 0.1\nplacement = origin\n")
    out = str(tmp_path / "fill.csv")
    assert cli.main(["fill", "--config", cfg, "--out", out]) == 0
    _, cols, rows, _ = read_table(out)
    assert cols[:5] == ["theta", "n", "alpha", "beta", "count"] and rows


def test_interrupt_marks_incomplete(tmp_path, monkeypatch):
    def boom(cfg, mapper):
        raise KeyboardInterrupt

    monkeypatch.setitem(cli.RUNNERS, "align", boom)
    out = tmp_path / "x.csv"
    code = cli.main(["align", "--config", _write_cfg(tmp_path, ALIGN), "--out", str(out)])
    assert code == cli.EXIT_INTERRUPT
    lines = out.read_text().splitlines()
    assert lines[0].startswith("# schema") and lines[-1] == INCOMPLETE
    assert read_table(out)[3] is False


@pytest.mark.parametrize("exc,code", [
    (GridError("g"), 4), (FactorizationError("f"), 5), (ConvergenceError("c"), 5),
    (FlowError("f"), 6), (ConstructionError("c"), 6), (cli.NoGapError("n"), 6),
    (MuffinError("m"), 7), (CutDiscError("c"), 7), (DecouplingError("d"), 8),
    (RuntimeError("x"), 1),
])
def test_exit_codes(tmp_path, monkeypatch, exc, code):
    def fail(cfg, mapper):
        raise exc

    monkeypatch.setitem(cli.RUNNERS, "align", fail)
    out = tmp_path / "x.csv"
    assert cli.main(["align", "--config", _write_cfg(tmp_path, ALIGN), "--out", str(out)]) == code
    assert out.read_text().splitlines()[-1] == INCOMPLETE


def test_config_errors_exit_before_running(tmp_path, capsys):
    assert cli.main(["align", "--config", str(tmp_path / "missing.cfg")]) == cli.EXIT_CONFIG
    bad = tmp_path / "bad.cfg"
    bad.write_text("potential = cosine\nA = 30\nh = 0.3\nn = 4\n")
    assert cli.main(["align", "--config", str(bad)]) == cli.EXIT_CONFIG
    assert "mesh rule" in capsys.readouterr().err


def test_flat_potential_has_no_gap(tmp_path):
    path = tmp_path / "flat.cfg"
    path.write_text("potential = flat\nh = 1/8\nn = 4\n")
    assert cli.main(["flow", "--config", str(path), "--out", str(tmp_path / "f.csv")]) == 6
