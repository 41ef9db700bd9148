from pathlib import Path

import pytest

from gradfiber.config import load_config, parse_config
from gradfiber.errors import ConfigError
from gradfiber.scenarios import build_scenario

from conftest import small_config

CONFIGS = sorted((Path(__file__).parents[1] / "configs").glob("*.cfg"))


def test_unit_conversion():
    cfg = parse_config(small_config(thermal__c_mat="1860 kJ/(m^3*K)", fracture__gce="0.5 J/mm^2",
                                    geometry__length="0.04 m", matrix__mu="1.6304 GPa"))
    assert cfg["thermal"]["c_mat"] == pytest.approx(1.86)
    assert cfg["fracture"]["gce"] == pytest.approx(500.0)
    assert cfg["geometry"]["length"] == pytest.approx(40.0)
    assert cfg["matrix"]["mu"] == pytest.approx(1630.4)
    assert cfg["geometry"]["elements"] == (8, 2, 1)


def test_round_trip():
    cfg = parse_config(small_config(matrix__mu="1.6304 GPa"))
    again = parse_config(cfg.dumps())
    assert again.values == cfg.values


def test_defaults_follow_the_material_table():
    m = parse_config("[scenario]\ntype = tension_uni\n").material()
    assert m.matrix.mu == (1630.0,) and m.matrix.kappa == 6250.0 and m.zeta == 0.53
    assert m.fiber.a == 79000.0 and m.fiber.c_perp == 16.46
    assert (m.plastic.y0, m.plastic.y1, m.plastic.y2) == (22.0, 56.8, 30.0)
    assert m.plastic.eta_p == 5000.0 and m.plastic.f0 == 0.01
    assert m.fracture.gce == 500.0 and m.fracture.gcp == 50.0 and m.fracture.lf == 3.1
    assert m.matrix.c_mat == pytest.approx(1.86) and m.fiber.c_fib == pytest.approx(2.08)
    assert m.thermal.K_mat == 0.25


@pytest.mark.parametrize("text, message", [
    ("", "missing required"),
    ("[scenario]\ntype = tension_uni\n[matrix]\nshear = 3\n", "unknown key"),
    ("[scenario]\ntype = tension_uni\n[colour]\nx = 1\n", "unknown section"),
    ("[scenario]\ntype = tension_uni\n[matrix]\nmu = 3 furlongs\n", "unit"),
    ("[scenario]\ntype = tension_uni\n[matrix]\nmu = soft\n", "matrix.mu"),
    ("[scenario]\ntype = tension_uni\n[fracture]\nlf = 4 mm\n", "l_p"),
    ("[scenario]\ntype = wobble\n", "scenario.type"),
    ("[scenario]\ntype = tension_uni\n[thermal]\nmode = hot\n", "mode"),
    ("[scenario]\ntype = custom\n", "geometry"),
])
def test_invalid_configs(text, message):
    with pytest.raises(ConfigError, match=message):
        parse_config(text)


def test_missing_file(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "absent.cfg")


def test_empty_file(tmp_path):
    path = tmp_path / "empty.cfg"
    path.write_text("")
    with pytest.raises(ConfigError):
        load_config(path)


@pytest.mark.parametrize("path", CONFIGS, ids=[p.stem for p in CONFIGS])
def test_shipped_configs_build(path):
    cfg = load_config(path)
    sc = build_scenario(cfg)
    assert sc.t_end > 0
