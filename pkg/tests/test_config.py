import pytest
import yaml

from spinxbar import devices as dv
from spinxbar.config import ExperimentConfig, load_default
from spinxbar.errors import ConfigurationError


def test_defaults_build_all_designs(cfg):
    assert set(cfg.designs) == set(dv.TOPOLOGIES)
    assert cfg.design(dv.VSH).cell.mtj.r_p == pytest.approx(50.0 / 0.0009)
    assert cfg.design(dv.STT).cell.transistor.n_fin == 5
    assert cfg.t_ox_grid[0] == pytest.approx(1.1e-9)


def test_round_trip(tmp_path, cfg):
    p = tmp_path / "c.yaml"
    cfg.save(p)
    again = ExperimentConfig.load(p)
    assert again.to_dict() == cfg.to_dict()
    assert again.designs == cfg.designs
    assert again.dumps() == cfg.dumps()


def test_partial_override(tmp_path):
    p = tmp_path / "c.yaml"
    p.write_text("designs:\n  vsh:\n    v_read_volts: 0.3\n", encoding="utf-8")
    c = ExperimentConfig.load(p)
    assert c.design(dv.VSH).scheme.v_read == 0.3
    assert c.design(dv.STT).scheme.v_read == 0.1


@pytest.mark.parametrize(
    "over",
    [
        {"bogus": 1},
        {"designs": {"vsh": {"mtj": {"colour": "red"}}}},
        {"adc": {"mode": "psychic"}},
        {"array": {"group_size": 7}},
        {"sweeps": {"v_read_volts": [0.2, -0.1]}},
        {"designs": {"vsh": {"mtj": {"ra_ohm_um2": -5}}}},
        {"designs": {"vsh": {"channel": {"table_csv": "missing.csv"}}}},
        {"solver": {"damping": 0.0}},
    ],
)
def test_invalid_configs(over):
    with pytest.raises(ConfigurationError):
        ExperimentConfig.from_dict(over)


def test_bad_files(tmp_path):
    with pytest.raises(ConfigurationError):
        ExperimentConfig.load(tmp_path / "nope.yaml")
    p = tmp_path / "bad.yaml"
    p.write_text("designs: [unclosed\n", encoding="utf-8")
    with pytest.raises(ConfigurationError):
        ExperimentConfig.load(p)


def test_channel_table_resolved_next_to_config(tmp_path):
    dv.default_channel_table(r_on=12e3).to_csv(tmp_path / "mine.csv")
    p = tmp_path / "c.yaml"
    p.write_text(yaml.safe_dump({"designs": {"vsh": {"channel": {"table_csv": "mine.csv"}}}}), encoding="utf-8")
    c = ExperimentConfig.load(p)
    assert c.design(dv.VSH).cell.channel.table == dv.default_channel_table(r_on=12e3)


def test_every_default_value_is_tagged():
    text = (dv.DATA_DIR / "default.yaml").read_text(encoding="utf-8")
    data = load_default()
    assert data["seed"] == 0
    tags = ("[table]", "[bias]", "[text]", "[process]", "[calibrated]", "[invented]")
    assert any(t in text for t in tags)
