import json

import pytest

from microent.config import ConfigError, load_config, parse_config


def test_toml_and_defaults(tmp_path):
    p = tmp_path / "c.toml"
    p.write_text('[model]\npotential = "ideal"\nn_particles = 3\nbox_side = 2.0\n')
    cfg = load_config(p)
    assert cfg.system().n_particles == 3
    assert cfg.sampler.master_seed == 20081011
    assert cfg.energy_grid(cfg.system()) is None


def test_unknown_key_named(tmp_path):
    p = tmp_path / "c.toml"
    p.write_text("[sampler]\nn_sample = 10\n")
    with pytest.raises(ConfigError, match="sampler.n_sample"):
        load_config(p)


def test_syntax_error_has_line(tmp_path):
    p = tmp_path / "c.toml"
    p.write_text("[model]\nn_particles = = 3\n")
    with pytest.raises(ConfigError, match="line 2"):
        load_config(p)


def test_json_syntax_error_has_line(tmp_path):
    p = tmp_path / "c.json"
    p.write_text('{\n"model": {,}\n}')
    with pytest.raises(ConfigError, match="line 2"):
        load_config(p)


def test_missing_model_key():
    with pytest.raises(ConfigError, match="model.box_side"):
        parse_config({"model": {"n_particles": 2}}).system()


def test_seed_env_override(monkeypatch):
    monkeypatch.setenv("MICROENT_SEED", "5")
    assert parse_config({}).sampler.master_seed == 5


def test_canonical_reloads(tmp_path):
    cfg = parse_config({"model": {"potential": "lennard_jones", "n_particles": 2, "box_side": 3.0},
                        "grid": {"e_max": 1.0, "n_bins": 5}, "sampler": {"n_samples": 10}})
    p = tmp_path / "side.json"
    p.write_text(json.dumps({**cfg.canonical(), "provenance": {"created": "now"}}))
    back = load_config(p)
    assert back.canonical() == cfg.canonical()
    assert list(back.energy_grid(back.system())) == list(cfg.energy_grid(cfg.system()))
