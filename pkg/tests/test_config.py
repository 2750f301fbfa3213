import json

import pytest

from datesort.config import ConfigError, RunConfig, from_dict, load_config
from datesort.seeding import derive_seed
from datesort.synthcrop import REFERENCE_COUNTS, Variety


def test_defaults():
    cfg = from_dict({})
    assert cfg.seed == 42
    assert cfg.variety_counts() == REFERENCE_COUNTS
    mc = cfg.model_config()
    assert [b.filters for b in mc.conv_blocks] == [8, 16] and mc.dense_widths == [64]
    assert mc.input_size == 64


def test_module_seeds_derived_from_root():
    cfg = from_dict({"seed": 9})
    assert cfg.model_config().seed == derive_seed(9, "model")
    assert cfg.ga_config().seed == derive_seed(9, "ga")
    assert cfg.rl_config().seed == derive_seed(9, "rl")
    assert len({cfg.seed_for(m) for m in ("synthcrop", "split", "model", "ga", "conveyor", "rl")}) == 6


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError, match="unknown key 'bogus'"):
        from_dict({"bogus": 1})
    with pytest.raises(ConfigError, match="unknown key 'model.depth'"):
        from_dict({"model": {"depth": 3}})


def test_invalid_variety_name_named():
    with pytest.raises(ConfigError, match="simulator.counts: invalid variety name 'KHUDRI'"):
        from_dict({"simulator": {"counts": {"KHUDRI": 10}}})


@pytest.mark.parametrize("doc", [
    {"seed": -1},
    {"seed": 1.5},
    {"simulator": {"counts": {"AJWA": 0}}},
    {"simulator": {"counts": {}}},
    {"eval": {"test_fraction": 1.0}},
    {"model": {"epochs": "ten"}},
    {"model": {"augment_flip": 1}},
    {"model": {"conv_blocks": [{"filters": 8, "kernel": 4}]}},
    {"model": {"conv_blocks": [{"filters": 8}]}},
    {"preprocess": {"size": 16}, "model": {"conv_blocks": [{"filters": 2, "kernel": 3}] * 5}},
    {"ga": {"population_size": 2}},
    {"rl": {"final_window": 5000}},
    {"rl": {"audit_prob": 1.5}},
    {"drift": "on"},
])
def test_invalid_values_rejected(doc):
    with pytest.raises(ConfigError):
        from_dict(doc)


def test_int_accepted_for_float():
    assert from_dict({"model": {"learning_rate": 1}}).model.learning_rate == 1.0


def test_round_trip_and_hash(tmp_path):
    cfg = from_dict({"seed": 3, "simulator": {"counts": {"AJWA": 5, "BERHI": 7}}, "rl": {"steps": 500, "final_window": 200}})
    p = tmp_path / "c.json"
    p.write_bytes(cfg.canonical_bytes())
    again = load_config(p)
    assert again.to_dict() == cfg.to_dict()
    assert again.config_hash() == cfg.config_hash()
    assert again.variety_counts() == {Variety.AJWA: 5, Variety.BERHI: 7}
    assert RunConfig().config_hash() != cfg.config_hash()


def test_load_errors(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{oops")
    with pytest.raises(ConfigError, match="not valid JSON"):
        load_config(bad)
    arr = tmp_path / "arr.json"
    arr.write_text(json.dumps([1, 2]))
    with pytest.raises(ConfigError):
        load_config(arr)
