import json

import pytest

from laguerre_h1.config import ConfigError, RunConfig, load_config


def test_defaults():
    cfg = load_config()
    assert cfg == RunConfig()
    assert cfg.alpha == (1.0,) and cfg.seed == 0
    assert cfg.sweeps.thm15_atoms == 100 and cfg.sweeps.thm211_telescope == 100


def test_full_document_roundtrip():
    doc = {
        "alpha": [0.5, 2],
        "seed": 3,
        "out": "results",
        "tolerances": {"pv_order": 12, "pv_h_min": 1e-7},
        "sweeps": {"prop31_y": [0.1, 10, 20], "thm15_atoms": 0},
    }
    cfg = load_config(doc)
    assert cfg.alpha == (0.5, 2.0)
    assert cfg.tolerances.pv_order == 12 and isinstance(cfg.tolerances.pv_order, int)
    assert cfg.sweeps.prop31_y == (0.1, 10.0, 20)
    assert cfg.sweeps.thm15_atoms == 0
    again = load_config(json.loads(cfg.to_json()))
    assert again == cfg


def test_scalar_alpha_accepted():
    assert load_config({"alpha": 1.5}).alpha == (1.5,)


@pytest.mark.parametrize(
    "doc",
    [
        [],
        {"alpha": []},
        {"alpha": [0.0]},
        {"alpha": ["one"]},
        {"seed": -1},
        {"seed": 1.5},
        {"out": ""},
        {"colour": "blue"},
        {"tolerances": {"pv_order": 0}},
        {"tolerances": {"pv_order": 2.5}},
        {"tolerances": {"unknown": 1}},
        {"tolerances": []},
        {"tolerances": {"quad_tol": True}},
        {"sweeps": {"prop31_y": [10, 1, 5]}},
        {"sweeps": {"prop31_y": [1, 10]}},
        {"sweeps": {"thm15_atoms": -1}},
    ],
)
def test_schema_violations(doc):
    with pytest.raises(ConfigError):
        load_config(doc)
