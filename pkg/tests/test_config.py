import json

import pytest

import semiflow as sf
from semiflow.errors import BadConfig, MissingFile


def test_defaults_table():
    cfg = sf.default_config()
    assert cfg["search.n_neigh"] == 8
    assert cfg["search.epochs_neigh"] == 18
    assert cfg["search.lam_start"] == 0.05
    assert cfg["search.lam_final"] == 1e-7
    assert cfg["search.s_x"] == 64
    assert cfg["search.s_y"] == 32
    assert cfg["dynamics.kappa"] == 3.0
    assert cfg["dynamics.beta"] == 2.0
    assert cfg["dynamics.gamma"] == 0.0


def test_unknown_key_named_in_error():
    with pytest.raises(BadConfig) as err:
        sf.normalize({"search.n_niegh": 4})
    assert "search.n_niegh" in str(err.value)


def test_values_are_type_checked():
    with pytest.raises(BadConfig):
        sf.normalize({"search.n_neigh": "eight"})
    with pytest.raises(BadConfig):
        sf.normalize({"search.n_neigh": "4"})
    with pytest.raises(BadConfig):
        sf.normalize({"dynamics.kappa": True})
    with pytest.raises(BadConfig):
        sf.normalize({"net.hidden": []})


def test_numeric_coercions():
    cfg = sf.normalize({"dynamics.kappa": 2, "search.n_particles": 50.0})
    assert cfg["dynamics.kappa"] == 2.0
    assert isinstance(cfg["dynamics.kappa"], float)
    assert cfg["search.n_particles"] == 50
    assert isinstance(cfg["search.n_particles"], int)
    with pytest.raises(BadConfig):
        sf.normalize({"search.n_particles": 50.5})


def test_build_search_config_maps_fields():
    cfg = sf.normalize({"search.mode": "nasagd", "dynamics.beta": 1.5,
                        "net.hidden": [4, 4]})
    sc = sf.build_search_config(cfg)
    assert sc.mode == "nasagd"
    assert sc.n_steps == 2.54
    assert sc.beta == 1.5
    assert sc.hidden == (4, 4)


def test_build_search_config_rejects_bad_values():
    with pytest.raises(BadConfig):
        sf.build_search_config(sf.normalize({"search.n_particles": 0}))
    with pytest.raises(BadConfig):
        sf.build_search_config(sf.normalize({"search.mode": "warp"}))


def test_data_seed_falls_back_to_run_seed():
    cfg = sf.normalize({"search.seed": 11, "data.kind": "blobs", "data.n": 40})
    ds1 = sf.build_dataset(cfg)
    ds2 = sf.build_dataset(sf.normalize({"search.seed": 11, "data.kind": "blobs",
                                         "data.n": 40, "data.seed": 11}))
    import numpy as np
    assert np.array_equal(ds1.features, ds2.features)


def test_missing_data_kind():
    with pytest.raises(BadConfig) as err:
        sf.build_dataset(sf.normalize({}))
    assert "data.kind" in str(err.value)


def test_load_config_file(tmp_path):
    p = tmp_path / "c.json"
    p.write_text(json.dumps({"search.mode": "nasgd", "dynamics.kappa": 1.5}))
    raw = sf.load_config(str(p))
    assert raw == {"search.mode": "nasgd", "dynamics.kappa": 1.5}


def test_load_config_missing(tmp_path):
    with pytest.raises(MissingFile):
        sf.load_config(str(tmp_path / "nope.json"))


def test_load_config_invalid_json(tmp_path):
    p = tmp_path / "c.json"
    p.write_text("{not json")
    with pytest.raises(BadConfig):
        sf.load_config(str(p))


def test_manifest_accepted_as_config(tmp_path):
    # a run manifest wraps the original config under "config"
    p = tmp_path / "manifest.json"
    p.write_text(json.dumps({"config": {"search.mode": "nasagd"},
                             "seed": 3, "version": "x"}))
    raw = sf.load_config(str(p))
    assert raw == {"search.mode": "nasagd"}
