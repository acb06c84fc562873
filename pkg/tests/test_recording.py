import json

import semiflow as sf
from semiflow.recording import METRICS_COLUMNS, utc_now


def test_metrics_header_and_row(tmp_path):
    path = str(tmp_path / "m.csv")
    w = sf.MetricsWriter(path)
    w.write_row(0, 1, 2, 100.0, 0.5, 1.25, 1.5, 0.0, 0.05, 3.5, 4)
    w.close()
    lines = open(path).read().splitlines()
    assert lines[0] == "iter,round,node_id,count,f,V_train,V_val,phi,tau_k,energy,moved"
    assert lines[1].startswith("0,1,2,100")
    assert tuple(lines[0].split(",")) == METRICS_COLUMNS


def test_metrics_flush_makes_rows_visible(tmp_path):
    # rows must be on disk after flush, while the writer is still open
    path = str(tmp_path / "m.csv")
    w = sf.MetricsWriter(path)
    assert open(path).read().startswith("iter,")
    w.write_row(7, 1, 0, 1.0, 1.0, 0.0, 0.0, 0.0, 0.01, 0.0, 0)
    w.flush()
    assert "7,1,0" in open(path).read()
    w.close()


def test_jsonl_roundtrip(tmp_path):
    path = str(tmp_path / "a.jsonl")
    w = sf.JsonlWriter(path)
    recs = [{"child_id": 1, "kind": "widen", "dev": 0.0},
            {"child_id": 2, "kind": "deepen", "dev": 1e-8}]
    for r in recs:
        w.write(r)
    w.close()
    back = [json.loads(line) for line in open(path)]
    assert back == recs


def test_manifest_roundtrip(tmp_path):
    path = str(tmp_path / "manifest.json")
    cfg = sf.normalize({"search.mode": "nasgd"})
    sf.write_manifest(path, cfg, seed=5, version="0.1.0",
                      outputs={"metrics": "metrics.csv"}, started=utc_now())
    m = sf.read_manifest(path)
    assert m["seed"] == 5
    assert m["config"] == cfg
    assert m["outputs"] == {"metrics": "metrics.csv"}
    assert m["ended"] is None
    sf.write_manifest(path, cfg, seed=5, version="0.1.0",
                      outputs={"metrics": "metrics.csv"},
                      started=m["started"], ended=utc_now())
    m2 = sf.read_manifest(path)
    assert m2["ended"] is not None
    assert m2["started"] == m["started"]


def test_manifest_config_rebuilds_run(tmp_path):
    path = str(tmp_path / "manifest.json")
    cfg = sf.normalize({"search.mode": "nasagd", "dynamics.beta": 1.5})
    sf.write_manifest(path, cfg, seed=1, version="0.1.0", outputs={},
                      started=utc_now())
    reread = sf.load_config(path)
    assert sf.build_search_config(sf.normalize(reread)).beta == 1.5
