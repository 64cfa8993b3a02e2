import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from trapwave import io as tio


@given(st.lists(st.floats(allow_nan=False, allow_infinity=False), min_size=1, max_size=20))
def test_csv_floats_round_trip(tmp_path_factory, xs):
    path = tmp_path_factory.mktemp("csv") / "x.csv"
    tio.write_csv(path, ["i", "x"], [(i, x) for i, x in enumerate(xs)], {"a": 1}, reproducible=True)
    cols, data = tio.read_csv(path)
    assert cols == ["i", "x"]
    assert data[:, 1].tolist() == xs


def test_provenance_header_and_reproducible_mode(tmp_path):
    cfg = {"kind": "gp", "d": 3.0}
    p1 = tio.write_csv(tmp_path / "a.csv", ["x"], [(1.0,)], cfg, reproducible=True)
    p2 = tio.write_csv(tmp_path / "b.csv", ["x"], [(1.0,)], cfg, reproducible=True)
    assert p1.read_bytes() == p2.read_bytes()
    head = p1.read_text().splitlines()
    assert head[0].startswith("# trapwave ")
    assert head[1] == f"# config_hash {tio.config_hash(cfg)}"
    assert json.loads(head[2][len("# config "):]) == cfg
    live = tio.write_csv(tmp_path / "c.csv", ["x"], [(1.0,)], cfg)
    assert any(line.startswith("# date ") for line in live.read_text().splitlines())


def test_config_hash_is_order_independent():
    assert tio.config_hash({"a": 1, "b": 2}) == tio.config_hash({"b": 2, "a": 1})
    assert tio.config_hash({"a": 1}) != tio.config_hash({"a": 2})


def test_complex_values_must_be_split(tmp_path):
    with pytest.raises(TypeError):
        tio.write_csv(tmp_path / "z.csv", ["z"], [(1j,)], {})


def test_json_handles_numpy_and_complex(tmp_path):
    path = tio.write_json(tmp_path / "r.json", {"v": np.float64(1.5), "z": 1 + 2j, "arr": np.arange(3),
                                                "bad": float("inf")}, {}, reproducible=True)
    doc = json.loads(path.read_text())
    assert doc["v"] == 1.5 and doc["z"] == [1.0, 2.0] and doc["arr"] == [0, 1, 2]
    assert doc["bad"] is None


def test_manifest(tmp_path):
    f = tio.write_csv(tmp_path / "a.csv", ["x"], [(1.0,)], {})
    m = tio.write_manifest(tmp_path, {"k": 1}, [f], {"ok": True}, 1.234, reproducible=True)
    doc = json.loads(m.read_text())
    assert doc["files"] == ["a.csv"] and doc["wall_time"] is None


def test_read_config_file(tmp_path):
    p = tmp_path / "c.txt"
    p.write_text("# comment\nkind = gp\nfull-N = 300  # trailing\n\n")
    assert tio.read_config_file(p) == {"kind": "gp", "full_N": "300"}
    p.write_text("nonsense\n")
    with pytest.raises(ValueError):
        tio.read_config_file(p)
