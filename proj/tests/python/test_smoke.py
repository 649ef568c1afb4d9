import json
import pathlib

import pytest

import agentosi

FIXTURES = pathlib.Path(__file__).resolve().parents[1] / "fixtures"


def test_sha256_and_canonical_form():
    assert agentosi.sha256(b"abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
    assert agentosi.canonicalize({"b": 1, "a": [True, None, "x"]}) == '{"a":[true,null,"x"],"b":1}'
    with pytest.raises(ValueError):
        agentosi.canonicalize({"x": float("nan")})


def test_identity_matches_fixture():
    vectors = json.loads((FIXTURES / "crypto_vectors.json").read_text())
    case = vectors["identities"][0]
    address, public_key = agentosi.identity(case["seed"])
    assert address == case["address"]
    assert public_key == case["public_key"]
    assert agentosi.check_vectors(vectors) == []


def test_light_session_settles():
    t = agentosi.run_session("light", "agentosi", seed=7)
    assert t["finalState"] == "Settled"
    again = agentosi.run_session("light", "agentosi", seed=7)
    assert t == again


def test_invalid_arguments_raise():
    with pytest.raises(agentosi.Error):
        agentosi.run_session("light", "nope")
    with pytest.raises(agentosi.Error):
        agentosi.run_session(config={"ledger": {"no_such_key": 1}})


def test_cost_bench_and_offline_verify(tmp_path):
    report = agentosi.bench(["cost"], out_dir=tmp_path)
    assert report["cost"]["reductionPct"] == pytest.approx(51.2, abs=0.5)
    assert (tmp_path / "report.json").is_file()
    result = agentosi.verify(tmp_path)
    assert result["ok"], result["findings"]
    assert result["sessions_checked"] > 0

    provenance = sorted(tmp_path.rglob("provenance.json"))[0]
    data = bytearray(provenance.read_bytes())
    data[len(data) // 2] ^= 1
    provenance.write_bytes(bytes(data))
    tampered = agentosi.verify(tmp_path)
    assert not tampered["ok"]
    assert tampered["findings"]
