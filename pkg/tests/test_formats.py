import json

import numpy as np
import pytest

import spk
from spk.errors import ParseError


def test_json_roundtrip_bit_exact():
    chain = spk.random_chain(5, 99)
    text = spk.chain_to_json(chain)
    back = spk.chain_from_json(text)
    assert np.array_equal(back.K, chain.K)
    # a second trip serializes identically
    assert spk.chain_to_json(back) == text


def test_json_labels_preserved():
    chain = spk.build_chain(np.full((2, 2), 0.5), labels=["a", "b"])
    back = spk.chain_from_json(spk.chain_to_json(chain))
    assert back.labels == ("a", "b")


def test_json_rejects_garbage():
    with pytest.raises(ParseError):
        spk.chain_from_json("not json")
    with pytest.raises(ParseError):
        spk.chain_from_json(json.dumps({"kernel": [[0.5, 0.5], [0.5, 0.5]],
                                        "n": 3}))
    with pytest.raises(ParseError):
        spk.chain_from_json(json.dumps({"n": 2}))


def test_edge_csv_ingestion():
    text = "0,1,0.5\n0,0,0.5\n1,0,0.5\n1,1,0.5\n"
    chain = spk.chain_from_edge_csv(text)
    assert chain.n == 2
    assert np.allclose(chain.K, 0.5)


def test_edge_csv_rejects_malformed():
    with pytest.raises(ParseError):
        spk.chain_from_edge_csv("0,1\n")
    with pytest.raises(ParseError):
        spk.chain_from_edge_csv("a,b,c\n")
    with pytest.raises(ParseError):
        spk.chain_from_edge_csv("")


def test_load_chain_any_sniffs(tmp_path):
    chain = spk.cycle(5)
    jpath = tmp_path / "c.json"
    spk.save_chain(chain, jpath)
    assert np.array_equal(spk.load_chain_any(jpath).K, chain.K)
    cpath = tmp_path / "c.csv"
    rows = []
    for i in range(5):
        for j in range(5):
            if chain.K[i, j] > 0:
                rows.append(f"{i},{j},{float(chain.K[i, j])!r}")
    cpath.write_text("\n".join(rows) + "\n")
    assert np.max(np.abs(spk.load_chain_any(cpath).K - chain.K)) < 1e-15
