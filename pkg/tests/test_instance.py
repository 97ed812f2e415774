import json

import pytest

from partrank.exactfield import PrimeField, Rationals
from partrank.instance import ParseError, load, save

from conftest import fixture


def doc(**over):
    d = {
        "mu": 2,
        "nu": 2,
        "field": "Q",
        "blocks": [
            {"alpha": 1, "beta": 1, "m": [[1, 0], [0, 1]]},
            {"alpha": 2, "beta": 2, "m": [["1/2", 0], [0, 0]]},
        ],
    }
    d.update(over)
    return json.dumps(d).encode("utf-8")


def test_load_basic():
    A = load(doc())
    assert A.mu == 2 and A.nu == 2
    assert isinstance(A.field, Rationals)
    assert set(A.edge_keys()) == {(0, 0), (1, 1)}
    M = A.block(1, 1)
    assert M.entries[0][0] == A.field.el("1/2")


def test_load_prime_field():
    A = load(doc(field={"gf": 101}))
    assert isinstance(A.field, PrimeField)
    assert A.field.p == 101


def test_round_trip_is_canonical():
    data = doc()
    A = load(data)
    out = save(A)
    assert load(out).edge_keys() == A.edge_keys()
    assert save(load(out)) == out


def test_fixture_round_trip():
    for name in ("e1", "e2", "e3", "e4", "e5"):
        A = fixture(name)
        assert save(load(save(A))) == save(A)


def test_errors():
    with pytest.raises(ParseError):
        load(b"not json")
    with pytest.raises(ParseError):
        load(b"[1, 2]")
    with pytest.raises(ParseError):
        load(doc(mu=0))
    with pytest.raises(ParseError):
        load(doc(field={"gf": 100}))
    with pytest.raises(ParseError):
        load(doc(field="R"))
    bad = {
        "mu": 1, "nu": 1, "field": "Q",
        "blocks": [
            {"alpha": 1, "beta": 1, "m": [[1, 0], [0, 1]]},
            {"alpha": 1, "beta": 1, "m": [[1, 0], [0, 1]]},
        ],
    }
    with pytest.raises(ParseError, match="duplicate"):
        load(json.dumps(bad).encode())
    with pytest.raises(ParseError, match="out of range"):
        load(doc(blocks=[{"alpha": 3, "beta": 1, "m": [[1, 0], [0, 1]]}]))
    with pytest.raises(ParseError, match="zero block"):
        load(doc(blocks=[{"alpha": 1, "beta": 1, "m": [[0, 0], [0, 0]]}]))
    with pytest.raises(ParseError):
        load(doc(blocks=[{"alpha": 1, "beta": 1, "m": [[1, 0]]}]))


def test_missing_keys():
    d = json.loads(doc())
    del d["blocks"]
    with pytest.raises(ParseError, match="missing key"):
        load(json.dumps(d).encode())
