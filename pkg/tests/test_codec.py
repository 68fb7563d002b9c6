import json
from fractions import Fraction

import numpy as np
import pytest

from py_module.codec import (
    decode_element,
    decode_field,
    decode_frob_table,
    decode_group,
    decode_matrix,
    decode_rep,
    dumps_report,
    encode_frob_table,
    encode_group,
    encode_matrix,
    load_json,
)
from py_module.exceptions import FieldTooLarge, InvalidType, MalformedInput, NotMonic, WeightLatticeMismatch
from py_module.matgrp import group_closure


def test_load_json_reports_position(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{\n  "ell": 5,\n  oops\n}')
    with pytest.raises(MalformedInput) as exc:
        load_json(path)
    assert exc.value.witness["line"] == 3
    assert exc.value.witness["path"] == str(path)


def test_load_json_rejects_unknown_schema(tmp_path):
    path = tmp_path / "future.json"
    path.write_text('{"schema": 2}')
    with pytest.raises(MalformedInput) as exc:
        load_json(path)
    assert exc.value.witness["expected"] == 1
    with pytest.raises(MalformedInput):
        load_json(tmp_path / "missing.json")


def test_decode_field(f25):
    assert decode_field({"ell": 5, "degree": 2}) == f25
    assert decode_field({"ell": 7}).order == 7
    with pytest.raises(MalformedInput) as exc:
        decode_field({"degree": 2})
    assert exc.value.witness["field"] == "field.ell"
    with pytest.raises(MalformedInput):
        decode_field({"ell": "5"})
    with pytest.raises(MalformedInput):
        decode_field({"ell": True})
    with pytest.raises(FieldTooLarge):
        decode_field({"ell": 2, "degree": 12}, max_order=1024)


def test_decode_element(f5, f25):
    assert int(decode_element(f5, -1, "x")) == 4
    assert int(decode_element(f5, 12, "x")) == 2
    assert int(decode_element(f25, [3, 2], "x")) == 13
    with pytest.raises(MalformedInput):
        decode_element(f25, 25, "x")
    with pytest.raises(MalformedInput):
        decode_element(f25, [1, 2, 3], "x")
    with pytest.raises(MalformedInput):
        decode_element(f5, 1.5, "x")


def test_decode_matrix(data_dir, f7):
    obj, _ = load_json(data_dir / "compat_matrix.json")
    M = decode_matrix(obj)
    assert M.spec == f7
    assert M.rows() == [[0, 2], [1, 1]]
    assert decode_matrix(encode_matrix(M)) == M
    with pytest.raises(MalformedInput) as exc:
        decode_matrix({"rows": [[1, 2], [3]]}, spec=f7)
    assert exc.value.witness["field"] == "matrix.rows[1]"
    with pytest.raises(MalformedInput):
        decode_matrix({"rows": [[1]]}, spec=f7, n=2)


def test_decode_group_accepts_raw_rows(data_dir, f11):
    obj, _ = load_json(data_dir / "sl2gens.json")
    spec, n, gens = decode_group(obj)
    assert spec == f11
    assert n == 2
    assert len(gens) == 2
    G = group_closure(gens)
    spec2, n2, gens2 = decode_group(json.loads(json.dumps(encode_group(G))))
    assert group_closure(gens2) == G


def test_decode_group_errors():
    base = {"field": {"ell": 5}, "n": 2}
    with pytest.raises(MalformedInput):
        decode_group({**base, "generators": []})
    with pytest.raises(MalformedInput) as exc:
        decode_group({**base, "generators": [[[1, 0], [0, 1]], [[1, 0, 0]]]})
    assert exc.value.witness["field"].startswith("group.generators[1]")


def test_decode_rep(data_dir):
    obj, _ = load_json(data_dir / "ext2_sl4.json")
    rep = decode_rep(obj)
    assert rep.system.label == "A3"
    assert rep.dim == 6
    product = decode_rep({"system": [{"type": "a", "rank": 1}, {"type": "A", "rank": 1}], "weights": [[1, 1]]})
    assert product.system.rank == 2
    with pytest.raises(InvalidType):
        decode_rep({"system": {"type": "H", "rank": 3}, "weights": []})
    with pytest.raises(WeightLatticeMismatch):
        decode_rep({"system": {"type": "A", "rank": 2}, "weights": [[1]]})
    with pytest.raises(MalformedInput):
        decode_rep({"system": {"type": "A", "rank": 1}, "weights": [[0.5]]})


def test_decode_frob_table(data_dir):
    obj, _ = load_json(data_dir / "frob_table.json")
    table = decode_frob_table(obj)
    assert table.p == 5
    assert table.field is None
    assert len(table.entries) == 50
    assert table.entry("q25_a-9").q == 25
    again = decode_frob_table(json.loads(json.dumps(encode_frob_table(table))))
    assert again == table


def test_decode_frob_table_number_field():
    obj = {
        "p": 5,
        "field": {"minpoly": [1, 0, 1]},
        "entries": [{"id": "x", "q": 5, "coeffs": [["-1", [-2, 1]], [1, 0]]}],
    }
    table = decode_frob_table(obj)
    assert table.field.degree == 2
    assert table.entries[0].poly.coeffs[0] == (Fraction(-1), Fraction(-2))


def test_decode_frob_table_errors():
    entry = {"id": "a", "q": 5, "coeffs": [5, 0, 1]}
    with pytest.raises(MalformedInput):
        decode_frob_table({"p": 5, "entries": [entry, entry]})
    with pytest.raises(MalformedInput):
        decode_frob_table({"p": 5, "field": "R", "entries": [entry]})
    with pytest.raises(MalformedInput) as exc:
        decode_frob_table({"p": 5, "entries": [{"id": "a", "q": 5, "coeffs": [5, [1, 0], 1]}]})
    assert exc.value.witness["field"] == "table.entries[0].coeffs[1]"
    with pytest.raises(NotMonic):
        decode_frob_table({"p": 5, "entries": [{"id": "a", "q": 5, "coeffs": [5, 0, 2]}]})
    with pytest.raises(MalformedInput):
        decode_frob_table({"p": 5, "field": {"minpoly": [1, 0, 1]}, "entries": [{"id": "a", "q": 5, "coeffs": [1, 1]}]})


def test_dumps_report_is_canonical():
    report = {"b": Fraction(1, 2), "a": (np.int64(3), Fraction(4, 1)), "c": {"z": None, "y": True}}
    text = dumps_report(report)
    assert json.loads(text) == {"a": [3, 4], "b": "1/2", "c": {"y": True, "z": None}}
    assert text.index('"a"') < text.index('"b"') < text.index('"c"')
    assert dumps_report(report) == text
