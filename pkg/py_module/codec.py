"""
JSON 輸入 / 輸出

所有格式都帶 "schema": 1（可省略）。解析錯誤一律丟 MalformedInput，witness 內含
檔案行列（JSON 語法錯）或欄位路徑（結構錯）。
"""
import json
from fractions import Fraction
from pathlib import Path

from py_module.config import REPORT_SCHEMA
from py_module.exceptions import MalformedInput, jsonable
from py_module.ff import field_create
from py_module.frobenius import FrobEntry, FrobTable, NumberField, exact_polynomial
from py_module.matgrp import SquareMatrix
from py_module.rootdata import RepWeights, product_system, root_system


def load_json(path):
    """回傳 (物件, 原始 bytes)；bytes 給 inputs_digest 用"""
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise MalformedInput(f"無法讀取 {path}", path=str(path), reason=exc.strerror)
    try:
        obj = json.loads(raw.decode("utf-8"))
    except UnicodeDecodeError as exc:
        raise MalformedInput(f"{path} 不是 UTF-8", path=str(path), offset=exc.start)
    except json.JSONDecodeError as exc:
        raise MalformedInput(f"{path} JSON 語法錯誤: {exc.msg}", path=str(path), line=exc.lineno, column=exc.colno)
    _check_schema(obj, str(path))
    return obj, raw


def _check_schema(obj, where):
    if isinstance(obj, dict) and "schema" in obj and obj["schema"] != REPORT_SCHEMA:
        raise MalformedInput("不支援的 schema 版本", field=f"{where}.schema", got=obj["schema"], expected=REPORT_SCHEMA)


def _get(obj, key, kind, path, default=...):
    if not isinstance(obj, dict):
        raise MalformedInput(f"{path} 必須是物件", field=path)
    if key not in obj:
        if default is not ...:
            return default
        raise MalformedInput(f"缺少欄位 {path}.{key}", field=f"{path}.{key}")
    value = obj[key]
    if kind is not None and (not isinstance(value, kind) or isinstance(value, bool) and kind is not bool):
        raise MalformedInput(
            f"欄位 {path}.{key} 型別錯誤", field=f"{path}.{key}", expected=getattr(kind, "__name__", str(kind))
        )
    return value


# ──────────────────────────────────────────────
# 域、元素、矩陣、群
# ──────────────────────────────────────────────
def decode_field(obj, path="field", max_order=None):
    ell = _get(obj, "ell", int, path)
    degree = _get(obj, "degree", int, path, default=1)
    modulus = _get(obj, "modulus", list, path, default=None)
    kwargs = {} if max_order is None else {"max_order": max_order}
    return field_create(ell, degree, modulus, **kwargs)


def encode_field(spec):
    return spec.to_json()


def decode_element(spec, value, path):
    if isinstance(value, bool) or not isinstance(value, (int, list)):
        raise MalformedInput("域元素必須是整數或座標陣列", field=path, value=repr(value))
    if isinstance(value, list):
        if len(value) > spec.degree or not all(isinstance(c, int) and not isinstance(c, bool) for c in value):
            raise MalformedInput("座標陣列長度或型別錯誤", field=path, degree=spec.degree, value=value)
    elif spec.is_prime_field:
        # 質數域允許負數與超出範圍的整數，直接 mod ℓ
        value %= spec.ell
    elif not 0 <= value < spec.order:
        raise MalformedInput("整數表示超出域的範圍", field=path, order=spec.order, value=value)
    return spec.element(value)


def decode_matrix(obj, spec=None, n=None, path="matrix"):
    if spec is None:
        spec = decode_field(_get(obj, "field", dict, path), path=f"{path}.field")
    rows = _get(obj, "rows", list, path)
    size = _get(obj, "n", int, path, default=len(rows))
    if n is not None and size != n:
        raise MalformedInput("矩陣大小與宣告的 n 不符", field=f"{path}.n", expected=n, got=size)
    if len(rows) != size:
        raise MalformedInput("rows 數量與 n 不符", field=f"{path}.rows", expected=size, got=len(rows))
    entries = []
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != size:
            raise MalformedInput("每一列必須有 n 個元素", field=f"{path}.rows[{i}]", expected=size)
        entries.append([int(decode_element(spec, v, f"{path}.rows[{i}][{j}]")) for j, v in enumerate(row)])
    return SquareMatrix(spec, spec.gf(entries))


def encode_matrix(M):
    return {"field": encode_field(M.spec), "n": M.n, "rows": [[int(v) for v in row] for row in M.rows()]}


def decode_group(obj, path="group", max_order=None):
    """回傳 (spec, n, generators)"""
    spec = decode_field(_get(obj, "field", dict, path), path=f"{path}.field", max_order=max_order)
    n = _get(obj, "n", int, path)
    gens = _get(obj, "generators", list, path)
    if not gens:
        raise MalformedInput("generators 不可為空", field=f"{path}.generators")
    generators = []
    for i, g in enumerate(gens):
        sub = f"{path}.generators[{i}]"
        if isinstance(g, list):
            g = {"rows": g}
        generators.append(decode_matrix(g, spec=spec, n=n, path=sub))
    return spec, n, generators


def encode_group(G):
    return {
        "schema": REPORT_SCHEMA,
        "field": encode_field(G.spec),
        "n": G.n,
        "generators": [[[int(v) for v in row] for row in g.rows()] for g in G.generators],
    }


# ──────────────────────────────────────────────
# 根系、表示權重
# ──────────────────────────────────────────────
def decode_system(obj, path="system"):
    if isinstance(obj, list):
        if not obj:
            raise MalformedInput("乘積根系不可為空", field=path)
        return product_system([decode_system(f, f"{path}[{i}]") for i, f in enumerate(obj)])
    kind = _get(obj, "type", str, path)
    rank = _get(obj, "rank", int, path)
    return root_system(kind.upper(), rank)


def decode_int_vector(value, path, length=None):
    if not isinstance(value, list) or not all(isinstance(c, int) and not isinstance(c, bool) for c in value):
        raise MalformedInput("權重必須是整數陣列", field=path)
    if length is not None and len(value) != length:
        raise MalformedInput("權重長度與秩不符", field=path, expected=length, got=len(value))
    return tuple(value)


def decode_int_vectors(obj, key, path, default=..., length=None):
    """obj[key] 須為整數陣列的陣列；錯誤帶 path.key[i]"""
    value = _get(obj, key, list, path, default=default)
    if value is None or value is default:
        return value
    return tuple(decode_int_vector(w, f"{path}.{key}[{i}]", length) for i, w in enumerate(value))


def decode_rep(obj, path="rep"):
    system = decode_system(_get(obj, "system", (dict, list), path), f"{path}.system")
    return RepWeights(system, decode_int_vectors(obj, "weights", path))


# ──────────────────────────────────────────────
# Frobenius 表
# ──────────────────────────────────────────────
def _rational(value, path):
    if isinstance(value, bool):
        raise MalformedInput("有理數格式錯誤", field=path)
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        try:
            return Fraction(value)
        except (ValueError, ZeroDivisionError):
            raise MalformedInput("有理數格式錯誤", field=path, value=value)
    if isinstance(value, list) and len(value) == 2 and all(isinstance(v, int) and not isinstance(v, bool) for v in value):
        if value[1] == 0:
            raise MalformedInput("分母不可為 0", field=path, value=value)
        return Fraction(value[0], value[1])
    raise MalformedInput("有理數必須是整數、\"a/b\" 或 [num, den]", field=path, value=repr(value))


def decode_frob_table(obj, path="table"):
    p = _get(obj, "p", int, path)
    field_obj = _get(obj, "field", (str, dict), path, default="Q")
    if isinstance(field_obj, str):
        if field_obj != "Q":
            raise MalformedInput("field 只能是 \"Q\" 或 {\"minpoly\": [...]}", field=f"{path}.field", value=field_obj)
        nf = None
    else:
        minpoly = _get(field_obj, "minpoly", list, f"{path}.field")
        if not all(isinstance(c, int) and not isinstance(c, bool) for c in minpoly):
            raise MalformedInput("minpoly 必須是整數陣列", field=f"{path}.field.minpoly")
        nf = NumberField(tuple(minpoly))
    kappa = _get(obj, "kappa_degree", int, path, default=1)
    degree = _get(obj, "degree", int, path, default=None)
    entries = []
    for i, e in enumerate(_get(obj, "entries", list, path)):
        sub = f"{path}.entries[{i}]"
        point_id = str(_get(e, "id", (str, int), sub))
        raw = _get(e, "coeffs", list, sub)
        if nf is None:
            coeffs = [_rational(c, f"{sub}.coeffs[{j}]") for j, c in enumerate(raw)]
        else:
            coeffs = []
            for j, c in enumerate(raw):
                if not isinstance(c, list) or len(c) != nf.degree:
                    raise MalformedInput("數域係數必須是長度 [E:Q] 的向量", field=f"{sub}.coeffs[{j}]", expected=nf.degree)
                coeffs.append(tuple(_rational(x, f"{sub}.coeffs[{j}][{k}]") for k, x in enumerate(c)))
        try:
            poly = exact_polynomial(coeffs, nf)
        except MalformedInput as exc:
            exc.witness.setdefault("field", f"{sub}.coeffs")
            raise
        entries.append(FrobEntry(point_id, _get(e, "residue_degree", int, sub, default=1), _get(e, "q", int, sub), poly))
    ids = [e.point_id for e in entries]
    if len(set(ids)) != len(ids):
        raise MalformedInput("entries 的 id 重複", field=f"{path}.entries")
    return FrobTable(p, nf, tuple(entries), kappa, degree)


def encode_frob_table(table):
    return {
        "schema": REPORT_SCHEMA,
        "p": table.p,
        "field": "Q" if table.field is None else table.field.to_json(),
        "kappa_degree": table.kappa_degree,
        "degree": table.degree,
        "entries": [
            {"id": e.point_id, "residue_degree": e.residue_degree, "q": e.q, "coeffs": e.poly.to_json()}
            for e in table.entries
        ],
    }


# ──────────────────────────────────────────────
# 報告輸出
# ──────────────────────────────────────────────
def dumps_report(report):
    """鍵排序、固定縮排：同樣輸入產生同樣位元組（timings 除外）"""
    return json.dumps(jsonable(report), sort_keys=True, ensure_ascii=False, indent=2)
