"""
批次前端：JSON 輸入、子命令分派、RunReport 輸出

dispatch(argv) 永遠回傳 (exit code, report)；0 = 通過、1 = 數學檢查失敗、2 = 輸入錯誤。
"""
import argparse
import hashlib
import time
from dataclasses import dataclass, field
from pathlib import Path

from loguru import logger

from py_module.codec import (
    decode_field,
    decode_group,
    decode_frob_table,
    decode_int_vector,
    decode_int_vectors,
    decode_matrix,
    decode_rep,
    load_json,
)
from py_module.config import REPORT_SCHEMA, TOOL_VERSION, Configuration
from py_module.envelope import (
    is_absolutely_irreducible,
    is_saturated_points,
    log_span,
    nori_envelope,
    saturation_closure,
    saturation_witness,
)
from py_module.exceptions import (
    CharTooSmall,
    ManifestError,
    MalformedInput,
    SaturateError,
    UnknownCommand,
)
from py_module.frobenius import compat_check, validate_table
from py_module.matgrp import gamma_plus, group_closure, is_normal_subgroup
from py_module.rootdata import (
    alcove_pairing,
    coxeter_number,
    coxeter_via_rho,
    dynkin_height,
    low_alcove_check,
    root_system,
    weight_conditions,
)
from py_module.weilres import (
    restriction_context,
    restriction_height,
    restriction_height_via_weights,
    weilres_group,
    weilres_saturation_check,
    weilres_saturation_compare,
)

COMMANDS = (
    "envelope",
    "saturate-check",
    "gamma-plus",
    "irreducible",
    "height",
    "coxeter",
    "alcove",
    "weights-check",
    "weilres",
    "frob",
    "corpus",
)


@dataclass
class RunReport:
    command: list
    results: dict = None
    passed: bool = False
    error: dict = None
    inputs_digest: str = ""
    timings: dict = field(default_factory=dict)

    def to_dict(self):
        report = {
            "schema": REPORT_SCHEMA,
            "version": TOOL_VERSION,
            "command": list(self.command),
            "inputs_digest": self.inputs_digest,
            "passed": self.passed,
            "results": self.results,
            "timings": self.timings,
        }
        if self.error is not None:
            report["error"] = self.error
        return report


class _ReportingParser(argparse.ArgumentParser):
    """argparse 的錯誤改丟例外，報告照樣輸出"""

    def error(self, message):
        if "invalid choice" in message:
            raise UnknownCommand(f"未知的子命令: {message}", choices=list(COMMANDS))
        raise MalformedInput(f"參數錯誤: {message}", argv_error=message)


def build_parser():
    parser = _ReportingParser(prog="saturate", description="有限域矩陣群 saturation 與 Frobenius 表檢查工具")
    parser.add_argument("item", choices=COMMANDS, help="執行項目")
    parser.add_argument("inputs", nargs="*", help="輸入 JSON 檔（frob 另需動作 validate / compat）")
    parser.add_argument("--cap", type=int, default=None, help="群閉包元素上限（預設取 SATURATE_CAP）")
    parser.add_argument("--ext", type=int, default=1, help="saturation 使用的擴張次數 e（F_{q^e}）")
    parser.add_argument("--type", dest="kind", type=str, help="根系型別 A–G")
    parser.add_argument("--rank", type=int, help="根系秩")
    parser.add_argument("--mu", type=str, default=None, help="dominant weight，逗號分隔 fundamental 座標")
    parser.add_argument("--n", type=int, default=None, help="表示維度（alcove 檢查用）")
    parser.add_argument("--ell", type=int, default=None, help="係數域特徵 ℓ")
    parser.add_argument("--weight", type=int, default=None, help="frob validate 的 purity 權重")
    parser.add_argument("--down-to", dest="down_to", type=str, default=None, help="weilres 的小域描述 JSON")
    parser.add_argument("--compare", action="store_true", help="weilres：同時比較兩種 saturation 順序")
    parser.add_argument("--point", type=str, default=None, help="frob compat 的 point id")
    parser.add_argument("--matrix", type=str, default=None, help="frob compat 的矩陣 JSON")
    parser.add_argument("--root", type=int, default=None, help="frob compat：minpoly 在 F_{ℓ^k} 中的根（整數表示）")
    return parser


class _Run:
    """單次執行的輸入紀錄（inputs_digest 用）"""

    def __init__(self, config, base=None):
        self.config = config
        self.base = Path(base) if base else None
        self.raw = []

    def load(self, path):
        path = Path(path)
        if self.base is not None and not path.is_absolute():
            path = self.base / path
        obj, raw = load_json(path)
        self.raw.append(raw)
        return obj

    def digest(self):
        h = hashlib.sha256()
        for raw in self.raw:
            h.update(hashlib.sha256(raw).digest())
        return h.hexdigest()


def _need(args, count, usage):
    if len(args.inputs) < count:
        raise MalformedInput(f"缺少輸入檔：{usage}", usage=usage, got=list(args.inputs))


def _load_group(run, path, cap):
    _, _, gens = decode_group(run.load(path), max_order=run.config.MAX_FIELD_ORDER)
    return group_closure(gens, cap=cap)


# ──────────────────────────────────────────────
# 子命令
# ──────────────────────────────────────────────
def _cmd_envelope(args, run, cap):
    _need(args, 1, "envelope <group.json> [--ext e]")
    G = _load_group(run, args.inputs[0], cap)
    # ℓ < 2n 時 nori_envelope 丟 CharTooSmall，以 exit 1 回報
    pair = nori_envelope(G, cap=cap)
    E = pair.group
    results = {
        "field": G.spec.label(),
        "n": G.n,
        "order": E.order,
        "lie_dim": pair.lie.dim,
        "prime_lie_dim": log_span(E, "prime").dim,
        "saturated": is_saturated_points(E),
        "irreducible": is_absolutely_irreducible(E),
        "stable": pair.stable,
        "iterations": pair.iterations,
        "gamma_plus_order": pair.gamma_plus_order,
        "input": {
            "order": G.order,
            "lie_dim": log_span(G, "full").dim,
            "prime_lie_dim": log_span(G, "prime").dim,
            "saturated": is_saturated_points(G),
            "irreducible": is_absolutely_irreducible(G),
        },
    }
    if args.ext > 1:
        sat = saturation_closure(G, args.ext, cap=cap)
        results["saturation"] = {"extension_degree": args.ext, "field": sat.spec.label(), "order": sat.order}
    return results, True


def _cmd_saturate_check(args, run, cap):
    _need(args, 1, "saturate-check <group.json> [--ext e]")
    G = _load_group(run, args.inputs[0], cap)
    if args.ext > 1:
        H = saturation_closure(G, args.ext, cap=cap)
        results = {"order": G.order, "saturation_order": H.order, "extension_degree": args.ext}
        return results, True
    witness = saturation_witness(G)
    return {"order": G.order, "saturated": witness is None, "witness": witness}, witness is None


def _cmd_gamma_plus(args, run, cap):
    _need(args, 1, "gamma-plus <group.json>")
    G = _load_group(run, args.inputs[0], cap)
    gp = gamma_plus(G, cap=cap)
    normal = is_normal_subgroup(gp, G)
    return {"order": G.order, "gamma_plus_order": gp.order, "normal": normal}, normal


def _cmd_irreducible(args, run, cap):
    _need(args, 1, "irreducible <group.json>")
    G = _load_group(run, args.inputs[0], cap)
    verdict = is_absolutely_irreducible(G)
    return {"order": G.order, "irreducible": verdict}, verdict


def _cmd_height(args, run, cap):
    _need(args, 1, "height <rep.json> [--ell ℓ]")
    obj = run.load(args.inputs[0])
    rep = decode_rep(obj)
    highest, lowest = (
        None if obj.get(key) is None else decode_int_vector(obj[key], f"rep.{key}") for key in ("highest", "lowest")
    )
    ht = dynkin_height(rep, highest, lowest)
    results = {"system": rep.system.label, "dim": rep.dim, "height": ht}
    passed = True
    if args.ell is not None:
        passed = args.ell > ht
        results["ell"] = args.ell
        results["low_height"] = passed
    return results, passed


def _system_from_flags(args):
    if not args.kind or args.rank is None:
        raise MalformedInput("需要 --type 與 --rank", type=args.kind, rank=args.rank)
    return root_system(args.kind.upper(), args.rank)


def _cmd_coxeter(args, run, cap):
    rs = _system_from_flags(args)
    h = coxeter_number(rs)
    via_rho = coxeter_via_rho(rs)
    if h != via_rho:
        return {"h": h, "witness": {"highest_root_sum": h, "rho_pairing": via_rho}}, False
    return {"h": h}, True


def _parse_mu(text, rank):
    if text is None:
        return (0,) * rank
    try:
        return tuple(int(c) for c in text.split(","))
    except ValueError:
        raise MalformedInput("--mu 必須是逗號分隔的整數", mu=text)


def _cmd_alcove(args, run, cap):
    rs = _system_from_flags(args)
    if args.n is None or args.ell is None:
        raise MalformedInput("alcove 需要 --n 與 --ell", n=args.n, ell=args.ell)
    mu = _parse_mu(args.mu, rs.rank)
    pairing = alcove_pairing(rs, mu)
    verdict = low_alcove_check(rs, mu, args.n, args.ell)
    return {"system": rs.label, "mu": list(mu), "pairing": pairing, "n": args.n, "ell": args.ell, "low_alcove": verdict}, verdict


def _cmd_weights_check(args, run, cap):
    _need(args, 1, "weights-check <weights.json> --ell ℓ")
    obj = run.load(args.inputs[0])
    if not isinstance(obj, dict) or not isinstance(obj.get("weights"), list):
        raise MalformedInput("weights 檔案需要 weights 陣列", field="weights")
    weights = decode_int_vectors(obj, "weights", "input")
    roots = decode_int_vectors(obj, "roots", "input", default=None)
    candidates = decode_int_vectors(obj, "candidate_roots", "input", default=None)
    ell = args.ell if args.ell is not None else obj.get("ell")
    if not isinstance(ell, int):
        raise MalformedInput("需要 --ell 或檔案內的 ell", field="ell")
    report = weight_conditions(weights, ell, roots, candidates)
    return report.to_dict(), report.passed


def _cmd_weilres(args, run, cap):
    _need(args, 1, "weilres <group.json> --down-to <field.json>")
    if args.down_to is None:
        raise MalformedInput("weilres 需要 --down-to", field="down_to")
    G = _load_group(run, args.inputs[0], cap)
    small_obj = run.load(args.down_to)
    small = decode_field(small_obj.get("field", small_obj) if isinstance(small_obj, dict) else small_obj)
    ctx = restriction_context(G.spec, small)
    H = weilres_group(ctx, G)
    try:
        verdict = weilres_saturation_check(ctx, G, strict=False)
    except CharTooSmall as e:
        logger.warning(f"[CLI] ⚠️ Res G 的 u^t 無定義: {e.message}")
        verdict = None
    results = {
        "big": G.spec.label(),
        "small": small.label(),
        "d": ctx.d,
        "dim_w": H.n,
        "order": H.order,
        "lie_dim": log_span(H, "prime").dim if small.ell > H.n else None,
        "restriction_height": restriction_height(ctx.d, G.n),
        "weights_height": restriction_height_via_weights(ctx.d, G.n),
        "hypothesis_ok": small.ell > H.n - ctx.d,
        "saturated": verdict.saturated if verdict is not None else None,
        "saturation_witness": verdict.witness if verdict is not None else None,
    }
    if args.compare:
        results["compare"] = weilres_saturation_compare(ctx, G, cap=cap)
    return results, verdict is None or verdict.saturated


def _cmd_frob(args, run, cap):
    _need(args, 2, "frob validate|compat <table.json>")
    action, path = args.inputs[0], args.inputs[1]
    table = decode_frob_table(run.load(path))
    if action == "validate":
        report = validate_table(table, args.weight, tol=run.config.PURITY_TOL, dps=run.config.MPMATH_DPS)
        return report, report["passed"]
    if action == "compat":
        if args.point is None or args.matrix is None:
            raise MalformedInput("frob compat 需要 --point 與 --matrix", point=args.point, matrix=args.matrix)
        M = decode_matrix(run.load(args.matrix))
        root = M.spec.element(args.root) if args.root is not None else None
        ok = compat_check(table, args.point, M, root=root)
        return {"point": args.point, "field": M.spec.label(), "compatible": ok}, ok
    raise UnknownCommand(f"frob 沒有動作 {action}", action=action, choices=["validate", "compat"])


def _cmd_corpus(args, run, cap):
    _need(args, 1, "corpus <manifest.json>")
    report = corpus_run(args.inputs[0], run.config, run)
    return report, report["passed"]


_HANDLERS = {
    "envelope": _cmd_envelope,
    "saturate-check": _cmd_saturate_check,
    "gamma-plus": _cmd_gamma_plus,
    "irreducible": _cmd_irreducible,
    "height": _cmd_height,
    "coxeter": _cmd_coxeter,
    "alcove": _cmd_alcove,
    "weights-check": _cmd_weights_check,
    "weilres": _cmd_weilres,
    "frob": _cmd_frob,
    "corpus": _cmd_corpus,
}


def _execute(argv, config, base=None):
    """回傳 (exit code, RunReport)"""
    argv = [str(a) for a in argv]
    report = RunReport(command=argv)
    run = _Run(config, base)
    start = time.perf_counter()
    try:
        args = build_parser().parse_args(argv)
        cap = args.cap if args.cap is not None else config.CLOSURE_CAP
        if args.ext < 1:
            raise MalformedInput("--ext 必須 ≥ 1", ext=args.ext)
        logger.info(f"[CLI] 執行 {args.item} {' '.join(args.inputs)}")
        results, passed = _HANDLERS[args.item](args, run, cap)
        report.results, report.passed = results, bool(passed)
        code = 0 if passed else 1
        if not passed:
            logger.warning(f"[CLI] ⚠️ {args.item} 檢查未通過")
    except SaturateError as exc:
        logger.error(f"[CLI] ❌ {type(exc).__name__}: {exc.message}")
        report.error = exc.to_dict()
        code = exc.exit_code
    report.inputs_digest = run.digest()
    report.timings = {"total_seconds": round(time.perf_counter() - start, 6)}
    return code, report


def dispatch(argv, config=None):
    config = config or Configuration()
    code, report = _execute(argv, config)
    return code, report.to_dict()


# ──────────────────────────────────────────────
# corpus
# ──────────────────────────────────────────────
def _diff(expected, actual, path="results"):
    """expected 是 actual 的子集合；回傳不一致的路徑"""
    if isinstance(expected, dict):
        if not isinstance(actual, dict):
            return [{"path": path, "expected": expected, "actual": actual}]
        out = []
        for key, value in expected.items():
            out.extend(_diff(value, actual.get(key), f"{path}.{key}"))
        return out
    if expected != actual:
        return [{"path": path, "expected": expected, "actual": actual}]
    return []


def corpus_run(manifest, config=None, parent=None):
    """
    manifest: {"schema": 1, "checks": [{"name", "argv", "expect": {"exit", "results"}}]}
    argv 內的相對路徑以 manifest 所在目錄為基準。
    """
    config = config or Configuration()
    path = Path(manifest)
    if parent is not None:
        obj = parent.load(path)
    else:
        obj, _ = load_json(path)
    if not isinstance(obj, dict) or not isinstance(obj.get("checks"), list):
        raise ManifestError("manifest 需要 checks 陣列", path=str(path))
    base = path.parent

    rows = []
    mismatches = []
    for i, check in enumerate(obj["checks"]):
        if not isinstance(check, dict) or not isinstance(check.get("argv"), list) or not check["argv"]:
            raise ManifestError("每個 check 需要非空 argv", index=i)
        name = check.get("name", f"check-{i}")
        if check["argv"][0] == "corpus":
            raise ManifestError("manifest 內不可巢狀呼叫 corpus", index=i, name=name)
        expect = check.get("expect", {})
        if not isinstance(expect, dict):
            raise ManifestError("expect 必須是物件", index=i, name=name)
        argv = [str(base / a) if str(a).endswith(".json") else a for a in check["argv"]]
        code, sub = _execute(argv, config)
        diff = []
        want_exit = expect.get("exit", 0)
        if code != want_exit:
            diff.append({"path": "exit", "expected": want_exit, "actual": code})
        if "results" in expect:
            diff.extend(_diff(expect["results"], sub.results))
        if "error" in expect:
            actual_type = sub.error["type"] if sub.error else None
            if expect["error"] != actual_type:
                diff.append({"path": "error.type", "expected": expect["error"], "actual": actual_type})
        ok = not diff
        if not ok:
            mismatches.append({"name": name, "diff": diff})
            logger.warning(f"[CLI] ❌ corpus 項目 {name} 不符: {diff}")
        else:
            logger.info(f"[CLI] ✅ corpus 項目 {name}")
        rows.append({"name": name, "exit": code, "ok": ok, "inputs_digest": sub.inputs_digest})

    logger.info(f"[CLI] corpus：{len(rows)} 項，不符 {len(mismatches)} 項")
    return {"checks": rows, "count": len(rows), "mismatches": mismatches, "passed": not mismatches}
