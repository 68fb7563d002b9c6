"""
Weil restriction：F_{q^d} 上的矩陣 / 群 → F_q 上 nd 維

座標約定：W = F_q^{nd} 的基底依 (i, j) ↦ i·d + j 排列（i 為 V 的座標、j 為 basis 索引）。
座標求解在 F_ℓ 上做：F_{q^d} 以 {s_a · b_j} 為 F_ℓ 基底，解一次 K×K 線性系統後快取反矩陣。
"""
from dataclasses import dataclass, field

import galois
import numpy as np
from loguru import logger

from py_module.config import DEFAULT_CLOSURE_CAP
from py_module.envelope import log_span, saturation_closure, saturation_witness
from py_module.exceptions import FieldMismatch, HypothesisViolated, MalformedInput
from py_module.ff import embedding_table, field_generator, int_to_digits
from py_module.matgrp import (
    ExactCharPoly,
    FiniteMatrixGroup,
    SquareMatrix,
    as_ints,
    charpoly,
)
from py_module.rootdata import (
    RepWeights,
    dynkin_height,
    product_system,
    rem_dynkin_height,
    root_system,
    standard_weights,
)


@dataclass(frozen=True, eq=False)
class RestrictionContext:
    big: object
    small: object
    basis: tuple
    d: int
    _solver: galois.FieldArray = field(repr=False)

    @property
    def basis_ints(self):
        return np.array([int(b) for b in self.basis], dtype=np.int64)


def restriction_context(big, small, basis=None):
    if big.ell != small.ell or big.degree % small.degree != 0:
        raise FieldMismatch(
            f"{big.label()} 不是 {small.label()} 的擴張", big=big.to_json(), small=small.to_json()
        )
    d = big.degree // small.degree
    if basis is None:
        g = field_generator(big)
        basis = tuple(g ** j for j in range(d)) if d > 1 else (big.one(),)
    else:
        basis = tuple(big.element(b) for b in basis)
    if len(basis) != d:
        raise MalformedInput("basis 長度必須等於 [F_{q^d} : F_q]", expected=d, got=len(basis))

    ell, K, ks = big.ell, big.degree, small.degree
    GFl = galois.GF(ell)
    small_in_big = embedding_table(small, big)[[ell ** a for a in range(ks)]]
    products = big.gf(small_in_big)[np.newaxis, :] * big.gf([int(b) for b in basis])[:, np.newaxis]
    # 欄：(j, a) ↦ j·ks + a
    columns = int_to_digits(as_ints(products).reshape(d * ks), ell, K)
    matrix = GFl(columns.T)
    if np.linalg.matrix_rank(matrix) != K:
        raise MalformedInput("basis 在 F_q 上線性相依", basis=[int(b) for b in basis])
    solver = np.linalg.inv(matrix)
    logger.debug(f"[WEILRES] {big.label()}/{small.label()}，d = {d}，basis = {[int(b) for b in basis]}")
    return RestrictionContext(big, small, basis, d, solver)


def coordinates(ctx, values):
    """F_{q^d} 元素（整數表示陣列）→ (..., d) 個 F_q 座標（整數表示）"""
    values = np.asarray(values, dtype=np.int64)
    ell, K, ks = ctx.big.ell, ctx.big.degree, ctx.small.degree
    GFl = galois.GF(ell)
    digits = GFl(int_to_digits(values.reshape(-1), ell, K))
    coords = as_ints(digits @ ctx._solver.T).reshape(-1, ctx.d, ks)
    small_ints = (coords * (ell ** np.arange(ks, dtype=np.int64))).sum(axis=-1)
    return small_ints.reshape(values.shape + (ctx.d,))


def _restrict_stack(ctx, stack):
    m, n = stack.shape[0], stack.shape[-1]
    d = ctx.d
    products = stack[..., np.newaxis] * ctx.big.gf(ctx.basis_ints)
    coords = coordinates(ctx, as_ints(products))          # (m, r, i, j, j')
    block = coords.transpose(0, 1, 4, 2, 3).reshape(m, n * d, n * d)
    return ctx.small.gf(block)


def weilres_embed(ctx, M, n=None):
    if M.spec != ctx.big:
        raise FieldMismatch("矩陣不在 F_{q^d} 上", matrix_field=M.spec.label(), big=ctx.big.label())
    if n is not None and n != M.n:
        raise MalformedInput("n 與矩陣大小不符", n=n, matrix_n=M.n)
    return SquareMatrix(ctx.small, _restrict_stack(ctx, M.data[np.newaxis])[0])


def weilres_group(ctx, G):
    if G.spec != ctx.big:
        raise FieldMismatch("群不在 F_{q^d} 上", group_field=G.spec.label(), big=ctx.big.label())
    stack = _restrict_stack(ctx, G.stack)
    gens = [weilres_embed(ctx, g) for g in G.generators]
    H = FiniteMatrixGroup.from_elements(ctx.small, G.n * ctx.d, stack, generators=gens)
    logger.info(f"[WEILRES] Res {G.spec.label()}→{ctx.small.label()}：階 {G.order} → {H.order}")
    return H


def restriction_height(d, dimV):
    if d < 1 or dimV < 1:
        raise MalformedInput("d 與 dim V 必須 ≥ 1", d=d, dimV=dimV)
    # = dim W − d，W = Res V 的維度為 d·dim V
    return d * (dimV - 1)


def restriction_height_via_weights(d, dimV):
    """
    d 個共軛直和項 V^σ 的 Rem-Dynkin 和 Σ m_i（λ⁺、λ⁻ 取各項最高 / 最低權重的串接），
    以及 W 的權重上取 max 的高度（每一項只碰到自己的因子，故為 dim V − 1）。
    """
    if dimV == 1:
        return {"orbit_sum": 0, "max_weight_height": 0}
    rs = root_system("A", dimV - 1)
    system = product_system([rs] * d)
    eps = standard_weights(dimV)
    zero = (0,) * rs.rank
    weights = []
    for s in range(d):
        for e in eps:
            weights.append(zero * s + e + zero * (d - s - 1))
    highest = eps[0] * d
    lowest = eps[-1] * d
    return {
        "orbit_sum": rem_dynkin_height(system, highest, lowest),
        "max_weight_height": dynkin_height(RepWeights(system, tuple(weights))),
    }


def norm_charpoly(ctx, M):
    """Π_{i<d} σ^i(charpoly(M))，σ 為 x ↦ x^q；係數落回 F_q"""
    P = charpoly(M).poly
    q = ctx.small.order
    result = galois.Poly([1], field=ctx.big.gf)
    for i in range(ctx.d):
        result = result * galois.Poly(P.coeffs ** (q ** i), field=ctx.big.gf)
    back = {int(v): s for s, v in enumerate(embedding_table(ctx.small, ctx.big))}
    coeffs = []
    for c in reversed(result.coeffs):
        if int(c) not in back:
            raise FieldMismatch("範數多項式係數不在 F_q 中", coefficient=int(c))
        coeffs.append(back[int(c)])
    return ExactCharPoly(ctx.small, tuple(coeffs))


@dataclass(frozen=True)
class RestrictedSaturation:
    """點層級檢查結果；hypothesis_ok 為 ℓ > dim W − d 是否成立。真值即 saturated。"""
    saturated: bool
    hypothesis_ok: bool
    ell: int
    dim_w: int
    d: int
    witness: dict = None

    def __bool__(self):
        return self.saturated

    def to_dict(self):
        return {
            "saturated": self.saturated,
            "hypothesis_ok": self.hypothesis_ok,
            "ell": self.ell,
            "dim_w": self.dim_w,
            "d": self.d,
            "witness": self.witness,
        }


def weilres_saturation_check(ctx, G, strict=True):
    """
    Res G 在 GL(W) 中的點層級 saturation（u^t 截在么冪元素的冪零階，見 saturation_witness）。
    檢查一律執行；ℓ ≤ dim W − d 時結果標記 hypothesis_ok = False，
    strict 模式另外丟 HypothesisViolated（witness 內含檢查結果）。
    """
    dim_w = G.n * ctx.d
    hypothesis_ok = ctx.small.ell > dim_w - ctx.d
    witness = saturation_witness(weilres_group(ctx, G))
    verdict = RestrictedSaturation(witness is None, hypothesis_ok, ctx.small.ell, dim_w, ctx.d, witness)
    if not hypothesis_ok:
        msg = f"ℓ = {ctx.small.ell} ≤ dim W − d = {dim_w - ctx.d}"
        if strict:
            raise HypothesisViolated(msg, **verdict.to_dict())
        logger.warning(f"[WEILRES] ⚠️ {msg}，結果僅供參考: saturated = {verdict.saturated}")
    return verdict


def weilres_saturation_compare(ctx, H, cap=DEFAULT_CLOSURE_CAP):
    """
    兩邊的點資料：(Res H)^sat（F_q 上閉包）與 Res(H^sat)（F_{q^d} 上閉包後再限制）。
    只報告階與 F_ℓ 上 Lie 維度，不宣稱任何 scheme 層級的包含關係。
    """
    res_then_sat = saturation_closure(weilres_group(ctx, H), 1, cap=cap)
    sat_then_res = weilres_group(ctx, saturation_closure(H, 1, cap=cap))
    report = {
        "res_then_sat": {"order": res_then_sat.order, "lie_dim": log_span(res_then_sat, "prime").dim},
        "sat_then_res": {"order": sat_then_res.order, "lie_dim": log_span(sat_then_res, "prime").dim},
        "contained": res_then_sat.issubset(sat_then_res),
    }
    logger.info(f"[WEILRES] saturation 與 Weil restriction 比較: {report}")
    return report
