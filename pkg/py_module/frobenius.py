"""
Frobenius 多項式表的精確檢查：plain（特徵 p）、Q-Weil purity、mod λ 相容性

係數表示：E = Q 時每個係數是 Fraction；E = Q(θ) 時每個係數是 power basis 上的
Fraction 向量 (r_0, ..., r_{m-1})，代表 Σ r_k θ^k。
數值部分一律用 mpmath 高精度求根並附誤差估計；失敗就丟 RootFindingFailure，不默默放行。
"""
from dataclasses import dataclass, field
from fractions import Fraction

import galois
import mpmath
import pandas as pd
import sympy
from loguru import logger
from mpmath import mp, mpc, mpf, polyroots, workdps

from py_module.config import DEFAULT_MPMATH_DPS, DEFAULT_PURITY_TOL
from py_module.exceptions import (
    BadDenominator,
    DegenerateField,
    EllEqualsP,
    FieldMismatch,
    MalformedInput,
    NotMonic,
    RootFindingFailure,
    WrongField,
)
from py_module.matgrp import charpoly

_T = sympy.Symbol("T")
_THETA = sympy.Symbol("theta")
_U = sympy.Symbol("u")
_ROOT_ATTEMPTS = 4


# ──────────────────────────────────────────────
# 型別
# ──────────────────────────────────────────────
@dataclass(frozen=True)
class NumberField:
    """E = Q[x]/(minpoly)，minpoly 低次在前、monic、整係數"""
    minpoly: tuple

    @property
    def degree(self):
        return len(self.minpoly) - 1

    def sympy_minpoly(self, var=_THETA):
        return sympy.Poly(list(reversed(self.minpoly)), var)

    def label(self):
        return f"Q[x]/({self.sympy_minpoly(sympy.Symbol('x')).as_expr()})"

    def to_json(self):
        return {"minpoly": list(self.minpoly)}


@dataclass(frozen=True)
class ExactPolynomial:
    coeffs: tuple
    field: NumberField = None

    @property
    def degree(self):
        return len(self.coeffs) - 1

    @property
    def is_rational(self):
        return self.field is None

    @property
    def field_degree(self):
        return 1 if self.field is None else self.field.degree

    def components(self):
        """每個係數的有理分量（E = Q 時長度 1）"""
        return [c if isinstance(c, tuple) else (c,) for c in self.coeffs]

    def to_json(self):
        def enc(x):
            return [x.numerator, x.denominator]
        if self.field is None:
            return [enc(c) for c in self.coeffs]
        return [[enc(x) for x in c] for c in self.coeffs]


@dataclass(frozen=True)
class FrobEntry:
    point_id: str
    residue_degree: int
    q: int
    poly: ExactPolynomial


@dataclass(frozen=True)
class FrobTable:
    p: int
    field: NumberField
    entries: tuple
    kappa_degree: int = 1
    degree: int = None

    def entry(self, point_id):
        for e in self.entries:
            if e.point_id == point_id:
                return e
        raise MalformedInput(f"表中沒有 {point_id}", point_id=point_id)


@dataclass
class PurityReport:
    weight: int
    tolerance: float
    max_deviation: float
    deviations: list
    passed: bool
    exact_norm_ok: bool
    precision: int

    def __bool__(self):
        return self.passed

    def to_dict(self):
        return {
            "weight": self.weight,
            "tolerance": self.tolerance,
            "max_deviation": self.max_deviation,
            "deviations": self.deviations,
            "passed": self.passed,
            "exact_norm_ok": self.exact_norm_ok,
            "precision": self.precision,
        }


@dataclass
class PlainVerdict:
    status: str
    witness: dict = field(default_factory=dict)

    def __bool__(self):
        return self.status == "pass_necessary"


# ──────────────────────────────────────────────
# 建構與 sympy 轉換
# ──────────────────────────────────────────────
def _frac(x):
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (list, tuple)) and len(x) == 2 and all(isinstance(v, int) for v in x):
        if x[1] == 0:
            raise MalformedInput("分母不可為 0", value=list(x))
        return Fraction(x[0], x[1])
    if isinstance(x, int) and not isinstance(x, bool):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise MalformedInput("無法解析的有理數", value=repr(x))


def _is_p_power(n, p):
    n = abs(int(n))
    if n == 0:
        return False
    while n % p == 0:
        n //= p
    return n == 1


def _supported_on(n, primes):
    n = abs(int(n))
    for p in primes:
        while n % p == 0:
            n //= p
    return n == 1


def exact_polynomial(coeffs, field=None, primes=None):
    """
    低次在前的係數建構 monic 多項式；primes 給定時驗證分母只含這些質數。
    """
    if not coeffs:
        raise MalformedInput("多項式不可為空")
    if field is None:
        parsed = tuple(_frac(c) for c in coeffs)
        leading_ok = parsed[-1] == 1
    else:
        m = field.degree
        parsed = []
        for c in coeffs:
            if isinstance(c, (list, tuple)) and len(c) == m:
                parsed.append(tuple(_frac(x) for x in c))
            else:
                raise MalformedInput("數域係數必須是長度 [E:Q] 的向量", expected=m, value=repr(c))
        parsed = tuple(parsed)
        leading_ok = parsed[-1] == (Fraction(1),) + (Fraction(0),) * (m - 1)
    if not leading_ok:
        raise NotMonic("多項式必須 monic", leading=str(parsed[-1]))
    poly = ExactPolynomial(parsed, field)
    if primes:
        for i, comp in enumerate(poly.components()):
            for x in comp:
                if not _supported_on(x.denominator, primes):
                    raise BadDenominator("分母含有未宣告的質數", index=i, denominator=x.denominator, primes=list(primes))
    return poly


def _coeff_expr(c):
    if isinstance(c, tuple):
        return sum(sympy.Rational(x.numerator, x.denominator) * _THETA ** k for k, x in enumerate(c))
    return sympy.Rational(c.numerator, c.denominator)


def _to_expr(P, var=_T):
    return sum(_coeff_expr(c) * var ** i for i, c in enumerate(P.coeffs))


def _reduce_theta(expr, field):
    """θ 的多項式對 minpoly 取餘，回傳分量向量"""
    m = field.degree
    rem = sympy.rem(sympy.Poly(expr, _THETA), field.sympy_minpoly())
    out = [Fraction(0)] * m
    for (k,), v in rem.terms():
        v = sympy.Rational(v)
        out[k] = Fraction(int(v.p), int(v.q))
    return tuple(out)


def _from_expr(expr, field):
    poly = sympy.Poly(sympy.expand(expr), _T)
    n = poly.degree()
    coeffs = []
    for i in range(n + 1):
        c = poly.coeff_monomial(_T ** i)
        if field is None:
            c = sympy.Rational(c)
            coeffs.append(Fraction(int(c.p), int(c.q)))
        else:
            coeffs.append(_reduce_theta(sympy.expand(c), field))
    return ExactPolynomial(tuple(coeffs), field)


def _same_field(P, R):
    if P.field != R.field:
        raise WrongField("兩個多項式的係數域不同")


def poly_mul(P, R):
    _same_field(P, R)
    return _from_expr(_to_expr(P) * _to_expr(R), P.field)


def _field_inverse(c, field):
    if field is None:
        return 1 / c
    inv = sympy.invert(_coeff_expr(c), field.sympy_minpoly().as_expr(), _THETA)
    return _reduce_theta(sympy.expand(inv), field)


def _field_mul(a, b, field):
    if field is None:
        return a * b
    return _reduce_theta(sympy.expand(_coeff_expr(a) * _coeff_expr(b)), field)


def _is_zero(c):
    return all(x == 0 for x in (c if isinstance(c, tuple) else (c,)))


def reversed_monic(P):
    """T^n P(1/T) / P(0)：根變成倒數"""
    c0 = P.coeffs[0]
    if _is_zero(c0):
        raise MalformedInput("常數項為 0，無法取倒數多項式")
    inv = _field_inverse(c0, P.field)
    return ExactPolynomial(tuple(_field_mul(c, inv, P.field) for c in reversed(P.coeffs)), P.field)


def power_roots_polynomial(P, r):
    """根全部取 r 次方：Res_u(P(u), u^r − T)，再正規化為 monic"""
    res = sympy.resultant(_to_expr(P, _U), _U ** r - _T, _U)
    poly = sympy.Poly(sympy.expand(res), _T)
    lead = poly.LC()
    return _from_expr(sympy.expand(res / lead), P.field)


def squared_roots_polynomial(P):
    return power_roots_polynomial(P, 2)


# ──────────────────────────────────────────────
# plain
# ──────────────────────────────────────────────
def _plain_rational_witness(P, p):
    for i, c in enumerate(P.coeffs):
        if not _is_p_power(c.denominator, p):
            return {"reason": "denominator", "index": i, "coefficient": str(c)}
    c0 = P.coeffs[0]
    if c0 == 0 or not (_is_p_power(c0.numerator, p) and _is_p_power(c0.denominator, p)):
        return {"reason": "constant_term", "constant_term": str(c0), "p": p}
    return None


def is_plain_rational(P, p):
    """
    monic 且係數在 Z[1/p]：根在 Z[1/p] 上整；
    倒數多項式 T^n P(1/T)/P(0) 也在 Z[1/p][T] 中 ⇔ P(0) = ±p^m，於是根與其倒數都整。
    """
    if not P.is_rational:
        raise WrongField("is_plain_rational 只處理 E = Q", field=P.field.to_json())
    if P.coeffs[-1] != 1:
        raise NotMonic("多項式必須 monic", leading=str(P.coeffs[-1]))
    return _plain_rational_witness(P, p) is None


def absolute_norm(c, field):
    """N_{E/Q}(c) = Res(minpoly, c(θ))（minpoly monic）"""
    if field is None:
        return c
    m = field.degree
    expr = _coeff_expr(c)
    if not expr.has(_THETA):
        value = sympy.Rational(expr) ** m
    else:
        value = sympy.Rational(sympy.resultant(field.sympy_minpoly().as_expr(), expr, _THETA))
    return Fraction(int(value.p), int(value.q))


def _check_field(field):
    if field is None:
        return
    if field.degree < 1 or field.minpoly[-1] != 1:
        raise DegenerateField("minpoly 必須是次數 ≥ 1 的 monic 多項式", minpoly=list(field.minpoly))
    if not field.sympy_minpoly().is_sqf:
        raise DegenerateField("minpoly 不是 squarefree", minpoly=list(field.minpoly))


def plain_necessary_numberfield(P, p):
    """
    數域上只檢查必要條件：(a) 分母都是 p 的冪；(b) N(P(0)) = ±p^m。
    """
    _check_field(P.field)
    for i, comp in enumerate(P.components()):
        for x in comp:
            if not _is_p_power(x.denominator, p):
                return PlainVerdict("fail", {"reason": "denominator", "index": i, "denominator": x.denominator})
    norm = absolute_norm(P.coeffs[0], P.field)
    if norm == 0 or not (_is_p_power(norm.numerator, p) and _is_p_power(norm.denominator, p)):
        return PlainVerdict("fail", {"reason": "norm_of_constant_term", "norm": str(norm), "p": p})
    return PlainVerdict("pass_necessary")


# ──────────────────────────────────────────────
# purity
# ──────────────────────────────────────────────
def _complex_embeddings(field, dps):
    if field is None:
        return [None]
    with workdps(dps):
        roots, _ = _solve(list(reversed(field.minpoly)), dps, 0.0)
    return roots


def _solve(desc_coeffs, dps, scale_tol):
    """回傳 (roots, err)；err > scale_tol 時加倍精度重試"""
    if len(desc_coeffs) == 2:
        return [-mpc(desc_coeffs[1]) / mpc(desc_coeffs[0])], mpf(0)
    steps, extra = 100, 20
    last_err = None
    for attempt in range(_ROOT_ATTEMPTS):
        try:
            roots, err = polyroots(desc_coeffs, maxsteps=steps, extraprec=extra, error=True)
        except mp.NoConvergence as exc:
            last_err = str(exc)
            steps, extra = steps * 2, extra * 2
            continue
        if scale_tol <= 0 or err <= scale_tol:
            return list(roots), err
        last_err = float(err)
        steps, extra = steps * 2, extra * 2
    raise RootFindingFailure("多項式求根未收斂", attempts=_ROOT_ATTEMPTS, dps=dps, last_error=last_err)


def _embedded_roots(P, dps, tol, target):
    """每個複嵌入下的根（list of list of mpc）"""
    out = []
    with workdps(dps):
        for theta in _complex_embeddings(P.field, dps):
            desc = []
            for c in reversed(P.coeffs):
                if theta is None:
                    desc.append(mpf(c.numerator) / c.denominator)
                else:
                    desc.append(sum((mpf(x.numerator) / x.denominator) * theta ** k for k, x in enumerate(c)))
            roots, _ = _solve(desc, dps, target * tol / 2)
            out.append(roots)
    return out


def exact_norm_identity(P, Q, w):
    """N(P(0))² = Q^{[E:Q]·n·w}（平方形式對任何奇偶都精確）"""
    norm = absolute_norm(P.coeffs[0], P.field)
    return norm ** 2 == Fraction(Q) ** (P.field_degree * P.degree * w)


def purity_check(P, Q, w, tol=DEFAULT_PURITY_TOL, dps=DEFAULT_MPMATH_DPS):
    """
    每個嵌入 ι 與根 α：| |ια| − Q^{w/2} | / Q^{w/2} ≤ tol；另附精確範數恆等式。
    """
    if Q < 2:
        raise MalformedInput("Q 必須 ≥ 2", Q=Q)
    _check_field(P.field)
    with workdps(dps):
        target = mpf(Q) ** (mpf(w) / 2)
        roots = _embedded_roots(P, dps, tol, target)
        deviations = [float(max((abs(abs(a) - target) / target for a in rs), default=mpf(0))) for rs in roots]
    max_dev = max(deviations, default=0.0)
    passed = max_dev <= tol
    exact_ok = exact_norm_identity(P, Q, w)
    if passed and not exact_ok:
        logger.warning(f"[FROB] ⚠️ 數值 purity 通過但精確範數恆等式不成立 (Q={Q}, w={w})")
    return PurityReport(w, tol, max_dev, deviations, passed, exact_ok, dps)


def block_purity_check(P, Q, w, partition, residue_degree=1, tol=DEFAULT_PURITY_TOL, dps=DEFAULT_MPMATH_DPS):
    """
    根（依 (|α|, arg α) 排序後編號）分塊相乘：|Π_block α| = Q^{w·|block|/2}；
    等價地其 residue_degree 次方根為 q = Q^{1/residue_degree} 的 q-Weil 數，權重 w·|block|。
    """
    flat = sorted(i for block in partition for i in block)
    if flat != list(range(P.degree)):
        raise MalformedInput("partition 必須恰好覆蓋所有根的索引", partition=[list(b) for b in partition], degree=P.degree)
    blocks = []
    with workdps(dps):
        base = mpf(Q) ** (mpf(1) / residue_degree)
        roots = _embedded_roots(P, dps, tol, mpf(Q) ** (mpf(w) / 2))
        worst = mpf(0)
        for rs in roots:
            ordered = sorted(rs, key=lambda a: (float(abs(a)), float(mpmath.arg(a))))
            for block in partition:
                prod = mpmath.fprod(ordered[i] for i in block)
                expected = base ** (mpf(w) * len(block) / 2)
                root_form = abs(prod) ** (mpf(1) / residue_degree)
                dev = abs(root_form - expected) / expected
                worst = max(worst, dev)
                blocks.append({"block": list(block), "deviation": float(dev), "weight": w * len(block)})
    return {"passed": float(worst) <= tol, "max_deviation": float(worst), "blocks": blocks, "base_q": float(base)}


# ──────────────────────────────────────────────
# mod ℓ / mod λ
# ──────────────────────────────────────────────
def _check_ell(ell, p):
    if p is not None and ell == p:
        raise EllEqualsP("ℓ 不可等於 p", ell=ell, p=p)


def reduce_mod(P, ell, p=None):
    """Z[1/p] → F_ℓ 逐係數約化，回傳 galois Poly over GF(ℓ)"""
    if not P.is_rational:
        raise WrongField("reduce_mod 只處理 E = Q；數域請用 reduce_mod_place", field=P.field.to_json())
    _check_ell(ell, p)
    GF = galois.GF(ell)
    out = []
    for i, c in enumerate(P.coeffs):
        if c.denominator % ell == 0:
            raise BadDenominator("分母可被 ℓ 整除", index=i, coefficient=str(c), ell=ell)
        out.append(c.numerator * pow(c.denominator, -1, ell) % ell)
    return galois.Poly(list(reversed(out)), field=GF)


def reduce_mod_place(P, ell, root, p=None):
    """
    E 的 place λ 以 minpoly 在 F_{ℓ^k} 中的一個根給出；θ ↦ root。
    """
    if P.is_rational:
        return reduce_mod(P, ell, p)
    _check_ell(ell, p)
    spec = root.spec
    if spec.ell != ell:
        raise FieldMismatch("root 的特徵不是 ℓ", root_field=spec.label(), ell=ell)
    GF = spec.gf
    r = root.value
    if int(sum((GF(c % ell) * r ** k for k, c in enumerate(P.field.minpoly)), GF(0))) != 0:
        raise MalformedInput("root 不是 minpoly mod ℓ 的根", root=int(root), minpoly=list(P.field.minpoly))
    out = []
    for i, c in enumerate(P.coeffs):
        acc = GF(0)
        for k, x in enumerate(c):
            if x.denominator % ell == 0:
                raise BadDenominator("分母可被 ℓ 整除", index=i, component=k, coefficient=str(x), ell=ell)
            acc = acc + GF(x.numerator * pow(x.denominator, -1, ell) % ell) * r ** k
        out.append(acc)
    return galois.Poly(GF(list(reversed([int(v) for v in out]))))


def compat_check(table, point_id, M, root=None):
    """charpoly(M) 是否等於 P_x mod λ（嵌入 M 的域）"""
    entry = table.entry(point_id)
    ell = M.spec.ell
    if table.field is None:
        reduced = reduce_mod(entry.poly, ell, table.p)
        coeffs = [int(c) for c in reversed(reduced.coeffs)]
    else:
        if root is None:
            raise MalformedInput("數域係數需要指定 place（minpoly 的根）", point_id=point_id)
        reduced = reduce_mod_place(entry.poly, ell, root, table.p)
        coeffs = [int(c) for c in reversed(reduced.coeffs)]
    actual = list(charpoly(M).coeffs)
    ok = actual == coeffs
    if not ok:
        logger.debug(f"[FROB] {point_id}: charpoly {actual} ≠ 約化 {coeffs}")
    return ok


def compat_check_table(table, matrices, root=None):
    rows = []
    for point_id, M in matrices.items():
        rows.append({"id": point_id, "compatible": compat_check(table, point_id, M, root)})
    df = pd.DataFrame(rows, columns=["id", "compatible"])
    return {"entries": df.to_dict(orient="records"), "passed": bool(df["compatible"].all()) if len(df) else True}


# ──────────────────────────────────────────────
# 整張表
# ──────────────────────────────────────────────
def validate_table(table, weight=None, tol=DEFAULT_PURITY_TOL, dps=DEFAULT_MPMATH_DPS):
    """
    每筆：plain（E = Q 精確、否則必要條件）、次數一致、q_x = p^{deg·[κ:F_p]}、
    給定 weight 時的 purity 與精確範數恆等式。
    """
    expected_degree = table.degree
    if expected_degree is None and table.entries:
        expected_degree = table.entries[0].poly.degree
    rows = []
    for e in table.entries:
        P = e.poly
        witness = {}
        degree_ok = P.degree == expected_degree and P.field == table.field
        if not degree_ok:
            witness["degree"] = {"expected": expected_degree, "got": P.degree}
        q_ok = e.q == table.p ** (e.residue_degree * table.kappa_degree)
        if not q_ok:
            witness["q"] = {"expected": table.p ** (e.residue_degree * table.kappa_degree), "got": e.q}

        if P.is_rational:
            plain_mode = "exact"
            w_plain = _plain_rational_witness(P, table.p)
            plain = w_plain is None
        else:
            plain_mode = "necessary"
            verdict = plain_necessary_numberfield(P, table.p)
            plain, w_plain = bool(verdict), (verdict.witness or None)
        if w_plain:
            witness["plain"] = w_plain

        pure, max_dev, norm_ok = None, None, None
        if weight is not None:
            report = purity_check(P, e.q, weight, tol=tol, dps=dps)
            pure, max_dev, norm_ok = report.passed, report.max_deviation, report.exact_norm_ok
            if not pure:
                witness["purity"] = {"max_deviation": max_dev, "tolerance": tol}
            if pure and not norm_ok:
                witness["norm_identity"] = {"q": e.q, "weight": weight}

        rows.append({
            "id": e.point_id,
            "degree_ok": degree_ok,
            "q_ok": q_ok,
            "plain": plain,
            "plain_mode": plain_mode,
            "pure": pure,
            "max_deviation": max_dev,
            "norm_identity": norm_ok,
            "witness": witness or None,
        })

    columns = ["id", "degree_ok", "q_ok", "plain", "plain_mode", "pure", "max_deviation", "norm_identity", "witness"]
    df = pd.DataFrame(rows, columns=columns)
    if len(df):
        ok = df["degree_ok"] & df["q_ok"] & df["plain"]
        if weight is not None:
            ok = ok & df["pure"].astype(bool) & df["norm_identity"].astype(bool)
        failures = df.loc[~ok, "id"].tolist()
    else:
        failures = []
    logger.info(f"[FROB] 驗證 {len(df)} 筆 Frobenius 多項式，失敗 {len(failures)} 筆")
    return {
        "p": table.p,
        "weight": weight,
        "count": len(df),
        "passed": not failures,
        "failures": failures,
        "entries": df.astype(object).where(df.notna(), None).to_dict(orient="records"),
    }
