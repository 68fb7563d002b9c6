"""
Nori envelope、acceptable pair、點層級的 saturation closure 與 Burnside 不可約判斷

所有 k̄ 上的代數群敘述都以 F_q（或使用者指定的有限擴張）上的點來近似，
結果只對所用的有限域成立。
"""
from dataclasses import dataclass, field

import galois
import numpy as np
from loguru import logger

from py_module.config import (
    DEFAULT_CLOSURE_CAP,
    DEFAULT_ENUM_BUDGET,
    DEFAULT_SAMPLE_TRIALS,
    DEFAULT_SEED,
)
from py_module.exceptions import (
    CharTooSmall,
    EnumerationBudgetExceeded,
    FieldMismatch,
    MalformedInput,
)
from py_module.ff import field_create, int_to_digits, power_basis
from py_module.matgrp import (
    SquareMatrix,
    as_ints,
    embed_matrix,
    exp_stack,
    group_closure,
    log_stack,
    matrix_key,
    nilpotent_mask,
    nilpotency_order,
    t_power_stack,
    tensor_embed,
    unipotent_elements,
    gamma_plus,
    _require_char,
)

SCALARS = ("prime", "full")
_ROW_CHUNK = 4096


# ──────────────────────────────────────────────
# 向量化：矩陣 ↔ 係數向量
# ──────────────────────────────────────────────
def _coefficient_field(spec, scalars):
    return galois.GF(spec.ell) if scalars == "prime" else spec.gf


def _to_vectors(stack, spec, scalars):
    m, n = stack.shape[0], stack.shape[-1]
    if scalars == "full":
        return stack.reshape(m, n * n)
    digits = int_to_digits(as_ints(stack), spec.ell, spec.degree)
    return galois.GF(spec.ell)(digits.reshape(m, n * n * spec.degree))


def _from_vectors(vecs, spec, n, scalars):
    m = vecs.shape[0]
    if scalars == "full":
        return spec.gf(as_ints(vecs).reshape(m, n, n))
    digits = as_ints(vecs).reshape(m, n * n, spec.degree)
    ints = (digits * (spec.ell ** np.arange(spec.degree, dtype=np.int64))).sum(axis=-1)
    return spec.gf(ints.reshape(m, n, n))


def _nonzero_rows(mat):
    if mat.shape[0] == 0:
        return mat
    keep = np.any(mat.view(np.ndarray) != 0, axis=1)
    return mat[keep]


def _echelonize(vecs, width, CF):
    """RREF，去掉零列；pivot 正規化為 1，所以基底唯一"""
    if vecs.shape[0] == 0:
        return CF.Zeros((0, width))
    echelon = CF.Zeros((0, width))
    for start in range(0, vecs.shape[0], _ROW_CHUNK):
        block = np.concatenate([echelon, vecs[start:start + _ROW_CHUNK]], axis=0)
        echelon = _nonzero_rows(block.row_reduce())
        if echelon.shape[0] == width:
            break
    return echelon


def _pivots(echelon):
    raw = echelon.view(np.ndarray)
    return [int(np.flatnonzero(row)[0]) for row in raw]


def _residual(vecs, echelon):
    if echelon.shape[0] == 0 or vecs.shape[0] == 0:
        return vecs
    return vecs - vecs[:, _pivots(echelon)] @ echelon


# ──────────────────────────────────────────────
# 型別
# ──────────────────────────────────────────────
@dataclass(frozen=True, eq=False)
class LieSubspace:
    spec: object
    n: int
    scalar_field: str
    echelon: galois.FieldArray

    @classmethod
    def span(cls, spec, n, stack, scalars="full"):
        if scalars not in SCALARS:
            raise MalformedInput("scalars 只能是 prime 或 full", scalars=scalars)
        CF = _coefficient_field(spec, scalars)
        width = n * n * (spec.degree if scalars == "prime" else 1)
        vecs = _to_vectors(stack, spec, scalars) if stack.shape[0] else CF.Zeros((0, width))
        return cls(spec, n, scalars, _echelonize(vecs, width, CF))

    @classmethod
    def zero(cls, spec, n, scalars="full"):
        return cls.span(spec, n, spec.gf.Zeros((0, n, n)), scalars)

    @property
    def dim(self):
        return self.echelon.shape[0]

    @property
    def basis(self):
        stack = _from_vectors(self.echelon, self.spec, self.n, self.scalar_field)
        return tuple(SquareMatrix(self.spec, m) for m in stack)

    @property
    def size(self):
        return (self.spec.ell if self.scalar_field == "prime" else self.spec.order) ** self.dim

    def contains_stack(self, stack):
        vecs = _to_vectors(stack, self.spec, self.scalar_field)
        res = _residual(vecs, self.echelon)
        return ~np.any(res.view(np.ndarray) != 0, axis=1)

    def contains(self, X):
        if X.spec != self.spec or X.n != self.n:
            return False
        return bool(self.contains_stack(X.data[np.newaxis])[0])

    def combine(self, coeffs):
        """係數矩陣 (m, dim) → 對應的矩陣疊"""
        CF = type(self.echelon)
        vecs = CF(coeffs) @ self.echelon
        return _from_vectors(vecs, self.spec, self.n, self.scalar_field)

    def elements(self, budget=DEFAULT_ENUM_BUDGET):
        """列舉 L 的全部元素；超過 budget 丟 EnumerationBudgetExceeded"""
        per_coord = self.spec.ell if self.scalar_field == "prime" else self.spec.order
        if self.size > budget:
            raise EnumerationBudgetExceeded("L 的元素數超過列舉上限", size=self.size, budget=budget)
        if self.dim == 0:
            return self.spec.gf.Zeros((1, self.n, self.n))
        return self.combine(int_to_digits(np.arange(self.size), per_coord, self.dim))

    def __eq__(self, other):
        if not isinstance(other, LieSubspace):
            return NotImplemented
        return (
            self.spec == other.spec
            and self.n == other.n
            and self.scalar_field == other.scalar_field
            and self.echelon.shape == other.echelon.shape
            and matrix_key(self.echelon) == matrix_key(other.echelon)
        )

    __hash__ = None

    def __repr__(self):
        return f"LieSubspace({self.spec.label()}, n={self.n}, dim={self.dim}, over={self.scalar_field})"


@dataclass
class EnvelopePair:
    group: object
    lie: LieSubspace
    stable: bool
    iterations: int = 0
    gamma_plus_order: int = 1

    def summary(self):
        return {
            "order": self.group.order,
            "lie_dim": self.lie.dim,
            "stable": self.stable,
            "iterations": self.iterations,
            "gamma_plus_order": self.gamma_plus_order,
        }


@dataclass
class AcceptabilityReport:
    acceptable: bool
    sampled: bool
    checked: int
    witness: dict = field(default_factory=dict)

    def __bool__(self):
        return self.acceptable


# ──────────────────────────────────────────────
# 操作
# ──────────────────────────────────────────────
def log_span(G, scalars="full"):
    """⟨log_n u | u ∈ G 么冪⟩ 在 F_ℓ (prime) 或 F_q (full) 上的線性展開"""
    _require_char(G.spec, G.n, "log_span")
    logs = log_stack(unipotent_elements(G))
    return LieSubspace.span(G.spec, G.n, logs, scalars)


def prime_lie_span(G):
    return log_span(G, "prime")


def _spanning_nilpotents(logs, spec, n):
    """從 logs 中貪婪挑出線性獨立子集（全部是冪零元），展開同一個 F_q 子空間"""
    if logs.shape[0] == 0:
        return logs
    CF = spec.gf
    vecs = _to_vectors(logs, spec, "full")
    echelon = CF.Zeros((0, n * n))
    chosen = []
    while True:
        res = _residual(vecs, echelon)
        hits = np.flatnonzero(np.any(res.view(np.ndarray) != 0, axis=1))
        if hits.size == 0:
            break
        pick = int(hits[0])
        chosen.append(pick)
        echelon = _echelonize(vecs[chosen], n * n, CF)
    return logs[chosen]


def _extend(H, candidates, cap):
    """把不在 H 裡的候選矩陣逐一加入生成元並重新閉包"""
    gens = list(H.generators)
    added = 0
    for mat in candidates:
        if matrix_key(mat) in H._index:
            continue
        gens.append(SquareMatrix(H.spec, mat))
        H = group_closure(gens, cap=cap)
        added += 1
    return H, added


def nori_envelope(G, cap=DEFAULT_CLOSURE_CAP, max_iterations=64):
    """
    不動點迭代：Γ₀ = Γ⁺(G)；L ← log_span(Γᵢ)；
    Γᵢ₊₁ ← ⟨Γᵢ, exp_n(tX)⟩，X 取 L 的冪零生成向量，t 取 F_q 在 F_ℓ 上的基底
    （t ↦ exp_n(tX) 對 ℓ > n 是加法同態，所以基底上的 t 就生成整個單參數子群）。
    """
    spec, n = G.spec, G.n
    if spec.ell < 2 * n:
        raise CharTooSmall("nori_envelope 需要 ℓ ≥ 2n", ell=spec.ell, n=n)
    current = gamma_plus(G, cap=cap)
    gp_order = current.order
    if gp_order == 1:
        logger.warning(f"[ENVELOPE] Γ⁺ 為平凡群，envelope 亦為平凡（{spec.label()}, n={n}）")

    GF = spec.gf
    ts = [GF(t) for t in power_basis(spec)]
    stable = False
    iterations = 0
    while iterations < max_iterations:
        iterations += 1
        logs = log_stack(unipotent_elements(current))
        spanning = _spanning_nilpotents(logs, spec, n)
        if spanning.shape[0] == 0:
            stable = True
            break
        candidates = np.concatenate([exp_stack(t * spanning) for t in ts], axis=0)
        current, added = _extend(current, candidates, cap)
        logger.info(f"[ENVELOPE] 第 {iterations} 輪：dim L = {spanning.shape[0]}，新增生成元 {added}，群階 {current.order}")
        if added == 0:
            stable = True
            break
    if not stable:
        logger.warning(f"[ENVELOPE] ⚠️ {max_iterations} 輪內未收斂")

    lie = log_span(current, "full")
    return EnvelopePair(current, lie, stable, iterations, gp_order)


def saturation_closure(G, extension_degree=1, cap=DEFAULT_CLOSURE_CAP):
    """
    F_{q^e} 上包含 G 且對 u ↦ u^t（u 么冪、t ∈ F_{q^e}）封閉的最小子群。
    u^{s+t} = u^s u^t，所以只需 t 走遍 F_{q^e} 的 F_ℓ 基底。
    """
    _require_char(G.spec, G.n, "saturation_closure")
    if extension_degree < 1:
        raise MalformedInput("extension_degree 必須 ≥ 1", extension_degree=extension_degree)
    spec = G.spec
    target = spec if extension_degree == 1 else field_create(spec.ell, spec.degree * extension_degree)
    gens = [embed_matrix(g, target) for g in G.generators]
    H = group_closure(gens, cap=cap)
    ts = [target.gf(t) for t in power_basis(target)[1:]]

    rounds = 0
    while ts:
        rounds += 1
        uni = unipotent_elements(H)
        missing = []
        for t in ts:
            cand = t_power_stack(uni, t)
            missing.extend(cand[~H.contains_stack(cand)])
        if not missing:
            break
        H, added = _extend(H, missing, cap)
        logger.info(f"[ENVELOPE] saturation 第 {rounds} 輪：新增 {added} 個 u^t，群階 {H.order}")
    return H


def saturation_witness(G):
    """
    回傳第一個 u^t ∉ G 的見證；飽和時回傳 None。
    u^t 的二項式級數截在 G 的么冪元素實際的冪零階 m，只要求 m ≤ ℓ（ℓ > n 時自動成立）。
    """
    ts = power_basis(G.spec)[1:]
    if not ts:
        return None
    uni = unipotent_elements(G)
    terms = nilpotency_order(uni - G.spec.gf.Identity(G.n))
    if terms > G.spec.ell:
        raise CharTooSmall(
            "u^t 需要么冪元素的冪零階 ≤ ℓ", op="is_saturated_points", ell=G.spec.ell, n=G.n, nilpotency=terms
        )
    for t in ts:
        cand = t_power_stack(uni, G.spec.gf(t), terms)
        outside = np.flatnonzero(~G.contains_stack(cand))
        if outside.size:
            i = int(outside[0])
            return {"u": as_ints(uni[i]).tolist(), "t": int(t), "u_t": as_ints(cand[i]).tolist()}
    return None


def is_saturated_points(G):
    """
    G 自身域上的點層級 saturation：所有么冪 u 與 t ∈ F_q 都有 u^t ∈ G。
    質數域上 u^t 就是整數次方，任何群都會通過。
    """
    witness = saturation_witness(G)
    if witness is not None:
        logger.debug(f"[ENVELOPE] 非飽和見證: {witness}")
    return witness is None


def _enumerate_coefficients(size_per_coord, dim, budget, trials, seed, allow_sampling):
    total = size_per_coord ** dim
    if total <= budget:
        for start in range(0, total, 1 << 16):
            stop = min(total, start + (1 << 16))
            yield int_to_digits(np.arange(start, stop), size_per_coord, dim), False
        return
    if not allow_sampling:
        raise EnumerationBudgetExceeded("L 的元素數超過列舉上限", size=total, budget=budget)
    rng = np.random.default_rng(seed)
    yield rng.integers(0, size_per_coord, size=(trials, dim)), True


def is_acceptable_pair(
    L,
    G,
    budget=DEFAULT_ENUM_BUDGET,
    trials=DEFAULT_SAMPLE_TRIALS,
    seed=DEFAULT_SEED,
    allow_sampling=True,
):
    """
    雙向檢查：L 中冪零 X 都有 exp_n(X) ∈ G；G 中么冪 u 都有 log_n(u) ∈ L。
    |L| ≤ budget 時窮舉，否則抽樣 trials 次並標記 sampled。
    """
    if L.spec != G.spec or L.n != G.n:
        raise FieldMismatch("L 與 G 的域或維度不一致", lie=[L.spec.label(), L.n], group=[G.spec.label(), G.n])
    _require_char(G.spec, G.n, "is_acceptable_pair")

    per_coord = G.spec.ell if L.scalar_field == "prime" else G.spec.order
    checked = 0
    sampled = False
    if L.dim:
        for coeffs, was_sampled in _enumerate_coefficients(per_coord, L.dim, budget, trials, seed, allow_sampling):
            sampled = sampled or was_sampled
            mats = L.combine(coeffs)
            nil = mats[nilpotent_mask(mats)]
            checked += nil.shape[0]
            images = exp_stack(nil)
            outside = np.flatnonzero(~G.contains_stack(images))
            if outside.size:
                i = int(outside[0])
                return AcceptabilityReport(False, sampled, checked, {"direction": "exp", "X": as_ints(nil[i]).tolist()})

    uni = unipotent_elements(G)
    logs = log_stack(uni)
    checked += uni.shape[0]
    outside = np.flatnonzero(~L.contains_stack(logs)) if uni.shape[0] else []
    if len(outside):
        i = int(outside[0])
        return AcceptabilityReport(False, sampled, checked, {"direction": "log", "u": as_ints(uni[i]).tolist()})
    if sampled:
        logger.info(f"[ENVELOPE] acceptable pair 以抽樣檢查（{trials} 次）")
    return AcceptabilityReport(True, sampled, checked)


def is_absolutely_irreducible(G):
    """Burnside：群元素的線性展開為 M_n 全體（維度 n²）"""
    n = G.n
    vecs = G.stack.reshape(G.order, n * n)
    echelon = _echelonize(vecs, n * n, G.spec.gf)
    return echelon.shape[0] == n * n


def tensor_product_group(G1, G2, cap=DEFAULT_CLOSURE_CAP):
    """{a ⊗ b} 生成的群：由 a ⊗ 1 與 1 ⊗ b 生成"""
    one1 = SquareMatrix.identity(G1.spec, G1.n)
    one2 = SquareMatrix.identity(G2.spec, G2.n)
    gens = [tensor_embed(a, one2) for a in G1.generators] + [tensor_embed(one1, b) for b in G2.generators]
    return group_closure(gens, cap=cap)
