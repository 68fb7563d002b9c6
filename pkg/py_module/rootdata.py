"""
分裂根系與表示權重：Dynkin height、Coxeter 數、low ℓ-height / low alcove、
權重條件 (i)–(iii)、單純群資料表。

編號採 Bourbaki。Cartan 矩陣約定 A[i][j] = ⟨α_j, α_i∨⟩ = 2(α_i, α_j)/(α_i, α_i)。
權重一律用 fundamental-weight 座標，根用 simple-root 座標；全部是整數 / Fraction，不用浮點。
"""
import itertools
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

import numpy as np
import sympy
from loguru import logger

from py_module.exceptions import InvalidType, NotDominant, WeightLatticeMismatch

# 最小忠實表示維度與中心階（單連通形式）
_MIN_DIM = {"B": lambda m: 2 * m + 1, "C": lambda m: 2 * m, "D": lambda m: 2 * m,
            "E": lambda m: {6: 27, 7: 56, 8: 248}[m], "F": lambda m: 26, "G": lambda m: 7,
            "A": lambda m: m + 1}
_CENTER = {"A": lambda m: m + 1, "B": lambda m: 2, "C": lambda m: 2, "D": lambda m: 4,
           "E": lambda m: {6: 3, 7: 2, 8: 1}[m], "F": lambda m: 1, "G": lambda m: 1}


def _validate(kind, rank):
    ok = {
        "A": rank >= 1,
        "B": rank >= 2,
        "C": rank >= 3,
        "D": rank >= 4,
        "E": rank in (6, 7, 8),
        "F": rank == 4,
        "G": rank == 2,
    }
    if kind not in ok or isinstance(rank, bool) or not isinstance(rank, int) or not ok[kind]:
        raise InvalidType(f"不支援的根系 {kind}{rank}", type=kind, rank=rank)


def _dynkin_data(kind, r):
    """(平方長度, 邊)，節點 1-based"""
    chain = [(i, i + 1) for i in range(1, r)]
    if kind == "A":
        return [2] * r, chain
    if kind == "B":
        return [4] * (r - 1) + [2], chain
    if kind == "C":
        return [2] * (r - 1) + [4], chain
    if kind == "D":
        return [2] * r, [(i, i + 1) for i in range(1, r - 1)] + [(r - 2, r)]
    if kind == "E":
        return [2] * r, [(1, 3)] + [(i, i + 1) for i in range(3, r)] + [(2, 4)]
    if kind == "F":
        return [4, 4, 2, 2], chain
    return [2, 6], [(1, 2)]  # G2：α₁ 為短根


@dataclass(frozen=True)
class RootSystem:
    type: str
    rank: int
    cartan: np.ndarray = field(compare=False, repr=False)
    norms: tuple = field(repr=False)
    positive_roots: tuple = field(repr=False)

    @property
    def label(self):
        return f"{self.type}{self.rank}"

    @property
    def simple_roots(self):
        return tuple(tuple(int(i == j) for j in range(self.rank)) for i in range(self.rank))

    @property
    def simple_coroots(self):
        return tuple(f"{a}∨" for a in self.simple_root_labels)

    @property
    def simple_root_labels(self):
        return tuple(f"α{i + 1}" for i in range(self.rank))

    @property
    def highest_root(self):
        return self.positive_roots[-1]

    @property
    def rho(self):
        return (1,) * self.rank

    @property
    def factors(self):
        return (self,)

    def root_norm(self, root):
        """(α, α)，以 simple roots 的平方長度與 Gram 矩陣計算"""
        gram = _gram(self.type, self.rank)
        b = np.array(root, dtype=np.int64)
        return int(b @ gram @ b)

    def coroot_coefficients(self, root):
        """α∨ = Σ b_j (α_j,α_j)/(α,α) · α_j∨"""
        norm = self.root_norm(root)
        return tuple(_as_number(Fraction(b * n, norm)) for b, n in zip(root, self.norms))

    def pairing(self, weight, root):
        """⟨λ, α∨⟩，λ 為 fundamental-weight 座標"""
        coeffs = self.coroot_coefficients(root)
        return _as_number(sum(Fraction(c) * k for c, k in zip(weight, coeffs)))

    @property
    def highest_short_root(self):
        shortest = min(self.root_norm(a) for a in self.positive_roots)
        return [a for a in self.positive_roots if self.root_norm(a) == shortest][-1]

    @property
    def highest_short_coroot(self):
        return self.coroot_coefficients(self.highest_short_root)

    @property
    def two_rho_check(self):
        """2ρ∨ = Σ_{α>0} α∨ 的 simple-coroot 座標"""
        total = [Fraction(0)] * self.rank
        for a in self.positive_roots:
            for j, c in enumerate(self.coroot_coefficients(a)):
                total[j] += c
        return tuple(_as_number(t) for t in total)

    def root_to_weight(self, root):
        """simple-root 座標 → fundamental-weight 座標 (c = A m)"""
        return tuple(_as_number(sum(Fraction(int(self.cartan[j][i])) * root[i] for i in range(self.rank)))
                     for j in range(self.rank))

    def reflect(self, weight, i):
        """s_i(λ)_j = λ_j − λ_i · A[j][i]"""
        return tuple(weight[j] - weight[i] * int(self.cartan[j][i]) for j in range(self.rank))


@dataclass(frozen=True)
class ProductSystem:
    factors: tuple

    @property
    def rank(self):
        return sum(f.rank for f in self.factors)

    @property
    def label(self):
        return "×".join(f.label for f in self.factors)

    @property
    def two_rho_check(self):
        return tuple(itertools.chain.from_iterable(f.two_rho_check for f in self.factors))


@dataclass(frozen=True)
class RepWeights:
    system: object
    weights: tuple

    def __post_init__(self):
        for w in self.weights:
            if len(w) != self.system.rank:
                raise WeightLatticeMismatch(
                    "權重座標長度與根系秩不符", system=self.system.label, rank=self.system.rank, weight=list(w)
                )

    @property
    def dim(self):
        return len(self.weights)


@dataclass(frozen=True)
class SimpleGroupData:
    type: str
    rank: int
    center_order: int
    min_faithful_dim: int
    coxeter: int

    @property
    def center_bound_ok(self):
        return self.center_order <= self.min_faithful_dim


def _as_number(x):
    x = Fraction(x)
    return int(x) if x.denominator == 1 else x


@lru_cache(maxsize=None)
def _gram(kind, rank):
    norms, edges = _dynkin_data(kind, rank)
    gram = np.diag(norms).astype(np.int64)
    for i, j in edges:
        gram[i - 1, j - 1] = gram[j - 1, i - 1] = -max(norms[i - 1], norms[j - 1]) // 2
    return gram


# ──────────────────────────────────────────────
# 建構
# ──────────────────────────────────────────────
@lru_cache(maxsize=None)
def root_system(kind, rank):
    """由 Cartan 矩陣以 root string 逐層產生所有正根；依 (height, 座標) 排序"""
    _validate(kind, rank)
    gram = _gram(kind, rank)
    norms = tuple(int(gram[i, i]) for i in range(rank))
    cartan = np.array([[2 * gram[i, j] // gram[i, i] for j in range(rank)] for i in range(rank)], dtype=np.int64)

    simple = [tuple(int(i == j) for j in range(rank)) for i in range(rank)]
    roots = set(simple)
    level = list(simple)
    while level:
        nxt = []
        for beta in level:
            for i in range(rank):
                p = 0
                gamma = list(beta)
                while True:
                    gamma[i] -= 1
                    if tuple(gamma) in roots:
                        p += 1
                    else:
                        break
                pairing = int(sum(cartan[i][j] * beta[j] for j in range(rank)))
                if p - pairing > 0:
                    new = tuple(b + (1 if j == i else 0) for j, b in enumerate(beta))
                    if new not in roots:
                        roots.add(new)
                        nxt.append(new)
        level = nxt

    ordered = tuple(sorted(roots, key=lambda r: (sum(r), r)))
    logger.debug(f"[ROOTDATA] {kind}{rank}: {len(ordered)} 個正根，最高根 {ordered[-1]}")
    return RootSystem(kind, rank, cartan, norms, ordered)


def product_system(factors):
    return ProductSystem(tuple(factors))


def _factors(system):
    return system.factors


# ──────────────────────────────────────────────
# Coxeter 數
# ──────────────────────────────────────────────
def coxeter_number(system):
    """h = 1 + Σ n_i；半單時取各因子的最大值"""
    return max(1 + sum(f.highest_root) for f in _factors(system))


def coxeter_via_rho(rs):
    """h = ⟨ρ, β∨⟩ + 1，β∨ 為最高短餘根"""
    return int(sum(rs.highest_short_coroot)) + 1


# ──────────────────────────────────────────────
# Dynkin height
# ──────────────────────────────────────────────
def weight_height(system, weight):
    """Σ_{α∈R⁺} ⟨λ, α∨⟩ = ⟨λ, 2ρ∨⟩"""
    if len(weight) != system.rank:
        raise WeightLatticeMismatch("權重座標長度與根系秩不符", system=system.label, weight=list(weight))
    return _as_number(sum(Fraction(c) * s for c, s in zip(weight, system.two_rho_check)))


def to_root_coordinates(rs, weight):
    """m = A^{-1} c，精確有理數"""
    inv = _cartan_inverse(rs.type, rs.rank)
    return tuple(_as_number(sum(inv[i][j] * Fraction(weight[j]) for j in range(rs.rank))) for i in range(rs.rank))


@lru_cache(maxsize=None)
def _cartan_inverse(kind, rank):
    inv = sympy.Matrix(root_system(kind, rank).cartan.tolist()).inv()
    return [[Fraction(int(inv[i, j].p), int(inv[i, j].q)) for j in range(rank)] for i in range(rank)]


def _split(system, weight):
    parts, pos = [], 0
    for f in _factors(system):
        parts.append(tuple(weight[pos:pos + f.rank]))
        pos += f.rank
    return parts


def rem_dynkin_height(system, highest, lowest):
    """λ⁺ − λ⁻ = Σ m_i α_i 的係數和（各因子分別換座標後相加）"""
    diff = tuple(Fraction(a) - Fraction(b) for a, b in zip(highest, lowest))
    if len(diff) != system.rank or len(highest) != len(lowest):
        raise WeightLatticeMismatch("λ⁺/λ⁻ 座標長度不符", system=system.label, highest=list(highest), lowest=list(lowest))
    total = Fraction(0)
    for f, part in zip(_factors(system), _split(system, diff)):
        total += sum(Fraction(m) for m in to_root_coordinates(f, part))
    return _as_number(total)


def dynkin_height(rep, highest=None, lowest=None):
    """
    max_λ Σ_{α∈R⁺} ⟨λ, α∨⟩；給了 λ⁺、λ⁻ 時另用 Σ m_i 公式交叉核對
    """
    if not rep.weights:
        return 0
    ht = max(weight_height(rep.system, w) for w in rep.weights)
    if highest is not None and lowest is not None:
        other = rem_dynkin_height(rep.system, highest, lowest)
        if other != ht:
            raise WeightLatticeMismatch(
                "兩種 Dynkin height 公式不一致", max_formula=ht, root_formula=other, system=rep.system.label
            )
    return ht


def dynkin_height_root_coordinates(rs, root_coord_weights):
    """權重以 simple-root（伴隨格）座標給出：⟨λ, α∨⟩ = 2(λ, α)/(α, α)"""
    gram = _gram(rs.type, rs.rank)
    best = None
    for m in root_coord_weights:
        total = Fraction(0)
        for a in rs.positive_roots:
            lam_alpha = sum(Fraction(m[i]) * int(gram[i, j]) * a[j] for i in range(rs.rank) for j in range(rs.rank))
            total += 2 * lam_alpha / rs.root_norm(a)
        best = total if best is None else max(best, total)
    return 0 if best is None else _as_number(best)


def is_low_height(rep, ell):
    return ell > dynkin_height(rep)


def height_under_tensor(pairs):
    """外張量積：Σ ht_i，並與乘積根系上的直接計算比對"""
    pairs = list(pairs)
    total = sum(dynkin_height(rep) for _, rep in pairs)
    product = product_system([rs for rs, _ in pairs])
    combos = itertools.product(*[rep.weights for _, rep in pairs])
    direct = dynkin_height(RepWeights(product, tuple(tuple(itertools.chain.from_iterable(c)) for c in combos)))
    if direct != total:
        raise WeightLatticeMismatch(
            "張量積的 height 不可加", direct=direct, summed=total, systems=[rs.label for rs, _ in pairs]
        )
    return total


# ──────────────────────────────────────────────
# 常用表示
# ──────────────────────────────────────────────
def standard_weights(n):
    """GL_n / SL_n 標準表示，A_{n-1} 的 fundamental 座標：ε_1 = ω_1，ε_k = ω_k − ω_{k−1}，ε_n = −ω_{n−1}"""
    r = n - 1
    out = []
    for k in range(1, n + 1):
        w = [0] * r
        if k <= r:
            w[k - 1] += 1
        if k >= 2:
            w[k - 2] -= 1
        out.append(tuple(w))
    return tuple(out)


def exterior_power_weights(n, i):
    eps = standard_weights(n)
    return tuple(tuple(sum(c) for c in zip(*combo)) for combo in itertools.combinations(eps, i))


def adjoint_weights(rs):
    pos = [rs.root_to_weight(a) for a in rs.positive_roots]
    neg = [tuple(-c for c in w) for w in pos]
    return tuple(pos + neg + [(0,) * rs.rank] * rs.rank)


def weyl_orbit(rs, weight):
    weight = tuple(weight)
    seen = {weight}
    frontier = [weight]
    while frontier:
        nxt = []
        for w in frontier:
            for i in range(rs.rank):
                s = rs.reflect(w, i)
                if s not in seen:
                    seen.add(s)
                    nxt.append(s)
        frontier = nxt
    return tuple(sorted(seen, reverse=True))


def is_weyl_stable(rep):
    counts = Counter(rep.weights)
    for rs, offset in _factor_offsets(rep.system):
        for i in range(rs.rank):
            moved = Counter()
            for w in rep.weights:
                part = rs.reflect(w[offset:offset + rs.rank], i)
                moved[w[:offset] + part + w[offset + rs.rank:]] += 1
            if moved != counts:
                return False
    return True


def _factor_offsets(system):
    pos = 0
    for f in _factors(system):
        yield f, pos
        pos += f.rank


# ──────────────────────────────────────────────
# low alcove / 子群高度
# ──────────────────────────────────────────────
def alcove_pairing(rs, mu):
    if len(mu) != rs.rank:
        raise WeightLatticeMismatch("μ 座標長度與根系秩不符", system=rs.label, mu=list(mu))
    if any(c < 0 for c in mu):
        raise NotDominant("μ 必須是 dominant weight", mu=list(mu))
    return int(sum((1 + c) * k for c, k in zip(mu, rs.highest_short_coroot)))


def low_alcove_check(rs, mu, n, ell):
    """⟨ρ + μ, α₀∨⟩ ≤ 2(n−1) 且 < ℓ"""
    pairing = alcove_pairing(rs, mu)
    verdict = pairing <= 2 * (n - 1) and pairing < ell
    logger.debug(f"[ROOTDATA] alcove {rs.label} μ={tuple(mu)}: ⟨ρ+μ, α₀∨⟩ = {pairing}, n={n}, ℓ={ell} → {verdict}")
    return verdict


def saturated_subgroup_height_check(sub, ambient):
    """ht_H(V) ≤ ht_G(V)；sub、ambient 各為 (system, weights)"""
    h_sub = dynkin_height(RepWeights(sub[0], tuple(map(tuple, sub[1]))))
    h_amb = dynkin_height(RepWeights(ambient[0], tuple(map(tuple, ambient[1]))))
    if h_sub > h_amb:
        logger.warning(f"[ROOTDATA] 子群高度 {h_sub} 大於 ambient 高度 {h_amb}")
    return h_sub <= h_amb


@dataclass(frozen=True)
class HeightBoundReport:
    passed: bool
    m_plus: tuple
    m_minus: tuple
    bound: int

    def __bool__(self):
        return self.passed


def low_height_for_subgroups_check(rs, highest, lowest, n):
    """
    λ⁺ 與 −λ⁻ 都必須 dominant；寫成 Σ m_α α 後 max m ≤ n − 1
    """
    neg_lowest = tuple(-c for c in lowest)
    for label, w in (("highest", highest), ("-lowest", neg_lowest)):
        if any(c < 0 for c in w):
            raise NotDominant(f"{label} 不是 dominant", weight=list(w))
    m_plus = to_root_coordinates(rs, highest)
    m_minus = to_root_coordinates(rs, neg_lowest)
    passed = max(itertools.chain(m_plus, m_minus), default=0) <= n - 1
    return HeightBoundReport(passed, m_plus, m_minus, n - 1)


# ──────────────────────────────────────────────
# 權重條件
# ──────────────────────────────────────────────
@dataclass
class WeightConditionReport:
    multiplicity_one: dict
    reduced: dict
    exponent_bound: dict
    roots: list

    @property
    def passed(self):
        return all(c["passed"] for c in (self.multiplicity_one, self.reduced, self.exponent_bound))

    def to_dict(self):
        return {
            "i": self.multiplicity_one,
            "ii": self.reduced,
            "iii": self.exponent_bound,
            "roots": [list(r) for r in self.roots],
            "passed": self.passed,
        }


def _integer_multiple(alpha, beta):
    """β = kα 的整數 k，否則 None"""
    j = next(i for i, a in enumerate(alpha) if a != 0)
    if beta[j] % alpha[j]:
        return None
    k = beta[j] // alpha[j]
    return k if all(k * a == b for a, b in zip(alpha, beta)) else None


def weight_conditions(weights, ell, roots=None, candidate_roots=None):
    """
    weights：V 上分裂環面特徵（整數向量）。End(V) 權重為所有差 χ_i − χ_j。
    Φ：直接給定（multiset），或以候選根集合截取 End(V) 權重，否則取全部非零差。
    """
    weights = [tuple(int(c) for c in w) for w in weights]
    dims = {len(w) for w in weights}
    if len(dims) > 1:
        raise WeightLatticeMismatch("權重座標長度不一致", lengths=sorted(dims))
    end = Counter(tuple(a - b for a, b in zip(x, y)) for x in weights for y in weights)

    if roots is not None:
        phi = Counter(tuple(int(c) for c in r) for r in roots)
    elif candidate_roots is not None:
        phi = Counter({tuple(r): end[tuple(r)] for r in candidate_roots if any(r) and end[tuple(r)] > 0})
    else:
        phi = Counter({w: m for w, m in end.items() if any(w)})
    for r in phi:
        if not any(r):
            raise WeightLatticeMismatch("Φ 不可包含零權重", root=list(r))

    multi = next(((r, m) for r, m in sorted(phi.items()) if m != 1), None)
    cond_i = {"passed": multi is None}
    if multi:
        cond_i["witness"] = {"root": list(multi[0]), "multiplicity": multi[1]}

    cond_ii = {"passed": True}
    for alpha, beta in itertools.permutations(sorted(phi), 2):
        k = _integer_multiple(alpha, beta)
        if k is not None and abs(k) != 1:
            cond_ii = {"passed": False, "witness": {"root": list(alpha), "multiple": list(beta), "factor": k}}
            break

    cond_iii = {"passed": True}
    for alpha in sorted(phi):
        i = 1
        exps = []
        # End(V) 權重有限，i 超過最大範數即停止
        limit = max((max(abs(c) for c in w) for w in end), default=0) + 1
        while i <= limit:
            if end[tuple(i * a for a in alpha)] > 0:
                exps.append(i)
            i += 1
        bad = [i for i in exps if i > ell - 1]
        if bad:
            cond_iii = {"passed": False, "witness": {"root": list(alpha), "exponent": bad[0], "ell": ell}}
            break

    return WeightConditionReport(cond_i, cond_ii, cond_iii, sorted(phi))


# ──────────────────────────────────────────────
# 單純群資料表
# ──────────────────────────────────────────────
def simple_group_data(kind, rank):
    _validate(kind, rank)
    return SimpleGroupData(
        kind, rank, _CENTER[kind](rank), _MIN_DIM[kind](rank), coxeter_number(root_system(kind, rank))
    )


def tensor_weight_split(system, weight):
    if len(weight) != system.rank:
        raise WeightLatticeMismatch("權重座標長度與乘積根系秩不符", system=system.label, weight=list(weight))
    parts = _split(system, tuple(weight))
    for f in _factors(system):
        data = simple_group_data(f.type, f.rank)
        if not data.center_bound_ok:
            logger.warning(f"[ROOTDATA] {f.label} 中心階大於最小忠實維度")
    return parts
