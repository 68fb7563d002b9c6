"""
有限體上的稠密矩陣、exp/log 字典、u^t 與有限矩陣群閉包

批次運算約定：一疊矩陣以 galois FieldArray (m, n, n) 表示，
乘法用 broadcasting 後沿 k 軸加總，避免逐一呼叫 @。
群元素以 int64 攤平後的 bytes 當 key。
"""
import math
from dataclasses import dataclass

import galois
import numpy as np
from loguru import logger

from py_module.config import DEFAULT_CLOSURE_CAP
from py_module.exceptions import (
    CharTooSmall,
    FieldMismatch,
    MalformedInput,
    NotNilpotent,
    NotUnipotent,
    OrderCapExceeded,
    SingularGenerator,
)
from py_module.ff import FieldElem, embed_subfield, embedding_table, power_basis


# ──────────────────────────────────────────────
# 批次工具
# ──────────────────────────────────────────────
def as_ints(arr):
    return np.asarray(arr.view(np.ndarray), dtype=np.int64)


def matrix_key(arr):
    return as_ints(arr).ravel().tobytes()


def stack_keys(stack):
    if stack.shape[0] == 0:
        return []
    flat = as_ints(stack).reshape(stack.shape[0], -1)
    return [row.tobytes() for row in flat]


def batch_matmul(A, B):
    """A: (..., n, n)，B: (n, n) 或 (..., n, n)"""
    return (A[..., :, :, np.newaxis] * B[..., np.newaxis, :, :]).sum(axis=-2)


def zero_mask(stack):
    return ~np.any(stack.view(np.ndarray) != 0, axis=(-2, -1))


def nilpotent_mask(stack):
    n = stack.shape[-1]
    power = stack.copy()
    for _ in range(n - 1):
        power = batch_matmul(power, stack)
    return zero_mask(power)


def unipotent_mask(stack):
    GF = type(stack)
    return nilpotent_mask(stack - GF.Identity(stack.shape[-1]))


def nilpotency_order(stack):
    """最小的 m 使 stack 中每個（已知冪零的）N 都有 N^m = 0；空 stack 回傳 1"""
    n = stack.shape[-1]
    power = stack.copy()
    for m in range(1, n + 1):
        if zero_mask(power).all():
            return m
        power = batch_matmul(power, stack)
    return n


def _require_char(spec, n, op):
    if spec.ell <= n:
        raise CharTooSmall(f"{op} 需要 ℓ > n", op=op, ell=spec.ell, n=n)


def _inverse_factorials(GF, ell, count):
    return [GF(pow(math.factorial(i), -1, ell)) for i in range(count)]


def exp_stack(stack):
    """Σ_{i<n} X^i / i!（X 已知冪零，X^n = 0）"""
    GF = type(stack)
    n = stack.shape[-1]
    coeffs = _inverse_factorials(GF, GF.characteristic, n)
    result = GF.Zeros(stack.shape) + GF.Identity(n)
    power = stack.copy()
    for i in range(1, n):
        result = result + coeffs[i] * power
        power = batch_matmul(power, stack)
    return result


def log_stack(stack):
    """Σ_{i=1}^{n-1} (-1)^{i+1} N^i / i，N = u − I"""
    GF = type(stack)
    n = stack.shape[-1]
    ell = GF.characteristic
    N = stack - GF.Identity(n)
    result = GF.Zeros(stack.shape)
    power = N.copy()
    for i in range(1, n):
        c = pow(i, -1, ell) if i % 2 == 1 else (-pow(i, -1, ell)) % ell
        result = result + GF(c) * power
        power = batch_matmul(power, N)
    return result


def binomial_coefficients(t, count):
    """binom(t, i)，i = 0..count-1；t 為 galois 0 維元素"""
    GF = type(t)
    ell = GF.characteristic
    inv_fact = _inverse_factorials(GF, ell, count)
    out = []
    falling = GF(1)
    for i in range(count):
        out.append(falling * inv_fact[i])
        falling = falling * (t - GF(i % ell))
    return out


def t_power_stack(stack, t, terms=None):
    """Σ_{i<terms} binom(t, i)(u−1)^i；terms 預設 n，(u−1)^terms = 0 時可截得更短（需 terms ≤ ℓ）"""
    GF = type(stack)
    n = stack.shape[-1]
    terms = n if terms is None else terms
    N = stack - GF.Identity(n)
    binoms = binomial_coefficients(t, terms)
    result = GF.Zeros(stack.shape) + GF.Identity(n)
    power = N.copy()
    for i in range(1, terms):
        result = result + binoms[i] * power
        power = batch_matmul(power, N)
    return result


# ──────────────────────────────────────────────
# 型別
# ──────────────────────────────────────────────
@dataclass(frozen=True, eq=False)
class SquareMatrix:
    spec: object
    data: galois.FieldArray

    def __post_init__(self):
        if self.data.ndim != 2 or self.data.shape[0] != self.data.shape[1]:
            raise MalformedInput("矩陣必須是方陣", shape=list(self.data.shape))
        if type(self.data) is not self.spec.gf:
            raise FieldMismatch("矩陣元素不在宣告的域內", field=self.spec.label())

    @property
    def n(self):
        return self.data.shape[0]

    @classmethod
    def from_rows(cls, spec, rows):
        entries = [[int(spec.element(e)) for e in row] for row in rows]
        if not entries or any(len(r) != len(entries) for r in entries):
            raise MalformedInput("rows 必須構成非空方陣", rows=len(entries))
        return cls(spec, spec.gf(entries))

    @classmethod
    def identity(cls, spec, n):
        return cls(spec, spec.gf.Identity(n))

    @classmethod
    def zero(cls, spec, n):
        return cls(spec, spec.gf.Zeros((n, n)))

    def entry(self, i, j):
        return FieldElem.from_int(self.spec, int(self.data[i, j]))

    def rows(self):
        return as_ints(self.data).tolist()

    def key(self):
        return matrix_key(self.data)

    def _check(self, other):
        if not isinstance(other, SquareMatrix):
            return NotImplemented
        if other.spec != self.spec or other.n != self.n:
            raise FieldMismatch("矩陣的域或大小不一致", left=[self.spec.label(), self.n], right=[other.spec.label(), other.n])
        return other

    def __eq__(self, other):
        if not isinstance(other, SquareMatrix):
            return NotImplemented
        return self.spec == other.spec and self.n == other.n and self.key() == other.key()

    def __hash__(self):
        return hash((self.spec, self.key()))

    def __matmul__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return SquareMatrix(self.spec, self.data @ other.data)

    def __add__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return SquareMatrix(self.spec, self.data + other.data)

    def __sub__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return SquareMatrix(self.spec, self.data - other.data)

    def __neg__(self):
        return SquareMatrix(self.spec, -self.data)

    def scale(self, t):
        t = self.spec.element(t)
        return SquareMatrix(self.spec, t.value * self.data)

    def __pow__(self, exponent):
        exponent = int(exponent)
        if exponent < 0:
            return self.inverse() ** (-exponent)
        result = self.spec.gf.Identity(self.n)
        base = self.data
        while exponent:
            if exponent & 1:
                result = result @ base
            base = base @ base
            exponent >>= 1
        return SquareMatrix(self.spec, result)

    def det(self):
        if self.n == 1:
            return FieldElem.from_int(self.spec, int(self.data[0, 0]))
        return FieldElem.from_int(self.spec, int(np.linalg.det(self.data)))

    def is_invertible(self):
        return not self.det().is_zero()

    def inverse(self):
        if not self.is_invertible():
            raise SingularGenerator("矩陣不可逆", rows=self.rows())
        return SquareMatrix(self.spec, np.linalg.inv(self.data))

    def to_json(self):
        return {"field": self.spec.to_json(), "n": self.n, "rows": self.rows()}

    def __repr__(self):
        return f"SquareMatrix({self.spec.label()}, {self.rows()})"


@dataclass(frozen=True)
class ExactCharPoly:
    """低次在前、含首項 1 的係數"""
    spec: object
    coeffs: tuple

    def __post_init__(self):
        if not self.coeffs or self.coeffs[-1] != 1:
            raise MalformedInput("特徵多項式必須 monic", coeffs=list(self.coeffs))

    @property
    def degree(self):
        return len(self.coeffs) - 1

    @property
    def poly(self):
        return galois.Poly(list(reversed(self.coeffs)), field=self.spec.gf)

    def __str__(self):
        terms = []
        for i in range(self.degree, -1, -1):
            c = self.coeffs[i]
            if c == 0:
                continue
            mono = "" if i == 0 else ("T" if i == 1 else f"T^{i}")
            coef = str(c) if (c != 1 or i == 0) else ""
            terms.append(coef + mono)
        return " + ".join(terms) or "0"


class FiniteMatrixGroup:
    """
    以列舉方式儲存的有限矩陣群：generators + 所有元素（hash 索引）
    """

    def __init__(self, spec, n, generators, index, stack):
        self.spec = spec
        self.n = n
        self.generators = tuple(generators)
        self._index = index
        self._stack = stack

    @classmethod
    def from_elements(cls, spec, n, stack, generators):
        """已知封閉的元素集合（例如嵌入後的群）與其生成元，直接包裝，不重跑閉包"""
        index = {}
        keep = []
        for pos, key in enumerate(stack_keys(stack)):
            if key not in index:
                index[key] = len(keep)
                keep.append(pos)
        stack = stack[keep] if len(keep) != stack.shape[0] else stack
        return cls(spec, n, list(generators), index, stack)

    @property
    def order(self):
        return len(self._index)

    @property
    def stack(self):
        return self._stack

    @property
    def elements(self):
        return [SquareMatrix(self.spec, m) for m in self._stack]

    def keys(self):
        return self._index.keys()

    def __len__(self):
        return self.order

    def __contains__(self, M):
        if not isinstance(M, SquareMatrix) or M.spec != self.spec or M.n != self.n:
            return False
        return M.key() in self._index

    def contains_stack(self, stack):
        return np.array([k in self._index for k in stack_keys(stack)], dtype=bool)

    def issubset(self, other):
        return self.spec == other.spec and self.n == other.n and self._index.keys() <= other._index.keys()

    def __eq__(self, other):
        if not isinstance(other, FiniteMatrixGroup):
            return NotImplemented
        return self.spec == other.spec and self.n == other.n and self._index.keys() == other._index.keys()

    __hash__ = None

    def summary(self):
        return {"field": self.spec.label(), "n": self.n, "order": self.order, "generators": len(self.generators)}

    def __repr__(self):
        return f"FiniteMatrixGroup({self.spec.label()}, n={self.n}, order={self.order})"


# ──────────────────────────────────────────────
# 單一矩陣操作
# ──────────────────────────────────────────────
def charpoly(M):
    if M.n == 1:
        # galois 對 1×1 矩陣的 characteristic_poly 會 IndexError
        return ExactCharPoly(M.spec, (int(-M.data[0, 0]), 1))
    poly = M.data.characteristic_poly()
    coeffs = tuple(int(c) for c in reversed(poly.coeffs))
    return ExactCharPoly(M.spec, coeffs)


def ch_map(M):
    """ch: GL_n → G_m × G_a^{n-1}；回傳 (det M, a_1, ..., a_{n-1})"""
    cp = charpoly(M)
    det = M.det()
    return (det,) + tuple(FieldElem.from_int(M.spec, c) for c in cp.coeffs[1:M.n])


def is_nilpotent(X):
    return bool(nilpotent_mask(X.data[np.newaxis])[0])


def is_unipotent(M):
    return bool(unipotent_mask(M.data[np.newaxis])[0])


def exp_n(X):
    _require_char(X.spec, X.n, "exp_n")
    if not is_nilpotent(X):
        raise NotNilpotent("exp_n 只接受冪零矩陣", rows=X.rows())
    return SquareMatrix(X.spec, exp_stack(X.data[np.newaxis])[0])


def log_n(u):
    _require_char(u.spec, u.n, "log_n")
    if not is_unipotent(u):
        raise NotUnipotent("log_n 只接受么冪矩陣", rows=u.rows())
    return SquareMatrix(u.spec, log_stack(u.data[np.newaxis])[0])


def t_power(u, t):
    """u^t = Σ binom(t, i)(u−1)^i；t 可在 u 所在域的擴張中，結果落在 t 的域"""
    _require_char(u.spec, u.n, "t_power")
    if not is_unipotent(u):
        raise NotUnipotent("t_power 只接受么冪矩陣", rows=u.rows())
    if t.spec != u.spec:
        if u.spec.ell == t.spec.ell and u.spec.degree % t.spec.degree == 0:
            t = embed_subfield(t, u.spec)
        else:
            u = embed_matrix(u, t.spec)
    return SquareMatrix(u.spec, t_power_stack(u.data[np.newaxis], t.value)[0])


def is_regular_semisimple(M):
    P = charpoly(M).poly
    return galois.gcd(P, P.derivative()).degree == 0


def tensor_embed(A, B):
    if A.spec != B.spec:
        raise FieldMismatch("tensor_embed 需要同一個域", left=A.spec.label(), right=B.spec.label())
    n1, n2 = A.n, B.n
    kron = (A.data[:, np.newaxis, :, np.newaxis] * B.data[np.newaxis, :, np.newaxis, :]).reshape(n1 * n2, n1 * n2)
    return SquareMatrix(A.spec, kron)


def direct_sum_embed(A, B):
    if A.spec != B.spec:
        raise FieldMismatch("direct_sum_embed 需要同一個域", left=A.spec.label(), right=B.spec.label())
    n1, n2 = A.n, B.n
    out = A.spec.gf.Zeros((n1 + n2, n1 + n2))
    out[:n1, :n1] = A.data
    out[n1:, n1:] = B.data
    return SquareMatrix(A.spec, out)


def embed_matrix(M, target):
    """逐項套用 embed_subfield"""
    if M.spec == target:
        return M
    table = embedding_table(M.spec, target)
    return SquareMatrix(target, target.gf(table[as_ints(M.data)]))


def embed_stack(stack, source, target):
    if source == target:
        return stack
    table = embedding_table(source, target)
    return target.gf(table[as_ints(stack)])


# ──────────────────────────────────────────────
# 常用矩陣
# ──────────────────────────────────────────────
def matrix_unit(spec, n, i, j, value=1):
    """E_ij（0-based），係數 value"""
    data = spec.gf.Zeros((n, n))
    data[i, j] = int(spec.element(value))
    return SquareMatrix(spec, data)


def transvection(spec, n, i, j, value=1):
    """I + value·E_ij"""
    return SquareMatrix.identity(spec, n) + matrix_unit(spec, n, i, j, value)


def diagonal(spec, values):
    ints = [int(spec.element(v)) for v in values]
    return SquareMatrix(spec, spec.gf(np.diag(ints)))


def companion(spec, coeffs):
    """monic 多項式 T^n + c_{n-1}T^{n-1} + ... + c_0 的友矩陣（coeffs 低次在前，不含首項）"""
    n = len(coeffs)
    GF = spec.gf
    data = GF.Zeros((n, n))
    for i in range(1, n):
        data[i, i - 1] = 1
    for i, c in enumerate(coeffs):
        data[i, n - 1] = int(-spec.element(c))
    return SquareMatrix(spec, data)


# ──────────────────────────────────────────────
# 群閉包
# ──────────────────────────────────────────────
def group_closure(generators, cap=DEFAULT_CLOSURE_CAP):
    """
    BFS 閉包：從 I 出發，每層乘上 generators 及其反元素；
    元素數超過 cap 即丟出 OrderCapExceeded。
    """
    generators = list(generators)
    if not generators:
        raise MalformedInput("group_closure 至少需要一個生成元")
    spec, n = generators[0].spec, generators[0].n
    for g in generators:
        if g.spec != spec or g.n != n:
            raise FieldMismatch("生成元的域或維度不一致", expected=[spec.label(), n], got=[g.spec.label(), g.n])
        if not g.is_invertible():
            raise SingularGenerator("生成元不可逆", rows=g.rows())

    GF = spec.gf
    seen = set()
    multipliers = []
    for g in generators + [g.inverse() for g in generators]:
        if g.key() not in seen:
            seen.add(g.key())
            multipliers.append(g.data)

    identity = GF.Identity(n)
    index = {matrix_key(identity): 0}
    rows = [as_ints(identity).ravel()]
    frontier = identity[np.newaxis]
    depth = 0
    while frontier.shape[0]:
        fresh = []
        for g in multipliers:
            prod = batch_matmul(frontier, g)
            for row in as_ints(prod).reshape(prod.shape[0], n * n):
                key = row.tobytes()
                if key not in index:
                    index[key] = len(rows)
                    rows.append(row)
                    fresh.append(row)
            if len(rows) > cap:
                raise OrderCapExceeded(
                    f"群閉包超過上限 {cap}",
                    cap=cap, reached=len(rows), depth=depth, field=spec.label(), n=n,
                )
        depth += 1
        frontier = GF(np.array(fresh).reshape(-1, n, n)) if fresh else GF.Zeros((0, n, n))
        logger.debug(f"[MATGRP] BFS 第 {depth} 層：新增 {len(fresh)}，累計 {len(rows)}")

    stack = GF(np.array(rows).reshape(-1, n, n))
    return FiniteMatrixGroup(spec, n, generators, index, stack)


def trivial_group(spec, n):
    return group_closure([SquareMatrix.identity(spec, n)])


def generated_subgroup(spec, n, candidates, cap=DEFAULT_CLOSURE_CAP):
    """依序加入不在目前子群內的候選元素，得到候選集合生成的子群"""
    H = trivial_group(spec, n)
    gens = []
    for mat in candidates:
        if matrix_key(mat) in H._index:
            continue
        gens.append(SquareMatrix(spec, mat))
        H = group_closure(gens, cap=cap)
    return H


def unipotent_elements(G):
    return G.stack[unipotent_mask(G.stack)]


def gamma_plus(G, cap=DEFAULT_CLOSURE_CAP):
    """
    Γ⁺：所有 ℓ 冪階元素生成的子群。
    GL_n 在特徵 ℓ 下 ℓ 冪階元素恰為么冪元素，(M−I)^n = 0 的判斷對任何 ℓ 都成立。
    """
    uni = unipotent_elements(G)
    H = generated_subgroup(G.spec, G.n, uni, cap=cap)
    logger.info(f"[MATGRP] Γ⁺：{G.order} 個元素中有 {uni.shape[0]} 個么冪元，生成子群階 {H.order}")
    return H


def is_normal_subgroup(N, G):
    if not N.issubset(G):
        return False
    for g in G.generators:
        g_inv = g.inverse()
        for h in N.generators:
            if (g @ h @ g_inv) not in N:
                return False
    return True


def block_projection(G, sizes, index):
    """區塊對角群投影到第 index 個區塊"""
    if sum(sizes) != G.n:
        raise MalformedInput("區塊大小總和必須等於 n", sizes=list(sizes), n=G.n)
    offsets = np.cumsum([0] + list(sizes))
    lo, hi = offsets[index], offsets[index + 1]
    stack = G.stack
    mask = np.ones(stack.shape[1:], dtype=bool)
    for a, b in zip(offsets[:-1], offsets[1:]):
        mask[a:b, a:b] = False
    if np.any(stack.view(np.ndarray)[:, mask] != 0):
        raise MalformedInput("群不是區塊對角形式", sizes=list(sizes))
    block = stack[:, lo:hi, lo:hi]
    gens = [SquareMatrix(G.spec, g.data[lo:hi, lo:hi]) for g in G.generators]
    return FiniteMatrixGroup.from_elements(G.spec, int(hi - lo), block, generators=gens)


# ──────────────────────────────────────────────
# 標準點群
# ──────────────────────────────────────────────
def gl_order(q, n):
    return math.prod(q ** n - q ** i for i in range(n))


def sl_order(q, n):
    return gl_order(q, n) // (q - 1)


def special_linear_generators(spec, n):
    """相鄰位置的 transvection I + t·E_ij，t 取 F_ℓ 上的 power basis"""
    gens = []
    for i in range(n - 1):
        for t in power_basis(spec):
            gens.append(transvection(spec, n, i, i + 1, t))
            gens.append(transvection(spec, n, i + 1, i, t))
    return gens or [SquareMatrix.identity(spec, n)]


def general_linear_generators(spec, n):
    zeta = int(spec.gf.primitive_element)
    return special_linear_generators(spec, n) + [diagonal(spec, [zeta] + [1] * (n - 1))]


def special_linear_group(spec, n, cap=DEFAULT_CLOSURE_CAP):
    return group_closure(special_linear_generators(spec, n), cap=cap)


def general_linear_group(spec, n, cap=DEFAULT_CLOSURE_CAP):
    return group_closure(general_linear_generators(spec, n), cap=cap)


def diagonal_torus(spec, n, cap=DEFAULT_CLOSURE_CAP):
    zeta = int(spec.gf.primitive_element)
    gens = []
    for i in range(n):
        values = [1] * n
        values[i] = zeta
        gens.append(diagonal(spec, values))
    return group_closure(gens, cap=cap)


def root_group(spec, n, i, j, cap=DEFAULT_CLOSURE_CAP):
    """{I + t·E_ij : t ∈ F_q}"""
    return group_closure([transvection(spec, n, i, j, t) for t in power_basis(spec)], cap=cap)
