"""
有限體 F_ℓ 與 F_{ℓ^k} 的精確運算

底層全部交給 galois；本模組只負責：
  1. 預設模數的決定（低次係數優先的字典序最小單項不可約多項式）
  2. FieldElem 座標表示（power basis 座標 = galois 的整數表示的 ℓ 進位數字）
  3. Frobenius 與子域嵌入（以 Conway 多項式的根為錨點，合成相容，查表實作）
"""
import itertools
from dataclasses import dataclass
from functools import lru_cache

import galois
import numpy as np
from loguru import logger
from sympy import isprime

from py_module.config import MAX_FIELD_ORDER
from py_module.exceptions import (
    DegreeMismatch,
    FieldMismatch,
    FieldTooLarge,
    MalformedInput,
    NoEmbedding,
    NotPrime,
    ReducibleModulus,
)


@dataclass(frozen=True)
class FieldSpec:
    """F_{ℓ^k}；modulus 為低次在前的係數 tuple（含首項 1）。質數域固定用 x 當模數。"""
    ell: int
    degree: int
    modulus: tuple

    @property
    def order(self):
        return self.ell ** self.degree

    @property
    def gf(self):
        return _galois_field(self.ell, self.degree, self.modulus)

    @property
    def is_prime_field(self):
        return self.degree == 1

    def element(self, value):
        """int 或座標 list 都可以"""
        if isinstance(value, FieldElem):
            if value.spec != self:
                raise FieldMismatch("元素不屬於此域", element_field=value.spec.label(), field=self.label())
            return value
        if isinstance(value, (list, tuple)):
            return FieldElem(self, tuple(int(c) % self.ell for c in value) + (0,) * (self.degree - len(value)))
        return FieldElem.from_int(self, int(value))

    def zero(self):
        return FieldElem.from_int(self, 0)

    def one(self):
        return FieldElem.from_int(self, 1)

    def label(self):
        return f"F_{self.order}"

    def to_json(self):
        return {"ell": self.ell, "degree": self.degree, "modulus": list(self.modulus)}

    def __repr__(self):
        return f"FieldSpec({self.label()}, modulus={list(self.modulus)})"


@lru_cache(maxsize=None)
def _galois_field(ell, degree, modulus):
    if degree == 1:
        return galois.GF(ell)
    poly = galois.Poly(list(reversed(modulus)), field=galois.GF(ell))
    return galois.GF(ell ** degree, irreducible_poly=poly)


@dataclass(frozen=True)
class FieldElem:
    spec: FieldSpec
    coeffs: tuple

    def __post_init__(self):
        if len(self.coeffs) != self.spec.degree:
            raise DegreeMismatch("座標長度與域次數不符", expected=self.spec.degree, got=len(self.coeffs))
        if any(not 0 <= c < self.spec.ell for c in self.coeffs):
            raise MalformedInput("座標必須落在 [0, ℓ)", coeffs=list(self.coeffs), ell=self.spec.ell)

    @classmethod
    def from_int(cls, spec, value):
        if not 0 <= value < spec.order:
            raise MalformedInput("整數表示超出域大小", value=value, order=spec.order)
        digits = []
        for _ in range(spec.degree):
            value, r = divmod(value, spec.ell)
            digits.append(r)
        return cls(spec, tuple(digits))

    @classmethod
    def _wrap(cls, spec, scalar):
        return cls.from_int(spec, int(scalar))

    def __int__(self):
        return sum(c * self.spec.ell ** i for i, c in enumerate(self.coeffs))

    @property
    def value(self):
        """對應的 galois 0 維 FieldArray"""
        return self.spec.gf(int(self))

    def _coerce(self, other):
        if isinstance(other, FieldElem):
            if other.spec != self.spec:
                raise FieldMismatch("不同域的元素不能直接運算", left=self.spec.label(), right=other.spec.label())
            return other.value
        if isinstance(other, int):
            return self.spec.gf(other % self.spec.ell)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._wrap(self.spec, self.value + o)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._wrap(self.spec, self.value - o)

    def __rsub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._wrap(self.spec, o - self.value)

    def __mul__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self._wrap(self.spec, self.value * o)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        if int(o) == 0:
            raise ZeroDivisionError("division by zero in " + self.spec.label())
        return self._wrap(self.spec, self.value / o)

    def __neg__(self):
        return self._wrap(self.spec, -self.value)

    def __pow__(self, exponent):
        if int(self) == 0 and exponent < 0:
            raise ZeroDivisionError("0 has no inverse")
        return self._wrap(self.spec, self.value ** int(exponent))

    def inverse(self):
        return self ** -1

    def is_zero(self):
        return not any(self.coeffs)

    def __repr__(self):
        return f"{int(self)}∈{self.spec.label()}"


# ──────────────────────────────────────────────
# 建構
# ──────────────────────────────────────────────
def field_create(ell, k, modulus=None, max_order=MAX_FIELD_ORDER):
    """
    建立 F_{ℓ^k}。未指定 modulus 時採用字典序最小（低次係數先比）的單項不可約多項式。
    """
    if isinstance(ell, bool) or not isinstance(ell, (int, np.integer)) or not isprime(int(ell)):
        raise NotPrime(f"ℓ = {ell} 不是質數", ell=ell)
    if isinstance(k, bool) or not isinstance(k, (int, np.integer)) or k < 1:
        raise DegreeMismatch(f"次數 k = {k} 必須是正整數", degree=k)
    ell, k = int(ell), int(k)
    if ell ** k > max_order:
        raise FieldTooLarge(f"域大小 {ell}^{k} 超過上限 {max_order}", ell=ell, degree=k, max_order=max_order)

    if modulus is None:
        return FieldSpec(ell, k, default_modulus(ell, k))

    coeffs = [int(c) % ell for c in modulus]
    while len(coeffs) > 1 and coeffs[-1] == 0:
        coeffs.pop()
    if len(coeffs) - 1 != k:
        raise DegreeMismatch("模數次數與 k 不符", degree=k, modulus=list(modulus))
    if coeffs[-1] != 1:
        raise ReducibleModulus("模數必須是 monic", modulus=list(modulus))
    if k == 1:
        # 質數域一律以 x 為模數，座標就是元素本身
        return FieldSpec(ell, 1, (0, 1))
    if not galois.Poly(list(reversed(coeffs)), field=galois.GF(ell)).is_irreducible():
        raise ReducibleModulus(f"模數在 F_{ell} 上可約", modulus=coeffs, ell=ell)
    return FieldSpec(ell, k, tuple(coeffs))


@lru_cache(maxsize=None)
def default_modulus(ell, k):
    if k == 1:
        return (0, 1)
    base = galois.GF(ell)
    # product 以第一個座標變化最慢，正好是低次係數優先的字典序
    for lower in itertools.product(range(ell), repeat=k):
        if lower[0] == 0:
            continue
        coeffs = lower + (1,)
        if galois.Poly(list(reversed(coeffs)), field=base).is_irreducible():
            logger.debug(f"[FF] F_{ell}^{k} 預設模數 {coeffs}")
            return coeffs
    raise ReducibleModulus("找不到不可約多項式", ell=ell, degree=k)


def field_generator(spec):
    """模數的根 x（質數域的模數是 x，根為 0）"""
    return FieldElem.from_int(spec, spec.ell if spec.degree > 1 else 0)


def power_basis(spec):
    """F_ℓ 上的 power basis 1, x, ..., x^{k-1} 的整數表示"""
    return [spec.ell ** j for j in range(spec.degree)]


def field_elements(spec):
    """整數表示由小到大的全部元素 (galois FieldArray)"""
    return spec.gf.elements


def int_to_digits(values, ell, k):
    values = np.asarray(values, dtype=np.int64)
    return (values[..., None] // (ell ** np.arange(k, dtype=np.int64))) % ell


# ──────────────────────────────────────────────
# Frobenius 與嵌入
# ──────────────────────────────────────────────
def frobenius_endo(x):
    return x ** x.spec.ell


def embedding_table(source, target):
    if source.ell != target.ell or target.degree % source.degree != 0:
        raise NoEmbedding(
            f"{source.label()} 無法嵌入 {target.label()}",
            source=source.to_json(),
            target=target.to_json(),
        )
    return _embedding_table(source, target)


@lru_cache(maxsize=None)
def conway_root(spec):
    """
    spec 中 Conway 多項式 C_{ℓ,k} 的根（整數表示最小者）。

    Conway 多項式彼此相容：k | K 時 ω_K^{(ℓ^K−1)/(ℓ^k−1)} 是 C_{ℓ,k} 的根，
    所以用它們定義的嵌入在合成下一致。
    """
    try:
        conway = galois.conway_poly(spec.ell, spec.degree)
    except LookupError:
        conway = galois.conway_poly(spec.ell, spec.degree, search=True)
    GF = spec.gf
    coeffs = [int(c) for c in conway.coeffs]
    roots = galois.Poly(coeffs, field=GF).roots()
    return GF(int(np.min(roots.view(np.ndarray))))


@lru_cache(maxsize=None)
def _embedding_table(source, target):
    if source == target:
        return np.arange(source.order, dtype=np.int64)
    if source.degree == 1:
        return np.arange(source.ell, dtype=np.int64)
    GF = target.gf
    # x = ω_S^e  ↦  ω_T^{e·(|T|−1)/(|S|−1)}
    e = int(source.gf(source.ell).log(conway_root(source)))
    step = (target.order - 1) // (source.order - 1)
    root = conway_root(target) ** ((e * step) % (target.order - 1))
    powers = root ** np.arange(source.degree)
    digits = GF(int_to_digits(np.arange(source.order), source.ell, source.degree))
    table = np.asarray((digits * powers).sum(axis=-1).view(np.ndarray), dtype=np.int64)
    logger.debug(f"[FF] 嵌入 {source.label()} → {target.label()}：x ↦ {int(root)}")
    return table


def embed_subfield(x, target):
    table = embedding_table(x.spec, target)
    return FieldElem.from_int(target, int(table[int(x)]))
