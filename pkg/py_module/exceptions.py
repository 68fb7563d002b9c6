"""
全域錯誤階層

每個錯誤都帶 witness（dict），CLI 會原樣序列化到報告中，不允許只有一句訊息。
InputError → exit 2；MathematicalError → exit 1。
"""
import numpy as np


class SaturateError(Exception):
    exit_code = 2

    def __init__(self, message, **witness):
        super().__init__(message)
        self.message = message
        self.witness = witness

    def to_dict(self):
        return {
            "type": type(self).__name__,
            "message": self.message,
            "witness": jsonable(self.witness),
        }


class InputError(SaturateError):
    """輸入資料本身不合法（格式、欄位、域描述）"""
    exit_code = 2


class MathematicalError(SaturateError):
    """輸入合法，但數學前提不成立或檢查無法完成"""
    exit_code = 1


# ──────────────────────────────────────────────
# ff
# ──────────────────────────────────────────────
class NotPrime(InputError):
    pass


class ReducibleModulus(InputError):
    pass


class DegreeMismatch(InputError):
    pass


class FieldTooLarge(InputError):
    pass


class NoEmbedding(MathematicalError):
    pass


# ──────────────────────────────────────────────
# matgrp / envelope
# ──────────────────────────────────────────────
class CharTooSmall(MathematicalError):
    pass


class NotNilpotent(MathematicalError):
    pass


class NotUnipotent(MathematicalError):
    pass


class SingularGenerator(InputError):
    pass


class OrderCapExceeded(MathematicalError):
    pass


class EnumerationBudgetExceeded(MathematicalError):
    pass


# ──────────────────────────────────────────────
# rootdata
# ──────────────────────────────────────────────
class InvalidType(InputError):
    pass


class WeightLatticeMismatch(InputError):
    pass


class NotDominant(InputError):
    pass


# ──────────────────────────────────────────────
# weilres
# ──────────────────────────────────────────────
class FieldMismatch(InputError):
    pass


class HypothesisViolated(MathematicalError):
    pass


# ──────────────────────────────────────────────
# frobenius
# ──────────────────────────────────────────────
class NotMonic(InputError):
    pass


class WrongField(InputError):
    pass


class DegenerateField(InputError):
    pass


class RootFindingFailure(MathematicalError):
    pass


class BadDenominator(InputError):
    pass


class EllEqualsP(InputError):
    pass


# ──────────────────────────────────────────────
# cli
# ──────────────────────────────────────────────
class UnknownCommand(InputError):
    pass


class MalformedInput(InputError):
    pass


class ManifestError(InputError):
    pass


def jsonable(value):
    """witness 內可能混入 numpy 整數、Fraction、tuple；統一轉成 JSON 能吃的型別"""
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, int):
        return int(value)
    if isinstance(value, float):
        return value
    if hasattr(value, "numerator") and hasattr(value, "denominator"):
        if value.denominator == 1:
            return int(value.numerator)
        return f"{value.numerator}/{value.denominator}"
    try:
        return int(value)
    except (TypeError, ValueError):
        return str(value)
