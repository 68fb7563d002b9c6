from fractions import Fraction

import numpy as np
import pytest

from py_module.codec import decode_frob_table, load_json
from py_module.exceptions import (
    BadDenominator,
    DegenerateField,
    EllEqualsP,
    MalformedInput,
    NotMonic,
    WrongField,
)
from py_module.config import DEFAULT_PURITY_TOL
from py_module.ff import field_create
from py_module.frobenius import (
    FrobEntry,
    FrobTable,
    NumberField,
    absolute_norm,
    block_purity_check,
    compat_check,
    compat_check_table,
    exact_norm_identity,
    exact_polynomial,
    is_plain_rational,
    plain_necessary_numberfield,
    poly_mul,
    power_roots_polynomial,
    purity_check,
    reduce_mod,
    reduce_mod_place,
    reversed_monic,
    squared_roots_polynomial,
    validate_table,
)
from py_module.matgrp import SquareMatrix

GAUSSIAN = NumberField((1, 0, 1))


def _weil(a, q):
    """T² − aT + q"""
    return exact_polynomial([q, -a, 1])


def _gaussian_linear():
    # T − (1 + 2i)
    return exact_polynomial([[[-1, 1], [-2, 1]], [[1, 1], [0, 1]]], GAUSSIAN)


@pytest.fixture(scope="module")
def frob_table(data_dir):
    obj, _ = load_json(data_dir / "frob_table.json")
    return decode_frob_table(obj)


# ──────────────────────────────────────────────
# 建構
# ──────────────────────────────────────────────
def test_exact_polynomial_parses_rationals():
    P = exact_polynomial(["1/5", [3, 2], 1])
    assert P.coeffs == (Fraction(1, 5), Fraction(3, 2), Fraction(1))
    assert P.degree == 2
    assert P.is_rational
    assert P.to_json() == [[1, 5], [3, 2], [1, 1]]


def test_exact_polynomial_errors():
    with pytest.raises(NotMonic):
        exact_polynomial([1, 2])
    with pytest.raises(MalformedInput):
        exact_polynomial([])
    with pytest.raises(MalformedInput):
        exact_polynomial([[1, 0], 1])
    with pytest.raises(BadDenominator):
        exact_polynomial(["1/3", 1], primes=[5])
    with pytest.raises(MalformedInput):
        exact_polynomial([[1], [1]], GAUSSIAN)
    assert exact_polynomial(["1/25", 1], primes=[5]).coeffs[0] == Fraction(1, 25)


def test_polynomial_arithmetic():
    prod = poly_mul(exact_polynomial([-1, 1]), exact_polynomial([1, 1]))
    assert prod.coeffs == (-1, 0, 1)
    assert reversed_monic(exact_polynomial([-2, 1])).coeffs == (Fraction(-1, 2), 1)
    with pytest.raises(MalformedInput):
        reversed_monic(exact_polynomial([0, 1]))
    with pytest.raises(WrongField):
        poly_mul(exact_polynomial([-1, 1]), _gaussian_linear())


def test_squared_roots_of_weil_polynomial():
    # α² + β² = a² − 2q，α²β² = q²
    assert squared_roots_polynomial(_weil(3, 5)).coeffs == (25, 1, 1)
    cubed = power_roots_polynomial(exact_polynomial([-2, 1]), 3)
    assert cubed.coeffs == (-8, 1)


def test_squared_roots_over_gaussian_field():
    sq = squared_roots_polynomial(_gaussian_linear())
    # (1 + 2i)² = −3 + 4i
    assert sq.field == GAUSSIAN
    assert sq.coeffs == ((3, -4), (1, 0))


# ──────────────────────────────────────────────
# plain
# ──────────────────────────────────────────────
def test_plain_rational_examples():
    assert is_plain_rational(_weil(3, 5), 5)
    assert is_plain_rational(exact_polynomial(["-1/5", 1]), 5)
    assert not is_plain_rational(exact_polynomial([10, 4, 1]), 5)
    assert not is_plain_rational(exact_polynomial(["1/3", 0, 1]), 5)
    with pytest.raises(WrongField):
        is_plain_rational(_gaussian_linear(), 5)


def test_plain_necessary_over_gaussian_field():
    assert absolute_norm((Fraction(-1), Fraction(-2)), GAUSSIAN) == 5
    assert absolute_norm((Fraction(3), Fraction(0)), GAUSSIAN) == 9
    verdict = plain_necessary_numberfield(_gaussian_linear(), 5)
    assert verdict.status == "pass_necessary"
    # N(1 + i) = 2
    bad = exact_polynomial([[[-1, 1], [-1, 1]], [[1, 1], [0, 1]]], GAUSSIAN)
    verdict = plain_necessary_numberfield(bad, 5)
    assert verdict.status == "fail"
    assert verdict.witness["reason"] == "norm_of_constant_term"


def test_degenerate_field_rejected():
    field = NumberField((1, 2, 1))
    P = exact_polynomial([[[1, 1], [0, 1]], [[1, 1], [0, 1]]], field)
    with pytest.raises(DegenerateField):
        plain_necessary_numberfield(P, 5)


# ──────────────────────────────────────────────
# purity
# ──────────────────────────────────────────────
@pytest.mark.parametrize("a, q", [(0, 5), (3, 5), (-4, 5), (9, 25), (-21, 125)])
def test_weil_polynomials_are_pure(a, q):
    report = purity_check(_weil(a, q), q, 1)
    assert report.passed
    assert report.exact_norm_ok
    assert report.max_deviation < 1e-12


def test_split_polynomial_is_not_pure():
    report = purity_check(exact_polynomial([5, -6, 1]), 5, 1)
    assert not report.passed
    assert report.max_deviation > 0.5


def test_exact_norm_identity():
    assert exact_norm_identity(_weil(3, 5), 5, 1)
    assert not exact_norm_identity(exact_polynomial([10, 4, 1]), 5, 1)
    # T − 5 的範數恆等式為 5² = 5^{1·1·2}
    assert exact_norm_identity(exact_polynomial([-5, 1]), 5, 2)


def test_purity_over_gaussian_field():
    report = purity_check(_gaussian_linear(), 5, 1)
    assert report.passed
    assert report.exact_norm_ok
    assert len(report.deviations) == 2


def test_purity_errors():
    with pytest.raises(MalformedInput):
        purity_check(_weil(0, 5), 1, 1)


def test_block_purity():
    P = _weil(3, 5)
    assert block_purity_check(P, 5, 1, [[0], [1]])["passed"]
    assert block_purity_check(P, 5, 1, [[0, 1]])["passed"]
    over_25 = block_purity_check(_weil(3, 25), 25, 1, [[0], [1]], residue_degree=2)
    assert over_25["passed"]
    assert over_25["base_q"] == pytest.approx(5.0)
    with pytest.raises(MalformedInput):
        block_purity_check(P, 5, 1, [[0]])


# ──────────────────────────────────────────────
# mod ℓ
# ──────────────────────────────────────────────
def test_reduce_mod_examples():
    reduced = reduce_mod(_weil(3, 5), 7, p=5)
    assert [int(c) for c in reduced.coeffs] == [1, 4, 5]
    assert [int(c) for c in reduce_mod(exact_polynomial(["1/5", 1]), 7).coeffs] == [1, 3]
    with pytest.raises(EllEqualsP):
        reduce_mod(_weil(3, 5), 5, p=5)
    with pytest.raises(BadDenominator):
        reduce_mod(exact_polynomial(["1/7", 1]), 7)
    with pytest.raises(WrongField):
        reduce_mod(_gaussian_linear(), 13)


def test_reduce_at_gaussian_place():
    f13 = field_create(13, 1)
    reduced = reduce_mod_place(_gaussian_linear(), 13, f13.element(5), p=5)
    assert [int(c) for c in reduced.coeffs] == [1, 2]
    with pytest.raises(MalformedInput):
        reduce_mod_place(_gaussian_linear(), 13, f13.element(4))


def test_compat_check_over_gaussian_field():
    f13 = field_create(13, 1)
    entry = FrobEntry("x", 1, 5, _gaussian_linear())
    table = FrobTable(5, GAUSSIAN, (entry,))
    M = SquareMatrix.from_rows(f13, [[11]])
    assert compat_check(table, "x", M, root=f13.element(5))
    assert not compat_check(table, "x", SquareMatrix.from_rows(f13, [[1]]), root=f13.element(5))
    with pytest.raises(MalformedInput):
        compat_check(table, "x", M)


def test_compat_check_rational(frob_table):
    f7 = field_create(7, 1)
    # T² − T + 5 ≡ T² + 6T + 5 (mod 7)
    M = SquareMatrix.from_rows(f7, [[0, 2], [1, 1]])
    assert compat_check(frob_table, "q5_a1", M)
    assert not compat_check(frob_table, "q5_a2", M)
    report = compat_check_table(frob_table, {"q5_a1": M, "q5_a0": M})
    assert not report["passed"]
    assert report["entries"][0] == {"id": "q5_a1", "compatible": True}
    with pytest.raises(MalformedInput):
        compat_check(frob_table, "missing", M)


# ──────────────────────────────────────────────
# 整張表
# ──────────────────────────────────────────────
def test_validate_table_passes(frob_table):
    report = validate_table(frob_table, weight=1)
    assert report["count"] == 50
    assert report["passed"]
    assert report["failures"] == []
    assert all(row["plain_mode"] == "exact" for row in report["entries"])


def test_validate_table_without_weight(frob_table):
    report = validate_table(frob_table)
    assert report["passed"]
    assert report["entries"][0]["pure"] is None


def test_validate_detects_mutated_constant(data_dir):
    obj, _ = load_json(data_dir / "bad_table.json")
    report = validate_table(decode_frob_table(obj), weight=1)
    assert report["failures"] == ["q5_a-4"]
    bad = report["entries"][0]
    assert not bad["plain"]
    assert not bad["norm_identity"] or not bad["pure"]


def test_validate_checks_q_and_degree():
    entries = (
        FrobEntry("ok", 1, 5, _weil(1, 5)),
        FrobEntry("wrong_q", 2, 5, _weil(1, 5)),
        FrobEntry("wrong_degree", 1, 5, exact_polynomial([-5, 1])),
    )
    report = validate_table(FrobTable(5, None, entries, degree=2))
    assert report["failures"] == ["wrong_q", "wrong_degree"]
    assert report["entries"][1]["witness"]["q"] == {"expected": 25, "got": 5}


def test_validate_gaussian_table():
    table = FrobTable(5, GAUSSIAN, (FrobEntry("x", 1, 5, _gaussian_linear()),))
    report = validate_table(table, weight=1)
    assert report["passed"]
    assert report["entries"][0]["plain_mode"] == "necessary"


# ──────────────────────────────────────────────
# 隨機抽樣的代數性質
# ──────────────────────────────────────────────
NOT_PLAIN = (
    exact_polynomial([3, 1, 1]),
    exact_polynomial([10, 4, 1]),
    exact_polynomial(["1/3", 0, 1]),
    exact_polynomial([-2, 1]),
)


def _sample_pairs(frob_table, seed, count=25):
    pool = [e.poly for e in frob_table.entries] + list(NOT_PLAIN)
    rng = np.random.default_rng(seed)
    return [(pool[i], pool[j]) for i, j in rng.integers(0, len(pool), size=(count, 2))]


def test_plainness_is_multiplicative(frob_table):
    for P, R in _sample_pairs(frob_table, seed=11):
        expected = is_plain_rational(P, 5) and is_plain_rational(R, 5)
        assert is_plain_rational(poly_mul(P, R), 5) == expected


def test_plainness_survives_reversal(frob_table):
    pool = [e.poly for e in frob_table.entries] + list(NOT_PLAIN)
    for P in pool:
        assert is_plain_rational(reversed_monic(P), 5) == is_plain_rational(P, 5)


@pytest.mark.parametrize("ell", [7, 11, 13])
def test_reduction_is_multiplicative(frob_table, ell):
    for P, R in _sample_pairs(frob_table, seed=ell):
        assert reduce_mod(poly_mul(P, R), ell, p=5) == reduce_mod(P, ell, p=5) * reduce_mod(R, ell, p=5)


def test_squared_roots_are_pure_of_double_weight(frob_table):
    rng = np.random.default_rng(23)
    for i in rng.choice(len(frob_table.entries), size=15, replace=False):
        entry = frob_table.entries[i]
        report = purity_check(squared_roots_polynomial(entry.poly), entry.q, 2)
        assert report.max_deviation <= 2 * DEFAULT_PURITY_TOL
        assert report.exact_norm_ok
