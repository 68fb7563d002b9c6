import itertools

import numpy as np
import pytest

from py_module.envelope import (
    LieSubspace,
    is_absolutely_irreducible,
    is_acceptable_pair,
    is_saturated_points,
    log_span,
    nori_envelope,
    prime_lie_span,
    saturation_closure,
    saturation_witness,
    tensor_product_group,
)
from py_module.exceptions import CharTooSmall, EnumerationBudgetExceeded
from py_module.ff import field_create
from py_module.matgrp import (
    SquareMatrix,
    block_projection,
    diagonal,
    diagonal_torus,
    direct_sum_embed,
    embed_matrix,
    exp_n,
    gamma_plus,
    group_closure,
    matrix_unit,
    root_group,
    sl_order,
    special_linear_group,
    t_power,
    tensor_embed,
    transvection,
    trivial_group,
)


# ──────────────────────────────────────────────
# log_span
# ──────────────────────────────────────────────
def test_log_span_examples(f5, f7):
    assert log_span(trivial_group(f5, 2)).dim == 0
    L = log_span(group_closure([transvection(f5, 2, 0, 1)]))
    assert L.dim == 1
    assert L.contains(matrix_unit(f5, 2, 0, 1, 3))
    assert not L.contains(matrix_unit(f5, 2, 1, 0))
    assert log_span(special_linear_group(f7, 2)).dim == 3


def test_prime_span_is_larger_over_extension(f25):
    G = root_group(f25, 2, 0, 1)
    assert G.order == 25
    assert log_span(G, "full").dim == 1
    assert prime_lie_span(G).dim == 2


def test_lie_subspace_elements(f5):
    L = log_span(root_group(f5, 2, 0, 1))
    assert L.size == 5
    assert L.elements().shape == (5, 2, 2)
    with pytest.raises(EnumerationBudgetExceeded):
        L.elements(budget=4)
    assert LieSubspace.zero(f5, 2).elements().shape == (1, 2, 2)


def test_log_span_needs_large_characteristic(f2):
    with pytest.raises(CharTooSmall):
        log_span(trivial_group(f2, 2))


# ──────────────────────────────────────────────
# Nori envelope
# ──────────────────────────────────────────────
def test_envelope_of_root_group(f7):
    pair = nori_envelope(group_closure([transvection(f7, 2, 0, 1)]))
    assert pair.stable
    assert pair.group.order == 7
    assert pair.lie.dim == 1


@pytest.mark.slow
@pytest.mark.parametrize("ell", [5, 7, 11, 13])
def test_envelope_of_sl2_generators_matches_closure(ell):
    spec = field_create(ell, 1)
    G = group_closure([transvection(spec, 2, 0, 1), transvection(spec, 2, 1, 0)])
    pair = nori_envelope(G)
    assert pair.group.order == ell * (ell ** 2 - 1) == sl_order(ell, 2)
    assert pair.group == G
    assert pair.lie.dim == 3
    assert log_span(pair.group) == pair.lie
    assert is_absolutely_irreducible(pair.group)


def test_envelope_is_idempotent(f11):
    G = group_closure([transvection(f11, 2, 0, 1), transvection(f11, 2, 1, 0)])
    pair = nori_envelope(G)
    again = nori_envelope(pair.group)
    assert again.group == pair.group
    assert again.lie == pair.lie
    assert pair.summary()["gamma_plus_order"] == 1320


def test_envelope_requires_ell_at_least_2n(f5):
    with pytest.raises(CharTooSmall):
        nori_envelope(trivial_group(f5, 3))


def test_envelope_of_torus_is_trivial(f5):
    pair = nori_envelope(diagonal_torus(f5, 2))
    assert pair.group.order == 1
    assert pair.lie.dim == 0


# ──────────────────────────────────────────────
# saturation
# ──────────────────────────────────────────────
def test_saturation_closure_contains_all_t_powers(f11):
    u = transvection(f11, 2, 0, 1)
    G = group_closure([u, diagonal(f11, [2, 6])])
    H = saturation_closure(G)
    assert G.issubset(H)
    for t in range(11):
        assert t_power(u, f11.element(t)) in H
    assert saturation_closure(H) == H
    assert is_saturated_points(H)


def test_is_saturated_points_examples(f5, f7, f25):
    assert is_saturated_points(diagonal_torus(f5, 2))
    assert is_saturated_points(group_closure([transvection(f7, 2, 0, 1)]))
    assert is_saturated_points(root_group(f25, 2, 0, 1))
    cyclic = group_closure([transvection(f25, 2, 0, 1)])
    assert cyclic.order == 5
    assert not is_saturated_points(cyclic)
    witness = saturation_witness(cyclic)
    assert witness["t"] == 5


def test_saturation_over_extension_fills_root_group(f5, f25):
    G = group_closure([transvection(f5, 2, 0, 1)])
    H = saturation_closure(G, extension_degree=2)
    assert H.spec == f25
    assert H == root_group(f25, 2, 0, 1)


@pytest.mark.slow
def test_saturation_of_sl2_f5_inside_f25(f5, f25, sl2_f5):
    H = saturation_closure(sl2_f5, extension_degree=2)
    assert H.order == sl_order(25, 2)
    assert H.order > sl2_f5.order
    assert all(embed_matrix(g, f25) in H for g in sl2_f5.generators)
    assert is_saturated_points(H)


def test_saturation_commutes_with_block_projection(f25):
    u = transvection(f25, 2, 0, 1)
    G = group_closure([direct_sum_embed(u, u)])
    sat = saturation_closure(G)
    top = block_projection(sat, [2, 2], 0)
    projected = block_projection(G, [2, 2], 0)
    sat_of_projection = saturation_closure(projected)
    assert sat.order == 25
    assert sat_of_projection.issubset(top)
    assert top == sat_of_projection


# ──────────────────────────────────────────────
# acceptable pairs
# ──────────────────────────────────────────────
def test_acceptable_pair_examples(f5):
    assert is_acceptable_pair(LieSubspace.zero(f5, 2), trivial_group(f5, 2))
    R = root_group(f5, 2, 0, 1)
    report = is_acceptable_pair(log_span(R), R)
    assert report.acceptable
    assert not report.sampled


def test_acceptable_pair_rejects_extra_nilpotents(f5):
    R = root_group(f5, 2, 0, 1)
    stack = f5.gf(np.stack([matrix_unit(f5, 2, 0, 1).data, matrix_unit(f5, 2, 1, 0).data]))
    L = LieSubspace.span(f5, 2, stack)
    report = is_acceptable_pair(L, R)
    assert not report
    assert report.witness["direction"] == "exp"


def test_acceptable_pair_of_envelope(f11):
    pair = nori_envelope(group_closure([transvection(f11, 2, 0, 1), transvection(f11, 2, 1, 0)]))
    report = is_acceptable_pair(pair.lie, pair.group)
    assert report.acceptable
    assert report.checked >= 121


def test_acceptable_pair_sampling(f5, sl2_f5):
    L = log_span(sl2_f5)
    report = is_acceptable_pair(L, sl2_f5, budget=10, trials=50, seed=1)
    assert report.sampled
    assert report.acceptable
    with pytest.raises(EnumerationBudgetExceeded):
        is_acceptable_pair(L, sl2_f5, budget=10, allow_sampling=False)


# ──────────────────────────────────────────────
# Burnside
# ──────────────────────────────────────────────
def test_absolute_irreducibility_examples(f5, sl2_f5):
    assert is_absolutely_irreducible(sl2_f5)
    assert not is_absolutely_irreducible(diagonal_torus(f5, 2))
    assert is_absolutely_irreducible(trivial_group(f5, 1))


def test_irreducibility_agrees_with_rank_oracle(f5):
    rng = np.random.default_rng(11)
    GF = f5.gf
    checked = 0
    while checked < 20:
        mats = [GF(rng.integers(0, 5, size=(2, 2))) for _ in range(rng.integers(1, 3))]
        if any(np.linalg.det(m) == 0 for m in mats):
            continue
        G = group_closure([SquareMatrix(f5, m) for m in mats])
        oracle = np.linalg.matrix_rank(G.stack.reshape(G.order, 4)) == 4
        assert is_absolutely_irreducible(G) == oracle
        checked += 1


def test_gamma_plus_irreducible_implies_envelope_irreducible(f7):
    G = group_closure([transvection(f7, 2, 0, 1), transvection(f7, 2, 1, 0), diagonal(f7, [3, 1])])
    assert is_absolutely_irreducible(gamma_plus(G))
    assert is_absolutely_irreducible(nori_envelope(G).group)


# ──────────────────────────────────────────────
# tensor products
# ──────────────────────────────────────────────
def _saturated_corpus(spec):
    return [
        trivial_group(spec, 2),
        root_group(spec, 2, 0, 1),
        root_group(spec, 2, 1, 0),
        diagonal_torus(spec, 2),
    ]


@pytest.mark.slow
def test_tensor_product_of_saturated_groups_over_f5(f5, sl2_f5):
    corpus = _saturated_corpus(f5) + [sl2_f5]
    assert all(is_saturated_points(G) for G in corpus)
    for G1, G2 in itertools.combinations_with_replacement(corpus, 2):
        T = tensor_product_group(G1, G2)
        assert T.n == 4
        assert is_saturated_points(T)


@pytest.mark.slow
def test_tensor_product_of_saturated_groups_over_f25(f25):
    corpus = _saturated_corpus(f25)
    assert all(is_saturated_points(G) for G in corpus)
    for G1, G2 in itertools.combinations_with_replacement(corpus, 2):
        assert is_saturated_points(tensor_product_group(G1, G2))


def test_tensor_of_exp_is_exp_of_tensor(f5):
    one = SquareMatrix.identity(f5, 2)
    for X in (matrix_unit(f5, 2, 0, 1), matrix_unit(f5, 2, 1, 0, 3)):
        assert exp_n(tensor_embed(X, one)) == tensor_embed(exp_n(X), one)
