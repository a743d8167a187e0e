from itertools import product

import numpy as np
import pytest
from hypothesis import given, strategies as st

import oracles
from rankstair import fields
from rankstair.fields import (BaseMatrix, ExtMatrix, contract_phi, expand_phi, make_tower,
                              matmul_mixed, rank_q)

TOWERS = [(2, 1, 3), (2, 1, 4), (3, 1, 3), (2, 2, 3), (3, 2, 2), (5, 1, 2), (2, 4, 2)]


def oracle_for(T):
    return oracles.ExtField(oracles.SmallField(T.p, T.base_poly), T.ext_poly)


def elem_pairs(T, rng, count=60):
    return T.random(rng, count), T.random(rng, count)


def test_degenerate_tower():
    T = make_tower(2, 1, 1)
    assert (T.q, T.m) == (2, 1)
    assert T.mul(np.array([1]), np.array([1])).tolist() == [1]


def test_f8_default_polynomial_and_power_basis():
    T = make_tower(2, 1, 3)
    assert list(T.ext_poly) == [1, 1, 0, 1]  # x^3 + x + 1, the first irreducible cubic
    assert T.power_basis


def test_default_polynomials_are_lexicographically_first():
    for p, m in [(2, 2), (2, 4), (3, 2), (3, 3), (5, 2)]:
        F = oracles.SmallField(p, [0, 1])
        first = None
        for low in product(range(p), repeat=m):
            cand = list(reversed(low))  # integer order: higher coefficients vary slowest
            if oracles.is_irreducible(F, cand + [1]):
                first = cand + [1]
                break
        assert list(make_tower(p, 1, m).ext_poly) == first


@pytest.mark.parametrize("ptm", TOWERS)
def test_default_polynomials_irreducible_by_trial_division(ptm):
    T = make_tower(*ptm)
    base = oracles.SmallField(T.p, [0, 1])
    assert oracles.is_irreducible(base, list(T.base_poly))
    assert oracles.is_irreducible(oracles.SmallField(T.p, T.base_poly), list(T.ext_poly))


@pytest.mark.slow
def test_example_scale_tower():
    T = make_tower(2, 8, 64)
    assert (T.q, T.m) == (256, 64)
    rng = np.random.default_rng(1)
    a = T.random(rng, 20)
    a[a.reshape(20, -1).any(axis=1) == 0, 0] = 1
    assert np.array_equal(T.mul(a, T.inv(a)), np.broadcast_to(T.one(), a.shape))
    assert np.array_equal(T.frobenius(a, 64), a)


def test_reducible_polynomial_rejected():
    with pytest.raises(ValueError):
        make_tower(2, 1, 2, ext_poly=[1, 0, 1])  # (x+1)^2
    with pytest.raises(ValueError):
        make_tower(2, 2, 1, base_poly=[0, 0, 1])


def test_dependent_basis_rejected():
    with pytest.raises(ValueError):
        make_tower(2, 1, 2, basis=[[1, 0], [1, 0]])


def test_f4_multiplication_table_exhaustive():
    T = make_tower(2, 1, 2)
    E = oracle_for(T)
    elems = T.all_elements()
    prod_ = T.mul(elems[:, None], elems[None, :])
    for i, a in enumerate(elems):
        for j, b in enumerate(elems):
            assert tuple(prod_[i, j]) == E.mul(tuple(a), tuple(b))
    # field axioms: every nonzero element has an inverse, no zero divisors
    nz = elems[1:]
    assert np.array_equal(T.mul(nz, T.inv(nz)), np.broadcast_to(T.one(), nz.shape))


@pytest.mark.parametrize("ptm", TOWERS)
def test_multiplication_matches_schoolbook_oracle(ptm, rng):
    T = make_tower(*ptm)
    E = oracle_for(T)
    a, b = elem_pairs(T, rng)
    got = T.mul(a, b)
    for x, y, z in zip(a, b, got):
        assert tuple(z) == E.mul(tuple(x), tuple(y))


@pytest.mark.parametrize("ptm", TOWERS)
def test_identity_and_inverse_axioms(ptm, rng):
    T = make_tower(*ptm)
    a = T.random(rng, 50)
    assert np.array_equal(T.mul(a, T.one()), a)
    nz = a[a.any(axis=1)]
    assert np.array_equal(T.mul(nz, T.inv(nz)), np.broadcast_to(T.one(), nz.shape))
    with pytest.raises(ZeroDivisionError):
        T.inv(T.zeros(1))


@pytest.mark.parametrize("ptm", TOWERS)
def test_frobenius_is_q_power(ptm, rng):
    T = make_tower(*ptm)
    E = oracle_for(T)
    a = T.random(rng, 15)
    for i in range(T.m + 1):
        got = T.frobenius(a, i)
        for x, y in zip(a, got):
            assert tuple(y) == E.pow(tuple(x), T.q ** i)


def test_frobenius_additive_on_all_of_f8():
    T = make_tower(2, 1, 3)
    el = T.all_elements()
    for i in range(4):
        lhs = T.frobenius(T.add(el[:, None], el[None, :]), i)
        rhs = T.add(T.frobenius(el, i)[:, None], T.frobenius(el, i)[None, :])
        assert np.array_equal(lhs, rhs)


def test_frobenius_order_is_m_over_fq():
    T = make_tower(2, 2, 3)
    el = T.all_elements()
    orders = []
    for i in range(1, T.m + 1):
        if np.array_equal(T.frobenius(el, i), el):
            orders.append(i)
    assert orders[0] == T.m


def test_pow_matches_repeated_multiplication(rng):
    T = make_tower(3, 1, 3)
    a = T.random(rng, 10)
    acc = np.broadcast_to(T.one(), a.shape).copy()
    for e in range(8):
        assert np.array_equal(T.pow(a, e), acc)
        acc = T.mul(acc, a)


def test_expand_phi_basics():
    T = make_tower(2, 1, 4)
    assert not expand_phi(T, T.zeros(2, 3)).any()
    col = expand_phi(T, T.gamma(0)[None, None])
    assert col[:, 0].tolist() == [1, 0, 0, 0]
    with pytest.raises(ValueError):
        contract_phi(T, np.zeros((3, 2), dtype=np.int64))


def test_expand_phi_layout_in_a_custom_basis(rng):
    # rows (i-1)m+u hold the gamma_u coordinate of entry (i, j)
    basis = [[1, 1, 0], [0, 1, 1], [0, 0, 1]]
    T = make_tower(2, 1, 3, basis=basis)
    C = T.random(rng, 2, 3)
    D = expand_phi(T, C)
    for i in range(2):
        for j in range(3):
            coords = D[i * 3:(i + 1) * 3, j]
            recon = np.zeros(3, dtype=np.int64)
            for u in range(3):
                recon = (recon + coords[u] * np.array(basis[u])) % 2
            assert np.array_equal(recon, C[i, j])


@pytest.mark.parametrize("ptm", TOWERS)
def test_phi_round_trip(ptm, rng):
    T = make_tower(*ptm)
    for _ in range(100 // len(TOWERS) + 1):
        C = T.random(rng, 3, 4)
        assert np.array_equal(contract_phi(T, expand_phi(T, C)), C)


def test_rank_q_examples(rng):
    T = make_tower(2, 1, 4)
    assert rank_q(T, T.zeros(2, 5)) == 0
    E = T.zeros(1, 5)
    E[0, 2] = T.random(rng)
    E[0, 2, 0] = 1
    assert rank_q(T, E) == 1
    hits = 0
    for _ in range(200):
        U = T.base.random(rng, (8, 2))
        V = T.base.random(rng, (2, 6))
        r = rank_q(T, contract_phi(T, fields.base_matmul(T.base, U, V)))
        assert r <= 2
        hits += r == 2
    assert hits > 100


def test_rank_q_against_oracle(rng):
    T = make_tower(3, 1, 2)
    E = oracle_for(T)
    for _ in range(30):
        M = T.random(rng, 2, 3)
        assert rank_q(T, M) == oracles.rank_q(E, [[tuple(x) for x in row] for row in M])


@pytest.mark.parametrize("ptm", TOWERS[:5])
def test_commutation_with_expansion(ptm, rng):
    T = make_tower(*ptm)
    for _ in range(40):
        C = T.random(rng, 2, 4)
        A = T.base.random(rng, (3, 4))
        E = T.random(rng, 2, 3)
        lhs = expand_phi(T, T.add(matmul_mixed(T, C, A), E))
        rhs = T.base.add(fields.base_matmul(T.base, expand_phi(T, C), A.T), expand_phi(T, E))
        assert np.array_equal(lhs, rhs)


def test_matmul_mixed_trivial_cases(rng):
    T = make_tower(2, 1, 3)
    C = T.random(rng, 2, 4)
    assert np.array_equal(matmul_mixed(T, C, np.eye(4, dtype=np.int64)), C)
    assert not matmul_mixed(T, C, np.zeros((3, 4), dtype=np.int64)).any()
    with pytest.raises(ValueError):
        matmul_mixed(T, C, np.eye(3, dtype=np.int64))


def test_rank_q_invariant_under_base_field_row_operations(rng):
    T = make_tower(2, 1, 3)
    for _ in range(50):
        E = T.random(rng, 3, 3)
        while True:
            Q = T.base.random(rng, (3, 3))
            if fields.base_rank(T.base, Q) == 3:
                break
        assert rank_q(T, T.matmul(T.embed(Q), E)) == rank_q(T, E)


def test_rank_q_invariant_under_invertible_extension_row_operations(rng):
    # an invertible Q over F_{q^m} acts F_q-linearly and bijectively on each column
    T = make_tower(2, 1, 3)
    for _ in range(200):
        E = T.random(rng, 2, 3)
        E[:, 2] = T.add(E[:, 0], E[:, 1])  # force rank_q below full
        Q = T.random(rng, 2, 2)
        if T.rank(Q) < 2:
            continue
        assert rank_q(T, T.matmul(Q, E)) == rank_q(T, E)


def test_rank_q_changes_under_extension_column_operations():
    # counterexample search: an invertible 2x2 matrix over F_8 acting on columns
    T = make_tower(2, 1, 3)
    rng = np.random.default_rng(5)
    witness = None
    for _ in range(500):
        E = T.zeros(3, 2)
        E[:, 0] = T.random(rng, 3)
        E[:, 1] = E[:, 0]  # rank_q 1 (or 0)
        Q = T.random(rng, 2, 2)
        if T.rank(Q) < 2 or not E.any():
            continue
        if rank_q(T, T.matmul(E, Q)) != rank_q(T, E):
            witness = (E, Q)
            break
    assert witness is not None
    E, Q = witness
    assert rank_q(T, E) == 1 and rank_q(T, T.matmul(E, Q)) == 2


def test_matrix_wrappers(rng):
    T = make_tower(2, 1, 3)
    C = ExtMatrix(T, T.random(rng, 2, 3))
    A = BaseMatrix(T.base, np.eye(3, dtype=np.int64))
    assert C.times_transpose(A) == C
    assert C.expand().rows == 6
    assert (C - C).rank_q() == 0
    with pytest.raises(ValueError):
        ExtMatrix(T, np.zeros((2, 2), dtype=np.int64))


@given(st.integers(0, 2**32 - 1), st.sampled_from(TOWERS))
def test_distributivity_property(seed, ptm):
    T = make_tower(*ptm)
    r = np.random.default_rng(seed)
    a, b, c = T.random(r, 3, 8)
    assert np.array_equal(T.mul(a, T.add(b, c)), T.add(T.mul(a, b), T.mul(a, c)))
    assert np.array_equal(T.mul(a, b), T.mul(b, a))


@given(st.integers(0, 2**32 - 1))
def test_linear_algebra_properties(seed):
    T = make_tower(3, 1, 2)
    r = np.random.default_rng(seed)
    M = T.random(r, 3, 5)
    N = T.nullspace(M)
    assert N.shape[0] == 5 - T.rank(M)
    assert not T.matmul(M, np.swapaxes(N, 0, 1)).any()
    X = T.random(r, 2, 3)
    B = T.matmul(X, M)
    Xs = T.solve_left(M, B)
    assert np.array_equal(T.matmul(Xs, M), B)


def test_inverse_and_left_nullspace(rng):
    T = make_tower(2, 2, 2)
    while True:
        M = T.random(rng, 3, 3)
        if T.rank(M) == 3:
            break
    assert np.array_equal(T.matmul(M, T.inverse(M)), T.identity(3))
    L = T.left_nullspace(T.random(rng, 4, 2))
    assert L.shape[0] >= 2


def test_integer_codes_round_trip():
    T = make_tower(3, 1, 2)
    el = T.all_elements()
    assert T.to_ints(el).tolist() == list(range(9))
    assert np.array_equal(T.from_ints(T.to_ints(el)), el)


def test_size_budget():
    with pytest.raises(ValueError):
        make_tower(2, 17, 1)
    with pytest.raises(ValueError):
        make_tower(4, 1, 2)
