import numpy as np
import pytest
from hypothesis import given, strategies as st

from rankstair.codes import gabidulin
from rankstair.fields import make_tower
from rankstair.formats import (FormatError, dump_code, dump_config, dump_matrix, dump_plan,
                               dump_responses, load_base_matrix, load_code, load_matrix,
                               load_plan, load_responses, parse_config)
from rankstair.staircase import plan


def same_tower(T1, T2):
    return ((T1.p, T1.s, T1.m, tuple(T1.base_poly), tuple(T1.ext_poly)) ==
            (T2.p, T2.s, T2.m, tuple(T2.base_poly), tuple(T2.ext_poly))
            and np.array_equal(T1.basis, T2.basis))


TOWERS = [(2, 1, 4), (3, 1, 3), (2, 2, 3), (5, 1, 2), (2, 8, 5)]


@pytest.mark.parametrize("ptm", TOWERS)
@given(seed=st.integers(0, 2**32 - 1), rows=st.integers(0, 4), cols=st.integers(1, 5))
def test_matrix_round_trip(ptm, seed, rows, cols):
    T = make_tower(*ptm)
    X = T.random(np.random.default_rng(seed), rows, cols)
    text = dump_matrix(T, X)
    T2, Y = load_matrix(text)
    assert np.array_equal(X, Y) and Y.shape == X.shape
    assert same_tower(T2, T)
    assert dump_matrix(T2, Y) == text


def test_matrix_header_layout():
    T = make_tower(2, 1, 3)
    text = dump_matrix(T, T.from_ints(np.array([[1, 6]])))
    head, row = text.splitlines()
    assert head == f"RMX1 p=2 s=1 m=3 rows=1 cols=2 basepoly=0,1 extpoly={','.join(map(str, T.ext_poly))}"
    assert row == "<1:0:0> <0:1:1>"


def test_base_matrix_round_trip(rng):
    T = make_tower(3, 2, 4)
    A = T.base.random(rng, (3, 5))
    text = dump_matrix(T, A)
    assert " m=1 " in text.splitlines()[0]
    F, B = load_base_matrix(text)
    assert np.array_equal(A, B) and (F.p, F.s, F.poly) == (T.base.p, T.base.s, T.base.poly)
    with pytest.raises(FormatError):
        load_base_matrix(dump_matrix(T, T.random(rng, 2, 2)))


@pytest.mark.parametrize("bad", [
    "RMX0 p=2 s=1 m=1 rows=1 cols=1 basepoly=0,1 extpoly=0,1\n<1>\n",
    "RMX1 p=2 s=1 m=1 rows=1 cols=2 basepoly=0,1 extpoly=0,1\n<1>\n",
    "RMX1 p=2 s=1 m=1 rows=1 cols=1 basepoly=0,1 extpoly=0,1\n<2>\n",
    "RMX1 p=2 s=1 m=2 rows=1 cols=1 basepoly=0,1 extpoly=1,1,1\n<1>\n",
    "RMX1 p=2 s=1 m=1 rows=1 cols=1 basepoly=0,1 extpoly=0,1\n1\n",
    "RMX1 p=2 s=1 m=1 rows=1 cols=1 extpoly=0,1\n<1>\n",
    "RMX1 p=2 s=1 m=1 rows=1 cols=1 basepoly=0,1 extpoly=0,1\n<1>\n<1>\n",
])
def test_malformed_matrices_rejected(bad):
    with pytest.raises(ValueError):
        load_matrix(bad)


@pytest.mark.parametrize("ptm,n,k", [((2, 1, 4), 4, 2), ((3, 1, 3), 2, 1), ((2, 2, 3), 3, 2)])
def test_code_round_trip(ptm, n, k):
    T = make_tower(*ptm)
    C = gabidulin(T, n, k)
    C2 = load_code(dump_code(C))
    assert np.array_equal(C2.generator, C.generator)
    assert np.array_equal(C2.parity, C.parity)
    assert dump_code(C2) == dump_code(C)


def test_code_positional_header():
    T = make_tower(2, 1, 4)
    C = gabidulin(T, 3, 2)
    basis = ",".join("<" + ":".join(map(str, row)) + ">" for row in T.basis)
    line = f"GAB1 2 1 4 3 2 0,1 {','.join(map(str, T.ext_poly))} {basis}"
    assert np.array_equal(load_code(line).generator, C.generator)


def test_code_with_other_basis_differs():
    T = make_tower(2, 1, 3)
    C = gabidulin(T, 3, 1)
    text = dump_code(C).replace("basis=<1:0:0>,<0:1:0>,<0:0:1>", "basis=<1:1:0>,<0:1:0>,<0:0:1>")
    assert "basis=<1:1:0>" in text
    assert not np.array_equal(load_code(text).generator, C.generator)


def test_plan_round_trip():
    T = make_tower(2, 8, 64)
    P = plan(40, 24, 8, 0, [24, 40])
    T2, P2 = load_plan(dump_plan(T, P))
    assert P2 == P and same_tower(T2, T)


def test_product_plan_round_trip():
    T = make_tower(2, 1, 3)
    P = plan(6, 2, 1, 0, [5, 6], family="product", l=2, m=3)
    assert load_plan(dump_plan(T, P))[1] == P


def test_plan_positional_tokens():
    T = make_tower(2, 1, 4)
    text = dump_plan(T, plan(4, 2, 1, 0, [3, 4]))
    tower_line = text.splitlines()[1]
    _, P = load_plan(f"STC1 4 2 1 0 D=4,3\n{tower_line}\n")
    assert P == plan(4, 2, 1, 0, [3, 4])
    with pytest.raises(FormatError):
        load_plan("STC1 4 2 1 0 D=4,3\n")


def test_responses_round_trip(rng):
    T = make_tower(2, 1, 4)
    R = T.random(rng, 3, 5)
    text = dump_responses(T, 5, 2, R)
    assert text.startswith("RSP1 d=5 j=2\n") and text.count("RMX1") == 5
    T2, d, j, R2 = load_responses(text)
    assert (d, j) == (5, 2) and np.array_equal(R, R2) and same_tower(T2, T)
    with pytest.raises(ValueError):
        dump_responses(T, 4, 2, R)


def test_config_round_trip():
    cfg = {"p": 2, "m": 4, "D": [3, 4], "scheme": "staircase-gabidulin"}
    text = dump_config(cfg)
    assert parse_config(text) == {"p": "2", "m": "4", "D": "3,4", "scheme": "staircase-gabidulin"}
    assert parse_config("# comment\n\nn = 4   # trailing\n") == {"n": "4"}
    with pytest.raises(FormatError):
        parse_config("n 4\n")
