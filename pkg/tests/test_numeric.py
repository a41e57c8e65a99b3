import itertools
import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from sympy import Matrix

from zetabsd.numeric import (INFINITE, InvalidComparison, PRECISION_ENV, bareiss_det, cokernel_order,
                             configured_digits, current_digits, det_complex, equal_up_to_two_power,
                             exact_det, mat_mul, smith_normal_form, snf_rank, to_real, two_adic_split,
                             working_precision)

small_ints = st.integers(min_value=-9, max_value=9)


def int_matrices(max_rows=4, max_cols=4):
    return st.integers(1, max_rows).flatmap(
        lambda r: st.integers(1, max_cols).flatmap(
            lambda c: st.lists(st.lists(small_ints, min_size=c, max_size=c), min_size=r, max_size=r)))


def determinantal_divisors(m):
    """gcd of all k x k minors, k = 1..min(rows, cols), computed with sympy."""
    rows, cols = len(m), len(m[0])
    out = []
    for k in range(1, min(rows, cols) + 1):
        g = 0
        for ri in itertools.combinations(range(rows), k):
            for ci in itertools.combinations(range(cols), k):
                g = math.gcd(g, int(Matrix([[m[i][j] for j in ci] for i in ri]).det()))
        out.append(g)
    return out


@settings(max_examples=150, deadline=None)
@given(int_matrices())
def test_smith_form_matches_determinantal_divisors(m):
    diag, left, right = smith_normal_form(m)
    prod = mat_mul(mat_mul(left, m), right)
    for i, row in enumerate(prod):
        for j, x in enumerate(row):
            assert x == (diag[i] if i == j and i < len(diag) else 0)
    assert abs(int(Matrix(left).det())) == 1 and abs(int(Matrix(right).det())) == 1
    for a, b in zip(diag, diag[1:]):
        assert b == 0 or (a != 0 and b % a == 0)
    running = 1
    for d, dk in zip(diag, determinantal_divisors(m)):
        running *= d
        assert abs(running) == dk
    assert snf_rank(m) == Matrix(m).rank()


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 5).flatmap(lambda n: st.lists(st.lists(small_ints, min_size=n, max_size=n),
                                                      min_size=n, max_size=n)))
def test_integer_determinants_agree_with_sympy(m):
    want = int(Matrix(m).det())
    assert bareiss_det(m) == want
    assert exact_det(m) == want


def test_exact_det_with_fractions():
    m = [[Fraction(1, 2), Fraction(1, 3)], [Fraction(1, 4), Fraction(1, 5)]]
    assert exact_det(m) == Fraction(1, 10) - Fraction(1, 12)
    assert exact_det([]) == 1


def test_cokernel_order():
    assert cokernel_order([[2, 0], [0, 3]], 2) == 6
    assert cokernel_order([[1, 2], [2, 4]], 2) == INFINITE
    # image of rank 1 inside a saturated rank-1 sublattice
    assert cokernel_order([[2, 4]], 1) == 2


def test_det_complex_matches_mpmath():
    with working_precision(40):
        m = mpmath.matrix([[1 + 2j, 3], [0.5j, -2]])
        assert abs(det_complex(m) - mpmath.det(m)) < mpmath.mpf(10) ** -35


@given(st.integers(-60, 60), st.fractions(min_value=Fraction(1, 50), max_value=50), st.booleans())
def test_two_power_exact(k, x, flip):
    a = x * Fraction(2) ** k * (-1 if flip else 1)
    tp = equal_up_to_two_power(a, x)
    assert tp is not None and tp.k == k and tp.sign_flip == flip


@given(st.integers(-40, 40), st.floats(0.01, 100))
def test_two_power_numeric(k, x):
    with working_precision(30):
        b = mpmath.mpf(x)
        tp = equal_up_to_two_power(b * mpmath.mpf(2) ** k, b, "1e-20")
        assert tp is not None and tp.k == k and not tp.sign_flip
        assert equal_up_to_two_power(3 * b * mpmath.mpf(2) ** k, b, "1e-6") is None


def test_two_power_edge_cases():
    assert equal_up_to_two_power(Fraction(3), Fraction(1)) is None
    assert equal_up_to_two_power(0, 1) is None
    assert equal_up_to_two_power(Fraction(2) ** 65, 1) is None  # beyond the search bound
    with pytest.raises(InvalidComparison):
        equal_up_to_two_power(1, 0)
    with pytest.raises(InvalidComparison):
        equal_up_to_two_power(mpmath.mpf(1), mpmath.mpf(0))


def test_two_adic_split():
    assert two_adic_split(Fraction(12, 5)) == (2, Fraction(3, 5))
    assert two_adic_split(Fraction(3, 8)) == (-3, Fraction(3))
    with pytest.raises(ValueError):
        two_adic_split(Fraction(0))


def test_to_real_parses_rationals_and_decimals():
    with working_precision(30):
        assert to_real("1/3") == mpmath.mpf(1) / 3
        assert to_real(Fraction(2, 7)) == mpmath.mpf(2) / 7
        assert to_real("0.25") == mpmath.mpf("0.25")


def test_precision_environment(monkeypatch):
    monkeypatch.setenv(PRECISION_ENV, "33")
    assert configured_digits() == 33
    assert current_digits() == 33
    with working_precision(60) as d:
        assert d == 60 and mpmath.mp.dps == 60 and current_digits() == 60
    monkeypatch.setenv(PRECISION_ENV, "5")
    with pytest.raises(ValueError):
        configured_digits()
    monkeypatch.setenv(PRECISION_ENV, "many")
    with pytest.raises(ValueError):
        configured_digits()
