"""Exact rationals, integer normal forms, determinants and the 2-power test.

Rationals are `fractions.Fraction`.  Reals and complex numbers are mpmath
`mpf`/`mpc` evaluated at an explicit working precision (decimal digits).
"""
from __future__ import annotations

import contextvars
import math
import os
from contextlib import contextmanager
from fractions import Fraction
from functools import wraps
from typing import NamedTuple, Sequence

import mpmath

PRECISION_ENV = "ZETABSD_PRECISION"
DEFAULT_DIGITS = 50
DEFAULT_REL_TOL = "1e-6"
TWO_POWER_BOUND = 64
INFINITE = math.inf

IntMatrix = list[list[int]]


class InvalidComparison(ValueError):
    pass


def configured_digits() -> int:
    raw = os.environ.get(PRECISION_ENV)
    if raw is None:
        return DEFAULT_DIGITS
    try:
        digits = int(raw)
    except ValueError:
        raise ValueError(f"{PRECISION_ENV}={raw!r} is not an integer") from None
    if digits < 15:
        raise ValueError(f"{PRECISION_ENV} must be at least 15, got {digits}")
    return digits


_digits: contextvars.ContextVar[int | None] = contextvars.ContextVar("zetabsd_digits", default=None)


def current_digits() -> int:
    d = _digits.get()
    return configured_digits() if d is None else d


@contextmanager
def working_precision(digits: int | None = None):
    """Run a block at `digits` significant decimal digits (default: configured)."""
    d = current_digits() if digits is None else int(digits)
    token = _digits.set(d)
    try:
        with mpmath.workdps(d):
            yield d
    finally:
        _digits.reset(token)


def precise(func):
    # mpmath's global default is 15 digits; public entry points lift it.
    @wraps(func)
    def wrapper(*args, **kwargs):
        d = current_digits()
        if mpmath.mp.dps >= d:
            return func(*args, **kwargs)
        with mpmath.workdps(d):
            return func(*args, **kwargs)

    return wrapper


# -- scalars ---------------------------------------------------------------

def as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("boolean is not a rational")
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot read {x!r} as an exact rational")


def to_real(x):
    """Convert int, Fraction, decimal string or mpf to mpf at current precision."""
    if isinstance(x, Fraction):
        return mpmath.mpf(x.numerator) / x.denominator
    if isinstance(x, (mpmath.mpf, mpmath.mpc)):
        return +x
    if isinstance(x, str):
        s = x.strip()
        if "/" in s:
            return to_real(Fraction(s))
        return mpmath.mpf(s)
    return mpmath.mpf(x)


def to_complex(x):
    if isinstance(x, mpmath.mpc):
        return +x
    if isinstance(x, complex):
        return mpmath.mpc(x)
    return mpmath.mpc(to_real(x))


def is_exact(x) -> bool:
    return isinstance(x, (int, Fraction)) and not isinstance(x, bool)


# -- integer matrices --------------------------------------------------------

def _shape(m: Sequence[Sequence]) -> tuple[int, int]:
    rows = len(m)
    cols = len(m[0]) if rows else 0
    for row in m:
        if len(row) != cols:
            raise ValueError("matrix is not rectangular")
    return rows, cols


def identity(n: int) -> IntMatrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def mat_mul(a, b):
    ra, ca = _shape(a)
    rb, cb = _shape(b)
    if ca != rb:
        raise ValueError(f"shape mismatch {ra}x{ca} * {rb}x{cb}")
    return [[sum(a[i][k] * b[k][j] for k in range(ca)) for j in range(cb)] for i in range(ra)]


def transpose(m):
    rows, cols = _shape(m)
    return [[m[i][j] for i in range(rows)] for j in range(cols)]


def smith_normal_form(m: Sequence[Sequence[int]]) -> tuple[list[int], IntMatrix, IntMatrix]:
    """Return (diag, left, right) with left*m*right diagonal and d1 | d2 | ...

    left and right are unimodular.  Zeros in diag come last.
    """
    rows, cols = _shape(m)
    a = [[int(x) for x in row] for row in m]
    left = identity(rows)
    right = identity(cols)

    def swap_rows(i, j):
        a[i], a[j] = a[j], a[i]
        left[i], left[j] = left[j], left[i]

    def swap_cols(i, j):
        for row in a:
            row[i], row[j] = row[j], row[i]
        for row in right:
            row[i], row[j] = row[j], row[i]

    def add_row(dst, src, k):  # row_dst += k * row_src
        a[dst] = [x + k * y for x, y in zip(a[dst], a[src])]
        left[dst] = [x + k * y for x, y in zip(left[dst], left[src])]

    def add_col(dst, src, k):
        for row in a:
            row[dst] += k * row[src]
        for row in right:
            row[dst] += k * row[src]

    for s in range(min(rows, cols)):
        while True:
            pivot = None
            for i in range(s, rows):
                for j in range(s, cols):
                    if a[i][j] and (pivot is None or abs(a[i][j]) < abs(a[pivot[0]][pivot[1]])):
                        pivot = (i, j)
            if pivot is None:
                break
            swap_rows(s, pivot[0])
            swap_cols(s, pivot[1])
            p = a[s][s]
            dirty = False
            for i in range(s + 1, rows):
                if a[i][s]:
                    add_row(i, s, -(a[i][s] // p))
                    dirty = dirty or a[i][s] != 0
            for j in range(s + 1, cols):
                if a[s][j]:
                    add_col(j, s, -(a[s][j] // p))
                    dirty = dirty or a[s][j] != 0
            if dirty:
                continue
            # pivot must divide the rest of the block
            bad = next(((i, j) for i in range(s + 1, rows) for j in range(s + 1, cols)
                        if a[i][j] % p), None)
            if bad is None:
                break
            add_row(s, bad[0], 1)
        if a[s][s] < 0:
            a[s] = [-x for x in a[s]]
            left[s] = [-x for x in left[s]]
    diag = [a[i][i] for i in range(min(rows, cols))]
    return diag, left, right


def snf_rank(m) -> int:
    return sum(1 for d in smith_normal_form(m)[0] if d)


def bareiss_det(m: Sequence[Sequence[int]]) -> int:
    n, cols = _shape(m)
    if n != cols:
        raise ValueError("determinant of a non-square matrix")
    if n == 0:
        return 1
    a = [[int(x) for x in row] for row in m]
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            swap = next((i for i in range(k + 1, n) if a[i][k]), None)
            if swap is None:
                return 0
            a[k], a[swap] = a[swap], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def exact_det(m) -> Fraction:
    """Determinant of a matrix of ints/Fractions, exactly."""
    n, cols = _shape(m)
    if n != cols:
        raise ValueError("determinant of a non-square matrix")
    if all(isinstance(x, int) for row in m for x in row):
        return Fraction(bareiss_det(m))
    den = 1
    for row in m:
        for x in row:
            den = math.lcm(den, as_fraction(x).denominator)
    scaled = [[int(as_fraction(x) * den) for x in row] for row in m]
    return Fraction(bareiss_det(scaled), den ** n)


def cokernel_order(m: Sequence[Sequence[int]], ambient_rank: int):
    """Order of the finite quotient (saturated sublattice of rank `ambient_rank`) / image.

    Returns an int, or INFINITE when the image has smaller rank.
    """
    diag = smith_normal_form(m)[0] if m and m[0] else []
    nonzero = [d for d in diag if d]
    if len(nonzero) > ambient_rank:
        raise ValueError(f"image rank {len(nonzero)} exceeds ambient rank {ambient_rank}")
    if len(nonzero) < ambient_rank:
        return INFINITE
    return math.prod(nonzero)


# -- real / complex matrices ---------------------------------------------------

def as_mpmatrix(rows) -> mpmath.matrix:
    if isinstance(rows, mpmath.matrix):
        return rows.copy()
    rows = [list(r) for r in rows]
    n, c = _shape(rows)
    out = mpmath.matrix(n, c)
    for i in range(n):
        for j in range(c):
            x = rows[i][j]
            out[i, j] = to_complex(x) if isinstance(x, (complex, mpmath.mpc)) else to_real(x)
    return out


@precise
def det_complex(m) -> mpmath.mpc:
    """Determinant by partially pivoted elimination at working precision."""
    a = as_mpmatrix(m)
    n = a.rows
    if a.cols != n:
        raise ValueError("determinant of a non-square matrix")
    det = mpmath.mpc(1)
    for k in range(n):
        p = max(range(k, n), key=lambda i: abs(a[i, k]))
        if a[p, k] == 0:
            return mpmath.mpc(0)
        if p != k:
            for j in range(n):
                a[k, j], a[p, j] = a[p, j], a[k, j]
            det = -det
        det *= a[k, k]
        for i in range(k + 1, n):
            f = a[i, k] / a[k, k]
            if f:
                for j in range(k + 1, n):
                    a[i, j] -= f * a[k, j]
    return det


# -- verdict helper ------------------------------------------------------------

class TwoPower(NamedTuple):
    k: int
    sign_flip: bool


@precise
def equal_up_to_two_power(a, b, rel_tol=DEFAULT_REL_TOL) -> TwoPower | None:
    """Find k with |a/b| = 2^k within rel_tol, |k| <= 64.  Sign reported separately."""
    if is_exact(a) and is_exact(b):
        return _exact_two_power(as_fraction(a), as_fraction(b))
    a, b = to_real(a), to_real(b)
    if b == 0:
        raise InvalidComparison("comparison against zero")
    if a == 0:
        return None
    ratio = a / b
    k = int(mpmath.nint(mpmath.log(abs(ratio), 2)))
    if abs(k) > TWO_POWER_BOUND:
        return None
    if abs(abs(ratio) / mpmath.mpf(2) ** k - 1) > to_real(rel_tol):
        return None
    return TwoPower(k, bool(ratio < 0))


def _exact_two_power(a: Fraction, b: Fraction) -> TwoPower | None:
    if b == 0:
        raise InvalidComparison("comparison against zero")
    if a == 0:
        return None
    r = abs(a / b)
    num, den = r.numerator, r.denominator
    if num & (num - 1) or den & (den - 1):
        return None
    k = num.bit_length() - den.bit_length()
    if abs(k) > TWO_POWER_BOUND:
        return None
    return TwoPower(k, (a < 0) != (b < 0))


def two_adic_split(x: Fraction) -> tuple[int, Fraction]:
    """x = 2^k * u with u having odd numerator and denominator."""
    if x == 0:
        raise ValueError("zero has no 2-adic valuation")
    num, den = x.numerator, x.denominator
    k = 0
    while num % 2 == 0:
        num //= 2
        k += 1
    while den % 2 == 0:
        den //= 2
        k -= 1
    return k, Fraction(num, den)
