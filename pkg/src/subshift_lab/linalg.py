"""Exact rational linear algebra over small dense matrices.

Everything in this module works with ``fractions.Fraction`` (or plain ints)
and is meant for the small systems that show up in this package: kernels of
``M - theta*I``, stationary distributions, absorption probabilities and
Poisson equations on chains with at most a few hundred states.  No floating
point anywhere; results are bit-for-bit reproducible.
"""

from __future__ import annotations

from fractions import Fraction
from math import gcd
from typing import Sequence

Matrix = list[list[Fraction]]


def frac_matrix(rows: Sequence[Sequence]) -> Matrix:
    return [[Fraction(x) for x in row] for row in rows]


def identity(n: int) -> Matrix:
    return [[Fraction(int(i == j)) for j in range(n)] for i in range(n)]


def mat_mul(a: Sequence[Sequence], b: Sequence[Sequence]) -> list[list]:
    n, k, m = len(a), len(b), len(b[0])
    out = [[0] * m for _ in range(n)]
    for i in range(n):
        ai = a[i]
        oi = out[i]
        for t in range(k):
            x = ai[t]
            if x:
                bt = b[t]
                for j in range(m):
                    oi[j] += x * bt[j]
    return out


def mat_vec(a: Sequence[Sequence], v: Sequence) -> list:
    return [sum(row[j] * v[j] for j in range(len(v))) for row in a]


def rref(m: Matrix) -> tuple[Matrix, list[int]]:
    """Reduced row echelon form; returns (rref matrix, pivot column list)."""
    m = [row[:] for row in m]
    rows = len(m)
    cols = len(m[0]) if rows else 0
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        pivot = next((i for i in range(r, rows) if m[i][c] != 0), None)
        if pivot is None:
            continue
        m[r], m[pivot] = m[pivot], m[r]
        inv = Fraction(1) / m[r][c]
        m[r] = [x * inv for x in m[r]]
        for i in range(rows):
            if i != r and m[i][c] != 0:
                f = m[i][c]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return m, pivots


def kernel_vector(m: Sequence[Sequence]) -> list[Fraction] | None:
    """One nonzero kernel vector of a square rational matrix, or None.

    Deterministic choice: the first free column gets value 1, the remaining
    free columns 0, pivot variables are back-substituted.
    """
    n = len(m)
    red, pivots = rref(frac_matrix(m))
    free = [c for c in range(n) if c not in pivots]
    if not free:
        return None
    c0 = free[0]
    v = [Fraction(0)] * n
    v[c0] = Fraction(1)
    for row, pc in zip(red, pivots):
        v[pc] = -row[c0]
    return v


def normalize_integer_vector(v: Sequence[Fraction]) -> list[int]:
    """Scale a rational vector to coprime integers, first nonzero positive."""
    if all(x == 0 for x in v):
        raise ValueError("zero vector cannot be normalized")
    lcm = 1
    for x in v:
        lcm = lcm * x.denominator // gcd(lcm, x.denominator)
    ints = [int(x * lcm) for x in v]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    ints = [x // g for x in ints]
    first = next(x for x in ints if x != 0)
    if first < 0:
        ints = [-x for x in ints]
    return ints


def solve_consistent(a: Sequence[Sequence], b: Sequence) -> list[Fraction]:
    """Solve a*x = b for any consistent system (possibly rank deficient).

    Free variables are set to 0.  Raises ValueError on inconsistency.
    """
    rows = len(a)
    cols = len(a[0])
    aug = [[Fraction(x) for x in a[i]] + [Fraction(b[i])] for i in range(rows)]
    red, pivots = rref(aug)
    if cols in pivots:
        raise ValueError("inconsistent linear system")
    x = [Fraction(0)] * cols
    for row, pc in zip(red, pivots):
        x[pc] = row[cols]
    return x


def char_poly(m: Sequence[Sequence[int]]) -> list[int]:
    """Characteristic polynomial det(X*I - M) of an integer matrix.

    Coefficients are returned leading-first: ``[1, c_{n-1}, ..., c_0]``.
    Uses the Faddeev-LeVerrier recursion; all divisions are exact in Z.
    """
    n = len(m)
    coeffs = [1]
    mk = [row[:] for row in m]
    for k in range(1, n + 1):
        tr = sum(mk[i][i] for i in range(n))
        # the division by k is exact for integer matrices
        assert tr % k == 0, "Faddeev-LeVerrier trace division must be exact"
        ck = -tr // k
        coeffs.append(ck)
        if k == n:
            break
        for i in range(n):
            mk[i][i] += ck
        mk = mat_mul(m, mk)
    return coeffs


def poly_eval(coeffs: Sequence, x) -> object:
    """Evaluate a leading-first coefficient list at x (Horner)."""
    acc = 0
    for c in coeffs:
        acc = acc * x + c
    return acc


def poly_divmod(num: Sequence[int], den: Sequence[int]) -> tuple[list[Fraction], list[Fraction]]:
    """Polynomial division, leading-first coefficient lists."""
    num = [Fraction(c) for c in num]
    den = [Fraction(c) for c in den]
    if all(c == 0 for c in den):
        raise ZeroDivisionError("polynomial division by zero")
    out: list[Fraction] = []
    rem = num[:]
    dn = len(den)
    while len(rem) >= dn:
        lead = rem[0] / den[0]
        out.append(lead)
        for i in range(dn):
            rem[i] -= lead * den[i]
        assert rem[0] == 0
        rem.pop(0)
    return out, rem
