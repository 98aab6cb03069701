"""Exact integer linear algebra on plain nested lists.

Matrices are ``list[list[int]]`` in row-major order and vectors are
``list[int]``.  Python integers are arbitrary precision, so nothing here can
overflow; floating point is never used.  Every function returns fresh lists
and leaves its arguments untouched.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import gcd
from numbers import Integral
from typing import Optional, Sequence

from .errors import DimensionError, NoKernelError, NotUnimodularError

Matrix = list[list[int]]
Vector = list[int]


# -- construction and basic arithmetic ---------------------------------------

def as_matrix(rows) -> Matrix:
    """Validate ``rows`` as a rectangular integer matrix and copy it."""
    m = [list(r) for r in rows]
    if not m or not m[0]:
        raise DimensionError("matrix must have at least one row and column")
    ncols = len(m[0])
    for r in m:
        if len(r) != ncols:
            raise DimensionError("ragged matrix")
        for e in r:
            if isinstance(e, bool) or not isinstance(e, Integral):
                raise TypeError(f"matrix entry {e!r} is not an integer")
    return [[int(e) for e in r] for r in m]


def as_vector(entries) -> Vector:
    v = list(entries)
    for e in v:
        if isinstance(e, bool) or not isinstance(e, Integral):
            raise TypeError(f"vector entry {e!r} is not an integer")
    return [int(e) for e in v]


def shape(m: Matrix) -> tuple[int, int]:
    return len(m), len(m[0])


def identity(n: int) -> Matrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def zeros(rows: int, cols: int) -> Matrix:
    return [[0] * cols for _ in range(rows)]


def copy(m: Matrix) -> Matrix:
    return [list(r) for r in m]


def transpose(m: Matrix) -> Matrix:
    return [list(c) for c in zip(*m)]


def matmul(a: Matrix, b: Matrix) -> Matrix:
    if len(a[0]) != len(b):
        raise DimensionError(f"cannot multiply {shape(a)} by {shape(b)}")
    bt = transpose(b)
    return [[sum(x * y for x, y in zip(row, col)) for col in bt] for row in a]


def matvec(m: Matrix, v: Sequence) -> list:
    """``m @ v`` for a column vector ``v`` (entries may be floats)."""
    if len(m[0]) != len(v):
        raise DimensionError(f"cannot apply {shape(m)} matrix to length {len(v)}")
    return [sum(x * y for x, y in zip(row, v)) for row in m]


def vecmat(v: Sequence, m: Matrix) -> list:
    """``v @ m`` for a row vector ``v``."""
    if len(v) != len(m):
        raise DimensionError(f"cannot apply length {len(v)} row to {shape(m)} matrix")
    return [sum(x * row[j] for x, row in zip(v, m)) for j in range(len(m[0]))]


def sub(a: Matrix, b: Matrix) -> Matrix:
    if shape(a) != shape(b):
        raise DimensionError(f"shape mismatch {shape(a)} vs {shape(b)}")
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def add(a: Matrix, b: Matrix) -> Matrix:
    if shape(a) != shape(b):
        raise DimensionError(f"shape mismatch {shape(a)} vs {shape(b)}")
    return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def scale(c: int, m: Matrix) -> Matrix:
    return [[c * x for x in r] for r in m]


def matpow(m: Matrix, k: int) -> Matrix:
    if k < 0:
        return matpow(inverse_unimodular(m), -k)
    result = identity(len(m))
    base = copy(m)
    while k:
        if k & 1:
            result = matmul(result, base)
        base = matmul(base, base)
        k >>= 1
    return result


def block_diag(*blocks: Matrix) -> Matrix:
    n = sum(len(b) for b in blocks)
    out = zeros(n, n)
    k = 0
    for b in blocks:
        for i, row in enumerate(b):
            out[k + i][k:k + len(row)] = row
        k += len(b)
    return out


def content(entries) -> int:
    """gcd of all entries of a vector or matrix (0 for the zero object)."""
    g = 0
    for e in entries:
        if isinstance(e, list):
            g = gcd(g, content(e))
        else:
            g = gcd(g, e)
    return g


def is_primitive(v: Sequence[int]) -> bool:
    return content(list(v)) == 1


def _require_square(m: Matrix) -> int:
    n, k = shape(m)
    if n != k:
        raise DimensionError(f"expected a square matrix, got {n}x{k}")
    return n


# -- determinants, inverses, rank --------------------------------------------

def det_exact(m: Matrix) -> int:
    """Determinant by Bareiss fraction-free elimination."""
    n = _require_square(m)
    a = copy(m)
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                # exact: Sylvester's identity guarantees divisibility
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def is_unimodular(m: Matrix) -> bool:
    n, k = shape(m)
    return n == k and det_exact(m) in (1, -1)


def _rref(m) -> tuple[list[list[Fraction]], list[int]]:
    a = [[Fraction(x) for x in r] for r in m]
    rows, cols = len(a), len(a[0])
    pivots = []
    r = 0
    for c in range(cols):
        p = next((i for i in range(r, rows) if a[i][c] != 0), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        piv = a[r][c]
        a[r] = [x / piv for x in a[r]]
        for i in range(rows):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return a, pivots


def rank_exact(m: Matrix) -> int:
    return len(_rref(m)[1])


def inverse_unimodular(m: Matrix) -> Matrix:
    """Exact inverse of an integer matrix with determinant +1 or -1."""
    n = _require_square(m)
    if det_exact(m) not in (1, -1):
        raise NotUnimodularError("matrix is not unimodular")
    aug = [list(r) + e for r, e in zip(m, identity(n))]
    red, _ = _rref(aug)
    inv = [r[n:] for r in red]
    # integrality follows from det = +-1
    return [[int(x) for x in r] for r in inv]


# -- normal forms --------------------------------------------------------------

def hermite_normal_form(m: Matrix) -> tuple[Matrix, Matrix]:
    """Row-style Hermite normal form.

    Returns ``(h, t)`` with ``t @ m == h`` and ``det(t) == +-1``.  ``h`` is in
    upper echelon form, each pivot is positive, and the entries above a pivot
    lie in ``[0, pivot)``.  Zero rows collect at the bottom.
    """
    h = as_matrix(m)
    rows, cols = shape(h)
    t = identity(rows)
    r = 0
    for c in range(cols):
        if r == rows:
            break
        # Euclid on column c, rows r..end
        while True:
            nz = [i for i in range(r, rows) if h[i][c] != 0]
            if not nz:
                break
            p = min(nz, key=lambda i: abs(h[i][c]))
            h[r], h[p] = h[p], h[r]
            t[r], t[p] = t[p], t[r]
            done = True
            for i in range(r + 1, rows):
                if h[i][c]:
                    q = h[i][c] // h[r][c]
                    h[i] = [x - q * y for x, y in zip(h[i], h[r])]
                    t[i] = [x - q * y for x, y in zip(t[i], t[r])]
                    if h[i][c]:
                        done = False
            if done:
                break
        if h[r][c] == 0:
            continue
        if h[r][c] < 0:
            h[r] = [-x for x in h[r]]
            t[r] = [-x for x in t[r]]
        piv = h[r][c]
        for i in range(r):
            q = h[i][c] // piv
            if q:
                h[i] = [x - q * y for x, y in zip(h[i], h[r])]
                t[i] = [x - q * y for x, y in zip(t[i], t[r])]
        r += 1
    return h, t


@dataclass(frozen=True)
class SnfDecomposition:
    """``left @ original @ right`` is diagonal with entries ``diag``."""

    left: Matrix
    diag: list[int]
    right: Matrix

    def diagonal_matrix(self, rows: int, cols: int) -> Matrix:
        d = zeros(rows, cols)
        for i, x in enumerate(self.diag):
            d[i][i] = x
        return d


def smith_normal_form(m: Matrix) -> SnfDecomposition:
    """Smith normal form with unimodular left and right transforms.

    The diagonal is non-negative and forms a divisibility chain
    ``d[0] | d[1] | ...`` (zeros last).
    """
    a = as_matrix(m)
    rows, cols = shape(a)
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

    def add_row(dst, src, q):
        a[dst] = [x + q * y for x, y in zip(a[dst], a[src])]
        left[dst] = [x + q * y for x, y in zip(left[dst], left[src])]

    def add_col(dst, src, q):
        for row in a:
            row[dst] += q * row[src]
        for row in right:
            row[dst] += q * row[src]

    for t in range(min(rows, cols)):
        while True:
            nz = [(abs(a[i][j]), i, j) for i in range(t, rows)
                  for j in range(t, cols) if a[i][j]]
            if not nz:
                break
            _, i, j = min(nz)
            swap_rows(t, i)
            swap_cols(t, j)
            piv = a[t][t]
            clean = True
            for i in range(t + 1, rows):
                if a[i][t]:
                    add_row(i, t, -(a[i][t] // piv))
                    clean = clean and a[i][t] == 0
            for j in range(t + 1, cols):
                if a[t][j]:
                    add_col(j, t, -(a[t][j] // piv))
                    clean = clean and a[t][j] == 0
            if not clean:
                continue
            bad = next((i for i in range(t + 1, rows)
                        for j in range(t + 1, cols) if a[i][j] % piv), None)
            if bad is None:
                break
            # pull a non-divisible entry into row t; the next pass shrinks the pivot
            add_row(t, bad, 1)
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            left[t] = [-x for x in left[t]]
    diag = [a[i][i] for i in range(min(rows, cols))]
    return SnfDecomposition(left=left, diag=diag, right=right)


# -- Diophantine systems and kernels ------------------------------------------

@dataclass(frozen=True)
class DiophantineResult:
    """Outcome of solving ``x @ b == a`` over the integers.

    On failure ``witness`` is ``(index, divisor, value)``: the transformed
    right-hand side has ``value`` at ``index`` and the elementary divisor
    there does not divide it (``divisor == 0`` means ``value`` had to vanish).
    """

    solution: Optional[Vector]
    witness: Optional[tuple[int, int, int]] = None

    @property
    def solvable(self) -> bool:
        return self.solution is not None


def solve_linear_diophantine(b: Matrix, a: Sequence[int]) -> DiophantineResult:
    """Solve the row system ``x @ b == a`` for an integer row vector ``x``.

    With ``L @ b @ R == D`` put ``x = y @ L``; then ``y @ D == a @ R`` splits
    into scalar equations.  Free coordinates of ``y`` are set to zero, which
    makes the returned solution canonical for a given decomposition.
    """
    b = as_matrix(b)
    a = as_vector(a)
    rows, cols = shape(b)
    if len(a) != cols:
        raise DimensionError(f"right-hand side has length {len(a)}, expected {cols}")
    snf = smith_normal_form(b)
    c = vecmat(a, snf.right)
    y = [0] * rows
    for i in range(cols):
        d = snf.diag[i] if i < len(snf.diag) else 0
        if d == 0:
            if c[i] != 0:
                return DiophantineResult(None, (i, 0, c[i]))
        elif c[i] % d:
            return DiophantineResult(None, (i, d, c[i]))
        else:
            y[i] = c[i] // d
    return DiophantineResult(vecmat(y, snf.left))


def normalize_sign(v: Vector) -> Vector:
    """Flip ``v`` so its first nonzero entry is positive."""
    for x in v:
        if x:
            return list(v) if x > 0 else [-e for e in v]
    return list(v)


def primitive_kernel_vector(m: Matrix) -> Vector:
    """A primitive integer vector ``v`` with ``m @ v == 0``.

    Uses the first free column of the rational reduced echelon form, clears
    denominators, divides out the content and makes the first nonzero entry
    positive.
    """
    n = _require_square(m)
    red, pivots = _rref(m)
    free = [c for c in range(n) if c not in pivots]
    if not free:
        raise NoKernelError("matrix is nonsingular; kernel is trivial")
    f = free[0]
    v = [Fraction(0)] * n
    v[f] = Fraction(1)
    for row, c in zip(red, pivots):
        v[c] = -row[f]
    den = 1
    for x in v:
        den = den * x.denominator // gcd(den, x.denominator)
    ints = [int(x * den) for x in v]
    g = content(ints)
    return normalize_sign([x // g for x in ints])


def extended_gcd(a: int, b: int) -> tuple[int, int, int]:
    """Return ``(g, x, y)`` with ``a*x + b*y == g == gcd(a, b) >= 0``."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0
