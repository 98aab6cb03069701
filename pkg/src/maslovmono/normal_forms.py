"""Conjugacy normal forms for integer monodromy matrices.

Everything here is exact.  A monodromy matrix ``M`` acts on a column of basis
cycles, and a change of basis ``gamma' = T gamma`` with ``T`` unimodular acts
by ``M -> T M T^-1`` on the matrix and ``v -> T v`` on the Maslov and action
vectors.

Conventions used throughout:

* eigenvectors are primitive with first nonzero entry positive;
* the conjugator ``T`` always has determinant +1;
* for eigenvalue -1 the first column of the conjugate is ``-e1``;
* block-diagonalisation uses the transformation ``[[1, d], [0, I]]``.
"""

from __future__ import annotations

import enum
import random
from dataclasses import dataclass, field
from typing import Optional, Sequence

from . import exact_int as ei
from .errors import (
    DimensionError,
    MultiplicityError,
    NoEigenvalueError,
    NotPrimitiveError,
    NotSLError,
    NotUnimodularError,
)
from .exact_int import Matrix, Vector


class Form(str, enum.Enum):
    TRIANGULAR2 = "Triangular2"
    UPPER_UNIPOTENT3 = "UpperUnipotent3"
    MIXED_MINUS_ONE3 = "MixedMinusOne3"
    IRRATIONAL_BLOCK3 = "IrrationalBlock3"
    NO_UNIT_EIGENVALUE = "NoUnitEigenvalue"


class Verdict(str, enum.Enum):
    HOLDS = "holds"
    FAILS = "fails"
    VACUOUS = "vacuous"


@dataclass(frozen=True)
class EigenSignature:
    n: int
    ma_plus: int
    mg_plus: int
    ma_minus: int
    mg_minus: int
    other_eigenvalues_irrational: bool
    charpoly: list[int] = field(default_factory=list, compare=False)

    @property
    def has_plus_one(self) -> bool:
        return self.ma_plus > 0

    @property
    def has_minus_one(self) -> bool:
        return self.ma_minus > 0

    def as_dict(self) -> dict:
        return {
            "n": self.n,
            "has_plus_one": self.has_plus_one,
            "has_minus_one": self.has_minus_one,
            "ma_plus": self.ma_plus,
            "mg_plus": self.mg_plus,
            "ma_minus": self.ma_minus,
            "mg_minus": self.mg_minus,
            "other_eigenvalues_irrational": self.other_eigenvalues_irrational,
            "charpoly": self.charpoly,
        }


@dataclass(frozen=True)
class ClassificationResult:
    form: Form
    conjugator: Matrix
    normal_form: Matrix
    signature: EigenSignature

    @property
    def has_unit_eigenvalue(self) -> bool:
        return self.form is not Form.NO_UNIT_EIGENVALUE

    @property
    def k(self) -> Optional[int]:
        """Off-diagonal entry of the 2x2 triangular form."""
        if self.form is Form.TRIANGULAR2:
            return self.normal_form[0][1]
        return None


# -- helpers -----------------------------------------------------------------

def _require_sl(m: Matrix) -> Matrix:
    m = ei.as_matrix(m)
    n, k = ei.shape(m)
    if n != k:
        raise DimensionError(f"expected a square matrix, got {n}x{k}")
    d = ei.det_exact(m)
    if d != 1:
        raise NotSLError(f"determinant is {d}, not 1")
    return m


def _require_unimodular(m: Matrix) -> Matrix:
    m = ei.as_matrix(m)
    if not ei.is_unimodular(m):
        raise NotUnimodularError("matrix is not unimodular")
    return m


def conjugate(t: Matrix, m: Matrix) -> Matrix:
    """``t @ m @ t^-1``."""
    return ei.matmul(ei.matmul(t, m), ei.inverse_unimodular(t))


def _embed(t: Matrix) -> Matrix:
    """``[[1, 0], [0, t]]``."""
    return ei.block_diag([[1]], t)


def charpoly(m: Matrix) -> list[int]:
    """Coefficients of ``det(x I - m)``, highest degree first (Faddeev-LeVerrier)."""
    n = len(m)
    coeffs = [1]
    mk = ei.zeros(n, n)
    for k in range(1, n + 1):
        mk = ei.add(ei.matmul(m, mk), ei.scale(coeffs[-1], ei.identity(n)))
        tr = sum(ei.matmul(m, mk)[i][i] for i in range(n))
        coeffs.append(-tr // k)  # exact division
    return coeffs


def _deflate(poly: list[int], root: int) -> tuple[list[int], int]:
    """Divide out ``(x - root)`` as often as possible; return quotient and count."""
    count = 0
    while len(poly) > 1:
        q = [poly[0]]
        for c in poly[1:]:
            q.append(c + root * q[-1])
        if q[-1] != 0:
            break
        poly = q[:-1]
        count += 1
    return poly, count


def rational_roots(poly: list[int]) -> list[int]:
    """Rational roots of a monic integer polynomial (necessarily integers)."""
    if len(poly) == 1:
        return []
    c0 = poly[-1]
    if c0 == 0:
        return sorted({0} | set(rational_roots(poly[:-1])))
    roots = []
    for d in range(1, abs(c0) + 1):
        if c0 % d == 0:
            for r in (d, -d):
                if _deflate(poly, r)[1]:
                    roots.append(r)
    return sorted(roots)


# -- operations --------------------------------------------------------------

def eigen_signature(m: Matrix) -> EigenSignature:
    """Algebraic and geometric multiplicities of the eigenvalues +1 and -1."""
    m = _require_sl(m)
    n = len(m)
    poly = charpoly(m)
    rest, ma_plus = _deflate(poly, 1)
    rest, ma_minus = _deflate(rest, -1)
    mg_plus = n - ei.rank_exact(ei.sub(m, ei.identity(n))) if ma_plus else 0
    mg_minus = n - ei.rank_exact(ei.add(m, ei.identity(n))) if ma_minus else 0
    irrational = len(rest) > 1 and not rational_roots(rest)
    return EigenSignature(n, ma_plus, mg_plus, ma_minus, mg_minus, irrational, poly)


def unimodular_completion(u: Sequence[int], n: Optional[int] = None) -> Matrix:
    """A matrix in SL(n, Z) whose first column is the primitive vector ``u``.

    ``t`` from the Hermite form of the column ``u`` sends ``u`` to ``e1``, so
    ``t^-1`` has first column ``u``.  The determinant is fixed by negating the
    last column, then every other column is shifted by a multiple of ``u`` so
    that its entry in the first nonzero row of ``u`` lies in ``[0, |u_p|)``.
    """
    u = ei.as_vector(u)
    if n is not None and n != len(u):
        raise DimensionError(f"vector has length {len(u)}, expected {n}")
    n = len(u)
    if not ei.is_primitive(u):
        raise NotPrimitiveError(f"entries of {u} are not coprime")
    if n == 1:
        if u != [1]:
            raise NotUnimodularError("no 1x1 matrix in SL(1, Z) has first column -1")
        return [[1]]
    _, t = ei.hermite_normal_form([[x] for x in u])
    s = ei.inverse_unimodular(t)
    if ei.det_exact(s) < 0:
        for row in s:
            row[-1] = -row[-1]
    p = next(i for i, x in enumerate(u) if x)
    for j in range(1, n):
        q = s[p][j] // abs(u[p]) * (1 if u[p] > 0 else -1)
        if q:
            for i in range(n):
                s[i][j] -= q * u[i]
    return s


def conjugate_to_e1(m: Matrix, eps: int = 1) -> tuple[Matrix, Matrix]:
    """Conjugate ``m`` so that its first column is ``eps * e1``.

    Returns ``(T, M')`` with ``T`` in SL(n, Z) and ``M' = T m T^-1``.
    """
    if eps not in (1, -1):
        raise ValueError("eps must be +1 or -1")
    m = _require_unimodular(m)
    n = len(m)
    shifted = ei.sub(m, ei.scale(eps, ei.identity(n)))
    if ei.det_exact(shifted) != 0:
        raise NoEigenvalueError(f"{eps} is not an eigenvalue")
    v = ei.primitive_kernel_vector(shifted)
    s = unimodular_completion(v)
    t = ei.inverse_unimodular(s)
    mp = ei.matmul(ei.matmul(t, m), s)
    assert [row[0] for row in mp] == [eps] + [0] * (n - 1)
    return t, mp


def classify(m: Matrix) -> ClassificationResult:
    """Conjugate an SL(2, Z) or SL(3, Z) matrix to its eigenvalue-1 normal form.

    Matrices without eigenvalue 1 get ``Form.NO_UNIT_EIGENVALUE`` with the
    identity as conjugator.  For the irrational-block form the lower 2x2 block
    is left as computed.
    """
    m = _require_sl(m)
    n = len(m)
    if n not in (2, 3):
        raise DimensionError(f"classification is implemented for n = 2, 3, got {n}")
    sig = eigen_signature(m)
    if not sig.has_plus_one:
        return ClassificationResult(Form.NO_UNIT_EIGENVALUE, ei.identity(n),
                                    ei.copy(m), sig)
    t, mp = conjugate_to_e1(m, 1)
    if n == 2:
        form = Form.TRIANGULAR2
    else:
        block = [row[1:] for row in mp[1:]]
        if sig.ma_plus == 3:
            form, eps = Form.UPPER_UNIPOTENT3, 1
        elif sig.ma_minus == 2:
            form, eps = Form.MIXED_MINUS_ONE3, -1
        else:
            form, eps = Form.IRRATIONAL_BLOCK3, None
        if eps is not None:
            t2, _ = conjugate_to_e1(block, eps)
            t = ei.matmul(_embed(t2), t)
            mp = conjugate(t, m)
    assert ei.matmul(t, m) == ei.matmul(mp, t)
    return ClassificationResult(form, t, mp, sig)


def reduce_mg2(m: Matrix) -> tuple[Matrix, int]:
    """Reduce a unipotent 3x3 matrix with a 2-dimensional fixed space.

    Returns ``(T, g)`` with ``T m T^-1 = I + g E13``, where ``g`` is the gcd
    of the entries of ``m - I``.
    """
    m = _require_sl(m)
    if len(m) != 3:
        raise DimensionError("reduce_mg2 expects a 3x3 matrix")
    nil = ei.sub(m, ei.identity(3))
    if ei.rank_exact(nil) != 1 or any(any(r) for r in ei.matmul(nil, nil)):
        sig = eigen_signature(m)
        raise MultiplicityError(
            f"need ma_plus = 3 and mg_plus = 2, got ma_plus = {sig.ma_plus}, "
            f"mg_plus = {sig.mg_plus}")
    # nil = u w^T with u primitive and w^T u = 0
    col = next([r[j] for r in nil] for j in range(3) if any(r[j] for r in nil))
    u = ei.normalize_sign([x // ei.content(col) for x in col])
    p = next(i for i, x in enumerate(u) if x)
    w = [nil[p][j] // u[p] for j in range(3)]
    s = unimodular_completion(u)
    t1 = ei.inverse_unimodular(s)
    w1 = ei.vecmat(w, s)  # w1[0] == w^T u == 0
    g, x, y = ei.extended_gcd(w1[1], w1[2])
    # (w1[1], w1[2]) @ q == (0, g) with q in SL(2, Z)
    q = [[w1[2] // g, x], [-w1[1] // g, y]]
    t = ei.matmul(_embed(ei.inverse_unimodular(q)), t1)
    target = ei.identity(3)
    target[0][2] = g
    assert conjugate(t, m) == target
    return t, g


@dataclass(frozen=True)
class BlockDiagResult:
    """Outcome of block-diagonalising ``[[1, a], [0, A]]``.

    On success ``conjugator`` is ``[[1, -d], [0, I]]`` and ``block_diagonal``
    the verified conjugate.  On failure ``witness`` is the Smith-form witness
    from :func:`exact_int.solve_linear_diophantine`.
    """

    matrix: Matrix
    d: Optional[Vector]
    conjugator: Optional[Matrix]
    block_diagonal: Optional[Matrix]
    witness: Optional[tuple[int, int, int]]

    @property
    def solvable(self) -> bool:
        return self.d is not None


def block_matrix(a: Sequence[int], block: Matrix) -> Matrix:
    """``[[1, a], [0, block]]``."""
    k = len(block)
    return [[1] + list(a)] + [[0] + list(r) for r in block]


def block_diagonalize(a: Sequence[int], block: Matrix) -> BlockDiagResult:
    """Remove the top row ``a`` of ``[[1, a], [0, A]]`` by integer conjugation.

    Conjugating by ``[[1, -d], [0, I]]`` turns the top row into
    ``a - d (A - I)``, so this solves ``d (A - I) = a`` over the integers.
    """
    a = ei.as_vector(a)
    block = _require_sl(block)
    if len(a) != len(block):
        raise DimensionError(f"row has length {len(a)}, block is {len(block)}x{len(block)}")
    k = len(a)
    m = block_matrix(a, block)
    res = ei.solve_linear_diophantine(ei.sub(block, ei.identity(k)), a)
    if not res.solvable:
        return BlockDiagResult(m, None, None, None, res.witness)
    d = res.solution
    t = block_matrix([-x for x in d], ei.identity(k))
    bd = conjugate(t, m)
    assert bd == ei.block_diag([[1]], block)
    return BlockDiagResult(m, d, t, bd, None)


def change_basis(m: Matrix, mu: Sequence[int], actions: Sequence[float], t: Matrix):
    """Apply the basis change ``gamma' = t gamma``.

    Returns ``(t m t^-1, t mu, t I)``; the action vector is transformed in
    floating point, everything else exactly.
    """
    t = _require_unimodular(t)
    m = ei.as_matrix(m)
    mu = ei.as_vector(mu)
    n = len(t)
    if ei.shape(m) != (n, n) or len(mu) != n or len(actions) != n:
        raise DimensionError("dimensions of m, mu, actions and t disagree")
    return conjugate(t, m), ei.matvec(t, mu), [float(x) for x in ei.matvec(t, actions)]


def verify_theorem1(m: Matrix, mu: Sequence[int]) -> Verdict:
    """Check that a nonzero Maslov vector is fixed by the monodromy."""
    m = ei.as_matrix(m)
    mu = ei.as_vector(mu)
    if len(m) != len(mu) or len(m[0]) != len(mu):
        raise DimensionError("monodromy and Maslov vector sizes disagree")
    if not any(mu):
        return Verdict.VACUOUS
    return Verdict.HOLDS if ei.matvec(m, mu) == mu else Verdict.FAILS


@dataclass(frozen=True)
class DoubleCover:
    classification: ClassificationResult
    invariant_actions: int
    invariant_actions_double: int


def double_cover(m: Matrix) -> DoubleCover:
    """Classify ``m^2``, the monodromy of the loop traversed twice.

    The invariant-action counts are the geometric multiplicities of the
    eigenvalue 1 before and after squaring.
    """
    m = _require_sl(m)
    m2 = ei.matmul(m, m)
    return DoubleCover(classify(m2), eigen_signature(m).mg_plus,
                       eigen_signature(m2).mg_plus)


def random_sl_matrix(n: int, rng: random.Random, length: int = 8,
                     max_mult: int = 2) -> Matrix:
    """Product of ``length`` random elementary row-addition matrices."""
    t = ei.identity(n)
    if n < 2:
        return t
    for _ in range(length):
        i, j = rng.sample(range(n), 2)
        c = rng.choice([c for c in range(-max_mult, max_mult + 1) if c])
        t[i] = [x + c * y for x, y in zip(t[i], t[j])]
    return t
