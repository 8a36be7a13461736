"""E-multiplication: the (M, sigma) * w operation at the core of the
Algebraic Eraser.

A braid word acts on a matrix/permutation pair one letter at a time.  The
letter b_i^e multiplies the matrix on the right by an evaluated
colored-Burau matrix and post-composes the permutation with the adjacent
transposition s_i = (i, i+1).

The colored-Burau matrix for b_i^e under the accumulated permutation sigma
is the identity except in row i, where (1-based columns i-1, i, i+1):

    e = +1:  (t,  t,    1)     with t  = tau[sigma^-1(i)]
    e = -1:  (1, t',   t')     with t' = inverse(tau[sigma^-1(i+1)])

(the column i-1 entry disappears when i = 1, and minus signs collapse
because the field has characteristic 2).  The pairing of this T-value
substitution with left-to-right permutation composition is what makes the
braid relations hold; the test suite pins both.

The production path evaluates entries per letter and never goes symbolic;
the test suite carries an independent symbolic oracle (Laurent polynomials
with twisted variable permutation, evaluated once at tau) to cross-check.
"""

from dataclasses import dataclass

from .algebra import GF256, Matrix, Permutation
from .backend import kernel
from .braid import BraidWord
from .errors import BadGenerator


@dataclass(frozen=True)
class MatPerm:
    """A matrix/permutation pair: public keys, shared secrets, fold state."""

    m: Matrix
    sigma: Permutation

    def __post_init__(self):
        if self.m.n != self.sigma.n:
            raise ValueError("matrix and permutation dimensions disagree")

    @property
    def n(self) -> int:
        return self.m.n


def cb_matrix(i: int, sign: int, sigma: Permutation, tau: bytes, field: GF256) -> Matrix:
    """Evaluated colored-Burau matrix for generator b_i^sign under sigma.

    ``i`` is the 1-based generator index; ``sign`` is +1 or -1.
    """
    n = sigma.n
    if not 1 <= i <= n - 1:
        raise BadGenerator(f"generator index {i} out of range for n={n}")
    inv = sigma.inverse()
    data = bytearray(Matrix.identity(n).data)
    r = i - 1
    if sign > 0:
        t = tau[inv(r)]
        row = bytearray(n)
        if r > 0:
            row[r - 1] = t
        row[r] = t
        row[r + 1] = 1
    else:
        t = field.inv(tau[inv(r + 1)])
        row = bytearray(n)
        if r > 0:
            row[r - 1] = 1
        row[r] = t
        row[r + 1] = t
    data[r * n : (r + 1) * n] = row
    return Matrix(n, bytes(data))


def e_multiply(mp: MatPerm, word: BraidWord, tau: bytes, field: GF256) -> MatPerm:
    """Fold ``word`` into ``mp``: (M, sigma) * w."""
    n = mp.n
    mat, sig = kernel.emul_fold(
        n,
        mp.m.data,
        bytes(mp.sigma.images),
        word.letters,
        tau,
        field.mul_table,
        field.inv_table,
    )
    return MatPerm(Matrix(n, mat), Permutation(tuple(sig)))


def phi(sigma: Permutation, word: BraidWord, tau: bytes, field: GF256) -> Matrix:
    """The matrix such that (M, sigma) * w = (M @ phi(sigma, w), sigma pi(w)).

    Its last row is always (0, ..., 0, 1), which several attacks exploit.
    """
    start = MatPerm(Matrix.identity(sigma.n), sigma)
    return e_multiply(start, word, tau, field).m
