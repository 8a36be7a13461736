"""Arithmetic substrate: GF(256) scalars, matrices over GF(256), and
permutations of {0..n-1}.

Conventions used throughout the package:

* Field elements are plain ints in [0, 255]; bit i is the coefficient of
  x^i.  Addition is XOR.  Multiplication reduces modulo a configurable
  degree-8 polynomial (default 0x11B = x^8+x^4+x^3+x+1).
* Matrices are immutable, row-major ``bytes`` wrapped in :class:`Matrix`.
* Permutations act on 0-based points and compose left to right:
  ``(p * q)(x) == q(p(x))``.  The braid and E-multiplication modules rely
  on this order; flipping it would require flipping the T-value
  substitution as well.

Text encodings (used by the parameter file and the wire format): matrices
are row-major lowercase hex, two digits per entry; permutations are n
space-separated 1-based images.
"""

from dataclasses import dataclass
from functools import reduce
from math import factorial

from .backend import kernel
from .errors import SingularMatrix

DEFAULT_MODULUS = 0x11B


class GF256:
    """The field with 256 elements for a given reduction polynomial.

    Instances are cached per modulus (``GF256.get``) because table
    construction is the only nontrivial cost.  The inverse-table build
    doubles as an irreducibility check on the modulus.
    """

    _cache: dict[int, "GF256"] = {}

    def __init__(self, modulus: int = DEFAULT_MODULUS):
        if not 0x100 <= modulus <= 0x1FF:
            raise ValueError(f"modulus {modulus:#x} is not a degree-8 polynomial")
        self.modulus = modulus
        self.mul_table = kernel.build_mul_table(modulus)
        self.inv_table = kernel.build_inv_table(self.mul_table)

    @classmethod
    def get(cls, modulus: int = DEFAULT_MODULUS) -> "GF256":
        field = cls._cache.get(modulus)
        if field is None:
            field = cls._cache[modulus] = cls(modulus)
        return field

    @staticmethod
    def add(a: int, b: int) -> int:
        return a ^ b

    def mul(self, a: int, b: int) -> int:
        return self.mul_table[(a << 8) | b]

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of zero in GF(256)")
        return self.inv_table[a]

    def pow(self, a: int, k: int) -> int:
        if k < 0:
            a, k = self.inv(a), -k
        acc = 1
        while k:
            if k & 1:
                acc = self.mul(acc, a)
            a = self.mul(a, a)
            k >>= 1
        return acc

    # -- matrix operations ------------------------------------------------

    def mat_mul(self, a: "Matrix", b: "Matrix") -> "Matrix":
        if a.n != b.n:
            raise ValueError("dimension mismatch")
        return Matrix(a.n, kernel.mat_mul(a.n, a.data, b.data, self.mul_table))

    def mat_scale(self, s: int, a: "Matrix") -> "Matrix":
        row = self.mul_table[s << 8 : (s << 8) + 256]
        return Matrix(a.n, bytes(row[x] for x in a.data))

    def mat_inv(self, a: "Matrix") -> "Matrix":
        """Gauss-Jordan inversion; raises SingularMatrix when rank < n."""
        n = a.n
        rows = [bytearray(a.row(r)) + bytearray(n) for r in range(n)]
        for r in range(n):
            rows[r][n + r] = 1
        for col in range(n):
            pivot = next((r for r in range(col, n) if rows[r][col]), None)
            if pivot is None:
                raise SingularMatrix(f"no pivot in column {col}")
            rows[col], rows[pivot] = rows[pivot], rows[col]
            inv_p = self.inv(rows[col][col])
            prow = self.mul_table[inv_p << 8 : (inv_p << 8) + 256]
            rows[col] = bytearray(prow[x] for x in rows[col])
            for r in range(n):
                if r != col and rows[r][col]:
                    f = rows[r][col]
                    frow = self.mul_table[f << 8 : (f << 8) + 256]
                    src = rows[col]
                    dst = rows[r]
                    for c in range(2 * n):
                        dst[c] ^= frow[src[c]]
        return Matrix(n, bytes(b for row in rows for b in row[n:]))


@dataclass(frozen=True)
class Matrix:
    """Immutable n-by-n matrix over GF(256), row-major bytes."""

    n: int
    data: bytes

    def __post_init__(self):
        if len(self.data) != self.n * self.n:
            raise ValueError("matrix data length does not match dimension")

    @classmethod
    def zero(cls, n: int) -> "Matrix":
        return cls(n, bytes(n * n))

    @classmethod
    def identity(cls, n: int) -> "Matrix":
        data = bytearray(n * n)
        for i in range(n):
            data[i * n + i] = 1
        return cls(n, bytes(data))

    @classmethod
    def basis(cls, n: int, r: int, c: int) -> "Matrix":
        """Elementary matrix with a single 1 at (r, c), 0-based."""
        data = bytearray(n * n)
        data[r * n + c] = 1
        return cls(n, bytes(data))

    @classmethod
    def from_rows(cls, rows) -> "Matrix":
        n = len(rows)
        return cls(n, bytes(x for row in rows for x in row))

    def at(self, r: int, c: int) -> int:
        return self.data[r * self.n + c]

    def row(self, r: int) -> bytes:
        return self.data[r * self.n : (r + 1) * self.n]

    def __xor__(self, other: "Matrix") -> "Matrix":
        if self.n != other.n:
            raise ValueError("dimension mismatch")
        return Matrix(self.n, bytes(a ^ b for a, b in zip(self.data, other.data)))

    def is_pubkey_shaped(self) -> bool:
        """True when the last row is zero except possibly its final entry."""
        return not any(self.row(self.n - 1)[: self.n - 1])

    def to_hex(self) -> str:
        return self.data.hex()

    @classmethod
    def from_hex(cls, n: int, text: str) -> "Matrix":
        return cls(n, bytes.fromhex(text))


@dataclass(frozen=True)
class Permutation:
    """A bijection on {0..n-1}; ``images[x]`` is the image of x."""

    images: tuple[int, ...]

    def __post_init__(self):
        if sorted(self.images) != list(range(len(self.images))):
            raise ValueError(f"not a permutation of 0..{len(self.images) - 1}: {self.images}")

    @property
    def n(self) -> int:
        return len(self.images)

    def __call__(self, x: int) -> int:
        return self.images[x]

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(n)))

    @classmethod
    def transposition(cls, n: int, i: int, j: int) -> "Permutation":
        images = list(range(n))
        images[i], images[j] = j, i
        return cls(tuple(images))

    def compose(self, other: "Permutation") -> "Permutation":
        """self followed by other: result(x) = other(self(x))."""
        return Permutation(tuple(other.images[y] for y in self.images))

    def __mul__(self, other: "Permutation") -> "Permutation":
        return self.compose(other)

    def inverse(self) -> "Permutation":
        inv = [0] * self.n
        for pos, img in enumerate(self.images):
            inv[img] = pos
        return Permutation(tuple(inv))

    def fixed_points(self) -> frozenset[int]:
        return frozenset(x for x, img in enumerate(self.images) if x == img)

    def is_identity(self) -> bool:
        return all(x == img for x, img in enumerate(self.images))

    def rank(self) -> int:
        """Lehmer-code rank in [0, n!), factorial number system."""
        return kernel.perm_rank(bytes(self.images))

    @classmethod
    def unrank(cls, k: int, n: int) -> "Permutation":
        if not 0 <= k < factorial(n):
            raise IndexError(f"rank {k} out of range for n={n}")
        digits = []
        for radix in range(1, n + 1):
            k, d = divmod(k, radix)
            digits.append(d)
        pool = list(range(n))
        return cls(tuple(pool.pop(d) for d in reversed(digits)))

    def to_bytes(self) -> bytes:
        return bytes(self.images)

    def to_text(self) -> str:
        """Space-separated 1-based images (the external encoding)."""
        return " ".join(str(x + 1) for x in self.images)

    @classmethod
    def from_text(cls, text: str) -> "Permutation":
        return cls(tuple(int(tok) - 1 for tok in text.split()))


def compose_all(perms, n: int) -> Permutation:
    """Left-to-right product of a sequence of permutations."""
    return reduce(Permutation.compose, perms, Permutation.identity(n))


def subgroup_elements(gens, n: int, cap: int | None = None) -> list[Permutation] | None:
    """Enumerate <gens> by breadth-first search, in deterministic order.

    Returns None when the subgroup exceeds ``cap`` elements.
    """
    ident = Permutation.identity(n)
    signed = []
    for g in gens:
        signed.append(g)
        signed.append(g.inverse())
    seen = {ident}
    order = [ident]
    frontier = [ident]
    while frontier:
        nxt = []
        for p in frontier:
            for q in signed:
                h = p.compose(q)
                if h not in seen:
                    seen.add(h)
                    order.append(h)
                    nxt.append(h)
                    if cap is not None and len(seen) > cap:
                        return None
        frontier = nxt
    return order
