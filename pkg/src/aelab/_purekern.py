"""Pure-Python implementations of the hot kernels.

The compiled extension ``aelab._core`` exposes the same functions with the
same semantics; ``aelab.backend`` picks whichever is available.  Everything
here works on flat ``bytes`` buffers so the two backends stay drop-in
interchangeable:

* matrices are row-major ``bytes`` of length n*n,
* permutations are ``bytes`` of n zero-based images,
* GF(256) multiplication goes through a 65536-entry table indexed a*256+b.
"""

from collections import deque
from math import factorial

import numpy as np

from .errors import BadGenerator

backend_name = "pure"

# Lookup-table entry codes (see bfs_lookup_table).
ENTRY_EMPTY = -2
ENTRY_TERMINAL = -1


def _gf_mul_raw(a: int, b: int, modulus: int) -> int:
    """Carry-less multiply then reduce; the reference for table builds."""
    acc = 0
    while b:
        if b & 1:
            acc ^= a
        b >>= 1
        a <<= 1
        if a & 0x100:
            a ^= modulus
    return acc


def build_mul_table(modulus: int) -> bytes:
    out = bytearray(65536)
    for a in range(1, 256):
        row = a << 8
        for b in range(1, 256):
            out[row | b] = _gf_mul_raw(a, b, modulus)
    return bytes(out)


def build_inv_table(mul: bytes) -> bytes:
    """Invert every nonzero element; fails if the modulus is reducible."""
    out = bytearray(256)
    for a in range(1, 256):
        row = a << 8
        for b in range(1, 256):
            if mul[row | b] == 1:
                out[a] = b
                break
        else:
            raise ValueError(f"element {a:#04x} has no inverse; modulus is not irreducible")
    return bytes(out)


def mat_mul(n: int, a: bytes, b: bytes, mul: bytes) -> bytes:
    out = bytearray(n * n)
    for r in range(n):
        arow = a[r * n : r * n + n]
        orow = out
        base = r * n
        for k in range(n):
            x = arow[k]
            if x == 0:
                continue
            mrow = (x << 8)
            brow = b[k * n : k * n + n]
            for c in range(n):
                orow[base + c] ^= mul[mrow | brow[c]]
    return bytes(out)


def emul_fold(n, m, sigma, letters, tau, mul, inv):
    """Fold one braid word into a (matrix, permutation) pair.

    Each letter multiplies the matrix on the right by the evaluated
    colored-Burau matrix of that generator (identity except one row, so
    only three columns change) and post-composes the permutation with the
    corresponding adjacent transposition.

    Returns ``(matrix_bytes, sigma_bytes)``.
    """
    mat = bytearray(m)
    sig = bytearray(sigma)
    siginv = bytearray(n)
    for pos, img in enumerate(sig):
        siginv[img] = pos

    for letter in letters:
        idx = letter if letter > 0 else -letter
        if not 1 <= idx <= n - 1:
            raise BadGenerator(f"generator index {letter} out of range for n={n}")
        r = idx - 1
        if letter > 0:
            t = tau[siginv[r]]
            coeff_left = t  # column r-1 gains col_r * t
            coeff_mid = t
            coeff_right = 1
        else:
            t = inv[tau[siginv[r + 1]]]
            coeff_left = 1
            coeff_mid = t
            coeff_right = t

        left_row = coeff_left << 8
        mid_row = coeff_mid << 8
        right_row = coeff_right << 8
        for row in range(n):
            base = row * n
            x = mat[base + r]
            if x:
                if r > 0:
                    mat[base + r - 1] ^= mul[left_row | x]
                mat[base + r + 1] ^= mul[right_row | x]
                mat[base + r] = mul[mid_row | x]

        # sigma <- sigma followed by the transposition (r, r+1): swap the
        # two positions that currently map to r and r+1.
        pr, pr1 = siginv[r], siginv[r + 1]
        sig[pr], sig[pr1] = r + 1, r
        siginv[r], siginv[r + 1] = pr1, pr

    return bytes(mat), bytes(sig)


def perm_rank(p) -> int:
    """Lehmer-code rank of a zero-based permutation, in [0, n!)."""
    n = len(p)
    r = 0
    for i in range(n):
        pi = p[i]
        c = 0
        for j in range(i + 1, n):
            if p[j] < pi:
                c += 1
        r = r * (n - i) + c
    return r


def bfs_lookup_table(n: int, gens):
    """Breadth-first factorization table over the subgroup <gens>.

    ``gens`` is a sequence of zero-based permutations as ``bytes``.  The
    result is an int8 array of length n! indexed by ``perm_rank``:
    ENTRY_EMPTY for unreachable permutations, ENTRY_TERMINAL at the
    identity, and otherwise ``2*i`` (last factor ``gens[i]``) or ``2*i+1``
    (last factor ``gens[i]`` inverted) on a shortest-length product
    reaching that permutation.  Also returns the reachable count.
    """
    table = np.full(factorial(n), ENTRY_EMPTY, dtype=np.int8)
    ident = bytes(range(n))

    signed = []
    for i, g in enumerate(gens):
        ginv = bytearray(n)
        for pos, img in enumerate(g):
            ginv[img] = pos
        signed.append((2 * i, bytes(g)))
        signed.append((2 * i + 1, bytes(ginv)))

    table[perm_rank(ident)] = ENTRY_TERMINAL
    seen = {ident}
    queue = deque((ident,))
    while queue:
        g = queue.popleft()
        for code, q in signed:
            h = bytes(map(q.__getitem__, g))
            if h not in seen:
                seen.add(h)
                table[perm_rank(h)] = code
                queue.append(h)
    return table, len(seen)
