# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled implementations of the hot kernels (see aelab._purekern)."""

from libc.stdlib cimport malloc, free
from libc.string cimport memcpy

import numpy as np

from aelab.errors import BadGenerator

backend_name = "compiled"

ENTRY_EMPTY = -2
ENTRY_TERMINAL = -1


def build_mul_table(int modulus):
    cdef bytearray out = bytearray(65536)
    cdef unsigned char[::1] mv = out
    cdef int a, b, acc, x, y
    for a in range(1, 256):
        for b in range(1, 256):
            acc = 0
            x = a
            y = b
            while y:
                if y & 1:
                    acc ^= x
                y >>= 1
                x <<= 1
                if x & 0x100:
                    x ^= modulus
            mv[(a << 8) | b] = acc
    return bytes(out)


def build_inv_table(bytes mul):
    cdef bytearray out = bytearray(256)
    cdef unsigned char[::1] mv = out
    cdef const unsigned char[::1] m = mul
    cdef int a, b, found
    for a in range(1, 256):
        found = 0
        for b in range(1, 256):
            if m[(a << 8) | b] == 1:
                mv[a] = b
                found = 1
                break
        if not found:
            raise ValueError(f"element {a:#04x} has no inverse; modulus is not irreducible")
    return bytes(out)


def mat_mul(int n, bytes a, bytes b, bytes mul):
    cdef bytearray out = bytearray(n * n)
    cdef unsigned char[::1] o = out
    cdef const unsigned char[::1] av = a
    cdef const unsigned char[::1] bv = b
    cdef const unsigned char[::1] m = mul
    cdef int r, k, c, x, base, mrow, brow
    for r in range(n):
        base = r * n
        for k in range(n):
            x = av[base + k]
            if x == 0:
                continue
            mrow = x << 8
            brow = k * n
            for c in range(n):
                o[base + c] ^= m[mrow | bv[brow + c]]
    return bytes(out)


def emul_fold(int n, bytes m, bytes sigma, letters, bytes tau, bytes mul, bytes inv):
    if n > 64:
        raise ValueError("n too large for compiled kernel")
    cdef bytearray mat_b = bytearray(m)
    cdef bytearray sig_b = bytearray(sigma)
    cdef unsigned char[::1] mat = mat_b
    cdef unsigned char[::1] sig = sig_b
    cdef const unsigned char[::1] tv = tau
    cdef const unsigned char[::1] mt = mul
    cdef const unsigned char[::1] it = inv

    cdef int nletters = len(letters)
    cdef int* ls = <int*> malloc(nletters * sizeof(int))
    if ls == NULL:
        raise MemoryError()
    cdef int li
    try:
        for li in range(nletters):
            ls[li] = letters[li]

        _fold(n, mat, sig, ls, nletters, tv, mt, it)
    finally:
        free(ls)
    return bytes(mat_b), bytes(sig_b)


cdef int _fold(int n, unsigned char[::1] mat, unsigned char[::1] sig,
               int* letters, int nletters,
               const unsigned char[::1] tau,
               const unsigned char[::1] mul,
               const unsigned char[::1] inv) except -1:
    cdef unsigned char siginv[64]
    cdef int pos, li, letter, idx, r, t
    cdef int left_row, mid_row, right_row
    cdef int row, base, x, pr, pr1

    for pos in range(n):
        siginv[sig[pos]] = pos

    for li in range(nletters):
        letter = letters[li]
        idx = letter if letter > 0 else -letter
        if idx < 1 or idx > n - 1:
            raise BadGenerator(f"generator index {letter} out of range for n={n}")
        r = idx - 1
        if letter > 0:
            t = tau[siginv[r]]
            left_row = t << 8
            mid_row = t << 8
            right_row = 1 << 8
        else:
            t = inv[tau[siginv[r + 1]]]
            left_row = 1 << 8
            mid_row = t << 8
            right_row = t << 8

        for row in range(n):
            base = row * n
            x = mat[base + r]
            if x:
                if r > 0:
                    mat[base + r - 1] ^= mul[left_row | x]
                mat[base + r + 1] ^= mul[right_row | x]
                mat[base + r] = mul[mid_row | x]

        pr = siginv[r]
        pr1 = siginv[r + 1]
        sig[pr] = r + 1
        sig[pr1] = r
        siginv[r] = pr1
        siginv[r + 1] = pr
    return 0


cdef long long _rank(const unsigned char* p, int n) nogil:
    cdef long long r = 0
    cdef int i, j, c
    for i in range(n):
        c = 0
        for j in range(i + 1, n):
            if p[j] < p[i]:
                c += 1
        r = r * (n - i) + c
    return r


def perm_rank(p) -> int:
    cdef bytes pb = bytes(p)
    cdef const unsigned char[::1] mv = pb
    return _rank(&mv[0], len(pb))


def bfs_lookup_table(int n, gens):
    """See aelab._purekern.bfs_lookup_table; identical semantics."""
    if n > 64:
        raise ValueError("n too large for compiled kernel")
    cdef long long nf = 1
    cdef int i
    for i in range(2, n + 1):
        nf *= i

    table_arr = np.full(nf, ENTRY_EMPTY, dtype=np.int8)
    cdef signed char[::1] table = table_arr

    cdef int ngens = len(gens)
    cdef int nsigned = 2 * ngens
    queue_arr = np.empty((nf, n), dtype=np.uint8)
    cdef unsigned char[:, ::1] queue = queue_arr
    cdef unsigned char* signed_perms = <unsigned char*> malloc(nsigned * n)
    if signed_perms == NULL:
        raise MemoryError()

    cdef long long head = 0, tail = 0, r
    cdef int gi, pos, x
    cdef unsigned char tmp[64]
    cdef const unsigned char* g
    cdef const unsigned char* q
    try:
        for gi in range(ngens):
            gb = bytes(gens[gi])
            if len(gb) != n:
                raise ValueError("generator length mismatch")
            for pos in range(n):
                signed_perms[2 * gi * n + pos] = gb[pos]
                signed_perms[(2 * gi + 1) * n + gb[pos]] = pos

        for pos in range(n):
            queue[0, pos] = pos
        table[_rank(&queue[0, 0], n)] = ENTRY_TERMINAL
        tail = 1

        while head < tail:
            g = &queue[head, 0]
            for gi in range(nsigned):
                q = signed_perms + gi * n
                for pos in range(n):
                    tmp[pos] = q[g[pos]]
                r = _rank(tmp, n)
                if table[r] == ENTRY_EMPTY:
                    table[r] = gi
                    memcpy(&queue[tail, 0], tmp, n)
                    tail += 1
            head += 1
    finally:
        free(signed_perms)

    return table_arr, int(tail)
