"""System parameter generation, validation, and the parameter file format.

A parameter set is the public "key space": strand count n, field modulus,
the n nonzero T-values, an invertible seed matrix whose last row is
(0,...,0,1), and two sets of conjugate braid words C (tag side) and D
(interrogator side) that commute element-wise under E-multiplication.

The vendor never published a generation recipe, so this module uses a
structurally equivalent one:

* the upper-left (n-1)x(n-1) block of the seed matrix is resampled until
  its characteristic polynomial is irreducible, which makes the nonzero
  polynomial evaluations p(M*) a large commuting family of invertible
  matrices;
* C and D are z w z^-1 for a common random word z, with the cores w drawn
  from generator indices {1..n/2-1} and {n/2+1..n-1} respectively.  The
  index split (excluding n/2 from both sides) forces far-commutation
  between every c in C and d in D, and gives each side a common set of
  exactly n/2 fixed strands, which is precisely the structure the
  impersonation attacks exploit.

File format (line oriented, '#' comments allowed):

    AE-PARAMS v1
    N 10
    MODULUS 0x11B
    TVALUES <2n lowercase hex digits>
    SEED <2n^2 lowercase hex digits, row-major>
    CONJ-C <count>      followed by one word per line ("3 -1 5")
    CONJ-D <count>      likewise
"""

import io
from dataclasses import dataclass, field as dc_field
from pathlib import Path
from random import Random
from typing import TextIO

from .algebra import DEFAULT_MODULUS, GF256, Matrix, Permutation, subgroup_elements
from .braid import BraidWord, free_reduce, random_word, word_perm
from .emul import phi
from .errors import GenerationFailure, ParseError, SingularMatrix

DEFAULT_Z_LENGTH = 40
DEFAULT_CONJ_LENGTH = 10
DEFAULT_CONJ_COUNT = 32


@dataclass(frozen=True)
class SystemParams:
    n: int
    modulus: int
    tvalues: bytes
    seed_matrix: Matrix
    conj_c: tuple[BraidWord, ...]
    conj_d: tuple[BraidWord, ...]

    @property
    def field(self) -> GF256:
        return GF256.get(self.modulus)

    def d_perms(self) -> list[Permutation]:
        return [word_perm(d, self.n) for d in self.conj_d]

    def c_perms(self) -> list[Permutation]:
        return [word_perm(c, self.n) for c in self.conj_c]


# -- polynomial helpers over GF(256) ----------------------------------------
# Coefficient lists are low-degree first with no trailing zeros.


def _poly_trim(p: list[int]) -> list[int]:
    while p and p[-1] == 0:
        p.pop()
    return p


def _poly_mul(a: list[int], b: list[int], f: GF256) -> list[int]:
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                if y:
                    out[i + j] ^= f.mul(x, y)
    return _poly_trim(out)


def _poly_mod(a: list[int], m: list[int], f: GF256) -> list[int]:
    a = list(a)
    lead_inv = f.inv(m[-1])
    while len(a) >= len(m):
        c = f.mul(a[-1], lead_inv)
        shift = len(a) - len(m)
        if c:
            for i, y in enumerate(m):
                a[shift + i] ^= f.mul(c, y)
        a.pop()
        _poly_trim(a)
        if not a:
            break
    return a


def _poly_gcd(a: list[int], b: list[int], f: GF256) -> list[int]:
    while b:
        a, b = b, _poly_mod(a, b, f)
    return a


def _frobenius(g: list[int], m: list[int], f: GF256) -> list[int]:
    """g -> g^256 mod m, as eight squarings."""
    for _ in range(8):
        g = _poly_mod(_poly_mul(g, g, f), m, f)
    return g


def _prime_factors(m: int) -> set[int]:
    out = set()
    d = 2
    while d * d <= m:
        while m % d == 0:
            out.add(d)
            m //= d
        d += 1
    if m > 1:
        out.add(m)
    return out


def poly_is_irreducible(p: list[int], f: GF256) -> bool:
    """Rabin's test over GF(256): x^(q^m) = x mod p, and for every prime
    divisor r of m, gcd(x^(q^(m/r)) - x, p) = 1."""
    m = len(p) - 1
    if m < 1:
        return False
    if m == 1:
        return True
    x = [0, 1]
    g = x
    powers = {}
    for k in range(1, m + 1):
        g = _frobenius(g, p, f)
        powers[k] = g
    if _poly_trim([a ^ b for a, b in _zip_pad(powers[m], x)]):
        return False
    for r in _prime_factors(m):
        diff = _poly_trim([a ^ b for a, b in _zip_pad(powers[m // r], x)])
        gcd = _poly_gcd(list(p), diff, f)
        if len(gcd) != 1:
            return False
    return True


def _zip_pad(a: list[int], b: list[int]):
    width = max(len(a), len(b))
    return zip(a + [0] * (width - len(a)), b + [0] * (width - len(b)))


def _min_poly_of_krylov(block: Matrix, v: bytes, f: GF256) -> list[int]:
    """Monic minimal polynomial of the Krylov sequence v, Bv, B^2v, ...

    Returned low-first; its degree is the first linear dependency.
    """
    m = block.n
    basis: list[tuple[int, list[int], list[int]]] = []  # (pivot, vector, combo)
    vec = list(v)
    combo = [1]
    for k in range(m + 1):
        w = list(vec)
        cmb = combo + [0] * (m + 1 - len(combo))
        for pivot, bv, bc in basis:
            c = w[pivot]
            if c:
                for i in range(m):
                    w[i] ^= f.mul(c, bv[i])
                for i in range(m + 1):
                    cmb[i] ^= f.mul(c, bc[i])
        pivot = next((i for i in range(m) if w[i]), None)
        if pivot is None:
            coeffs = _poly_trim(cmb)
            lead_inv = f.inv(coeffs[-1])
            return [f.mul(lead_inv, c) for c in coeffs]
        inv_p = f.inv(w[pivot])
        basis.append((pivot, [f.mul(inv_p, x) for x in w], [f.mul(inv_p, x) for x in cmb]))
        # advance the Krylov sequence: vec <- B vec, combo <- x * combo
        nxt = [0] * m
        for r in range(m):
            acc = 0
            row = block.row(r)
            for ccol in range(m):
                if vec[ccol]:
                    acc ^= f.mul(row[ccol], vec[ccol])
            nxt[r] = acc
        vec = nxt
        combo = [0] + combo
    raise AssertionError("no dependency within m+1 Krylov vectors")


# -- generation --------------------------------------------------------------


def _random_seed_matrix(n: int, rng: Random, f: GF256, max_tries: int) -> Matrix:
    m = n - 1
    for _ in range(max_tries):
        block = Matrix(m, bytes(rng.randrange(256) for _ in range(m * m)))
        v = bytes(rng.randrange(256) for _ in range(m))
        if not any(v):
            continue
        minpoly = _min_poly_of_krylov(block, v, f)
        if len(minpoly) - 1 != m or not poly_is_irreducible(minpoly, f):
            continue
        data = bytearray(n * n)
        for r in range(m):
            data[r * n : r * n + m] = block.row(r)
            data[r * n + m] = rng.randrange(256)
        data[n * n - 1] = 1
        return Matrix(n, bytes(data))
    raise GenerationFailure("could not find an irreducible seed block")


def _common_fixed_points(perms: list[Permutation], n: int) -> frozenset[int]:
    pts = frozenset(range(n))
    for p in perms:
        pts &= p.fixed_points()
    return pts


def _nonempty_core(indices, length: int, rng: Random) -> BraidWord:
    while True:
        w = random_word(indices, length, rng)
        if free_reduce(w).letters:
            return w


def generate_params(
    n: int,
    rng: Random,
    *,
    modulus: int = DEFAULT_MODULUS,
    z_length: int = DEFAULT_Z_LENGTH,
    conj_length: int = DEFAULT_CONJ_LENGTH,
    conj_count: int = DEFAULT_CONJ_COUNT,
    max_tries: int = 1000,
) -> SystemParams:
    """Generate a parameter set with the documented structure.

    Deterministic for a given rng seed.  ``n`` must be even (the strand
    split at n/2 is what separates the two conjugate sets).
    """
    if n % 2 or not 4 <= n <= 16:
        raise ValueError("n must be even, 4 <= n <= 16")
    f = GF256.get(modulus)
    tvalues = bytes(rng.randrange(1, 256) for _ in range(n))
    seed = _random_seed_matrix(n, rng, f, max_tries)

    half = n // 2
    lows = range(1, half)  # braid generator indices, 1-based
    highs = range(half + 1, n)
    low_fix = frozenset(range(half, n))  # strands untouched by lows, 0-based
    high_fix = frozenset(range(half))

    for _ in range(max_tries):
        z = random_word(range(1, n), z_length, rng)
        cores_c = [_nonempty_core(lows, conj_length, rng) for _ in range(conj_count)]
        cores_d = [_nonempty_core(highs, conj_length, rng) for _ in range(conj_count)]
        if _common_fixed_points([word_perm(w, n) for w in cores_c], n) != low_fix:
            continue
        if _common_fixed_points([word_perm(w, n) for w in cores_d], n) != high_fix:
            continue
        z_inv = z.inverse()
        conj_c = tuple(free_reduce(z + w + z_inv) for w in cores_c)
        conj_d = tuple(free_reduce(z + w + z_inv) for w in cores_d)
        return SystemParams(n, modulus, tvalues, seed, conj_c, conj_d)
    raise GenerationFailure("could not find conjugate cores with exact fixed sets")


# -- validation ---------------------------------------------------------------


@dataclass
class ParamReport:
    """Structured validation outcome; ``failures`` is empty when ok."""

    failures: list[str] = dc_field(default_factory=list)
    d_subgroup_order: int | None = None
    c_fixed_points: frozenset[int] = frozenset()
    d_fixed_points: frozenset[int] = frozenset()

    @property
    def ok(self) -> bool:
        return not self.failures


def validate_params(
    p: SystemParams,
    *,
    commute_samples: int = 8,
    subgroup_cap: int = 1_000_000,
) -> ParamReport:
    """Check every structural invariant; never raises.

    Reports the order of the permutation subgroup generated by the
    interrogator-conjugate permutations (None when it exceeds the cap),
    since the impersonation attacks key their tables off it.
    """
    report = ParamReport()
    fail = report.failures.append

    if p.n % 2 or not 4 <= p.n <= 16:
        fail("n-invalid")
    try:
        f = GF256.get(p.modulus)
    except ValueError:
        fail("modulus-invalid")
        return report

    if len(p.tvalues) != p.n:
        fail("tvalue-count")
    elif any(t == 0 for t in p.tvalues):
        fail("tvalue-zero")

    if p.seed_matrix.n != p.n:
        fail("seed-dimension")
    else:
        if p.seed_matrix.row(p.n - 1) != bytes([0] * (p.n - 1) + [1]):
            fail("seed-last-row")
        try:
            f.mat_inv(p.seed_matrix)
        except SingularMatrix:
            fail("seed-singular")

    for side, words in (("c", p.conj_c), ("d", p.conj_d)):
        for w in words:
            if not w.letters or w.max_index() > p.n - 1:
                fail(f"conj-{side}-letter-range")
                break

    if report.failures:
        return report

    c_perms = p.c_perms()
    d_perms = p.d_perms()
    report.c_fixed_points = _common_fixed_points(c_perms, p.n)
    report.d_fixed_points = _common_fixed_points(d_perms, p.n)
    if len(report.c_fixed_points) != p.n // 2:
        fail("fixed-points-c")
    if len(report.d_fixed_points) != p.n // 2:
        fail("fixed-points-d")
    if report.c_fixed_points & report.d_fixed_points:
        fail("fixed-points-overlap")

    ident = Permutation.identity(p.n)
    k = min(commute_samples, len(p.conj_c), len(p.conj_d))
    for offset in range(k):
        c = p.conj_c[offset]
        d = p.conj_d[(offset * 7 + 3) % len(p.conj_d)]
        if word_perm(c + d, p.n) != word_perm(d + c, p.n) or phi(
            ident, c + d, p.tvalues, f
        ) != phi(ident, d + c, p.tvalues, f):
            fail("conj-noncommuting")
            break

    elements = subgroup_elements(d_perms, p.n, cap=subgroup_cap)
    report.d_subgroup_order = None if elements is None else len(elements)
    return report


# -- file format --------------------------------------------------------------


def save_params(p: SystemParams, sink) -> None:
    """Write the text form to a path or text file object."""
    if isinstance(sink, (str, Path)):
        with open(sink, "w") as handle:
            save_params(p, handle)
        return
    w = sink.write
    w("AE-PARAMS v1\n")
    w(f"N {p.n}\n")
    w(f"MODULUS 0x{p.modulus:X}\n")
    w(f"TVALUES {p.tvalues.hex()}\n")
    w(f"SEED {p.seed_matrix.to_hex()}\n")
    w(f"CONJ-C {len(p.conj_c)}\n")
    for word in p.conj_c:
        w(word.to_text() + "\n")
    w(f"CONJ-D {len(p.conj_d)}\n")
    for word in p.conj_d:
        w(word.to_text() + "\n")


def params_to_text(p: SystemParams) -> str:
    buf = io.StringIO()
    save_params(p, buf)
    return buf.getvalue()


class _Lines:
    def __init__(self, handle: TextIO):
        self.pairs = []
        for no, raw in enumerate(handle, start=1):
            text = raw.strip()
            if text and not text.startswith("#"):
                self.pairs.append((no, text))
        self.pos = 0

    def next(self, what: str) -> tuple[int, str]:
        if self.pos >= len(self.pairs):
            raise ParseError(f"unexpected end of file, expected {what}")
        pair = self.pairs[self.pos]
        self.pos += 1
        return pair


def _expect_keyword(lines: _Lines, keyword: str) -> tuple[int, str]:
    no, text = lines.next(keyword)
    head, _, rest = text.partition(" ")
    if head != keyword:
        raise ParseError(f"expected {keyword}, found {head!r}", no)
    return no, rest.strip()


def load_params(source) -> SystemParams:
    """Parse the text form from a path, text file object, or string buffer."""
    if isinstance(source, (str, Path)):
        with open(source) as handle:
            return load_params(handle)

    lines = _Lines(source)
    no, text = lines.next("AE-PARAMS header")
    if text != "AE-PARAMS v1":
        raise ParseError(f"unsupported version: {text!r}", no)

    no, rest = _expect_keyword(lines, "N")
    try:
        n = int(rest)
    except ValueError:
        raise ParseError(f"bad N value {rest!r}", no) from None
    if not 2 <= n <= 64:
        raise ParseError(f"N out of range: {n}", no)

    no, rest = _expect_keyword(lines, "MODULUS")
    try:
        modulus = int(rest, 16)
    except ValueError:
        raise ParseError(f"bad modulus {rest!r}", no) from None

    no, rest = _expect_keyword(lines, "TVALUES")
    tvalues = _hex_bytes(rest, n, no)

    no, rest = _expect_keyword(lines, "SEED")
    seed = Matrix(n, _hex_bytes(rest, n * n, no))

    sides = []
    for keyword in ("CONJ-C", "CONJ-D"):
        no, rest = _expect_keyword(lines, keyword)
        try:
            count = int(rest)
        except ValueError:
            raise ParseError(f"bad {keyword} count {rest!r}", no) from None
        words = []
        for _ in range(count):
            wno, wtext = lines.next(f"{keyword} word")
            try:
                word = BraidWord.from_text(wtext)
            except ValueError:
                raise ParseError(f"bad braid word {wtext!r}", wno) from None
            if word.max_index() > n - 1:
                raise ParseError(f"letter out of range in {wtext!r}", wno)
            words.append(word)
        sides.append(tuple(words))

    if lines.pos != len(lines.pairs):
        no, text = lines.pairs[lines.pos]
        raise ParseError(f"trailing content {text!r}", no)
    return SystemParams(n, modulus, tvalues, seed, sides[0], sides[1])


def _hex_bytes(text: str, count: int, line_no: int) -> bytes:
    try:
        data = bytes.fromhex(text)
    except ValueError:
        raise ParseError(f"bad hex payload {text!r}", line_no) from None
    if len(data) != count:
        raise ParseError(f"expected {count} bytes, found {len(data)}", line_no)
    return data
