"""Key generation, the authentication exchange, and token handling.

A private key is an invertible matrix K = p(M*) (p a random polynomial of
degree < n evaluated at the seed matrix, so all private matrices commute)
together with a free-reduced product of at least 16 conjugates from the
party's conjugate set.  The public key is (K, identity) * word.

Both parties derive the shared secret the same way: fold their own private
word into (K_own @ M_other, sigma_other).  The commuting structure of the
parameter set makes the two results equal.

The shared matrix is serialized as its first n-1 rows (the last row is
determined by public material up to a public scalar): 8*n*(n-1) bits, 720
at n=10.  An authentication token is the window of l bits starting at byte
s of that serialization; since l is one byte (l <= 255), reading the whole
secret takes three windows.
"""

from dataclasses import dataclass
from pathlib import Path
from random import Random

from .algebra import Matrix, Permutation
from .braid import BraidWord, free_reduce, word_perm
from .emul import MatPerm, e_multiply
from .errors import BadChallenge, GenerationFailure, ParseError, SingularMatrix
from .params import SystemParams, _Lines, _expect_keyword, _hex_bytes

MIN_CONJ_COUNT = 16


@dataclass(frozen=True)
class KeyPair:
    """Private matrix and conjugate product, plus the public pair.

    ``poly`` keeps the private polynomial coefficients for test
    introspection; it never leaves the process (the keypair file format
    omits it).
    """

    k: Matrix
    word: BraidWord
    pub: MatPerm
    poly: bytes | None = None


def poly_eval_matrix(coeffs: bytes, m: Matrix, params: SystemParams) -> Matrix:
    """Evaluate sum(coeffs[i] * m^i) by Horner's rule."""
    f = params.field
    acc = f.mat_scale(coeffs[-1], Matrix.identity(m.n))
    for c in reversed(coeffs[:-1]):
        acc = f.mat_mul(acc, m)
        acc = acc ^ f.mat_scale(c, Matrix.identity(m.n))
    return acc


def _draw_conjugate_word(
    pool, count: int, rng: Random, n: int, sigma: Permutation | None, max_tries: int
) -> BraidWord:
    for _ in range(max_tries):
        word = BraidWord.empty()
        for _ in range(count):
            pick = pool[rng.randrange(len(pool))]
            if rng.randrange(2):
                pick = pick.inverse()
            word = word + pick
        word = free_reduce(word)
        if sigma is None or word_perm(word, n) == sigma:
            return word
    raise GenerationFailure("could not hit the requested permutation")


def _keygen(
    params: SystemParams,
    rng: Random,
    pool,
    conj_count: int,
    sigma: Permutation | None,
    max_tries: int,
) -> KeyPair:
    f = params.field
    word = _draw_conjugate_word(pool, conj_count, rng, params.n, sigma, max_tries)
    for _ in range(max_tries):
        coeffs = bytes(rng.randrange(256) for _ in range(params.n))
        k = poly_eval_matrix(coeffs, params.seed_matrix, params)
        try:
            f.mat_inv(k)
        except SingularMatrix:
            continue
        ident = Permutation.identity(params.n)
        pub = e_multiply(MatPerm(k, ident), word, params.tvalues, f)
        return KeyPair(k, word, pub, coeffs)
    raise GenerationFailure("could not find an invertible private matrix")


def keygen_tag(
    params: SystemParams,
    rng: Random,
    conj_count: int = MIN_CONJ_COUNT,
    *,
    conj_pool=None,
    sigma: Permutation | None = None,
    max_tries: int = 100_000,
) -> KeyPair:
    """Tag keypair from the C conjugates.

    ``conj_pool`` overrides the conjugate set (attack harnesses build
    deliberately short products); the protocol-compliant minimum of 16
    picks is enforced only for the default pool.  ``sigma`` rejection
    samples the conjugate product until its permutation matches.
    """
    if conj_pool is None:
        if conj_count < MIN_CONJ_COUNT:
            raise ValueError(f"conj_count must be >= {MIN_CONJ_COUNT}")
        conj_pool = params.conj_c
    return _keygen(params, rng, conj_pool, conj_count, sigma, max_tries)


def keygen_interrogator(
    params: SystemParams,
    rng: Random,
    conj_count: int = MIN_CONJ_COUNT,
    *,
    conj_pool=None,
    sigma: Permutation | None = None,
    max_tries: int = 100_000,
) -> KeyPair:
    """Ephemeral interrogator keypair from the D conjugates."""
    if conj_pool is None:
        if conj_count < MIN_CONJ_COUNT:
            raise ValueError(f"conj_count must be >= {MIN_CONJ_COUNT}")
        conj_pool = params.conj_d
    return _keygen(params, rng, conj_pool, conj_count, sigma, max_tries)


def compute_shared(own: KeyPair, other_pub: MatPerm, params: SystemParams) -> MatPerm:
    """(K_own @ M_other, sigma_other) * own_word; same formula both sides."""
    f = params.field
    start = MatPerm(f.mat_mul(own.k, other_pub.m), other_pub.sigma)
    return e_multiply(start, own.word, params.tvalues, f)


# Role-named aliases for readability at call sites.
tag_shared = compute_shared
int_shared = compute_shared


# -- serialization, challenges, tokens ---------------------------------------


def serialize_shared(m: Matrix) -> bytes:
    """Row-major bytes of the first n-1 rows (the non-public part)."""
    return m.data[: m.n * (m.n - 1)]


@dataclass(frozen=True)
class Challenge:
    """Byte index s (two bytes on the wire) and bit length l (one byte)."""

    s: int
    l: int

    def check(self, total_bits: int) -> None:
        if not 0 <= self.s <= 0xFFFF or not 0 <= self.l <= 255:
            raise BadChallenge(f"challenge fields out of encoding range: {self}")
        if 8 * self.s + self.l > total_bits:
            raise BadChallenge(f"window [{8 * self.s}, {8 * self.s + self.l}) exceeds {total_bits} bits")


@dataclass(frozen=True)
class Token:
    """l bits, MSB-first, zero-padded to whole bytes."""

    length: int
    data: bytes

    def __post_init__(self):
        if len(self.data) != (self.length + 7) // 8:
            raise ValueError("token byte count does not match bit length")


def extract_token(secret: bytes, ch: Challenge) -> Token:
    """The l bits of ``secret`` starting at bit 8*s."""
    ch.check(8 * len(secret))
    if ch.l == 0:
        return Token(0, b"")
    nbytes = (ch.l + 7) // 8
    window = bytearray(secret[ch.s : ch.s + nbytes])
    spare = 8 * nbytes - ch.l
    if spare:
        window[-1] &= 0xFF ^ ((1 << spare) - 1)
    return Token(ch.l, bytes(window))


def verify_token(expected: MatPerm, ch: Challenge, token: Token) -> bool:
    """True iff the token matches the expected shared secret exactly."""
    try:
        want = extract_token(serialize_shared(expected.m), ch)
    except BadChallenge:
        return False
    return token == want


def full_secret_challenges(n: int) -> list[Challenge]:
    """Byte-aligned windows that tile the whole serialized secret.

    Three windows at n=10; maximal 255-bit windows cannot end on the final
    bit (window ends are congruent to 7 mod 8), so the last window is
    shorter.
    """
    total = 8 * n * (n - 1)
    out = []
    bit = 0
    while bit < total:
        s = bit // 8
        l = min(255, total - 8 * s)
        out.append(Challenge(s, l))
        bit = 8 * s + l
    return out


def assemble_secret(pairs: list[tuple[Challenge, Token]], n: int) -> bytes:
    """Stitch window tokens back into the full serialized secret."""
    total = 8 * n * (n - 1)
    acc = bytearray(total // 8)
    covered = bytearray(total)
    for ch, token in pairs:
        ch.check(total)
        if token.length != ch.l:
            raise ValueError("token length does not match its challenge")
        for i, byte in enumerate(token.data):
            acc[ch.s + i] |= byte
        covered[8 * ch.s : 8 * ch.s + ch.l] = b"\x01" * ch.l
    if not all(covered):
        raise ValueError("windows do not cover the secret")
    return bytes(acc)


# -- wire encodings and transcripts -------------------------------------------


def encode_pubkey(mp: MatPerm) -> bytes:
    """Full n*n matrix plus n permutation bytes (1-based images)."""
    return mp.m.data + bytes(x + 1 for x in mp.sigma.images)


def decode_pubkey(data: bytes, n: int) -> MatPerm:
    if len(data) != n * n + n:
        raise ValueError(f"public key must be {n * n + n} bytes, got {len(data)}")
    m = Matrix(n, data[: n * n])
    sigma = Permutation(tuple(x - 1 for x in data[n * n :]))
    return MatPerm(m, sigma)


def transcript_line(direction: str, type_name: str, payload: bytes) -> str:
    """One protocol message: "<direction> <type-name> <hex payload>"."""
    return f"{direction} {type_name} {payload.hex() or '-'}"


def parse_transcript_line(line: str) -> tuple[str, str, bytes]:
    direction, type_name, payload = line.split(" ")
    return direction, type_name, b"" if payload == "-" else bytes.fromhex(payload)


# -- keypair files -------------------------------------------------------------


def save_keypair(kp: KeyPair, side: str, sink) -> None:
    """Text form of a keypair (without the private polynomial)."""
    if isinstance(sink, (str, Path)):
        with open(sink, "w") as handle:
            save_keypair(kp, side, handle)
        return
    if side not in ("tag", "interrogator"):
        raise ValueError("side must be 'tag' or 'interrogator'")
    n = kp.k.n
    sink.write("AE-KEYPAIR v1\n")
    sink.write(f"SIDE {side}\n")
    sink.write(f"N {n}\n")
    sink.write(f"KMAT {kp.k.to_hex()}\n")
    sink.write(f"WORD {kp.word.to_text() or '-'}\n")
    sink.write(f"PUB-M {kp.pub.m.to_hex()}\n")
    sink.write(f"PUB-P {kp.pub.sigma.to_text()}\n")


def load_keypair(source) -> tuple[KeyPair, str]:
    if isinstance(source, (str, Path)):
        with open(source) as handle:
            return load_keypair(handle)
    lines = _Lines(source)
    no, text = lines.next("AE-KEYPAIR header")
    if text != "AE-KEYPAIR v1":
        raise ParseError(f"unsupported version: {text!r}", no)
    no, side = _expect_keyword(lines, "SIDE")
    if side not in ("tag", "interrogator"):
        raise ParseError(f"bad side {side!r}", no)
    no, rest = _expect_keyword(lines, "N")
    n = int(rest)
    no, rest = _expect_keyword(lines, "KMAT")
    k = Matrix(n, _hex_bytes(rest, n * n, no))
    no, rest = _expect_keyword(lines, "WORD")
    word = BraidWord.empty() if rest == "-" else BraidWord.from_text(rest)
    no, rest = _expect_keyword(lines, "PUB-M")
    pub_m = Matrix(n, _hex_bytes(rest, n * n, no))
    no, rest = _expect_keyword(lines, "PUB-P")
    pub_p = Permutation.from_text(rest)
    return KeyPair(k, word, MatPerm(pub_m, pub_p), None), side
