"""The five attacks on the tag-authentication protocol, plus the
permutation-factorization oracle they share.

Every attack consumes the target tag only through the oracle interface
below (one ``run_auth`` call is one full authentication run), so the query
counters are honest whether the tag is in-process or behind the wire
protocol.  Reading one full shared secret costs three runs because a token
carries at most 255 bits of the 720-bit serialization.

Attack summaries:

1.  Span-table impersonation: query the tag with the 91 basis matrices of
    the space of pubkey-shaped matrices (one fixed permutation).  By
    linearity of E-multiplication, the shared secret for any honest key
    with that permutation is the matching linear combination of the stored
    secrets.  91 interactions, 273 runs, about 2^16 bits of storage.
2.  Full coverage: one span table per element of the subgroup generated by
    the interrogator-conjugate permutations; impersonation then succeeds
    for every honest interrogator.
3.  Differential recovery of the private matrix: secrets for (A, sigma)
    and the n tweaks (A + E_{t,n}, sigma) differ only in the last column,
    which is exactly column t of the private matrix.  n+1 interactions.
4.  Lookup-table impersonation: factor the honest interrogator permutation
    over the conjugate permutations (breadth-first table), lift the
    factorization to a braid word w, and combine two E-multiplications of
    public material with the recovered private matrix.
5.  Meet-in-the-middle recovery of an equivalent conjugate product:
    enumerate left halves (K,1)*w1 into a table, scan right halves
    (M_T,sigma_T)*w2, and glue a collision into c' = w1 * w2^-1.
"""

import itertools
import time
from dataclasses import dataclass
from random import Random
from typing import Protocol

import numpy as np

from .algebra import Matrix, Permutation, subgroup_elements
from .backend import ENTRY_EMPTY, ENTRY_TERMINAL, kernel
from .braid import BraidWord
from .emul import MatPerm, e_multiply
from .errors import NotInSubgroup, SearchExhausted, SigmaMismatch
from .netio import request_public_key, run_tag_query
from .params import SystemParams
from .protocol import (
    Challenge,
    KeyPair,
    Token,
    assemble_secret,
    compute_shared,
    encode_pubkey,
    extract_token,
    full_secret_challenges,
    serialize_shared,
)


class TagOracle(Protocol):
    """The only interface attacks may use to reach the target tag."""

    runs: int

    def public_key(self) -> MatPerm: ...

    def run_auth(self, int_pub: MatPerm, ch: Challenge) -> Token: ...


class InProcessTag:
    """Target tag living in the same process; counts protocol runs."""

    def __init__(self, params: SystemParams, keypair: KeyPair):
        self.params = params
        self.keypair = keypair
        self.runs = 0

    def public_key(self) -> MatPerm:
        return self.keypair.pub

    def run_auth(self, int_pub: MatPerm, ch: Challenge) -> Token:
        self.runs += 1
        shared = compute_shared(self.keypair, int_pub, self.params)
        return extract_token(serialize_shared(shared.m), ch)


class WireTag:
    """Target tag behind the framed wire protocol; one run per connection."""

    def __init__(self, host: str, port: int, n: int):
        self.host = host
        self.port = port
        self.n = n
        self.runs = 0

    def public_key(self) -> MatPerm:
        return request_public_key(self.host, self.port, self.n)

    def run_auth(self, int_pub: MatPerm, ch: Challenge) -> Token:
        self.runs += 1
        _, token = run_tag_query(self.host, self.port, self.n, encode_pubkey(int_pub), ch)
        return token


def read_full_secret(oracle: TagOracle, int_pub: MatPerm, n: int) -> bytes:
    """All 8n(n-1) serialized bits of one shared secret (3 runs at n=10)."""
    pairs = [(ch, oracle.run_auth(int_pub, ch)) for ch in full_secret_challenges(n)]
    return assemble_secret(pairs, n)


def sample_honest_sigma(params: SystemParams, rng: Random, picks: int = 16) -> Permutation:
    """A permutation distributed like an honest interrogator's sigma."""
    perms = params.d_perms()
    sigma = Permutation.identity(params.n)
    for _ in range(picks):
        g = perms[rng.randrange(len(perms))]
        sigma = sigma.compose(g.inverse() if rng.randrange(2) else g)
    return sigma


# -- attack 1: span-table impersonation ---------------------------------------


def span_basis(n: int) -> list[Matrix]:
    """Basis of the pubkey-shaped matrices: E_{j,k} for j < n-1, then E_{n-1,n-1}."""
    out = [Matrix.basis(n, j, k) for j in range(n - 1) for k in range(n)]
    out.append(Matrix.basis(n, n - 1, n - 1))
    return out


@dataclass(frozen=True)
class SpanTable:
    """Shared secrets for every basis matrix under one spoofed permutation.

    ``secrets[i]`` corresponds to ``span_basis(n)[i]``; rows beyond the
    serialized part are filled from public material (zero except for the
    E_{n-1,n-1} entry, whose last row is kappa * e_n).
    """

    sigma: Permutation
    secrets: tuple[Matrix, ...]

    @property
    def n(self) -> int:
        return self.sigma.n

    @property
    def storage_bits(self) -> int:
        # the serialized 8n(n-1) bits per secret are what must be stored
        return len(self.secrets) * 8 * self.n * (self.n - 1)


def attack1_collect(oracle: TagOracle, sigma: Permutation, params: SystemParams) -> SpanTable:
    """91 spoof interactions (273 runs) against the target tag."""
    n = params.n
    kappa = oracle.public_key().m.at(n - 1, n - 1)
    secrets = []
    basis = span_basis(n)
    for idx, b in enumerate(basis):
        serialized = read_full_secret(oracle, MatPerm(b, sigma), n)
        last_row = bytearray(n)
        if idx == len(basis) - 1:
            last_row[n - 1] = kappa
        secrets.append(Matrix(n, serialized + bytes(last_row)))
    return SpanTable(sigma, tuple(secrets))


def _pubkey_coefficients(m: Matrix) -> list[int]:
    """Coordinates of a pubkey-shaped matrix in the span_basis order."""
    n = m.n
    return list(m.data[: n * (n - 1)]) + [m.data[-1]]


def attack1_impersonate(
    table: SpanTable, int_pub: MatPerm, ch: Challenge, params: SystemParams
) -> Token:
    """Answer an honest challenge from the span table alone.

    Exact (not probabilistic) whenever the interrogator's permutation
    matches the table; otherwise raises SigmaMismatch.
    """
    if int_pub.sigma != table.sigma:
        raise SigmaMismatch(f"no table for sigma {int_pub.sigma.to_text()!r}")
    n = table.n
    mul = np.frombuffer(params.field.mul_table, dtype=np.uint8).reshape(256, 256)
    acc = np.zeros(n * n, dtype=np.uint8)
    for a, secret in zip(_pubkey_coefficients(int_pub.m), table.secrets):
        if a:
            acc ^= mul[a][np.frombuffer(secret.data, dtype=np.uint8)]
    return extract_token(serialize_shared(Matrix(n, acc.tobytes())), ch)


# -- attack 2: full-coverage impersonation -------------------------------------


def attack2_collect_all(
    oracle: TagOracle, params: SystemParams
) -> dict[Permutation, SpanTable]:
    """One span table per element of <pi(d_i)>; 273 * |G| runs."""
    group = subgroup_elements(params.d_perms(), params.n)
    assert group is not None
    return {sigma: attack1_collect(oracle, sigma, params) for sigma in group}


def attack2_impersonate(
    tables: dict[Permutation, SpanTable],
    int_pub: MatPerm,
    ch: Challenge,
    params: SystemParams,
) -> Token:
    table = tables.get(int_pub.sigma)
    if table is None:
        raise SigmaMismatch("interrogator sigma outside the covered subgroup")
    return attack1_impersonate(table, int_pub, ch, params)


# -- attack 3: differential recovery of the private matrix ---------------------


@dataclass(frozen=True)
class RecoveredKey:
    """Recovered private matrix; kappa is the public last-row scalar.

    ``c_equiv`` is filled by the meet-in-the-middle attack when an
    equivalent conjugate product has been found as well.
    """

    k_t: Matrix
    kappa: int
    c_equiv: BraidWord | None = None

    @property
    def interactions(self) -> int:
        return self.k_t.n + 1


def attack3_recover_kt(
    oracle: TagOracle,
    params: SystemParams,
    a: Matrix | None = None,
    sigma: Permutation | None = None,
) -> RecoveredKey:
    """Recover the whole private matrix in n+1 interactions (3(n+1) runs).

    The base secret S and each tweaked secret S_t differ by
    K_T E_{t,n} V, which is zero outside the last column; that column is
    column t of K_T.  The missing last row is (0,...,0,kappa) with kappa
    read off the public key.
    """
    n = params.n
    if a is None:
        a = Matrix.basis(n, n - 1, n - 1)
    if sigma is None:
        sigma = Permutation.identity(n)

    base = read_full_secret(oracle, MatPerm(a, sigma), n)
    kt = bytearray(n * n)
    for t in range(n):
        tweaked = read_full_secret(oracle, MatPerm(a ^ Matrix.basis(n, t, n - 1), sigma), n)
        diff = bytes(x ^ y for x, y in zip(base, tweaked))
        for r in range(n - 1):
            kt[r * n + t] = diff[r * n + (n - 1)]
    kappa = oracle.public_key().m.at(n - 1, n - 1)
    kt[n * n - 1] = kappa
    return RecoveredKey(Matrix(n, bytes(kt)), kappa)


# -- the factorization oracle (stage 0 of attack 4) -----------------------------


@dataclass
class LookupTable:
    """Breadth-first factorization table over <gens>.

    ``entries[rank(sigma)]`` is ENTRY_EMPTY outside the subgroup,
    ENTRY_TERMINAL at the identity, else an encoded (generator index,
    sign) recording the last factor of a shortest product.
    """

    n: int
    gens: tuple[Permutation, ...]
    entries: np.ndarray
    reached: int
    build_seconds: float

    def entry(self, sigma: Permutation):
        code = int(self.entries[sigma.rank()])
        if code == ENTRY_EMPTY:
            return None
        if code == ENTRY_TERMINAL:
            return "terminate"
        return (code >> 1, +1 if code % 2 == 0 else -1)

    def __contains__(self, sigma: Permutation) -> bool:
        return int(self.entries[sigma.rank()]) != ENTRY_EMPTY

    @property
    def live_state_words(self) -> int:
        """64-bit words of useful content: one (rank, index, sign) per
        reachable permutation."""
        return self.reached


def build_lookup_table(d_perms, n: int) -> LookupTable:
    """Algorithm: allocate an n!-indexed table, seed the identity as
    terminal, then breadth-first multiply by every generator and inverse,
    first writer wins."""
    if n > 12:
        raise ValueError("n! table would not fit in memory; n <= 12 only")
    gens = tuple(d_perms)
    started = time.perf_counter()
    entries, reached = kernel.bfs_lookup_table(n, [bytes(g.images) for g in gens])
    return LookupTable(n, gens, entries, reached, time.perf_counter() - started)


def oracle_factor(table: LookupTable, sigma: Permutation) -> list[tuple[int, int]]:
    """Shortest expression of sigma over the table generators.

    Returns [(i_1, e_1), ..., (i_r, e_r)] (0-based generator indices) with
    sigma equal to the left-to-right product of gens[i_k] ** e_k.
    """
    if sigma not in table:
        raise NotInSubgroup(f"sigma {sigma.to_text()!r} is not in the stored subgroup")
    reversed_factors = []
    cur = sigma
    while True:
        entry = table.entry(cur)
        if entry == "terminate":
            break
        i, e = entry
        reversed_factors.append((i, e))
        g = table.gens[i]
        cur = cur.compose(g.inverse() if e > 0 else g)
    return list(reversed(reversed_factors))


# -- attack 4: lookup-table impersonation ---------------------------------------


def factorization_to_word(factors, conjugates) -> BraidWord:
    """Lift oracle factors to the matching product of conjugate words."""
    word = BraidWord.empty()
    for i, e in factors:
        word = word + (conjugates[i] if e > 0 else conjugates[i].inverse())
    return word


def attack4_impersonate(
    rk: RecoveredKey,
    tag_pub: MatPerm,
    int_pub: MatPerm,
    table: LookupTable,
    params: SystemParams,
) -> MatPerm:
    """Reproduce the honest shared secret from the recovered matrix.

    With w the conjugate-word lift of the factorization of sigma_I:
    L1 = matrix of (K_T M_I, sigma_I) * w^-1,
    L2 = matrix of (K_T^-1 M_T, sigma_T) * w,
    shared = (L1 L2, sigma_T sigma_I).
    """
    f = params.field
    factors = oracle_factor(table, int_pub.sigma)
    w = factorization_to_word(factors, params.conj_d)
    l1 = e_multiply(
        MatPerm(f.mat_mul(rk.k_t, int_pub.m), int_pub.sigma),
        w.inverse(),
        params.tvalues,
        f,
    ).m
    l2 = e_multiply(
        MatPerm(f.mat_mul(f.mat_inv(rk.k_t), tag_pub.m), tag_pub.sigma),
        w,
        params.tvalues,
        f,
    ).m
    return MatPerm(f.mat_mul(l1, l2), tag_pub.sigma.compose(int_pub.sigma))


# -- attack 5: meet-in-the-middle equivalent-key recovery ------------------------


def signed_conjugates(conj) -> list[BraidWord]:
    """Enumeration alphabet: each conjugate followed by its inverse."""
    out = []
    for c in conj:
        out.append(c)
        out.append(c.inverse())
    return out


def attack5_mitm(
    rk: RecoveredKey,
    tag_pub: MatPerm,
    conj,
    h: int,
    params: SystemParams,
) -> BraidWord:
    """Find c' with (K_T, 1) * c' = (M_T, sigma_T) by a sorted-table
    meet-in-the-middle over length-2h conjugate products.

    Builds (2|conj|)^h left halves (K_T,1)*w1 keyed by the full
    matrix/permutation value, then scans right halves (M_T,sigma_T)*w2 in
    canonical order; the first collision yields c' = w1 * w2^-1.
    """
    f = params.field
    tau = params.tvalues
    alphabet = signed_conjugates(conj)
    ident = Permutation.identity(params.n)
    start = MatPerm(rk.k_t, ident)

    table: dict[tuple[bytes, tuple[int, ...]], BraidWord] = {}
    for combo in itertools.product(range(len(alphabet)), repeat=h):
        w1 = BraidWord.empty()
        for i in combo:
            w1 = w1 + alphabet[i]
        mp = e_multiply(start, w1, tau, f)
        key = (mp.m.data, mp.sigma.images)
        if key not in table:
            table[key] = w1

    for combo in itertools.product(range(len(alphabet)), repeat=h):
        w2 = BraidWord.empty()
        for i in combo:
            w2 = w2 + alphabet[i]
        mp = e_multiply(tag_pub, w2, tau, f)
        key = (mp.m.data, mp.sigma.images)
        w1 = table.get(key)
        if w1 is not None:
            c_prime = w1 + w2.inverse()
            check = e_multiply(start, c_prime, tau, f)
            assert check == tag_pub, "collision failed the public-key equation"
            return c_prime
    raise SearchExhausted(
        f"no collision over {len(alphabet)}^{h} halves; wrong length assumption?"
    )


def mitm_cost(conj_count: int = 32, product_len: int = 16) -> dict[str, int]:
    """Analytic table/work sizes for the full-scale attack (never run here)."""
    if product_len % 2:
        raise ValueError("product length must be even")
    half = (2 * conj_count) ** (product_len // 2)
    return {"table_entries": half, "work_operations": 2 * half}
