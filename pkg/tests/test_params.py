import io
import random

import pytest

from aelab.algebra import GF256, Matrix, Permutation
from aelab.braid import BraidWord, word_perm
from aelab.emul import phi
from aelab.errors import ParseError
from aelab.params import (
    SystemParams,
    _min_poly_of_krylov,
    generate_params,
    load_params,
    params_to_text,
    poly_is_irreducible,
    save_params,
    validate_params,
)


def test_generated_params_validate(params10):
    report = validate_params(params10)
    assert report.ok, report.failures
    assert report.d_subgroup_order is not None
    assert report.d_subgroup_order <= 120  # at most (n/2)! at n=10
    assert len(report.c_fixed_points) == 5
    assert len(report.d_fixed_points) == 5
    assert not (report.c_fixed_points & report.d_fixed_points)
    assert len(params10.conj_c) == len(params10.conj_d) == 32


def test_generation_deterministic():
    a = generate_params(10, random.Random(5))
    b = generate_params(10, random.Random(5))
    assert params_to_text(a) == params_to_text(b)
    c = generate_params(10, random.Random(6))
    assert params_to_text(a) != params_to_text(c)


def test_generation_input_validation():
    with pytest.raises(ValueError):
        generate_params(9, random.Random(1))
    with pytest.raises(ValueError):
        generate_params(2, random.Random(1))


def test_small_n_generation():
    p = generate_params(6, random.Random(3))
    report = validate_params(p)
    assert report.ok, report.failures
    assert len(report.c_fixed_points) == 3


def test_conjugates_commute_as_braid_words(params10):
    # every c/d pair commutes under E-multiplication and as permutations
    f = params10.field
    ident = Permutation.identity(params10.n)
    rng = random.Random(7)
    for _ in range(10):
        c = params10.conj_c[rng.randrange(32)]
        d = params10.conj_d[rng.randrange(32)]
        assert word_perm(c + d, 10) == word_perm(d + c, 10)
        assert phi(ident, c + d, params10.tvalues, f) == phi(ident, d + c, params10.tvalues, f)


def test_seed_matrix_shape(params10):
    n = params10.n
    assert params10.seed_matrix.row(n - 1) == bytes([0] * (n - 1) + [1])
    params10.field.mat_inv(params10.seed_matrix)  # must not raise


def test_file_roundtrip(tmp_path, params10):
    path = tmp_path / "params.txt"
    save_params(params10, path)
    assert load_params(path) == params10
    # and through StringIO
    assert load_params(io.StringIO(params_to_text(params10))) == params10


def test_file_comments_ignored(params10):
    text = "# leading comment\n" + params_to_text(params10).replace(
        "N 10", "N 10\n# mid comment"
    )
    assert load_params(io.StringIO(text)) == params10


def test_parse_errors(params10):
    text = params_to_text(params10)

    with pytest.raises(ParseError, match="unsupported version"):
        load_params(io.StringIO(text.replace("AE-PARAMS v1", "AE-PARAMS v9")))

    # missing CONJ-D section
    truncated = text[: text.index("CONJ-D")]
    with pytest.raises(ParseError, match="CONJ-D"):
        load_params(io.StringIO(truncated))

    with pytest.raises(ParseError, match="hex"):
        load_params(io.StringIO(text.replace("TVALUES ", "TVALUES zz", 1)))

    with pytest.raises(ParseError) as err:
        load_params(io.StringIO(text.replace("N 10", "N ten")))
    assert err.value.line is not None

    # a word with an out-of-range letter
    bad = text.replace("CONJ-C 32\n", "CONJ-C 32\n99 1\n", 1)
    with pytest.raises(ParseError, match="letter out of range"):
        load_params(io.StringIO(bad))


def test_validator_failure_codes(params10):
    bad_t = SystemParams(
        params10.n,
        params10.modulus,
        bytes([0]) + params10.tvalues[1:],
        params10.seed_matrix,
        params10.conj_c,
        params10.conj_d,
    )
    assert "tvalue-zero" in validate_params(bad_t).failures

    bad_seed = SystemParams(
        params10.n,
        params10.modulus,
        params10.tvalues,
        Matrix.zero(params10.n),
        params10.conj_c,
        params10.conj_d,
    )
    failures = validate_params(bad_seed).failures
    assert "seed-last-row" in failures and "seed-singular" in failures

    # breaking the strand split breaks commutation and the fixed sets
    mixed = SystemParams(
        params10.n,
        params10.modulus,
        params10.tvalues,
        params10.seed_matrix,
        params10.conj_d,
        params10.conj_d,
    )
    failures = validate_params(mixed).failures
    assert "fixed-points-overlap" in failures


def test_validator_never_throws_on_junk():
    junk = SystemParams(
        10,
        0x42,  # not even degree 8
        b"",
        Matrix.zero(10),
        (BraidWord.of(99),),
        (),
    )
    report = validate_params(junk)
    assert not report.ok


# -- polynomial helpers ---------------------------------------------------------


def test_poly_irreducibility_known_cases(field):
    # x^2 + 1 = (x + 1)^2 in characteristic 2
    assert not poly_is_irreducible([1, 0, 1], field)
    # x^2 + x + 1 has roots in GF(4), a subfield of GF(256)
    assert not poly_is_irreducible([1, 1, 1], field)
    # degree 1 is always irreducible
    assert poly_is_irreducible([7, 1], field)


def test_min_poly_of_companion_matrix(field):
    # the minimal polynomial of a companion matrix is the polynomial itself
    rng = random.Random(11)
    for _ in range(20):
        m = 6
        coeffs = [rng.randrange(256) for _ in range(m)] + [1]
        comp = bytearray(m * m)
        for r in range(m - 1):
            comp[(r + 1) * m + r] = 1  # subdiagonal
        for r in range(m):
            comp[r * m + (m - 1)] = coeffs[r]  # last column: low coefficients
        block = Matrix(m, bytes(comp))
        v = bytes([1] + [0] * (m - 1))
        # e_0, Be_0, ..., B^(m-1)e_0 are the standard basis vectors, so the
        # first dependency is exactly the defining polynomial
        assert _min_poly_of_krylov(block, v, field) == coeffs


def test_irreducible_check_on_generated_seed(params10, field):
    # the generated seed block's minimal polynomial has full degree and
    # passes the irreducibility test, so polynomial evaluations that are
    # nonzero mod it are invertible
    n = params10.n
    m = n - 1
    block = Matrix(
        m,
        bytes(
            params10.seed_matrix.at(r, c) for r in range(m) for c in range(m)
        ),
    )
    minpoly = _min_poly_of_krylov(block, bytes([1] + [0] * (m - 1)), field)
    assert len(minpoly) - 1 == m
    assert poly_is_irreducible(minpoly, field)
