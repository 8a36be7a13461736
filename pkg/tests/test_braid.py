import random

import pytest

from aelab.algebra import Permutation
from aelab.braid import BraidWord, free_reduce, random_word, word_perm


def _rand_word(rng, n=10, length=12):
    return BraidWord(
        tuple(rng.choice([1, -1]) * rng.randrange(1, n) for _ in range(length))
    )


def test_concat():
    assert BraidWord.empty() + BraidWord.of(2, -1) == BraidWord.of(2, -1)
    assert BraidWord.of(2, -1) + BraidWord.of(1, 4) == BraidWord.of(2, -1, 1, 4)
    rng = random.Random(1)
    for _ in range(50):
        a, b = _rand_word(rng), _rand_word(rng)
        assert len(a + b) == len(a) + len(b)


def test_inverse():
    assert BraidWord.empty().inverse() == BraidWord.empty()
    assert BraidWord.of(1, 2).inverse() == BraidWord.of(-2, -1)
    rng = random.Random(2)
    for _ in range(50):
        w = _rand_word(rng)
        assert w.inverse().inverse() == w


def test_zero_letter_rejected():
    with pytest.raises(ValueError):
        BraidWord.of(1, 0, 2)


def test_free_reduce_examples():
    assert free_reduce(BraidWord.of(1, -1)) == BraidWord.empty()
    assert free_reduce(BraidWord.of(2, -1, 1, 4)) == BraidWord.of(2, 4)
    # cascading cancellation needs the stack pass
    assert free_reduce(BraidWord.of(1, 2, -2, -1)) == BraidWord.empty()


def test_free_reduce_properties():
    rng = random.Random(3)
    for _ in range(200):
        w = _rand_word(rng, length=rng.randrange(0, 20))
        r = free_reduce(w)
        assert len(r) <= len(w)
        assert free_reduce(r) == r
        # reduction never changes the induced permutation
        assert word_perm(w, 10) == word_perm(r, 10)


def test_word_perm_examples():
    assert word_perm(BraidWord.empty(), 5) == Permutation.identity(5)
    for i in range(1, 5):
        assert word_perm(BraidWord.of(i), 5) == Permutation.transposition(5, i - 1, i)
        # sign-insensitive
        assert word_perm(BraidWord.of(-i), 5) == word_perm(BraidWord.of(i), 5)
    rng = random.Random(4)
    for _ in range(100):
        w = _rand_word(rng)
        assert word_perm(w + w.inverse(), 10) == Permutation.identity(10)


def test_word_perm_homomorphism():
    rng = random.Random(5)
    for _ in range(100):
        a, b = _rand_word(rng), _rand_word(rng)
        assert word_perm(a + b, 10) == word_perm(a, 10) * word_perm(b, 10)
        assert word_perm(a.inverse(), 10) == word_perm(a, 10).inverse()


def test_word_perm_range_check():
    with pytest.raises(ValueError):
        word_perm(BraidWord.of(5), 5)


def test_random_word_contract():
    rng = random.Random(6)
    assert random_word({1, 2}, 0, rng) == BraidWord.empty()
    w = random_word({2, 5, 7}, 200, random.Random(7))
    assert all(abs(x) in {2, 5, 7} for x in w.letters)
    assert len(w) == 200
    assert random_word({1, 3}, 50, random.Random(8)) == random_word({1, 3}, 50, random.Random(8))
    with pytest.raises(ValueError):
        random_word(set(), 3, rng)


def test_text_roundtrip():
    w = BraidWord.of(3, -1, 5)
    assert w.to_text() == "3 -1 5"
    assert BraidWord.from_text("3 -1 5") == w
    assert BraidWord.from_text("") == BraidWord.empty()
