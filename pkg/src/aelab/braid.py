"""Formal words over the Artin generator alphabet.

A word is a sequence of signed nonzero ints: letter ``+i`` is the
generator b_i (1-based index, valid range 1..n-1), ``-i`` its inverse.
Words are kept unreduced unless :func:`free_reduce` is called explicitly;
E-multiplication results do not depend on reduction, but some attack code
cares about the exact product structure.

Text encoding: space-separated signed integers, e.g. ``"3 -1 5"`` for
b3 b1^-1 b5.
"""

from dataclasses import dataclass
from random import Random
from typing import Iterable

from .algebra import Permutation


@dataclass(frozen=True)
class BraidWord:
    letters: tuple[int, ...]

    def __post_init__(self):
        if any(x == 0 for x in self.letters):
            raise ValueError("letter 0 is not a generator")

    @classmethod
    def of(cls, *letters: int) -> "BraidWord":
        return cls(tuple(letters))

    @classmethod
    def empty(cls) -> "BraidWord":
        return cls(())

    def __len__(self) -> int:
        return len(self.letters)

    def __add__(self, other: "BraidWord") -> "BraidWord":
        """Concatenation."""
        return BraidWord(self.letters + other.letters)

    def inverse(self) -> "BraidWord":
        """Reversed order, negated signs."""
        return BraidWord(tuple(-x for x in reversed(self.letters)))

    def max_index(self) -> int:
        return max((abs(x) for x in self.letters), default=0)

    def to_text(self) -> str:
        return " ".join(str(x) for x in self.letters)

    @classmethod
    def from_text(cls, text: str) -> "BraidWord":
        return cls(tuple(int(tok) for tok in text.split()))


def free_reduce(word: BraidWord) -> BraidWord:
    """Delete adjacent inverse pairs until none remain (single stack pass)."""
    stack: list[int] = []
    for x in word.letters:
        if stack and stack[-1] == -x:
            stack.pop()
        else:
            stack.append(x)
    return BraidWord(tuple(stack))


def word_perm(word: BraidWord, n: int) -> Permutation:
    """Induced permutation: the product of adjacent transpositions.

    Signs are irrelevant (transpositions are involutions).  Composition is
    left to right, matching Permutation.compose.
    """
    images = list(range(n))
    positions = list(range(n))  # positions[v] = x with images[x] = v
    for x in word.letters:
        i = abs(x) - 1
        if i >= n - 1:
            raise ValueError(f"letter {x} out of range for n={n}")
        # post-compose with (i, i+1): swap the positions currently mapping
        # to i and i+1
        a, b = positions[i], positions[i + 1]
        images[a], images[b] = i + 1, i
        positions[i], positions[i + 1] = b, a
    return Permutation(tuple(images))


def random_word(indices: Iterable[int], length: int, rng: Random) -> BraidWord:
    """Uniform signed letters over the given generator indices."""
    pool = sorted(indices)
    if not pool:
        raise ValueError("empty generator index set")
    letters = []
    for _ in range(length):
        i = pool[rng.randrange(len(pool))]
        letters.append(i if rng.randrange(2) else -i)
    return BraidWord(tuple(letters))
