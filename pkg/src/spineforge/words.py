"""Free group words.

Letters are nonzero integers: ``+i`` is the generator x_i and ``-i`` its
inverse.  On the wire a word is a string over a..z / A..Z, capital letters
denoting inverses, so ``"abAB"`` is the commutator of x_1 and x_2.
"""

from dataclasses import dataclass
from fractions import Fraction
import math

import numpy as np


MAX_RELATORS = 10**6


class WordError(ValueError):
    pass


@dataclass(frozen=True)
class Letter:
    generator: int
    sign: int = 1

    def __post_init__(self):
        if self.generator < 1:
            raise WordError("generator index must be positive")
        if self.sign not in (1, -1):
            raise WordError("sign must be +1 or -1")

    @classmethod
    def from_int(cls, x):
        return cls(abs(x), 1 if x > 0 else -1)

    def to_int(self):
        return self.sign * self.generator

    def inverse(self):
        return Letter(self.generator, -self.sign)

    def __str__(self):
        return letter_char(self.to_int())


def letter_char(x):
    if x == 0 or abs(x) > 26:
        raise WordError(f"letter {x} has no character")
    c = chr(ord("a") + abs(x) - 1)
    return c if x > 0 else c.upper()


def char_letter(c):
    if "a" <= c <= "z":
        return ord(c) - ord("a") + 1
    if "A" <= c <= "Z":
        return -(ord(c) - ord("A") + 1)
    raise WordError(f"bad letter {c!r}")


def is_reduced(letters, cyclic=False):
    """True iff no adjacent pair cancels (and no wraparound pair if cyclic)."""
    w = _ints(letters)
    for i in range(len(w) - 1):
        if w[i] == -w[i + 1]:
            return False
    if cyclic and len(w) > 1 and w[0] == -w[-1]:
        return False
    return True


def _ints(letters):
    if isinstance(letters, ReducedWord):
        return letters.letters
    if isinstance(letters, str):
        return tuple(char_letter(c) for c in letters)
    return tuple(x.to_int() if isinstance(x, Letter) else int(x) for x in letters)


class ReducedWord:
    """A reduced word, stored as a tuple of signed generator indices."""

    __slots__ = ("letters", "cyclic")

    def __init__(self, letters, cyclic=True):
        w = _ints(letters)
        if any(x == 0 for x in w):
            raise WordError("zero is not a letter")
        if not is_reduced(w, cyclic):
            raise WordError("word is not " + ("cyclically " if cyclic else "") + "reduced")
        self.letters = w
        self.cyclic = cyclic

    @classmethod
    def parse(cls, s, cyclic=True):
        return cls(s, cyclic)

    @property
    def rank(self):
        return max((abs(x) for x in self.letters), default=0)

    def __len__(self):
        return len(self.letters)

    def __getitem__(self, i):
        return self.letters[i]

    def __iter__(self):
        return iter(self.letters)

    def __eq__(self, other):
        return isinstance(other, ReducedWord) and self.letters == other.letters

    def __hash__(self):
        return hash(self.letters)

    def __str__(self):
        return "".join(letter_char(x) for x in self.letters)

    def __repr__(self):
        return f"ReducedWord({str(self)!r})"

    def inverse(self):
        return ReducedWord(tuple(-x for x in reversed(self.letters)), self.cyclic)

    def rotate(self, i):
        if not self.letters:
            return self
        i %= len(self.letters)
        return ReducedWord(self.letters[i:] + self.letters[:i], self.cyclic)


@dataclass
class Presentation:
    k: int
    relators: list

    @property
    def n(self):
        return len(self.relators[0]) if self.relators else 0


def make_rng(seed):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))


def _check_rank(k):
    if k < 2:
        raise WordError("rank too small")


def _letters_from_choices(k, first, steps):
    # first in [0, 2k), steps in [0, 2k-1): skip the index of the inverse
    out = []
    idx = int(first)
    out.append(idx)
    for j in steps:
        inv = (idx + k) % (2 * k)
        j = int(j)
        idx = j if j < inv else j + 1
        out.append(idx)
    return out


def _idx_to_letter(k, idx):
    return idx + 1 if idx < k else -(idx - k + 1)


def sample_reduced_word(k, n, rng):
    """Uniform reduced (not necessarily cyclically reduced) word."""
    if n == 0:
        return ()
    first = rng.integers(2 * k)
    steps = rng.integers(2 * k - 1, size=n - 1)
    return tuple(_idx_to_letter(k, i) for i in _letters_from_choices(k, first, steps))


def random_cyclically_reduced_word(k, n, seed, method="rejection"):
    """Random cyclically reduced word of length n in F_k.

    ``method="rejection"`` samples a uniform reduced word and retries until
    it is cyclically reduced, which is exactly uniform.  ``"sequential"``
    only resamples the final letter, a cheaper sampler with a small bias at
    the wraparound.
    """
    _check_rank(k)
    if n < 0:
        raise WordError("negative length")
    if n == 0:
        return ReducedWord((), cyclic=True)
    rng = seed if isinstance(seed, np.random.Generator) else make_rng(seed)
    if method == "rejection":
        while True:
            w = sample_reduced_word(k, n, rng)
            if n == 1 or w[0] != -w[-1]:
                return ReducedWord(w, cyclic=True)
    if method == "sequential":
        if n == 1:
            return ReducedWord(sample_reduced_word(k, 1, rng), cyclic=True)
        head = sample_reduced_word(k, n - 1, rng)
        bad = {-head[-1], -head[0]}
        choices = [x for x in range(-k, k + 1) if x != 0 and x not in bad]
        last = choices[int(rng.integers(len(choices)))]
        return ReducedWord(head + (last,), cyclic=True)
    raise WordError(f"unknown sampling method {method!r}")


def sample_words(k, n, count, seed):
    """Vectorized exact-uniform sampler; returns an int array (count, n).

    Rows are drawn with the same rejection rule as
    :func:`random_cyclically_reduced_word` and are used for large
    distribution tests.
    """
    _check_rank(k)
    rng = make_rng(seed)
    out = np.empty((0, n), dtype=np.int64)
    while out.shape[0] < count:
        m = max(2 * (count - out.shape[0]), 16)
        idx = np.empty((m, n), dtype=np.int64)
        idx[:, 0] = rng.integers(2 * k, size=m)
        steps = rng.integers(2 * k - 1, size=(m, max(n - 1, 0)))
        for j in range(1, n):
            inv = (idx[:, j - 1] + k) % (2 * k)
            s = steps[:, j - 1]
            idx[:, j] = np.where(s < inv, s, s + 1)
        lett = np.where(idx < k, idx + 1, -(idx - k + 1))
        if n > 1:
            lett = lett[lett[:, 0] != -lett[:, -1]]
        out = np.concatenate([out, lett])
    return out[:count]


def relator_count(k, n, D):
    """floor((2k-1)^(nD)), computed exactly when nD is an integer."""
    D = Fraction(str(D)) if isinstance(D, float) else Fraction(D)
    e = n * D
    base = 2 * k - 1
    if e.denominator == 1:
        return base ** int(e)
    val = float(e) * math.log(base)
    if val > math.log(MAX_RELATORS) + 1:
        return math.inf if val > 700 else int(math.floor(math.exp(val)))
    c = int(math.floor(math.exp(val)))
    # guard against rounding just below an integer power
    while (c + 1) ** e.denominator <= base ** e.numerator:
        c += 1
    while c ** e.denominator > base ** e.numerator:
        c -= 1
    return c


def sample_presentation(k, n, D, seed, max_relators=MAX_RELATORS):
    """Presentation with floor((2k-1)^(nD)) independent random relators."""
    _check_rank(k)
    if not 0 < D < 0.5:
        raise WordError("density must lie in (0, 1/2)")
    count = relator_count(k, n, D)
    if count > max_relators:
        raise WordError(f"relator count overflow: {count} relators required")
    count = max(int(count), 1)
    ss = np.random.SeedSequence(seed)
    rels = [random_cyclically_reduced_word(k, n, np.random.Generator(np.random.PCG64(child)))
            for child in ss.spawn(count)]
    return Presentation(k, rels)
