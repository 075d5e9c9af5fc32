"""Words, the shuffle algebra and Lyndon words.

Words are plain strings over ``"abc..."``; letter ``a`` stands for the
first coordinate.  Python's string ordering is exactly the alphabetical
(lexicographic) order on words with a < b < c < ..., so comparisons are
done directly on strings.  All shuffle coefficients are exact integers.
"""
from __future__ import annotations

import math
import string
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, product
from typing import Iterable, Mapping, Sequence

from .errors import ContractError

ALPHABET = string.ascii_lowercase

# {aabc, aacb, baac} also generates the words composed by a, a, b, c;
# the canonical answer of generating_set() is the Lyndon set instead.
ALTERNATIVE_AABC_GENERATORS = frozenset({"aabc", "aacb", "baac"})


def word_from_indices(indices: Sequence[int]) -> str:
    """(1, 2, 2) -> "abb"; letters are 1-based."""
    for i in indices:
        if not 1 <= i <= len(ALPHABET):
            raise ContractError(f"letter index {i} out of range")
    return "".join(ALPHABET[i - 1] for i in indices)


def word_to_indices(word: str | Sequence[int]) -> tuple[int, ...]:
    """"abb" -> (1, 2, 2).  Integer sequences pass through unchanged."""
    if isinstance(word, str):
        out = []
        for ch in word:
            if ch not in ALPHABET:
                raise ContractError(f"invalid letter {ch!r}")
            out.append(ALPHABET.index(ch) + 1)
        return tuple(out)
    return tuple(int(i) for i in word)


def as_word(word: str | Sequence[int]) -> str:
    return word if isinstance(word, str) else word_from_indices(word)


class WordPolynomial:
    """Finitely supported linear combination of words.

    Coefficients may be ints, Fractions or floats; zero coefficients are
    dropped on construction.
    """

    __slots__ = ("_terms",)

    def __init__(self, terms: Mapping[str, object] | Iterable[tuple[str, object]] = ()):
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[str, object] = {}
        for w, c in items:
            acc[w] = acc.get(w, 0) + c
        self._terms = {w: c for w, c in acc.items() if c != 0}

    @classmethod
    def word(cls, w: str, coef=1) -> WordPolynomial:
        return cls({w: coef})

    def __getitem__(self, w: str):
        return self._terms.get(w, 0)

    def __iter__(self):
        return iter(sorted(self._terms))

    def __len__(self) -> int:
        return len(self._terms)

    def items(self):
        return sorted(self._terms.items())

    def words(self) -> list[str]:
        return sorted(self._terms)

    @property
    def degree(self) -> int:
        return max((len(w) for w in self._terms), default=0)

    def total(self):
        return sum(self._terms.values())

    def __add__(self, other: WordPolynomial) -> WordPolynomial:
        return WordPolynomial(list(self._terms.items()) + list(other._terms.items()))

    def __sub__(self, other: WordPolynomial) -> WordPolynomial:
        return self + other.scale(-1)

    def __neg__(self) -> WordPolynomial:
        return self.scale(-1)

    def scale(self, c) -> WordPolynomial:
        return WordPolynomial({w: c * v for w, v in self._terms.items()})

    def __mul__(self, other):
        if isinstance(other, WordPolynomial):
            return shuffle_poly(self, other)
        return self.scale(other)

    __rmul__ = scale

    def __eq__(self, other) -> bool:
        if isinstance(other, str):
            other = WordPolynomial.word(other)
        return isinstance(other, WordPolynomial) and self._terms == other._terms

    def __hash__(self):
        return hash(frozenset(self._terms.items()))

    def __str__(self) -> str:
        if not self._terms:
            return "0"
        parts = []
        for i, (w, c) in enumerate(self.items()):
            sign = "-" if c < 0 else "+"
            mag = -c if c < 0 else c
            body = f"{mag}*{w or 'e'}"
            if i == 0:
                parts.append(("-" if sign == "-" else "") + body)
            else:
                parts.append(f" {sign} {body}")
        return "".join(parts)

    __repr__ = __str__


# ---------------------------------------------------------------------------
# shuffle product
# ---------------------------------------------------------------------------

@lru_cache(maxsize=65536)
def _shuffle_items(u: str, v: str) -> tuple[tuple[str, int], ...]:
    # (u'a) sh (v'b) = (u' sh v'b) a + (u'a sh v') b
    if not u:
        return ((v, 1),)
    if not v:
        return ((u, 1),)
    acc: Counter = Counter()
    for w, c in _shuffle_items(u[:-1], v):
        acc[w + u[-1]] += c
    for w, c in _shuffle_items(u, v[:-1]):
        acc[w + v[-1]] += c
    return tuple(sorted(acc.items()))


def shuffle(u: str | Sequence[int], v: str | Sequence[int]) -> WordPolynomial:
    """Shuffle product of two words with exact integer coefficients."""
    return WordPolynomial(dict(_shuffle_items(as_word(u), as_word(v))))


def shuffle_poly(p: WordPolynomial, q: WordPolynomial) -> WordPolynomial:
    terms: list[tuple[str, object]] = []
    for u, a in p.items():
        for v, b in q.items():
            terms.extend((w, a * b * c) for w, c in _shuffle_items(u, v))
    return WordPolynomial(terms)


def shuffle_power(p: WordPolynomial, k: int) -> WordPolynomial:
    out = WordPolynomial.word("")
    for _ in range(k):
        out = shuffle_poly(out, p)
    return out


def shuffle_by_enumeration(u: str, v: str) -> WordPolynomial:
    """Reference shuffle: count position subsets U with w(U) = u, w(U^c) = v."""
    n = len(u) + len(v)
    acc: Counter = Counter()
    for pos in combinations(range(n), len(u)):
        w = [""] * n
        it_u, it_v = iter(u), iter(v)
        chosen = set(pos)
        for i in range(n):
            w[i] = next(it_u) if i in chosen else next(it_v)
        acc["".join(w)] += 1
    return WordPolynomial(dict(acc))


# ---------------------------------------------------------------------------
# Lyndon words
# ---------------------------------------------------------------------------

def is_lyndon(w: str | Sequence[int]) -> bool:
    """True iff u < v for every split w = uv into non-empty words."""
    w = as_word(w)
    if not w:
        raise ContractError("the empty word is not eligible")
    return all(w[:i] < w[i:] for i in range(1, len(w)))


def lyndon_factorization(w: str | Sequence[int]) -> list[tuple[str, int]]:
    """Decreasing factorization w = l1^i1 ... lk^ik (Duval's algorithm)."""
    w = as_word(w)
    if not w:
        raise ContractError("the empty word has no Lyndon factorization")
    factors: list[str] = []
    n, i = len(w), 0
    while i < n:
        j, k = i + 1, i
        while j < n and w[k] <= w[j]:
            k = i if w[k] < w[j] else k + 1
            j += 1
        while i <= k:
            factors.append(w[i: i + j - k])
            i += j - k
    grouped: list[tuple[str, int]] = []
    for f in factors:
        if grouped and grouped[-1][0] == f:
            grouped[-1] = (f, grouped[-1][1] + 1)
        else:
            grouped.append((f, 1))
    return grouped


def lyndon_words(alphabet: str, max_length: int) -> list[str]:
    """All Lyndon words of length <= max_length, in lexicographic order (Duval)."""
    letters = sorted(set(alphabet))
    k = len(letters)
    if k == 0 or max_length < 1:
        return []
    out = []
    w = [-1]
    while w:
        w[-1] += 1
        out.append("".join(letters[i] for i in w))
        m = len(w)
        while len(w) < max_length:
            w.append(w[len(w) - m])
        while w and w[-1] == k - 1:
            w.pop()
    return out


def _normalize_counts(counts: Mapping[str, int] | str) -> dict[str, int]:
    if isinstance(counts, str):
        return dict(Counter(counts))
    out = {}
    for letter, c in counts.items():
        letter = letter if isinstance(letter, str) else ALPHABET[int(letter) - 1]
        if c < 0:
            raise ContractError("negative letter multiplicity")
        if c:
            out[letter] = out.get(letter, 0) + int(c)
    return out


def lyndon_words_for_multiset(counts: Mapping[str, int] | str) -> set[str]:
    """Lyndon words whose letter multiset is exactly ``counts``.

    ``counts`` is a mapping letter -> multiplicity (letters as ``"a"`` or
    1-based ints) or simply a word listing the letters, e.g. ``"aab"``.
    """
    counts = _normalize_counts(counts)
    total = sum(counts.values())
    if total < 1:
        raise ContractError("multiset must contain at least one letter")
    target = Counter(counts)
    return {w for w in lyndon_words("".join(counts), total) if len(w) == total and Counter(w) == target}


def words_for_multiset(counts: Mapping[str, int] | str) -> set[str]:
    """All words composed by the given letters with the given multiplicities."""
    counts = _normalize_counts(counts)
    letters = "".join(l * c for l, c in sorted(counts.items()))
    return {"".join(p) for p in set(_permutations(letters))}


def _permutations(letters: str):
    if len(letters) <= 1:
        yield letters
        return
    seen = set()
    for i, ch in enumerate(letters):
        if ch in seen:
            continue
        seen.add(ch)
        for rest in _permutations(letters[:i] + letters[i + 1:]):
            yield ch + rest


def generating_set(counts: Mapping[str, int] | str) -> set[str]:
    """Lyndon words for the multiset; these generate all its words modulo shuffles."""
    return lyndon_words_for_multiset(counts)


# ---------------------------------------------------------------------------
# triangular expansion and reduction to Lyndon generators
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LyndonExpansion:
    """``product = word + correction`` where ``product`` is the normalized
    shuffle of the word's Lyndon factors, 1/(i1!...ik!) l1^{*i1} * ... * lk^{*ik}.
    """

    word: str
    factors: tuple[tuple[str, int], ...]
    product: WordPolynomial
    correction: WordPolynomial


def lyndon_shuffle_expansion(w: str | Sequence[int]) -> LyndonExpansion:
    w = as_word(w)
    factors = tuple(lyndon_factorization(w))
    prod = WordPolynomial.word("")
    denom = 1
    for l, i in factors:
        prod = shuffle_poly(prod, shuffle_power(WordPolynomial.word(l), i))
        denom *= math.factorial(i)
    terms = {}
    for u, c in prod.items():
        q, r = divmod(c, denom)
        if r:
            raise ArithmeticError(f"coefficient {c} of {u} not divisible by {denom}")
        terms[u] = q
    product = WordPolynomial(terms)
    if product[w] != 1:
        raise ArithmeticError(f"leading coefficient of {w} is {product[w]}, expected 1")
    return LyndonExpansion(w, factors, product, product - WordPolynomial.word(w))


@dataclass
class LyndonReduction:
    """w = sum_l coeffs[l] * l + sum_(c, u, v) c * (u shuffle v)."""

    word: str
    lyndon: dict[str, Fraction] = field(default_factory=dict)
    shuffles: list[tuple[Fraction, str, str]] = field(default_factory=list)

    def as_polynomial(self) -> WordPolynomial:
        """Expand the right-hand side back into words (must equal ``word``)."""
        out = WordPolynomial(self.lyndon)
        for c, u, v in self.shuffles:
            out = out + shuffle(u, v).scale(c)
        return out


def reduce_to_lyndon(w: str | Sequence[int]) -> LyndonReduction:
    """Write a word as a combination of Lyndon words plus shuffle products.

    Repeatedly applies the triangular expansion to the largest remaining
    non-Lyndon word; terminates because corrections are strictly smaller
    and share the letter multiset.
    """
    w = as_word(w)
    red = LyndonReduction(w)
    pending: dict[str, Fraction] = {w: Fraction(1)}
    while pending:
        u = max(pending)
        coef = pending.pop(u)
        if coef == 0:
            continue
        if is_lyndon(u):
            red.lyndon[u] = red.lyndon.get(u, Fraction(0)) + coef
            continue
        exp = lyndon_shuffle_expansion(u)
        (l1, i1), rest = exp.factors[0], exp.factors[1:]
        # u = product - correction, product = (1/(i1! ...)) l1 * Q
        q = shuffle_power(WordPolynomial.word(l1), i1 - 1)
        denom = math.factorial(i1)
        for l, i in rest:
            q = shuffle_poly(q, shuffle_power(WordPolynomial.word(l), i))
            denom *= math.factorial(i)
        for v, c in q.items():
            red.shuffles.append((coef * Fraction(c, denom), l1, v))
        for v, c in exp.correction.items():
            pending[v] = pending.get(v, Fraction(0)) - coef * c
    red.lyndon = {k: v for k, v in red.lyndon.items() if v != 0}
    return red


def all_words(alphabet: str, length: int) -> list[str]:
    return ["".join(p) for p in product(sorted(alphabet), repeat=length)]
