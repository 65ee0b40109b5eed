"""Free Lie algebra on weighted letters, truncated at a multiweight cap.

Basis elements are Lyndon words with their standard (right-normed) bracketing.
Brackets are computed by expanding in the tensor algebra and greedily
decomposing against the Lyndon basis; the expansion of a Lyndon word is
unitriangular with respect to lexicographic word order, so the decomposition
is a finite exact peel-off.  Everything is over Fraction.

The multiweight of a word is the sum of its letters' weights; brackets whose
weight escapes the cap are truncated to zero, which quotients the free Lie
algebra by a graded ideal and so preserves Jacobi exactly.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

WeightVector = tuple[int, ...]
Word = tuple[int, ...]
Tensor = dict[Word, Fraction]

__all__ = ["TruncatedFreeLie", "lyndon_words"]


def _wv_add(a: WeightVector, b: WeightVector) -> WeightVector:
    return tuple(x + y for x, y in zip(a, b))


def _wv_leq(a: WeightVector, b: WeightVector) -> bool:
    return all(x <= y for x, y in zip(a, b))


def lyndon_words(alphabet_size: int, max_len: int):
    """All Lyndon words over 0..alphabet_size-1 of length <= max_len (Duval)."""
    out: list[Word] = []
    if alphabet_size <= 0 or max_len <= 0:
        return out
    w = [0]
    while w:
        out.append(tuple(w))
        period = list(w)
        w = [period[i % len(period)] for i in range(max_len)]
        while w and w[-1] == alphabet_size - 1:
            w.pop()
        if w:
            w[-1] += 1
    return out


def _standard_factorization(w: Word) -> tuple[Word, Word]:
    """w = u v with v the longest proper Lyndon suffix.

    For a Lyndon word the longest proper Lyndon suffix is the
    lexicographically least proper suffix.
    """
    n = len(w)
    i_min = min(range(1, n), key=lambda i: w[i:])
    return w[:i_min], w[i_min:]


def _is_lyndon(w: Word) -> bool:
    return len(w) > 0 and all(w < w[i:] + w[:i] for i in range(1, len(w)))


def _tensor_mul(a: Tensor, b: Tensor) -> Tensor:
    out: Tensor = {}
    for wa, ca in a.items():
        for wb, cb in b.items():
            w = wa + wb
            c = out.get(w, Fraction(0)) + ca * cb
            if c:
                out[w] = c
            elif w in out:
                del out[w]
    return out


def _tensor_addmul(acc: Tensor, t: Tensor, scale: Fraction) -> None:
    for w, c in t.items():
        v = acc.get(w, Fraction(0)) + scale * c
        if v:
            acc[w] = v
        elif w in acc:
            del acc[w]


class TruncatedFreeLie:
    """Free Lie algebra on weighted letters modulo weights beyond the cap.

    basis_words: Lyndon words (in (length, lex) order) whose multiweight is
    componentwise <= cap.  Elements are coordinate vectors over that basis.
    """

    def __init__(self, letter_weights: Sequence[WeightVector], cap: WeightVector):
        self.nu = len(cap)
        self.cap = tuple(cap)
        self.letter_weights = [tuple(w) for w in letter_weights]
        for w in self.letter_weights:
            if len(w) != self.nu:
                raise ValueError("letter weight length mismatch")
            if all(x == 0 for x in w):
                raise ValueError("letter has zero weight")
        max_len = sum(self.cap)
        words = [w for w in lyndon_words(len(self.letter_weights), max_len)
                 if _wv_leq(self.word_weight(w), self.cap)]
        words.sort(key=lambda w: (len(w), w))
        self.basis_words: list[Word] = words
        self.index: dict[Word, int] = {w: i for i, w in enumerate(words)}
        self._expansion_cache: dict[Word, Tensor] = {}
        self._bracket_cache: dict[tuple[int, int], dict[int, Fraction]] = {}

    @property
    def dim(self) -> int:
        return len(self.basis_words)

    def word_weight(self, w: Word) -> WeightVector:
        total = (0,) * self.nu
        for letter in w:
            total = _wv_add(total, self.letter_weights[letter])
        return total

    def weight_of_index(self, i: int) -> WeightVector:
        return self.word_weight(self.basis_words[i])

    def bracketing(self, w: Word):
        """Standard bracketing of a Lyndon word as a nested tuple of letters."""
        if len(w) == 1:
            return w[0]
        u, v = _standard_factorization(w)
        return (self.bracketing(u), self.bracketing(v))

    def expansion(self, w: Word) -> Tensor:
        """Tensor-algebra expansion of the standard bracketing of w."""
        cached = self._expansion_cache.get(w)
        if cached is not None:
            return cached
        if len(w) == 1:
            t: Tensor = {w: Fraction(1)}
        else:
            u, v = _standard_factorization(w)
            tu, tv = self.expansion(u), self.expansion(v)
            t = _tensor_mul(tu, tv)
            _tensor_addmul(t, _tensor_mul(tv, tu), Fraction(-1))
        self._expansion_cache[w] = t
        return t

    def _decompose(self, tensor: Tensor) -> dict[int, Fraction]:
        """Write a homogeneous Lie tensor in the Lyndon basis (exact peel-off)."""
        t = dict(tensor)
        out: dict[int, Fraction] = {}
        while t:
            w = min(t)  # lexicographically least word; for a Lie element it is Lyndon
            c = t[w]
            idx = self.index.get(w)
            if idx is None:
                raise ValueError(
                    f"word {w} is not Lyndon-in-cap; tensor is not in the truncated Lie span")
            out[idx] = c
            _tensor_addmul(t, self.expansion(w), -c)
        return out

    def bracket_indices(self, i: int, j: int) -> dict[int, Fraction]:
        """[basis_i, basis_j] as a sparse coordinate map."""
        if i == j:
            return {}
        if i > j:
            return {k: -c for k, c in self.bracket_indices(j, i).items()}
        key = (i, j)
        cached = self._bracket_cache.get(key)
        if cached is not None:
            return cached
        wi, wj = self.basis_words[i], self.basis_words[j]
        weight = _wv_add(self.word_weight(wi), self.word_weight(wj))
        if not _wv_leq(weight, self.cap):
            result: dict[int, Fraction] = {}
        else:
            ti, tj = self.expansion(wi), self.expansion(wj)
            t = _tensor_mul(ti, tj)
            _tensor_addmul(t, _tensor_mul(tj, ti), Fraction(-1))
            result = self._decompose(t)
        self._bracket_cache[key] = result
        return result

    def bracket(self, a: Sequence[Fraction], b: Sequence[Fraction]) -> list[Fraction]:
        out = [Fraction(0)] * self.dim
        for i, ca in enumerate(a):
            if not ca:
                continue
            for j, cb in enumerate(b):
                if not cb:
                    continue
                for k, c in self.bracket_indices(i, j).items():
                    out[k] += ca * cb * c
        return out
