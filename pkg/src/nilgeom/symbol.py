"""Weighted noncommutative differential operators and principal symbols.

A weighted operator is a noncommutative polynomial in named generators, each
bound to a vector field and a weight; words carry the sum of their letters'
weights and must sit below the declared order.  The principal symbol keeps
exactly the words of extremal weight, evaluates coefficient functions at the
base point, replaces each letter by the representation applied to the
letter's class in the osculating algebra, and composes along the word from
left to right.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .diffop import DiffOp, compose
from .grading import WeightVector, wv_add, wv_leq
from .osculating import OsculatingAlgebra
from .orbit import Representation
from .polyfield import Polynomial, VectorField, _Scanner

__all__ = ["Generator", "WeightedOperator", "max_part", "principal_symbol",
           "parse_operator", "OperatorParseError"]


@dataclass(frozen=True)
class Generator:
    name: str
    weight: WeightVector
    field: VectorField


class WeightedOperator:
    """sum of (coefficient polynomial on M) * (word of generators)."""

    def __init__(self, generators: Sequence[Generator], nu: int,
                 words: Sequence[tuple[Polynomial, tuple[int, ...]]],
                 declared_order: WeightVector):
        self.generators = list(generators)
        self.nu = nu
        self.declared_order = tuple(declared_order)
        merged: dict[tuple[int, ...], Polynomial] = {}
        n_vars = None
        for coeff, word in words:
            n_vars = coeff.n_vars if n_vars is None else n_vars
            word = tuple(word)
            total = self.word_weight(word)
            if not wv_leq(total, self.declared_order):
                raise ValueError(
                    f"word {self.word_text(word)} has weight {total}, above the "
                    f"declared order {self.declared_order}")
            if word in merged:
                merged[word] = merged[word] + coeff
            else:
                merged[word] = coeff
        self.words = [(c, w) for w, c in merged.items() if not c.is_zero()]

    def word_weight(self, word: tuple[int, ...]) -> WeightVector:
        total = (0,) * self.nu
        for letter in word:
            total = wv_add(total, self.generators[letter].weight)
        return total

    def word_text(self, word: tuple[int, ...]) -> str:
        return "*".join(self.generators[i].name for i in word) if word else "1"

    def with_order(self, order: WeightVector) -> "WeightedOperator":
        return WeightedOperator(self.generators, self.nu,
                                [(c, w) for c, w in self.words], tuple(order))

    def format(self, variables: Sequence[str]) -> str:
        if not self.words:
            return "0"
        parts = []
        for coeff, word in sorted(self.words, key=lambda cw: cw[1]):
            ctext = coeff.format(variables)
            wtext = self.word_text(word)
            if not word:
                parts.append(ctext)
            elif ctext == "1":
                parts.append(wtext)
            else:
                parts.append(f"({ctext})*{wtext}")
        return " + ".join(parts)


def max_part(P: WeightedOperator,
             order: WeightVector | None = None) -> WeightedOperator:
    """Keep exactly the words of total weight equal to the declared order."""
    order = tuple(order) if order is not None else P.declared_order
    kept = [(c, w) for c, w in P.words if P.word_weight(w) == order]
    return WeightedOperator(P.generators, P.nu, kept, order)


def principal_symbol(P: WeightedOperator, order: WeightVector,
                     rep: Representation, osc: OsculatingAlgebra,
                     x: Sequence[Fraction] | None = None) -> DiffOp:
    """Symbol at the representation: substitute classes into the top part.

    Coefficients are evaluated at the osculating point, each letter maps to
    dpi of the class of its field at the letter's weight, and words compose
    left to right.
    """
    point = tuple(Fraction(v) for v in (x if x is not None else osc.point))
    if point != osc.point:
        raise ValueError("symbol point must match the osculating algebra point")
    if rep.algebra is not osc.algebra:
        raise ValueError("representation must live on the osculating algebra")
    top = max_part(P, order)
    k = rep.k
    letter_ops: dict[int, DiffOp] = {}

    def letter_op(idx: int) -> DiffOp:
        if idx not in letter_ops:
            gen = P.generators[idx]
            cls = osc.class_of(gen.field, gen.weight)
            letter_ops[idx] = rep.dpi_element(cls)
        return letter_ops[idx]

    total = DiffOp.zero(k)
    for coeff, word in top.words:
        value = coeff.eval(point)
        if value == 0:
            continue
        op = DiffOp.identity(k)
        for letter in word:
            op = compose(op, letter_op(letter))
        total = total + op * value
    return total


# -- operator expression grammar -----------------------------------------------
#
#   expr   := term (('+'|'-') term)*
#   term   := factor ('*' factor)*
#   factor := atom ['^' int]
#   atom   := '(' expr ')' | generator-name | parameter-name | rational
#
# Products expand distributively; generator order inside each word is kept.


class OperatorParseError(ValueError):
    pass


def parse_operator(text: str, generators: Sequence[Generator],
                   declared_order: WeightVector, n_vars: int,
                   parameters: Mapping[str, Fraction] | None = None,
                   nu: int | None = None) -> WeightedOperator:
    """Parse an operator expression over named generators.

    Parameters are resolved to exact rationals at parse time; coefficients
    are constant polynomials (polynomial coefficients on the base manifold
    can be attached programmatically).
    """
    parameters = dict(parameters or {})
    nu = nu if nu is not None else len(tuple(declared_order))
    name_index = {g.name: i for i, g in enumerate(generators)}
    sc = _Scanner(text)

    def parse_expr():
        if sc.take("-"):
            words = _word_scale(parse_term(), Fraction(-1))
        else:
            sc.take("+")
            words = parse_term()
        while True:
            if sc.take("+"):
                words = _word_add(words, parse_term(), n_vars)
            elif sc.take("-"):
                words = _word_add(words, _word_scale(parse_term(), Fraction(-1)),
                                  n_vars)
            else:
                return words

    def parse_term():
        words = parse_factor()
        while sc.take("*"):
            words = _word_mul(words, parse_factor(), n_vars)
        return words

    def parse_factor():
        words = parse_atom()
        if sc.take("^"):
            exponent = sc.integer()
            if exponent < 0:
                raise OperatorParseError("negative exponent")
            out = {(): Polynomial.constant(n_vars, 1)}
            for _ in range(exponent):
                out = _word_mul(out, words, n_vars)
            return out
        return words

    def parse_atom():
        if sc.take("("):
            inner = parse_expr()
            if not sc.take(")"):
                raise OperatorParseError(f"expected ')' at position {sc.pos}")
            return inner
        ch = sc.peek()
        if ch.isdigit():
            num = sc.integer()
            coeff = Fraction(num)
            if sc.take("/"):
                den = sc.integer()
                if den == 0:
                    raise OperatorParseError("zero denominator")
                coeff = Fraction(num, den)
            return {(): Polynomial.constant(n_vars, coeff)}
        if ch.isalpha() or ch == "_":
            pos = sc.pos
            name = sc.identifier()
            if name in name_index:
                return {(name_index[name],): Polynomial.constant(n_vars, 1)}
            if name in parameters:
                return {(): Polynomial.constant(n_vars, parameters[name])}
            raise OperatorParseError(
                f"unknown generator or parameter {name!r} at position {pos}")
        raise OperatorParseError(f"unexpected input at position {sc.pos}")

    words = parse_expr()
    if not sc.done():
        raise OperatorParseError(f"trailing input at position {sc.pos}")
    return WeightedOperator(generators, nu,
                            [(c, w) for w, c in words.items()], declared_order)


def _word_add(a, b, n_vars):
    out = dict(a)
    for w, c in b.items():
        out[w] = out[w] + c if w in out else c
    return {w: c for w, c in out.items() if not c.is_zero()}


def _word_scale(a, scalar):
    return {w: c * scalar for w, c in a.items()}


def _word_mul(a, b, n_vars):
    out: dict[tuple, Polynomial] = {}
    for wa, ca in a.items():
        for wb, cb in b.items():
            w = wa + wb
            c = ca * cb
            out[w] = out[w] + c if w in out else c
    return {w: c for w, c in out.items() if not c.is_zero()}
