"""Differential operators on R^k with complex-rational polynomial coefficients.

Terms map a derivative multi-index to a coefficient polynomial; composition
is the exact Leibniz expansion and the formal adjoint is integration by
parts.  The imaginary unit is carried as an exact (re, im) pair of rational
polynomials, which keeps the whole orbit-method layer exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

from .polyfield import Polynomial

MultiIndex = tuple[int, ...]

__all__ = ["CPoly", "DiffOp", "compose", "adjoint"]


@dataclass(frozen=True)
class CPoly:
    """Polynomial with Gaussian-rational coefficients, as a (re, im) pair."""

    re: Polynomial
    im: Polynomial

    @classmethod
    def zero(cls, k: int) -> "CPoly":
        return cls(Polynomial.zero(k), Polynomial.zero(k))

    @classmethod
    def real(cls, p: Polynomial) -> "CPoly":
        return cls(p, Polynomial.zero(p.n_vars))

    @classmethod
    def imag(cls, p: Polynomial) -> "CPoly":
        return cls(Polynomial.zero(p.n_vars), p)

    @classmethod
    def scalar(cls, k: int, re, im=0) -> "CPoly":
        return cls(Polynomial.constant(k, re), Polynomial.constant(k, im))

    @property
    def n_vars(self) -> int:
        return self.re.n_vars

    def __add__(self, other: "CPoly") -> "CPoly":
        return CPoly(self.re + other.re, self.im + other.im)

    def __sub__(self, other: "CPoly") -> "CPoly":
        return CPoly(self.re - other.re, self.im - other.im)

    def __neg__(self) -> "CPoly":
        return CPoly(-self.re, -self.im)

    def __mul__(self, other) -> "CPoly":
        if isinstance(other, CPoly):
            return CPoly(self.re * other.re - self.im * other.im,
                         self.re * other.im + self.im * other.re)
        return CPoly(self.re * other, self.im * other)

    __rmul__ = __mul__

    def conjugate(self) -> "CPoly":
        return CPoly(self.re, -self.im)

    def diff(self, i: int) -> "CPoly":
        return CPoly(self.re.diff(i), self.im.diff(i))

    def is_zero(self) -> bool:
        return self.re.is_zero() and self.im.is_zero()

    def eval(self, point) -> tuple[Fraction, Fraction]:
        return self.re.eval(point), self.im.eval(point)

    def degree(self) -> int:
        return max(self.re.degree(), self.im.degree())

    def format(self, variables: Sequence[str]) -> str:
        if self.is_zero():
            return "0"
        parts = []
        if not self.re.is_zero():
            parts.append(self.re.format(variables))
        if not self.im.is_zero():
            im_text = self.im.format(variables)
            parts.append(f"i*({im_text})" if ("+" in im_text or " - " in im_text)
                         else f"i*{im_text}")
        return " + ".join(parts)


class DiffOp:
    """sum_alpha c_alpha(t) d^alpha with CPoly coefficients, canonical form."""

    __slots__ = ("k", "terms")

    def __init__(self, k: int, terms: Mapping[MultiIndex, CPoly] | None = None):
        self.k = int(k)
        clean: dict[MultiIndex, CPoly] = {}
        if terms:
            for alpha, c in terms.items():
                alpha = tuple(int(a) for a in alpha)
                if len(alpha) != self.k:
                    raise ValueError(f"derivative index {alpha} has wrong length")
                if not c.is_zero():
                    prev = clean.get(alpha)
                    total = c if prev is None else prev + c
                    if total.is_zero():
                        clean.pop(alpha, None)
                    else:
                        clean[alpha] = total
        self.terms = clean

    # -- constructors --------------------------------------------------------

    @classmethod
    def zero(cls, k: int) -> "DiffOp":
        return cls(k, {})

    @classmethod
    def identity(cls, k: int) -> "DiffOp":
        return cls(k, {(0,) * k: CPoly.scalar(k, 1)})

    @classmethod
    def scalar(cls, k: int, re, im=0) -> "DiffOp":
        return cls(k, {(0,) * k: CPoly.scalar(k, re, im)})

    @classmethod
    def derivative(cls, k: int, i: int) -> "DiffOp":
        alpha = [0] * k
        alpha[i] = 1
        return cls(k, {tuple(alpha): CPoly.scalar(k, 1)})

    @classmethod
    def multiplication(cls, poly: CPoly) -> "DiffOp":
        return cls(poly.n_vars, {(0,) * poly.n_vars: poly})

    # -- algebra -------------------------------------------------------------

    def __add__(self, other: "DiffOp") -> "DiffOp":
        self._check(other)
        out = dict(self.terms)
        for a, c in other.terms.items():
            out[a] = out[a] + c if a in out else c
        return DiffOp(self.k, out)

    def __sub__(self, other: "DiffOp") -> "DiffOp":
        return self + (-other)

    def __neg__(self) -> "DiffOp":
        return DiffOp(self.k, {a: -c for a, c in self.terms.items()})

    def __mul__(self, scalar) -> "DiffOp":
        if isinstance(scalar, DiffOp):
            return compose(self, scalar)
        return DiffOp(self.k, {a: c * scalar for a, c in self.terms.items()})

    __rmul__ = __mul__

    def scale_complex(self, re, im=0) -> "DiffOp":
        z = CPoly.scalar(self.k, re, im)
        return DiffOp(self.k, {a: c * z for a, c in self.terms.items()})

    def is_zero(self) -> bool:
        return not self.terms

    def order(self) -> int:
        return max((sum(a) for a in self.terms), default=0)

    def coefficient_degree(self) -> int:
        return max((c.degree() for c in self.terms.values()), default=-1)

    def scalar_value(self) -> tuple[Fraction, Fraction]:
        """The complex value when the operator is multiplication by a constant."""
        if self.is_zero():
            return Fraction(0), Fraction(0)
        if self.order() != 0 or self.coefficient_degree() > 0:
            raise ValueError("operator is not a scalar")
        return self.terms[(0,) * self.k].eval((Fraction(0),) * self.k)

    def _check(self, other: "DiffOp") -> None:
        if self.k != other.k:
            raise ValueError(f"variable count mismatch: {self.k} vs {other.k}")

    def __eq__(self, other) -> bool:
        return isinstance(other, DiffOp) and self.k == other.k \
            and self.terms == other.terms

    def __hash__(self):
        return hash((self.k, frozenset(self.terms.items())))

    def format(self, variables: Sequence[str] | None = None) -> str:
        if not self.terms:
            return "0"
        variables = variables or [f"t{i+1}" for i in range(self.k)]
        parts = []
        for alpha in sorted(self.terms, key=lambda a: (sum(a), a)):
            c = self.terms[alpha]
            dd = "*".join(
                (f"d/d{variables[i]}" if e == 1 else f"d^{e}/d{variables[i]}^{e}")
                for i, e in enumerate(alpha) if e > 0)
            coeff = c.format(variables)
            if dd:
                coeff_txt = f"({coeff})*" if (" " in coeff or "+" in coeff) else \
                    ("" if coeff == "1" else f"{coeff}*")
                parts.append(f"{coeff_txt}{dd}")
            else:
                parts.append(coeff)
        text = parts[0]
        for part in parts[1:]:
            if part.startswith("-"):
                text += f" - {part[1:]}"
            else:
                text += f" + {part}"
        return text

    def __repr__(self):
        return f"DiffOp({self.format()})"


def compose(A: DiffOp, B: DiffOp) -> DiffOp:
    """A o B by the Leibniz rule, exact.

    p d^a (q d^b f) = p sum_{g <= a} binom(a, g) (d^{a-g} q) d^{g+b} f.
    """
    A._check(B)
    k = A.k
    out: dict[MultiIndex, CPoly] = {}
    for alpha, p in A.terms.items():
        for beta, q in B.terms.items():
            for gamma in _sub_multi_indices(alpha):
                coeff = 1
                for ai, gi in zip(alpha, gamma):
                    coeff *= math.comb(ai, gi)
                dq = q
                for i, (ai, gi) in enumerate(zip(alpha, gamma)):
                    for _ in range(ai - gi):
                        dq = dq.diff(i)
                if dq.is_zero():
                    continue
                target = tuple(g + b for g, b in zip(gamma, beta))
                term = p * dq * Fraction(coeff)
                out[target] = out[target] + term if target in out else term
    return DiffOp(k, out)


def _sub_multi_indices(alpha: MultiIndex):
    ranges = [range(a + 1) for a in alpha]
    import itertools
    return itertools.product(*ranges)


def adjoint(A: DiffOp) -> DiffOp:
    """Formal adjoint: (p d^a)* = (-1)^{|a|} d^a o conj(p)."""
    out = DiffOp.zero(A.k)
    for alpha, p in A.terms.items():
        d = DiffOp(A.k, {alpha: CPoly.scalar(A.k, 1)})
        m = DiffOp.multiplication(p.conjugate())
        sign = Fraction(-1) ** (sum(alpha) % 2)
        out = out + compose(d, m) * sign
    return out
