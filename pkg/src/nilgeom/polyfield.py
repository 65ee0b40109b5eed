"""Polynomial vector fields on R^n over exact rationals.

Everything downstream (filtrations, osculating algebras, symbols) is built
from Lie brackets of these fields, so coefficients are `fractions.Fraction`
throughout: bracket towers amplify rounding and the quotient constructions
need exact kernels.

All values are immutable after construction and all operations are pure.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping, Sequence

Exponent = tuple[int, ...]

__all__ = [
    "Polynomial",
    "VectorField",
    "FieldParseError",
    "lie_bracket",
    "evaluate",
    "parse_field",
]


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"expected exact rational, got {type(x).__name__}: {x!r}")


def _grlex_key(exp: Exponent):
    # graded lexicographic: total degree first, then lex on the exponent tuple
    return (sum(exp), exp)


class Polynomial:
    """Multivariate polynomial with Fraction coefficients.

    Stored as a mapping exponent-tuple -> coefficient with no zero entries.
    Term order for printing/canonical form is graded lexicographic,
    highest term first.
    """

    __slots__ = ("n_vars", "terms", "_hash")

    def __init__(self, n_vars: int, terms: Mapping[Exponent, Fraction] | None = None):
        self.n_vars = int(n_vars)
        clean: dict[Exponent, Fraction] = {}
        if terms:
            for exp, c in terms.items():
                exp = tuple(int(e) for e in exp)
                if len(exp) != self.n_vars:
                    raise ValueError(
                        f"exponent {exp} has length {len(exp)}, expected {self.n_vars}")
                if any(e < 0 for e in exp):
                    raise ValueError(f"negative exponent in {exp}")
                c = _as_fraction(c)
                if c != 0:
                    clean[exp] = clean.get(exp, Fraction(0)) + c
                    if clean[exp] == 0:
                        del clean[exp]
        self.terms = clean
        self._hash = None

    # -- constructors ------------------------------------------------------

    @classmethod
    def zero(cls, n_vars: int) -> "Polynomial":
        return cls(n_vars, {})

    @classmethod
    def constant(cls, n_vars: int, c) -> "Polynomial":
        return cls(n_vars, {(0,) * n_vars: _as_fraction(c)})

    @classmethod
    def variable(cls, n_vars: int, i: int) -> "Polynomial":
        exp = [0] * n_vars
        exp[i] = 1
        return cls(n_vars, {tuple(exp): Fraction(1)})

    @classmethod
    def monomial(cls, n_vars: int, exp: Sequence[int], c=1) -> "Polynomial":
        return cls(n_vars, {tuple(exp): _as_fraction(c)})

    # -- ring operations ---------------------------------------------------

    def __add__(self, other: "Polynomial") -> "Polynomial":
        self._check(other)
        out = dict(self.terms)
        for exp, c in other.terms.items():
            out[exp] = out.get(exp, Fraction(0)) + c
        return Polynomial(self.n_vars, out)

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        self._check(other)
        out = dict(self.terms)
        for exp, c in other.terms.items():
            out[exp] = out.get(exp, Fraction(0)) - c
        return Polynomial(self.n_vars, out)

    def __neg__(self) -> "Polynomial":
        return Polynomial(self.n_vars, {e: -c for e, c in self.terms.items()})

    def __mul__(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            self._check(other)
            out: dict[Exponent, Fraction] = {}
            for e1, c1 in self.terms.items():
                for e2, c2 in other.terms.items():
                    e = tuple(a + b for a, b in zip(e1, e2))
                    out[e] = out.get(e, Fraction(0)) + c1 * c2
            return Polynomial(self.n_vars, out)
        if not isinstance(other, (int, str, Fraction)):
            return NotImplemented
        c = _as_fraction(other)
        return Polynomial(self.n_vars, {e: v * c for e, v in self.terms.items()})

    __rmul__ = __mul__

    def diff(self, i: int) -> "Polynomial":
        out: dict[Exponent, Fraction] = {}
        for exp, c in self.terms.items():
            if exp[i] == 0:
                continue
            new = list(exp)
            new[i] -= 1
            out[tuple(new)] = out.get(tuple(new), Fraction(0)) + c * exp[i]
        return Polynomial(self.n_vars, out)

    def eval(self, point: Sequence) -> Fraction:
        if len(point) != self.n_vars:
            raise ValueError(
                f"point has dimension {len(point)}, polynomial has {self.n_vars} variables")
        pt = [_as_fraction(p) for p in point]
        total = Fraction(0)
        for exp, c in self.terms.items():
            v = c
            for x, e in zip(pt, exp):
                if e:
                    v *= x ** e
            total += v
        return total

    def shift(self, point: Sequence) -> "Polynomial":
        """Recenter: return q with q(u) = p(point + u), exact binomial expansion."""
        pt = [_as_fraction(p) for p in point]
        n = self.n_vars
        out = Polynomial.zero(n)
        for exp, c in self.terms.items():
            # expand prod_i (point_i + u_i)^{e_i}
            factors = Polynomial.constant(n, c)
            for i, e in enumerate(exp):
                base = Polynomial(n, {
                    (0,) * n: pt[i],
                    tuple(1 if j == i else 0 for j in range(n)): Fraction(1),
                })
                for _ in range(e):
                    factors = factors * base
            out = out + factors
        return out

    def truncate(self, max_degree: int) -> "Polynomial":
        return Polynomial(self.n_vars, {
            e: c for e, c in self.terms.items() if sum(e) <= max_degree})

    def degree(self) -> int:
        """Total degree; -1 for the zero polynomial."""
        if not self.terms:
            return -1
        return max(sum(e) for e in self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def leading_coefficient(self) -> Fraction:
        if not self.terms:
            return Fraction(0)
        lead = max(self.terms, key=_grlex_key)
        return self.terms[lead]

    # -- plumbing ----------------------------------------------------------

    def _check(self, other: "Polynomial") -> None:
        if self.n_vars != other.n_vars:
            raise ValueError(
                f"variable count mismatch: {self.n_vars} vs {other.n_vars}")

    def __eq__(self, other) -> bool:
        return (isinstance(other, Polynomial)
                and self.n_vars == other.n_vars and self.terms == other.terms)

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.n_vars, frozenset(self.terms.items())))
        return self._hash

    def sorted_terms(self) -> list[tuple[Exponent, Fraction]]:
        return sorted(self.terms.items(), key=lambda t: _grlex_key(t[0]), reverse=True)

    def format(self, variables: Sequence[str]) -> str:
        if not self.terms:
            return "0"
        parts = []
        for exp, c in self.sorted_terms():
            mono = "*".join(
                f"{variables[i]}^{e}" if e > 1 else variables[i]
                for i, e in enumerate(exp) if e > 0)
            if mono:
                body = mono if abs(c) == 1 else f"{abs(c)}*{mono}"
            else:
                body = str(abs(c))
            sign = "-" if c < 0 else "+"
            parts.append((sign, body))
        first_sign, first_body = parts[0]
        text = (first_sign if first_sign == "-" else "") + first_body
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
        return text

    def __repr__(self):
        return f"Polynomial({self.n_vars}, {self.format([f'x{i}' for i in range(self.n_vars)])})"


class VectorField:
    """Vector field sum_i f_i(x) d/dx_i with polynomial components."""

    __slots__ = ("n_vars", "components")

    def __init__(self, components: Sequence[Polynomial]):
        components = tuple(components)
        if not components:
            raise ValueError("vector field needs at least one component")
        n = components[0].n_vars
        for c in components:
            if c.n_vars != n:
                raise ValueError("components disagree on variable count")
        if len(components) != n:
            raise ValueError(
                f"{len(components)} components for {n} variables")
        self.n_vars = n
        self.components = components

    @classmethod
    def zero(cls, n_vars: int) -> "VectorField":
        return cls([Polynomial.zero(n_vars)] * n_vars)

    @classmethod
    def coordinate(cls, n_vars: int, i: int) -> "VectorField":
        """The field d/dx_i."""
        comps = [Polynomial.zero(n_vars) for _ in range(n_vars)]
        comps[i] = Polynomial.constant(n_vars, 1)
        return cls(comps)

    def __add__(self, other: "VectorField") -> "VectorField":
        self._check(other)
        return VectorField([a + b for a, b in zip(self.components, other.components)])

    def __sub__(self, other: "VectorField") -> "VectorField":
        self._check(other)
        return VectorField([a - b for a, b in zip(self.components, other.components)])

    def __neg__(self) -> "VectorField":
        return VectorField([-a for a in self.components])

    def __mul__(self, scalar) -> "VectorField":
        if isinstance(scalar, Polynomial):
            return VectorField([scalar * a for a in self.components])
        c = _as_fraction(scalar)
        return VectorField([a * c for a in self.components])

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return all(c.is_zero() for c in self.components)

    def _check(self, other: "VectorField") -> None:
        if self.n_vars != other.n_vars:
            raise ValueError(
                f"dimension mismatch: {self.n_vars} vs {other.n_vars}")

    def __eq__(self, other) -> bool:
        return (isinstance(other, VectorField)
                and self.components == other.components)

    def __hash__(self):
        return hash(self.components)

    def proportional_to(self, other: "VectorField") -> bool:
        """True if self = q * other for some nonzero rational q (or both zero)."""
        if self.n_vars != other.n_vars:
            return False
        if other.is_zero():
            return self.is_zero()
        if self.is_zero():
            return False
        ratio = None
        for a, b in zip(self.components, other.components):
            if set(a.terms) != set(b.terms):
                return False
            for exp, cb in b.terms.items():
                r = a.terms[exp] / cb
                if ratio is None:
                    ratio = r
                elif r != ratio:
                    return False
        return ratio is not None and ratio != 0

    def primitive(self) -> "VectorField":
        """Normalize by the leading rational so golden output is deterministic.

        Divides by the graded-lex-leading coefficient of the first nonzero
        component, so e.g. 2*x*d/dy normalizes to x*d/dy.
        """
        for c in self.components:
            if not c.is_zero():
                lead = c.leading_coefficient()
                return self * (Fraction(1) / lead)
        return self

    def format(self, variables: Sequence[str]) -> str:
        parts = []
        for i, comp in enumerate(self.components):
            if comp.is_zero():
                continue
            for exp, c in comp.sorted_terms():
                mono = "*".join(
                    f"{variables[j]}^{e}" if e > 1 else variables[j]
                    for j, e in enumerate(exp) if e > 0)
                coeff = "" if abs(c) == 1 else f"{abs(c)}*"
                body = f"{coeff}{mono}{'*' if mono else ''}d/d{variables[i]}"
                parts.append(("-" if c < 0 else "+", body))
        if not parts:
            return "0"
        sign0, body0 = parts[0]
        text = (sign0 if sign0 == "-" else "") + body0
        for sign, body in parts[1:]:
            text += f" {sign} {body}"
        return text

    def __repr__(self):
        return f"VectorField({self.format([f'x{i}' for i in range(self.n_vars)])})"


def lie_bracket(X: VectorField, Y: VectorField) -> VectorField:
    """[X, Y] = X(Y) - Y(X), componentwise, exact.

    [X,Y]_j = sum_i X_i dY_j/dx_i - Y_i dX_j/dx_i.
    """
    X._check(Y)
    n = X.n_vars
    comps = []
    for j in range(n):
        acc = Polynomial.zero(n)
        for i in range(n):
            acc = acc + X.components[i] * Y.components[j].diff(i)
            acc = acc - Y.components[i] * X.components[j].diff(i)
        comps.append(acc)
    return VectorField(comps)


def evaluate(X: VectorField, point: Sequence) -> tuple[Fraction, ...]:
    """Exact value X(p) as a rational vector."""
    if len(point) != X.n_vars:
        raise ValueError(
            f"point dimension {len(point)} != field dimension {X.n_vars}")
    return tuple(c.eval(point) for c in X.components)


# -- expression grammar ------------------------------------------------------
#
#   field := term (('+'|'-') term)*
#   term  := [coeff '*'] [mono '*'] 'd/d' var
#   coeff := int ['/' int]
#   mono  := var['^'int] ('*' var['^'int])*
#
# Whitespace is insignificant.  Variables are declared by the caller.


class FieldParseError(ValueError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class _Scanner:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def startswith(self, s: str) -> bool:
        self.skip_ws()
        return self.text.startswith(s, self.pos)

    def take(self, s: str) -> bool:
        if self.startswith(s):
            self.pos += len(s)
            return True
        return False

    def expect(self, s: str):
        if not self.take(s):
            raise FieldParseError(f"expected {s!r}", self.pos)

    def integer(self) -> int:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if self.pos == start:
            raise FieldParseError("expected integer", start)
        return int(self.text[start:self.pos])

    def identifier(self) -> str:
        self.skip_ws()
        start = self.pos
        while (self.pos < len(self.text)
               and (self.text[self.pos].isalnum() or self.text[self.pos] == "_")):
            self.pos += 1
        if self.pos == start:
            raise FieldParseError("expected identifier", start)
        return self.text[start:self.pos]

    def done(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)


def parse_field(expr: str, variables: Sequence[str]) -> VectorField:
    """Parse a vector-field expression over the declared variables."""
    var_index = {v: i for i, v in enumerate(variables)}
    n = len(variables)
    sc = _Scanner(expr)
    total = VectorField.zero(n)
    first = True
    while not sc.done():
        if first:
            negative = sc.take("-")
            if not negative:
                sc.take("+")
            first = False
        else:
            if sc.take("-"):
                negative = True
            elif sc.take("+"):
                negative = False
            else:
                raise FieldParseError("expected '+' or '-' between terms", sc.pos)
        total = total + _parse_term(sc, var_index, n, negative)
    if total.n_vars != n:
        raise FieldParseError("empty expression", 0)
    return total


def _parse_term(sc: _Scanner, var_index: Mapping[str, int], n: int,
                negative: bool) -> VectorField:
    coeff = Fraction(-1 if negative else 1)
    mono = Polynomial.constant(n, 1)
    while True:
        if sc.startswith("d/d"):
            sc.expect("d/d")
            pos = sc.pos
            name = sc.identifier()
            if name not in var_index:
                raise FieldParseError(f"unknown variable {name!r}", pos)
            direction = var_index[name]
            field = VectorField.coordinate(n, direction) * mono * coeff
            return field
        ch = sc.peek()
        if ch.isdigit():
            num = sc.integer()
            if sc.take("/"):
                den = sc.integer()
                if den == 0:
                    raise FieldParseError("zero denominator", sc.pos)
                coeff *= Fraction(num, den)
            else:
                coeff *= num
            sc.expect("*")
            continue
        if ch.isalpha() or ch == "_":
            pos = sc.pos
            name = sc.identifier()
            if name not in var_index:
                raise FieldParseError(f"unknown variable {name!r}", pos)
            power = 1
            if sc.take("^"):
                power = sc.integer()
            exp = [0] * n
            exp[var_index[name]] = power
            mono = mono * Polynomial.monomial(n, exp)
            sc.expect("*")
            continue
        raise FieldParseError("expected coefficient, monomial, or 'd/d'", sc.pos)
