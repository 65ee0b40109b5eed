"""Graded nilpotent Lie algebras over Q: brackets, BCH, dilations, (co)adjoints.

The BCH product carries the opposite-algebra sign: the quadratic term is
-[a,b]/2 (the group law underlying the osculating exponential coordinates),
so bch(a, b) here equals the classical series evaluated at (b, a).  The
homomorphism tests of the representation layer pin this convention.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from . import linalg
from .freelie import TruncatedFreeLie
from .grading import WeightVector, power, wv_add

__all__ = [
    "NilpotentAlgebra", "AlgebraElement", "Covector",
    "bch", "ad_exp", "coadjoint", "dual_dilate", "validate",
    "bernoulli", "free_nilpotent", "heisenberg",
]


class NilpotentAlgebra:
    """Structure constants c[i][j] -> {k: rational} on a weighted basis.

    Constants are stored for i < j and extended by antisymmetry; the grading
    (all weights nonzero, bracket adds weights) forces nilpotency.
    """

    def __init__(self, weights: Sequence[WeightVector],
                 constants: dict[tuple[int, int], dict[int, Fraction]],
                 labels: Sequence[str] | None = None):
        self.dim = len(weights)
        self.weights = [tuple(w) for w in weights]
        if self.dim and any(not any(w) for w in self.weights):
            raise ValueError("basis weights must be nonzero")
        self.nu = len(self.weights[0]) if self.dim else 1
        self.labels = list(labels) if labels else [f"e{i+1}" for i in range(self.dim)]
        self.constants: dict[tuple[int, int], dict[int, Fraction]] = {}
        for (i, j), row in constants.items():
            if not (0 <= i < j < self.dim):
                raise ValueError(f"constants must be indexed i<j, got ({i},{j})")
            clean = {k: Fraction(c) for k, c in row.items() if c != 0}
            if clean:
                self.constants[(i, j)] = clean
        self._step: int | None = None

    def zero(self) -> "AlgebraElement":
        return AlgebraElement(self, [Fraction(0)] * self.dim)

    def element(self, coords) -> "AlgebraElement":
        return AlgebraElement(self, [Fraction(c) for c in coords])

    def basis_element(self, i: int) -> "AlgebraElement":
        coords = [Fraction(0)] * self.dim
        coords[i] = Fraction(1)
        return AlgebraElement(self, coords)

    def covector(self, coords) -> "Covector":
        return Covector(self, [Fraction(c) for c in coords])

    def dual_basis_element(self, i: int) -> "Covector":
        coords = [Fraction(0)] * self.dim
        coords[i] = Fraction(1)
        return Covector(self, coords)

    def bracket_basis(self, i: int, j: int) -> dict[int, Fraction]:
        if i == j:
            return {}
        if i < j:
            return dict(self.constants.get((i, j), {}))
        return {k: -c for k, c in self.constants.get((j, i), {}).items()}

    def bracket_coords(self, a: Sequence[Fraction], b: Sequence[Fraction]) -> list[Fraction]:
        out = [Fraction(0)] * self.dim
        for (i, j), row in self.constants.items():
            factor = a[i] * b[j] - a[j] * b[i]
            if factor:
                for k, c in row.items():
                    out[k] += factor * c
        return out

    def ad_matrix(self, a: Sequence[Fraction]) -> list[list[Fraction]]:
        """Matrix of ad_a: v -> [a, v]."""
        cols = []
        for j in range(self.dim):
            ej = [Fraction(0)] * self.dim
            ej[j] = Fraction(1)
            cols.append(self.bracket_coords(list(a), ej))
        return [[cols[j][i] for j in range(self.dim)] for i in range(self.dim)]

    def step(self) -> int:
        """Nilpotency step via the lower central series."""
        if self._step is not None:
            return self._step
        current = linalg.identity(self.dim)  # rows span g
        step = 0
        while current:
            step += 1
            nxt = []
            for i in range(self.dim):
                ei = [Fraction(0)] * self.dim
                ei[i] = Fraction(1)
                for v in current:
                    w = self.bracket_coords(ei, v)
                    if any(w):
                        nxt.append(w)
            current = linalg.row_space_basis(nxt) if nxt else []
        self._step = step
        return step

    def grade_indices(self, k: WeightVector) -> list[int]:
        return [i for i, w in enumerate(self.weights) if w == k]

    def axis_block(self, axis: int) -> list[int]:
        """Indices in grades supported on the given axis only."""
        out = []
        for i, w in enumerate(self.weights):
            support = [a for a, x in enumerate(w) if x > 0]
            if support == [axis]:
                out.append(i)
        return out

    def is_weakly_commutative_grading(self) -> bool:
        """All basis weights are pure-axis."""
        return all(sum(1 for x in w if x > 0) == 1 for w in self.weights)

    # -- text dump/load ------------------------------------------------------

    def dump(self) -> str:
        lines = [f"dim {self.dim}", f"nu {self.nu}"]
        for i, w in enumerate(self.weights):
            lines.append(f"weight {i} " + " ".join(str(x) for x in w))
        for (i, j) in sorted(self.constants):
            for k in sorted(self.constants[(i, j)]):
                c = self.constants[(i, j)][k]
                lines.append(f"{i} {j} {k} {c}")
        return "\n".join(lines) + "\n"

    @classmethod
    def load(cls, text: str) -> "NilpotentAlgebra":
        dim = nu = None
        weights: dict[int, WeightVector] = {}
        constants: dict[tuple[int, int], dict[int, Fraction]] = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if parts[0] == "dim":
                dim = int(parts[1])
            elif parts[0] == "nu":
                nu = int(parts[1])
            elif parts[0] == "weight":
                weights[int(parts[1])] = tuple(int(x) for x in parts[2:])
            else:
                if len(parts) != 4:
                    raise ValueError(f"line {lineno}: expected 'i j k c'")
                i, j, k = int(parts[0]), int(parts[1]), int(parts[2])
                constants.setdefault((i, j), {})[k] = Fraction(parts[3])
        if dim is None or nu is None:
            raise ValueError("missing dim/nu header")
        if set(weights) != set(range(dim)):
            raise ValueError("incomplete weight table")
        if any(len(w) != nu for w in weights.values()):
            raise ValueError("weight length disagrees with nu")
        return cls([weights[i] for i in range(dim)], constants)

    def __repr__(self):
        return f"NilpotentAlgebra(dim={self.dim}, nu={self.nu})"


@dataclass(frozen=True)
class AlgebraElement:
    algebra: NilpotentAlgebra
    coords: list[Fraction]

    def __post_init__(self):
        if len(self.coords) != self.algebra.dim:
            raise ValueError("coordinate length mismatch")

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check(other)
        return AlgebraElement(self.algebra,
                              [a + b for a, b in zip(self.coords, other.coords)])

    def __sub__(self, other: "AlgebraElement") -> "AlgebraElement":
        self._check(other)
        return AlgebraElement(self.algebra,
                              [a - b for a, b in zip(self.coords, other.coords)])

    def __neg__(self) -> "AlgebraElement":
        return AlgebraElement(self.algebra, [-a for a in self.coords])

    def __mul__(self, scalar) -> "AlgebraElement":
        c = Fraction(scalar)
        return AlgebraElement(self.algebra, [a * c for a in self.coords])

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not any(self.coords)

    def _check(self, other):
        if self.algebra is not other.algebra:
            raise ValueError("elements of different algebras")

    def __eq__(self, other):
        return (isinstance(other, AlgebraElement)
                and self.algebra is other.algebra and self.coords == other.coords)


@dataclass(frozen=True)
class Covector:
    algebra: NilpotentAlgebra
    coords: list[Fraction]

    def __post_init__(self):
        if len(self.coords) != self.algebra.dim:
            raise ValueError("coordinate length mismatch")

    def pair(self, v: AlgebraElement | Sequence[Fraction]) -> Fraction:
        coords = v.coords if isinstance(v, AlgebraElement) else v
        return sum((a * b for a, b in zip(self.coords, coords)), Fraction(0))

    def __add__(self, other: "Covector") -> "Covector":
        return Covector(self.algebra,
                        [a + b for a, b in zip(self.coords, other.coords)])

    def __neg__(self) -> "Covector":
        return Covector(self.algebra, [-a for a in self.coords])

    def __mul__(self, scalar) -> "Covector":
        c = Fraction(scalar)
        return Covector(self.algebra, [a * c for a in self.coords])

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return not any(self.coords)


def bracket(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    a._check(b)
    return AlgebraElement(a.algebra, a.algebra.bracket_coords(a.coords, b.coords))


# -- BCH ----------------------------------------------------------------------

def bernoulli(n: int) -> Fraction:
    """Bernoulli numbers (B1 = -1/2), exact."""
    out = [Fraction(0)] * (n + 1)
    for m in range(n + 1):
        total = Fraction(0)
        for j in range(m):
            total += Fraction(_binom(m + 1, j)) * out[j]
        out[m] = (Fraction(1) if m == 0 else -total / Fraction(m + 1))
    return out[n]


def _binom(n: int, k: int) -> int:
    import math
    return math.comb(n, k)


def bch_classical_terms(bracket_fn: Callable, add_fn: Callable, scale_fn: Callable,
                        a, b, max_order: int) -> list:
    """Homogeneous terms c_1..c_max of log(exp(a) exp(b)).

    Varadarajan's recursion: c_1 = a + b and

      (n+1) c_{n+1} = 1/2 [a - b, c_n]
        + sum_{p >= 1, 2p <= n} (B_{2p}/(2p)!) sum_{k_1+..+k_{2p} = n}
              [c_{k_1}, [..., [c_{k_{2p}}, a + b] ...]].
    """
    a_plus_b = add_fn(a, b)
    a_minus_b = add_fn(a, scale_fn(b, Fraction(-1)))
    terms = [a_plus_b]
    for n in range(1, max_order):
        acc = scale_fn(bracket_fn(a_minus_b, terms[n - 1]), Fraction(1, 2))
        for p in range(1, n // 2 + 1):
            coeff = bernoulli(2 * p) / Fraction(_factorial(2 * p))
            for ks in _compositions(n, 2 * p):
                nested = a_plus_b
                for k in reversed(ks):
                    nested = bracket_fn(terms[k - 1], nested)
                acc = add_fn(acc, scale_fn(nested, coeff))
        terms.append(scale_fn(acc, Fraction(1, n + 1)))
    return terms


def _factorial(n: int) -> int:
    import math
    return math.factorial(n)


def _compositions(total: int, parts: int):
    if parts == 1:
        if total >= 1:
            yield (total,)
        return
    for first in range(1, total - parts + 2):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def bch(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    """BCH product with the opposite-algebra sign: a + b - [a,b]/2 + ...

    Equals the classical series at (b, a); the series terminates at the
    nilpotency step.
    """
    a._check(b)
    alg = a.algebra
    step = alg.step()
    terms = bch_classical_terms(
        bracket, lambda u, v: u + v, lambda u, c: u * c, b, a, max(step, 1))
    total = alg.zero()
    for t in terms:
        total = total + t
    return total


def ad_exp(a: AlgebraElement) -> list[list[Fraction]]:
    """exp(ad_a) as an exact unipotent matrix (finite sum by nilpotency)."""
    alg = a.algebra
    n = alg.dim
    ad = alg.ad_matrix(a.coords)
    out = linalg.identity(n)
    term = linalg.identity(n)
    k = 1
    while True:
        term = _matmul(ad, term)
        if not any(any(row) for row in term):
            break
        inv_fact = Fraction(1, _factorial(k))
        for i in range(n):
            for j in range(n):
                out[i][j] += inv_fact * term[i][j]
        k += 1
        if k > alg.step() + 1:
            break
    return out


def _matmul(a, b):
    n, m, p = len(a), len(b), len(b[0]) if b else 0
    return [[sum((a[i][k] * b[k][j] for k in range(m)), Fraction(0))
             for j in range(p)] for i in range(n)]


def coadjoint(g: AlgebraElement, xi: Covector) -> Covector:
    """Ad*(exp g) xi = xi o Ad(exp g)^{-1} = xi o exp(-ad_g); fixes the center."""
    if g.algebra is not xi.algebra:
        raise ValueError("element and covector live on different algebras")
    m = ad_exp(-g)
    coords = [sum((xi.coords[i] * m[i][j] for i in range(g.algebra.dim)), Fraction(0))
              for j in range(g.algebra.dim)]
    return Covector(xi.algebra, coords)


def dual_dilate(xi: Covector, lam: Sequence[Fraction]) -> Covector:
    """Dilation on the dual: the grade-k dual coordinate scales by lam^k."""
    lam = tuple(Fraction(x) for x in lam)
    if any(x < 0 for x in lam):
        raise ValueError("dilation parameters must be >= 0")
    return Covector(xi.algebra, [c * power(lam, w)
                                 for c, w in zip(xi.coords, xi.algebra.weights)])


def validate(alg: NilpotentAlgebra) -> dict:
    """Check grading compatibility and the Jacobi identity exactly."""
    violations = []
    for (i, j), row in alg.constants.items():
        target = wv_add(alg.weights[i], alg.weights[j])
        for k, c in row.items():
            if alg.weights[k] != target:
                violations.append({
                    "kind": "grading", "indices": (i, j, k),
                    "detail": f"weight {alg.weights[k]} != {target}"})
    for i, j, k in itertools.combinations(range(alg.dim), 3):
        ei, ej, ek = (alg.basis_element(t) for t in (i, j, k))
        total = (bracket(ei, bracket(ej, ek)) + bracket(ej, bracket(ek, ei))
                 + bracket(ek, bracket(ei, ej)))
        if not total.is_zero():
            violations.append({"kind": "jacobi", "indices": (i, j, k),
                               "detail": [str(c) for c in total.coords]})
    return {"ok": not violations, "violations": violations}


# -- constructions -------------------------------------------------------------

def free_nilpotent(letter_weights: Sequence[WeightVector],
                   cap: WeightVector) -> tuple[NilpotentAlgebra, TruncatedFreeLie]:
    """Free Lie algebra on weighted letters truncated beyond the cap."""
    free = TruncatedFreeLie(letter_weights, cap)
    constants: dict[tuple[int, int], dict[int, Fraction]] = {}
    for i in range(free.dim):
        for j in range(i + 1, free.dim):
            row = free.bracket_indices(i, j)
            if row:
                constants[(i, j)] = row
    weights = [free.weight_of_index(i) for i in range(free.dim)]
    labels = ["".join(chr(ord("a") + letter) for letter in w)
              for w in free.basis_words]
    return NilpotentAlgebra(weights, constants, labels), free


def heisenberg() -> NilpotentAlgebra:
    """3-dim Heisenberg with [X, Y] = Z, weights 1, 1, 2."""
    return NilpotentAlgebra([(1,), (1,), (2,)], {(0, 1): {2: Fraction(1)}},
                            labels=["X", "Y", "Z"])
