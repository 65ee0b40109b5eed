"""Kirillov orbit method: polarizations and induced representations.

Polarizations come from the Vergne construction along a flag of ideals; the
default flag takes suffix spans of the basis ordered by (total weight, index),
which the grading makes ideals.  The induced representation is realized on
polynomial functions of the transversal exponential coordinates: with the
group product written multiplicatively, translation by exp(s X) factors as

    exp(s X) . g(t) = g(t'(s, t)) . exp(h(s, t)),      h in the polarization,

and the derived operator is  dpi(X) = sum_j (d/ds t'_j)|_0 d/dt_j
+ i xi((d/ds h)|_0).  The factorization is solved exactly in Q[s, t] by a
unipotent fixed-point iteration; the homomorphism and skew-adjointness tests
pin the sign conventions.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import linalg
from .diffop import CPoly, DiffOp, compose
from .grading import power
from .nilpotent import (AlgebraElement, Covector, NilpotentAlgebra,
                        bch_classical_terms, dual_dilate)
from .polyfield import Polynomial

__all__ = ["Polarization", "Representation", "bilinear_form",
           "vergne_polarization", "induced_rep", "rep_of_covector",
           "rep_dilate", "default_flag_order"]


def bilinear_form(algebra: NilpotentAlgebra, xi: Covector) -> list[list[Fraction]]:
    """B_xi(v, w) = xi([v, w]) on the basis, exact and antisymmetric."""
    n = algebra.dim
    B = [[Fraction(0)] * n for _ in range(n)]
    for (i, j), row in algebra.constants.items():
        val = sum((xi.coords[k] * c for k, c in row.items()), Fraction(0))
        B[i][j] = val
        B[j][i] = -val
    return B


def default_flag_order(algebra: NilpotentAlgebra) -> list[int]:
    """Flag addition order: deepest total weight first, later index first.

    Suffix spans of the (weight, index)-sorted basis are ideals because
    brackets strictly raise total weight; the flag adds them inner-to-outer.
    """
    natural = sorted(range(algebra.dim),
                     key=lambda i: (sum(algebra.weights[i]), i))
    return natural[::-1]


@dataclass
class Polarization:
    algebra: NilpotentAlgebra
    xi: Covector
    basis: list[list[Fraction]]      # columns spanning the subalgebra
    flag_order: list[int]

    @property
    def dim(self) -> int:
        return len(self.basis)

    @property
    def codim(self) -> int:
        return self.algebra.dim - self.dim


def _restricted_radical(B, prefix_vectors):
    """Vectors of span(prefix) pairing to zero with the whole prefix."""
    p = prefix_vectors  # list of coordinate vectors
    if not p:
        return []
    m = len(p)
    n = len(p[0])
    # (P^T B P)_{ab} = B(p_a, p_b)
    rows = []
    for a in range(m):
        Bp = [sum((B[i][j] * p[a][i] for i in range(n)), Fraction(0))
              for j in range(n)]
        rows.append([sum((Bp[j] * p[b][j] for j in range(n)), Fraction(0))
                     for b in range(m)])
    null = linalg.nullspace(rows)
    out = []
    for v in null:
        out.append([sum((v[a] * p[a][i] for a in range(m)), Fraction(0))
                    for i in range(n)])
    return out


def vergne_polarization(algebra: NilpotentAlgebra, xi: Covector,
                        flag_order: Sequence[int] | None = None) -> Polarization:
    """h = sum of radicals of B_xi restricted along a full flag of ideals."""
    if flag_order is None:
        flag_order = default_flag_order(algebra)
    flag_order = list(flag_order)
    if sorted(flag_order) != list(range(algebra.dim)):
        raise ValueError("flag order must be a permutation of the basis indices")
    _check_ideal_flag(algebra, flag_order)
    B = bilinear_form(algebra, xi)

    accumulated: list[list[Fraction]] = []
    prefix: list[list[Fraction]] = []
    for idx in flag_order:
        unit = [Fraction(int(t == idx)) for t in range(algebra.dim)]
        prefix.append(unit)
        accumulated.extend(_restricted_radical(B, prefix))
    h_basis = linalg.row_space_basis(accumulated)

    pol = Polarization(algebra, xi, h_basis, flag_order)
    _verify_polarization(pol, B)
    return pol


def _check_ideal_flag(algebra: NilpotentAlgebra, flag_order: Sequence[int]) -> None:
    span: list[list[Fraction]] = []
    for idx in flag_order:
        unit = [Fraction(int(t == idx)) for t in range(algebra.dim)]
        span.append(unit)
        base_rank = linalg.rank(span)
        for i in range(algebra.dim):
            ei = [Fraction(int(t == i)) for t in range(algebra.dim)]
            for v in span:
                w = algebra.bracket_coords(ei, v)
                if any(w) and linalg.rank(span + [w]) > base_rank:
                    raise ValueError(
                        f"flag prefix through index {idx} is not an ideal")


def _verify_polarization(pol: Polarization, B) -> None:
    alg = pol.algebra
    n = alg.dim
    for a in pol.basis:
        for b in pol.basis:
            val = sum((a[i] * B[i][j] * b[j] for i in range(n) for j in range(n)),
                      Fraction(0))
            if val != 0:
                raise AssertionError("polarization is not isotropic")
    rank_h = linalg.rank(pol.basis)
    for a in pol.basis:
        for b in pol.basis:
            w = alg.bracket_coords(a, b)
            if any(w) and linalg.rank(pol.basis + [w]) > rank_h:
                raise AssertionError("polarization is not a subalgebra")
    ker_b = linalg.nullspace(B) if any(any(row) for row in B) else \
        linalg.identity(n)
    expected_codim = (n - len(ker_b)) // 2
    if pol.codim != expected_codim:
        raise AssertionError(
            f"polarization codim {pol.codim} != codim(ker B)/2 = {expected_codim}")


@dataclass
class Representation:
    algebra: NilpotentAlgebra
    xi: Covector
    polarization: Polarization
    malcev: list[list[Fraction]]     # transversal vectors, product order
    dpi: list[DiffOp]                # one operator per algebra basis element

    @property
    def k(self) -> int:
        return len(self.malcev)

    def dpi_element(self, v: AlgebraElement | Sequence[Fraction]) -> DiffOp:
        coords = v.coords if isinstance(v, AlgebraElement) else v
        out = DiffOp.zero(max(self.k, 0))
        for c, op in zip(coords, self.dpi):
            if c:
                out = out + op * Fraction(c)
        return out

    def table(self, variables: Sequence[str] | None = None) -> list[tuple[str, str]]:
        return [(self.algebra.labels[i], self.dpi[i].format(variables))
                for i in range(self.algebra.dim)]


# -- polynomial-coefficient algebra elements -----------------------------------

def _tmul(a: Polynomial, b: Polynomial) -> Polynomial:
    """Product in Q[s, t_1..t_k] truncated past the linear s term."""
    prod = a * b
    return Polynomial(prod.n_vars,
                      {e: c for e, c in prod.terms.items() if e[0] <= 1})


def _pbracket(algebra: NilpotentAlgebra, u: list[Polynomial],
              v: list[Polynomial]) -> list[Polynomial]:
    n_vars = u[0].n_vars
    out = [Polynomial.zero(n_vars) for _ in range(algebra.dim)]
    for (i, j), row in algebra.constants.items():
        factor = _tmul(u[i], v[j]) - _tmul(u[j], v[i])
        if factor.is_zero():
            continue
        for k, c in row.items():
            out[k] = out[k] + factor * c
    return out


def _padd(u, v):
    return [a + b for a, b in zip(u, v)]


def _pscale(u, c):
    return [a * c for a in u]


def _pbch(algebra: NilpotentAlgebra, u, v):
    """BCH with the opposite-algebra sign: classical series at (v, u)."""
    step = algebra.step()
    terms = bch_classical_terms(
        lambda a, b: _pbracket(algebra, a, b), _padd, _pscale, v, u,
        max(step, 1))
    total = terms[0]
    for t in terms[1:]:
        total = _padd(total, t)
    return total


def induced_rep(algebra: NilpotentAlgebra, xi: Covector,
                pol: Polarization) -> Representation:
    """Realize the induced representation in transversal exponential coordinates.

    The transversal is the complementary basis slice of the polarization in
    the flag coordinate order; g(t) multiplies the slice in ascending
    (weight, index) order with the polarization factor innermost.
    """
    n = algebra.dim
    flag_order = pol.flag_order
    # echelonize h in flag coordinates to find the complementary slice
    h_perm = [[row[flag_order[pos]] for pos in range(n)] for row in pol.basis]
    _, pivots = linalg.rref(h_perm)
    transversal_positions = [p for p in range(n) if p not in set(pivots)]
    transversal_indices = [flag_order[p] for p in transversal_positions]
    # product order: ascending (weight, index), polarization innermost
    transversal_indices.sort(key=lambda i: (sum(algebra.weights[i]), i))
    k = len(transversal_indices)
    if k != pol.codim:
        raise AssertionError("transversal slice does not complement the polarization")
    malcev = [[Fraction(int(t == i)) for t in range(n)] for i in transversal_indices]

    n_vars = 1 + k  # s, t_1..t_k
    zero = Polynomial.zero(n_vars)

    def coords_to_poly(vec, scale: Polynomial) -> list[Polynomial]:
        return [scale * c if c else zero for c in vec]

    # change of basis: columns = malcev vectors then h basis
    cols = [list(w) for w in malcev] + [list(h) for h in pol.basis]
    M = [[cols[c][r] for c in range(n)] for r in range(n)]
    Minv = _invert(M)

    # g(t) = exp(t_1 w_1) ... exp(t_k w_k)
    g_t: list[Polynomial] | None = None
    for j in range(k - 1, -1, -1):
        tj = Polynomial.variable(n_vars, 1 + j)
        factor = coords_to_poly(malcev[j], tj)
        g_t = factor if g_t is None else _pbch(algebra, factor, g_t)
    if g_t is None:
        g_t = [zero] * n

    s_var = Polynomial.variable(n_vars, 0)
    dpi: list[DiffOp] = []
    for basis_idx in range(n):
        u = _pbch(algebra, coords_to_poly(
            [Fraction(int(t == basis_idx)) for t in range(n)], s_var), g_t)
        t_polys, h_polys = _factorize(algebra, u, malcev, pol.basis, Minv,
                                      n_vars)
        op = DiffOp.zero(k)
        # first-order part: (d/ds t'_j)|_{s=0} d/dt_j
        for j in range(k):
            pj = _s_linear_part(t_polys[j], k)
            if not pj.is_zero():
                op = op + compose(DiffOp.multiplication(CPoly.real(pj)),
                                  DiffOp.derivative(k, j))
        # zero-order part: i xi((d/ds h)|_{s=0})
        q = Polynomial.zero(k)
        for h_vec, h_poly in zip(pol.basis, h_polys):
            xi_val = xi.pair(h_vec)
            if xi_val:
                q = q + _s_linear_part(h_poly, k) * xi_val
        if not q.is_zero():
            op = op + DiffOp.multiplication(CPoly.imag(q))
        dpi.append(op)
    return Representation(algebra, xi, pol, malcev, dpi)


def _s_linear_part(p: Polynomial, k: int) -> Polynomial:
    """Coefficient of s^1 as a polynomial in t_1..t_k."""
    out: dict[tuple, Fraction] = {}
    for exp, c in p.terms.items():
        if exp[0] == 1:
            out[exp[1:]] = out.get(exp[1:], Fraction(0)) + c
    return Polynomial(k, out)


def _factorize(algebra, u, malcev, h_basis, Minv, n_vars):
    """Solve u = BCH(t'_1 w_1, BCH(..., BCH(t'_k w_k, h)...)) exactly."""
    n = algebra.dim
    k = len(malcev)
    zero = Polynomial.zero(n_vars)

    def decompose(vec):
        # coordinates in the (malcev | h) basis via the exact inverse
        coords = []
        for r in range(n):
            acc = zero
            for c in range(n):
                if Minv[r][c]:
                    acc = acc + vec[c] * Minv[r][c]
            coords.append(acc)
        return coords[:k], coords[k:]

    def theta(t_polys, h_polys):
        acc = [zero] * n
        for h_vec, h_poly in zip(h_basis, h_polys):
            if not h_poly.is_zero():
                acc = _padd(acc, [h_poly * c if c else zero for c in h_vec])
        for j in range(k - 1, -1, -1):
            factor = [t_polys[j] * c if c else zero for c in malcev[j]]
            acc = _pbch(algebra, factor, acc)
        return acc

    t_polys, h_polys = decompose(u)
    for _ in range(algebra.step() + 2):
        err = [a - b for a, b in zip(u, theta(t_polys, h_polys))]
        if all(e.is_zero() for e in err):
            return t_polys, h_polys
        dt, dh = decompose(err)
        t_polys = [a + b for a, b in zip(t_polys, dt)]
        h_polys = [a + b for a, b in zip(h_polys, dh)]
    raise AssertionError("transversal factorization did not terminate")


def _invert(m):
    n = len(m)
    aug = [list(row) + [Fraction(int(i == j)) for j in range(n)]
           for i, row in enumerate(m)]
    reduced, pivots = linalg.rref(aug)
    if pivots != list(range(n)):
        raise ValueError("matrix is singular")
    return [row[n:] for row in reduced]


def rep_of_covector(algebra: NilpotentAlgebra, eta: Covector) -> Representation:
    """Vergne polarization along the default flag, then the induced realization."""
    pol = vergne_polarization(algebra, eta)
    return induced_rep(algebra, eta, pol)


def rep_dilate(rep: Representation, lam: Sequence[Fraction]) -> Representation:
    """Precompose with the dilation: dpi'(X) = dpi(alpha_lam X).

    On basis elements this scales dpi_i by lam^{w(i)}; it matches
    rep_of_covector(dual_dilate(xi, lam)) up to the realization's shape.
    """
    lam = tuple(Fraction(x) for x in lam)
    if any(x <= 0 for x in lam):
        raise ValueError("rep_dilate needs strictly positive dilation parameters")
    alg = rep.algebra
    dpi = [rep.dpi[i] * power(lam, alg.weights[i]) for i in range(alg.dim)]
    return Representation(alg, dual_dilate(rep.xi, lam), rep.polarization,
                          rep.malcev, dpi)
