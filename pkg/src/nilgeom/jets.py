"""Jet-truncated membership test for modules of polynomial vector fields.

Decides questions of the shape

    X  =  sum_i g_i Y_i  +  sum_j (c_j + h_j) Z_j        near a point x,

with g_i arbitrary smooth coefficients, h_j smooth coefficients vanishing at
x, and c_j rational constants, by truncating everything to Taylor jets of
order J at x and solving the resulting exact linear system.

Soundness: a genuine smooth decomposition truncates to a solution at every
order, so infeasibility at any order certifies non-membership, and the
order-J constraint set only shrinks as J grows.  Feasibility at order J is
evidence, not proof; callers compare consecutive orders and surface
INCONCLUSIVE when the answer has not stabilized.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

from . import linalg
from .polyfield import Polynomial, VectorField

__all__ = ["MEMBER", "NOT_MEMBER", "INCONCLUSIVE", "JetSystem", "MembershipResult"]

MEMBER = "MEMBER"
NOT_MEMBER = "NOT_MEMBER"
INCONCLUSIVE = "INCONCLUSIVE"


def _monomials(n_vars: int, max_deg: int) -> list[tuple[int, ...]]:
    out = []
    for deg in range(max_deg + 1):
        out.extend(_monomials_of_degree(n_vars, deg))
    return out


def _monomials_of_degree(n_vars: int, deg: int) -> list[tuple[int, ...]]:
    if n_vars == 1:
        return [(deg,)]
    out = []
    for first in range(deg, -1, -1):
        for rest in _monomials_of_degree(n_vars - 1, deg - first):
            out.append((first,) + rest)
    return out


class MembershipResult:
    def __init__(self, status: str, jet_order: int, certificate_order: int | None = None,
                 constants: list[Fraction] | None = None,
                 constants_nullspace: list[list[Fraction]] | None = None):
        self.status = status
        self.jet_order = jet_order
        self.certificate_order = certificate_order
        self.constants = constants
        self.constants_nullspace = constants_nullspace

    def __repr__(self):
        return f"MembershipResult({self.status}, J={self.jet_order})"


class JetSystem:
    """Linear jet system at a fixed point for a fixed generator configuration.

    free_gens get unconstrained coefficient jets, vanishing_gens get jets with
    zero constant term, constant_gens get a single rational unknown each.
    """

    def __init__(self, free_gens: Sequence[VectorField],
                 vanishing_gens: Sequence[VectorField],
                 constant_gens: Sequence[VectorField],
                 point: Sequence[Fraction], jet_order: int):
        if jet_order < 0:
            raise ValueError("jet order must be >= 0")
        gens = list(free_gens) + list(vanishing_gens) + list(constant_gens)
        if not gens:
            raise ValueError("no generators")
        self.n = gens[0].n_vars
        self.point = tuple(Fraction(p) for p in point)
        if len(self.point) != self.n:
            raise ValueError("point dimension mismatch")
        self.jet_order = jet_order
        self.free_gens = list(free_gens)
        self.vanishing_gens = list(vanishing_gens)
        self.constant_gens = list(constant_gens)
        self._monos = _monomials(self.n, jet_order)
        self._mono_index = {m: i for i, m in enumerate(self._monos)}
        self._build()

    def _shifted(self, f: VectorField) -> list[Polynomial]:
        return [c.shift(self.point).truncate(self.jet_order) for c in f.components]

    def _build(self) -> None:
        n, monos = self.n, self._monos
        n_eq = n * len(monos)

        columns: list[list[Fraction]] = []
        self.n_helper_cols = 0
        for gen, vanishing in ([(g, False) for g in self.free_gens]
                               + [(g, True) for g in self.vanishing_gens]):
            shifted = self._shifted(gen)
            for beta in monos:
                if vanishing and sum(beta) == 0:
                    continue
                col = [Fraction(0)] * n_eq
                for comp in range(n):
                    for alpha_minus_beta, coeff in shifted[comp].terms.items():
                        alpha = tuple(a + b for a, b in zip(alpha_minus_beta, beta))
                        idx = self._mono_index.get(alpha)
                        if idx is not None:
                            col[comp * len(monos) + idx] = coeff
                columns.append(col)
                self.n_helper_cols += 1
        for gen in self.constant_gens:
            shifted = self._shifted(gen)
            col = [Fraction(0)] * n_eq
            for comp in range(n):
                for alpha, coeff in shifted[comp].terms.items():
                    idx = self._mono_index.get(alpha)
                    if idx is not None:
                        col[comp * len(monos) + idx] = coeff
            columns.append(col)

        self.n_const_cols = len(self.constant_gens)
        # rows of [W | C]
        self.matrix = [[columns[c][r] for c in range(len(columns))]
                       for r in range(n_eq)]

    def _rhs(self, target: VectorField) -> list[Fraction]:
        if target.n_vars != self.n:
            raise ValueError("target dimension mismatch")
        shifted = self._shifted(target)
        monos = self._monos
        rhs = [Fraction(0)] * (self.n * len(monos))
        for comp in range(self.n):
            for alpha, coeff in shifted[comp].terms.items():
                idx = self._mono_index.get(alpha)
                if idx is not None:
                    rhs[comp * len(monos) + idx] = coeff
        return rhs

    def solve(self, target: VectorField):
        """Returns (feasible, c_particular, c_nullspace_basis).

        c_* are over the constant_gens block; with no constant gens they are
        empty lists and feasibility is plain membership.
        """
        aug = [row + [b] for row, b in zip(self.matrix, self._rhs(target))]
        reduced, pivots = linalg.rref(aug)
        w_cols = self.n_helper_cols
        c_cols = self.n_const_cols
        rhs_col = w_cols + c_cols

        if rhs_col in pivots:
            return False, None, None

        # rows with pivot inside the constants block induce constraints on c
        c_rows = [r for r, p in enumerate(pivots) if w_cols <= p < rhs_col]
        cmat = [[reduced[r][w_cols + j] for j in range(c_cols)] for r in c_rows]
        cvec = [reduced[r][rhs_col] for r in c_rows]
        if not c_rows:
            particular = [Fraction(0)] * c_cols
            null = linalg.identity(c_cols) if c_cols else []
            return True, particular, null
        particular = linalg.solve(cmat, cvec)
        if particular is None:
            return False, None, None
        null = linalg.nullspace(cmat)
        return True, particular, null


def membership(target: VectorField, free_gens: Sequence[VectorField],
               vanishing_gens: Sequence[VectorField], point,
               jet_order: int) -> MembershipResult:
    """Is target in  module(free_gens) + {vanishing coeffs}*vanishing_gens  at point?

    The order-J constraints contain the order-J' ones for J' < J, so a single
    solve at the requested order decides feasibility there; on infeasibility
    the minimal certifying order is located by walking down (each lower-order
    system is a subsystem, hence cheaper).
    """
    system = JetSystem(free_gens, vanishing_gens, [], point, jet_order)
    feasible, _, _ = system.solve(target)
    if feasible:
        return MembershipResult(MEMBER, jet_order)
    certificate = jet_order
    for J in range(jet_order):
        sub = JetSystem(free_gens, vanishing_gens, [], point, J)
        ok, _, _ = sub.solve(target)
        if not ok:
            certificate = J
            break
    return MembershipResult(NOT_MEMBER, jet_order, certificate_order=certificate)
