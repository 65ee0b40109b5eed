"""Osculating nilpotent Lie algebras at a point.

The weight-k part of the quotient is spanned by classes of the generators
first appearing at weight k; relations among those classes (membership of a
rational combination in the lower levels plus vanishing-coefficient span) are
decided by the jet solver.  Classes of lower-weight generators die
automatically, and a grade collapses outright when a pure-axis depth weight
sits strictly below it, since that level is already the full module.

Relation kernels are computed at two consecutive jet orders; disagreement is
surfaced as INCONCLUSIVE rather than resolved silently.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from . import jets, linalg
from .grading import (GradedBasis, GradedStructure, WeightVector, wv_add,
                      wv_less)
from .nilpotent import AlgebraElement, NilpotentAlgebra
from .polyfield import VectorField, lie_bracket

__all__ = ["OsculatingAlgebra", "osculating_algebra", "membership",
           "InconclusiveJets", "NotExpressible"]


class InconclusiveJets(Exception):
    """Raised when the jet order is too small for a stable answer."""


class NotExpressible(Exception):
    """Raised when a field is not expressible over the level's generators."""


def membership(X: VectorField, k: WeightVector, x: Sequence[Fraction],
               structure: GradedStructure, jet_order: int) -> jets.MembershipResult:
    """Does the class of X at weight k vanish at x?

    Poses X = sum g_i Y_i + sum h_j Z_j with Y_i generating the levels
    strictly below k, Z_j generating the level at k, and h_j(x) = 0.
    """
    if jet_order < 1:
        raise ValueError("jet_order must be >= 1")
    free = structure.prec_generators(k)
    vanishing = structure.generators(k)
    if structure.is_full(k) and any(wv_less(_axis(structure, i), k)
                                    for i in range(structure.nu)):
        # a full pure-axis level sits strictly below k, so everything is a member
        return jets.MembershipResult(jets.MEMBER, jet_order)
    if not free and not vanishing:
        status = jets.MEMBER if X.is_zero() else jets.NOT_MEMBER
        return jets.MembershipResult(status, jet_order, certificate_order=0)
    return jets.membership(X, free, vanishing, x, jet_order)


def _axis(structure: GradedStructure, i: int) -> WeightVector:
    return tuple(structure.depth[i] if j == i else 0 for j in range(structure.nu))


@dataclass
class _Grade:
    weight: WeightVector
    candidates: list[VectorField]
    kernel: list[list[Fraction]]
    pivots: list[int]
    offset: int
    system: jets.JetSystem | None


class OsculatingAlgebra:
    """Quotient algebra at a point with its evaluation map on a graded basis."""

    def __init__(self, structure: GradedStructure, basis: GradedBasis,
                 point: Sequence[Fraction], jet_order: int):
        self.structure = structure
        self.basis = basis
        self.point = tuple(Fraction(p) for p in point)
        self.jet_order = int(jet_order)
        self._grades: dict[WeightVector, _Grade] = {}
        self._build_grades()
        self._build_algebra()
        self._build_quotient_map()

    # -- construction -------------------------------------------------------

    def _grade_is_pruned(self, k: WeightVector) -> bool:
        # a full pure-axis level strictly below k forces the quotient to zero
        return any(wv_less(_axis(self.structure, i), k)
                   for i in range(self.structure.nu))

    def _build_grades(self) -> None:
        s = self.structure
        offset = 0
        for k in s.box_weights():
            cands = s.grade_candidates(k)
            if not cands or self._grade_is_pruned(k):
                self._grades[k] = _Grade(k, cands, [], [], offset, None)
                continue
            free = s.prec_generators(k)
            vanishing = s.generators(k)
            system = jets.JetSystem(free, vanishing, cands, self.point,
                                    self.jet_order)
            kernel = self._relation_kernel(system)
            lower = jets.JetSystem(free, vanishing, cands, self.point,
                                   max(self.jet_order - 1, 1))
            kernel_lower = self._relation_kernel(lower)
            if len(kernel) != len(kernel_lower):
                raise InconclusiveJets(
                    f"relation kernel at weight {k} still shrinking between jet "
                    f"orders {max(self.jet_order - 1, 1)} and {self.jet_order} "
                    f"({len(kernel_lower)} -> {len(kernel)} relations); raise jet_order")
            pivots = self._choose_pivots(len(cands), kernel)
            self._grades[k] = _Grade(k, cands, kernel, pivots, offset, system)
            offset += len(pivots)
        self.dim = offset

    @staticmethod
    def _relation_kernel(system: jets.JetSystem) -> list[list[Fraction]]:
        n_vars = system.n
        zero = VectorField.zero(n_vars)
        feasible, _, null = system.solve(zero)
        assert feasible  # the zero field always decomposes
        return linalg.row_space_basis(null) if null else []

    @staticmethod
    def _choose_pivots(n_cands: int, kernel: list[list[Fraction]]) -> list[int]:
        pivots: list[int] = []
        rows = [list(v) for v in kernel]
        current_rank = linalg.rank(rows) if rows else 0
        for idx in range(n_cands):
            unit = [Fraction(int(t == idx)) for t in range(n_cands)]
            if linalg.rank(rows + [unit]) > current_rank:
                rows.append(unit)
                current_rank += 1
                pivots.append(idx)
        return pivots

    def _build_algebra(self) -> None:
        weights: list[WeightVector] = []
        labels: list[str] = []
        self.pivot_fields: list[VectorField] = []
        self.grades: list[WeightVector] = []
        var_names = self.structure.variables
        for k in self.structure.box_weights():
            g = self._grades[k]
            for idx in g.pivots:
                weights.append(k)
                self.grades.append(k)
                field = g.candidates[idx]
                self.pivot_fields.append(field)
                labels.append(f"[{field.format(var_names)}]@{','.join(map(str, k))}")
        constants: dict[tuple[int, int], dict[int, Fraction]] = {}
        for a in range(len(weights)):
            for b in range(a + 1, len(weights)):
                k = wv_add(weights[a], weights[b])
                grade = self._grades.get(k)
                if grade is None or not grade.pivots:
                    continue
                br = lie_bracket(self.pivot_fields[a], self.pivot_fields[b])
                if br.is_zero():
                    continue
                coords = self._grade_coords(br, k)
                row = {grade.offset + i: c for i, c in enumerate(coords) if c != 0}
                if row:
                    constants[(a, b)] = row
        self.algebra = NilpotentAlgebra(weights, constants, labels)
        self.grade_dims = {k: len(g.pivots) for k, g in self._grades.items()}

    def _grade_coords(self, X: VectorField, k: WeightVector) -> list[Fraction]:
        """Coordinates of [X]_k in the grade's pivot classes."""
        grade = self._grades.get(k)
        if grade is None or grade.system is None:
            if grade is not None and not grade.candidates:
                # no generators at this weight: only the zero class exists
                res = membership(X, k, self.point, self.structure, self.jet_order)
                if res.status != jets.MEMBER:
                    raise NotExpressible(
                        f"field has a nonzero class at empty grade {k}")
                return []
            # pruned grade: every class vanishes
            return []
        feasible, c0, null = grade.system.solve(X)
        if not feasible:
            raise NotExpressible(
                f"field not expressible over the level generators at weight {k}")
        null_rank = linalg.rank(null) if null else 0
        if null_rank != len(grade.kernel):
            raise InconclusiveJets(
                f"class solve at weight {k} has unstable freedom "
                f"({null_rank} vs {len(grade.kernel)} relations)")
        # reduce c0 modulo the relation kernel onto the pivot classes
        m = len(grade.candidates)
        cols = []
        for p in grade.pivots:
            cols.append([Fraction(int(t == p)) for t in range(m)])
        cols.extend(grade.kernel)
        mat = [[cols[c][r] for c in range(len(cols))] for r in range(m)]
        sol = linalg.solve(mat, c0)
        assert sol is not None
        return sol[:len(grade.pivots)]

    def _build_quotient_map(self) -> None:
        cols = []
        for e in self.basis.elements:
            cols.append(self.class_of(e.field, e.weight).coords)
        self.quotient_map = [[cols[j][i] for j in range(len(cols))]
                             for i in range(self.dim)]
        if linalg.rank(self.quotient_map) != self.dim:
            raise InconclusiveJets(
                "evaluation map is not surjective onto the computed quotient; "
                "the graded basis does not cover the structure at this point")

    # -- queries ------------------------------------------------------------

    def class_of(self, X: VectorField, k: WeightVector) -> AlgebraElement:
        """[X]_{k, point} as an element of the computed algebra.

        Linear in X, and multiplying X by a coefficient function scales the
        class by the coefficient's value at the point.
        """
        k = tuple(k)
        coords = [Fraction(0)] * self.dim
        grade = self._grades.get(k)
        if grade is None:
            # beyond the box: the quotient there vanishes
            return AlgebraElement(self.algebra, coords)
        local = self._grade_coords(X, k)
        for i, c in enumerate(local):
            coords[grade.offset + i] = c
        return AlgebraElement(self.algebra, coords)

    def membership(self, X: VectorField, k: WeightVector) -> jets.MembershipResult:
        return membership(X, k, self.point, self.structure, self.jet_order)

    def map_coords(self, basis_coords: Sequence[Fraction]) -> AlgebraElement:
        """Apply the evaluation map to coordinates on the graded basis."""
        out = [Fraction(0)] * self.dim
        for j, c in enumerate(basis_coords):
            if c:
                for i in range(self.dim):
                    out[i] += Fraction(c) * self.quotient_map[i][j]
        return AlgebraElement(self.algebra, out)

    def kernel_of_quotient_map(self) -> list[list[Fraction]]:
        return linalg.nullspace(self.quotient_map)

    def grade_table(self) -> list[dict]:
        return [{"weight": k, "dim": len(g.pivots),
                 "classes": [self.algebra.labels[g.offset + i]
                             for i in range(len(g.pivots))]}
                for k, g in self._grades.items()]


def osculating_algebra(structure: GradedStructure, basis: GradedBasis,
                       point: Sequence[Fraction], jet_order: int | None = None
                       ) -> OsculatingAlgebra:
    """Build the osculating algebra at a rational point.

    Default jet order is sum(depth) + 2.  Structure constants come from
    bracket classes of the pivot generators; for a Lie basis the evaluation
    map is checked to be a Lie algebra homomorphism by the test suite.
    """
    if jet_order is None:
        jet_order = sum(structure.depth) + 2
    return OsculatingAlgebra(structure, basis, point, jet_order)
