"""Multi-weighted filtrations of polynomial vector fields.

A structure is declared by weighted families of fields; the filtration level
at a weight k is generated by iterated brackets whose accumulated weight sits
below k in the componentwise partial order.  Levels at weights with some
coordinate at the declared depth are the full field module, so only the
weight box below the depth is materialized.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from . import jets
from .freelie import TruncatedFreeLie
from .polyfield import VectorField, evaluate, lie_bracket
from . import linalg

WeightVector = tuple[int, ...]

__all__ = [
    "WeightVector", "wv_add", "wv_leq", "wv_less", "wv_key",
    "GradedStructure", "GradedBasis", "BasisElement",
    "generate_filtration", "build_graded_basis", "dilate", "natural_eval",
    "check_hormander", "check_weak_commutativity", "power",
]


def wv_add(a: WeightVector, b: WeightVector) -> WeightVector:
    return tuple(x + y for x, y in zip(a, b))


def wv_leq(a: WeightVector, b: WeightVector) -> bool:
    """Componentwise partial order: a <= b iff b - a has no negative entry."""
    return all(x <= y for x, y in zip(a, b))


def wv_less(a: WeightVector, b: WeightVector) -> bool:
    return a != b and wv_leq(a, b)


def wv_key(k: WeightVector):
    """Deterministic total order refining the partial order: total weight,
    then colexicographic (so (1,0) sorts before (0,1))."""
    return (sum(k), tuple(reversed(k)))


def power(t: Sequence[Fraction], k: WeightVector) -> Fraction:
    """t^k = prod t_i^{k_i} with the 0^0 = 1 convention."""
    out = Fraction(1)
    for base, exp in zip(t, k):
        if exp == 0:
            continue
        out *= Fraction(base) ** exp
    return out


@dataclass(frozen=True)
class Family:
    weight: WeightVector
    fields: tuple[VectorField, ...]


class GradedStructure:
    """Weighted filtration presented by finite generator sets per box weight.

    new_generators[w] holds the (primitive-normalized) fields first appearing
    at weight w; the level at k is generated by all new generators at weights
    below-or-equal k.  Weights with some coordinate >= depth are the full
    module and are not materialized.
    """

    def __init__(self, nu: int, depth: WeightVector, variables: Sequence[str],
                 families: Sequence[Family],
                 new_generators: dict[WeightVector, list[VectorField]]):
        self.nu = nu
        self.depth = tuple(depth)
        self.variables = list(variables)
        self.n_vars = len(variables)
        self.families = list(families)
        self.new_generators = new_generators

    def box_weights(self) -> list[WeightVector]:
        """Nonzero weights k with k_i <= N_i, sorted deterministically."""
        ranges = [range(0, n + 1) for n in self.depth]
        out = [k for k in itertools.product(*ranges) if any(k)]
        out.sort(key=wv_key)
        return out

    def is_full(self, k: WeightVector) -> bool:
        """True when the level at k is the whole field module."""
        return any(ki >= ni for ki, ni in zip(k, self.depth))

    def generators(self, k: WeightVector) -> list[VectorField]:
        """Generators of the level at k: new generators at weights <= k."""
        out = []
        for w in sorted(self.new_generators, key=wv_key):
            if wv_leq(w, k):
                out.extend(self.new_generators[w])
        return out

    def prec_generators(self, k: WeightVector) -> list[VectorField]:
        """Generators of the sum of levels strictly below k."""
        out = []
        for w in sorted(self.new_generators, key=wv_key):
            if wv_less(w, k):
                out.extend(self.new_generators[w])
        return out

    def grade_candidates(self, k: WeightVector) -> list[VectorField]:
        """Fields whose classes span the weight-k part of the osculating
        quotient: the new generators at weight exactly k."""
        return list(self.new_generators.get(k, []))

    def bracket_closure_report(self, grid: Sequence[Sequence[Fraction]],
                               jet_order: int = 2):
        """Brackets of stored generators lie in the target level's module.

        Checks [gen(k), gen(l)] against the generators at k + l on the grid
        via the jet membership test, for sums inside the box.
        """
        rows = []
        weights = sorted(self.new_generators, key=wv_key)
        for i, k in enumerate(weights):
            for l in weights[i:]:
                target = wv_add(k, l)
                if not wv_leq(target, self.depth):
                    continue  # beyond the box the level is not materialized
                target_gens = self.generators(target)
                for a in self.new_generators[k]:
                    for b in self.new_generators[l]:
                        br = lie_bracket(a, b)
                        if br.is_zero():
                            continue
                        for x in grid:
                            res = jets.membership(br, target_gens, [], x,
                                                  jet_order)
                            rows.append({
                                "weights": (k, l), "target": target,
                                "point": tuple(x),
                                "member": res.status == jets.MEMBER})
        return rows

    def depth_report(self, grid: Sequence[Sequence[Fraction]]):
        """Check the pure-axis depth weights span the tangent space on a grid."""
        rows = []
        for i in range(self.nu):
            k = tuple(self.depth[j] if j == i else 0 for j in range(self.nu))
            gens = self.generators(k)
            for x in grid:
                m = [[Fraction(c) for c in evaluate(g, x)] for g in gens]
                rk = linalg.rank([list(col) for col in zip(*m)]) if m else 0
                rows.append({"axis": i, "weight": k, "point": tuple(x),
                             "rank": rk, "full": rk == self.n_vars})
        return rows


@dataclass(frozen=True)
class BasisElement:
    index: int
    weight: WeightVector
    field: VectorField
    label: str


class GradedBasis:
    """Finite weighted basis (V, natural map to fields) for a structure.

    When constructed with the Lie option the elements carry the bracket of a
    truncated free Lie algebra on the declared family fields; bracket_indices
    gives exact structure constants, computed lazily.
    """

    def __init__(self, structure: GradedStructure, elements: list[BasisElement],
                 free_lie: TruncatedFreeLie | None = None):
        self.structure = structure
        self.elements = elements
        self.free_lie = free_lie

    @property
    def dim(self) -> int:
        return len(self.elements)

    @property
    def is_lie(self) -> bool:
        return self.free_lie is not None

    def weights(self) -> list[WeightVector]:
        return [e.weight for e in self.elements]

    def bracket_indices(self, i: int, j: int) -> dict[int, Fraction]:
        if not self.is_lie:
            raise ValueError("structure constants need a Lie basis (lie=True)")
        return self.free_lie.bracket_indices(i, j)


def generate_filtration(families: Sequence[tuple[Sequence[int], Sequence[VectorField]]],
                        depth: Sequence[int],
                        variables: Sequence[str]) -> GradedStructure:
    """Generate the filtration from weighted families by bracket closure.

    Brackets accumulate weights additively; results are deduplicated up to
    exact rational proportionality against generators at comparable weights
    (no module-level minimization).
    """
    depth = tuple(int(d) for d in depth)
    nu = len(depth)
    if any(d <= 0 for d in depth):
        raise ValueError("depth entries must be positive")
    fams: list[Family] = []
    n_vars = len(variables)
    for weight, fields in families:
        w = tuple(int(x) for x in weight)
        if len(w) != nu:
            raise ValueError(f"family weight {w} has length {len(w)}, expected {nu}")
        if not any(w):
            raise ValueError("family weight must be nonzero")
        if not wv_leq(w, depth):
            raise ValueError(f"family weight {w} exceeds depth {depth}")
        fs = tuple(fields)
        for f in fs:
            if f.n_vars != n_vars:
                raise ValueError(
                    f"field on {f.n_vars} variables, structure has {n_vars}")
        fams.append(Family(w, fs))
    if not fams:
        raise ValueError("at least one family required")

    new_gens: dict[WeightVector, list[VectorField]] = {}

    def comparable_duplicate(candidate: VectorField, w: WeightVector) -> bool:
        for w2, gens in new_gens.items():
            if wv_leq(w2, w):
                for g in gens:
                    if candidate.proportional_to(g):
                        return True
        return False

    def add(candidate: VectorField, w: WeightVector) -> None:
        if candidate.is_zero():
            return
        candidate = candidate.primitive()
        if comparable_duplicate(candidate, w):
            return
        new_gens.setdefault(w, []).append(candidate)

    box = [k for k in itertools.product(*[range(0, n + 1) for n in depth]) if any(k)]
    box.sort(key=wv_key)
    for k in box:
        for fam in fams:
            if fam.weight == k:
                for f in fam.fields:
                    add(f, k)
        # brackets of strictly lower new generators with accumulated weight k
        lower = [w for w in new_gens if wv_less(w, k)]
        for w1 in sorted(lower, key=wv_key):
            w2 = tuple(a - b for a, b in zip(k, w1))
            if w2 not in new_gens or not all(x >= 0 for x in w2):
                continue
            if wv_key(w2) < wv_key(w1):
                continue  # unordered pairs once; antisymmetry adds nothing new
            for g1 in new_gens[w1]:
                for g2 in new_gens[w2]:
                    add(lie_bracket(g1, g2), k)
    return GradedStructure(nu, depth, variables, fams, new_gens)


def build_graded_basis(structure: GradedStructure, lie: bool = False) -> GradedBasis:
    """Weighted basis covering the generators.

    Plain form: one element per stored generator, ordered by (weight, index).
    Lie form: the truncated free Lie algebra on the declared family fields
    with weight cap depth + max declared weight, mapped by bracket evaluation.
    """
    if not lie:
        elements = []
        idx = 0
        for w in sorted(structure.new_generators, key=wv_key):
            for f in structure.new_generators[w]:
                elements.append(BasisElement(idx, w, f, f"v{idx + 1}"))
                idx += 1
        return GradedBasis(structure, elements)

    letters: list[tuple[WeightVector, VectorField]] = []
    for fam in structure.families:
        for f in fam.fields:
            letters.append((fam.weight, f))
    max_declared = tuple(max(fam.weight[i] for fam in structure.families)
                         for i in range(structure.nu))
    cap = wv_add(structure.depth, max_declared)
    free = TruncatedFreeLie([w for w, _ in letters], cap)

    images: list[VectorField] = []
    elements: list[BasisElement] = []
    for idx, word in enumerate(free.basis_words):
        img = _word_image(free.bracketing(word), letters)
        w = free.word_weight(word)
        elements.append(BasisElement(idx, w, img, f"w{idx + 1}"))
        images.append(img)
    return GradedBasis(structure, elements, free_lie=free)


def _word_image(tree, letters) -> VectorField:
    if isinstance(tree, int):
        return letters[tree][1]
    left, right = tree
    return lie_bracket(_word_image(left, letters), _word_image(right, letters))


def dilate(basis: GradedBasis, coords: Sequence[Fraction],
           lam: Sequence[Fraction]) -> list[Fraction]:
    """Dilation on basis coordinates: the weight-k part scales by lam^k."""
    lam = tuple(Fraction(x) for x in lam)
    if any(x < 0 for x in lam):
        raise ValueError("dilation parameters must be >= 0")
    if len(coords) != basis.dim:
        raise ValueError("coordinate length mismatch")
    return [Fraction(c) * power(lam, e.weight)
            for c, e in zip(coords, basis.elements)]


def natural_eval(basis: GradedBasis, x: Sequence[Fraction],
                 t: Sequence[Fraction]) -> list[list[Fraction]]:
    """Evaluation matrix (dim M) x (dim V): column i is t^{w(i)} v_i(x)."""
    t = tuple(Fraction(v) for v in t)
    if all(v == 0 for v in t):
        raise ValueError("t must be nonzero; the t=0 fiber is the osculating quotient")
    if any(v < 0 for v in t):
        raise ValueError("t must lie in the closed positive orthant")
    n = basis.structure.n_vars
    cols = []
    for e in basis.elements:
        scale = power(t, e.weight)
        cols.append([scale * v for v in evaluate(e.field, x)])
    return [[cols[j][i] for j in range(len(cols))] for i in range(n)]


def check_hormander(basis: GradedBasis, grid: Sequence[Sequence[Fraction]]):
    """Rank of the evaluation matrix at t = 1 per grid point."""
    if not grid:
        raise ValueError("empty grid")
    n = basis.structure.n_vars
    ones = (Fraction(1),) * basis.structure.nu
    rows = []
    for x in grid:
        rk = linalg.rank(natural_eval(basis, x, ones))
        rows.append({"point": tuple(Fraction(c) for c in x), "rank": rk,
                     "full_rank": rk == n})
    return rows


def check_weak_commutativity(structure: GradedStructure,
                             grid: Sequence[Sequence[Fraction]] | None = None,
                             jet_order: int = 2):
    """Verdict for level(k) = sum of pure-axis levels at k_i, on generators.

    One-parameter structures are trivially weakly commutative.  Otherwise
    every stored generator at a mixed weight k must lie in the module
    generated by the pure-axis generators; an infeasible jet system at any
    grid point is a certified violation and is returned as a witness.
    """
    if structure.nu == 1:
        return {"weakly_commutative": True, "witness": None, "checked": 0}
    if grid is None:
        grid = [tuple(Fraction(0) for _ in range(structure.n_vars)),
                tuple(Fraction(1, 2) * (i + 1) for i in range(structure.n_vars))]
    checked = 0

    def pure_axis_gens(k: WeightVector) -> list[VectorField]:
        out: list[VectorField] = []
        for i in range(structure.nu):
            ki = tuple(k[i] if j == i else 0 for j in range(structure.nu))
            out.extend(structure.generators(ki))
        return out

    queries: list[tuple[WeightVector, VectorField]] = []
    # stored generators first appearing at mixed weights
    for k in structure.box_weights():
        if sum(1 for ki in k if ki > 0) < 2:
            continue
        for g in structure.grade_candidates(k):
            queries.append((k, g))
    # cross-family brackets of the declared generators (the bracket criterion)
    for fa, fb in itertools.combinations(structure.families, 2):
        if fa.weight == fb.weight:
            continue
        k = wv_add(fa.weight, fb.weight)
        if structure.is_full(k):
            continue  # the full module: trivially a sum of pure-axis levels
        for f in fa.fields:
            for g in fb.fields:
                br = lie_bracket(f, g)
                if not br.is_zero():
                    queries.append((k, br))

    for k, g in queries:
        gens = pure_axis_gens(k)
        for x in grid:
            checked += 1
            res = jets.membership(g, gens, [], x, jet_order)
            if res.status == jets.NOT_MEMBER:
                return {"weakly_commutative": False,
                        "witness": {"weight": k, "field": g,
                                    "point": tuple(x),
                                    "certificate_order": res.certificate_order},
                        "checked": checked}
    return {"weakly_commutative": True, "witness": None, "checked": checked}
