"""Tangent cones as Grassmannian limits and Helffer-Nourrigat cones.

A tangent cone at x is the image under the evaluation map of a limit of
exact kernels ker(eval at (x_n, t_n)) along a sequence (x_n, t_n) -> (x, 0)
with t_n in the closed positive orthant minus zero.  Kernels are computed in
exact rational arithmetic at each step (sidestepping the conditioning of the
scaled matrices) and only the Grassmannian limit runs in floats.

Sampled cones are verified to have codimension dim M and to be closed under
the osculating bracket, deduplicated by gap distance, and reported together
with a diverged-sequence counter.  Sampling is heuristic for structures
outside the worked two-parameter family; completeness is never claimed.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .grassmann import DIVERGED, Subspace, distance, kernel, limit
from .grading import GradedBasis, WeightVector, natural_eval, power, wv_key
from .nilpotent import ad_exp
from .osculating import OsculatingAlgebra

__all__ = [
    "TangentCone", "HNSample", "ConeSampleReport",
    "sample_tangent_cones", "example_cone_catalog", "hn_at_point",
    "hn_directional", "nonsingular_filter", "is_worked_family",
]


@dataclass
class TangentCone:
    osc: OsculatingAlgebra
    subspace: Subspace            # subspace of the osculating algebra, float mode
    witness: dict
    bracket_residual: float = 0.0

    @property
    def codim(self) -> int:
        return self.osc.dim - self.subspace.dim


@dataclass
class ConeSampleReport:
    cones: list[TangentCone]
    diverged: int           # no Grassmannian limit within tolerance
    rejected: int           # limit failed the cone checks (lemma/codim/bracket)
    total_sequences: int


@dataclass
class HNSample:
    algebra_dim: int
    covectors: list[dict]          # {"coords": np.ndarray, "source": ...}
    directional: tuple | None = None


def _quotient_matrix(osc: OsculatingAlgebra) -> np.ndarray:
    return np.array([[float(x) for x in row] for row in osc.quotient_map])


def _float_bracket(osc: OsculatingAlgebra, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    out = np.zeros(osc.dim)
    for (i, j), row in osc.algebra.constants.items():
        factor = u[i] * v[j] - u[j] * v[i]
        if factor:
            for k, c in row.items():
                out[k] += factor * float(c)
    return out


def _bracket_residual_float(osc: OsculatingAlgebra, sub: Subspace) -> float:
    """Max over basis pairs of the defect of [u, v] from the subspace.

    The defect of a vector w is |(I - P) w| / max(1, |w|).
    """
    q = sub.to_float().ortho
    if q.shape[1] < 2:
        return 0.0
    proj = q @ q.T
    worst = 0.0
    for i in range(q.shape[1]):
        for j in range(i + 1, q.shape[1]):
            w = _float_bracket(osc, q[:, i], q[:, j])
            defect = np.linalg.norm(w - proj @ w) / max(1.0, np.linalg.norm(w))
            worst = max(worst, float(defect))
    return worst


def _cone_from_kernel(osc: OsculatingAlgebra, kernel_sub: Subspace,
                      witness: dict, lemma_tol: float = 1e-6) -> TangentCone | None:
    """Map a limit kernel in basis coordinates through the evaluation map."""
    qmat = _quotient_matrix(osc)
    korth = kernel_sub.to_float().ortho
    # the kernel of the evaluation map must sit inside the limit (convergence lemma)
    for null_vec in osc.kernel_of_quotient_map():
        v = np.array([float(x) for x in null_vec])
        if np.linalg.norm(v) > 0 and not kernel_sub.contains(v, tol=lemma_tol):
            return None
    # orthonormal kernel columns through the evaluation map: tiny images are
    # kernel directions of the map and must stay below the rank threshold
    cols = [qmat @ korth[:, i] for i in range(korth.shape[1])]
    sub = Subspace.float_from_columns(osc.dim, cols, normalize=False)
    n = osc.structure.n_vars
    if osc.dim - sub.dim != n:
        return None
    residual = _bracket_residual_float(osc, sub)
    return TangentCone(osc, sub, witness, residual)


def _kernel_sequence(basis: GradedBasis, seq: Sequence[tuple]) -> list[Subspace]:
    out = []
    for x, t in seq:
        m = natural_eval(basis, x, t)
        out.append(kernel(m, exact=True).to_float())
    return out


def sample_tangent_cones(basis: GradedBasis, osc: OsculatingAlgebra,
                         x: Sequence[Fraction], strategy: str = "auto",
                         count: int = 8, tol: float = 1e-6, seed: int = 0,
                         steps: int = 40, bracket_tol: float = 1e-8
                         ) -> ConeSampleReport:
    """Sample tangent cones at x along sequences (x_n, t_n) -> (x, 0).

    Strategies: "rays" uses seeded log-spaced rays with rational exponents
    and straight rational approach paths; "example" adds the ratio regimes
    of the worked two-parameter family; "auto" picks "example" when the
    structure matches that family and "rays" otherwise.
    """
    x = tuple(Fraction(v) for v in x)
    if x != osc.point:
        raise ValueError("osculating algebra was computed at a different point")
    specs = []
    if strategy == "auto":
        strategy = "example" if is_worked_family(basis.structure) else "rays"
    if strategy == "example":
        specs.extend(_example_sequences(basis.structure, x))
    elif strategy != "rays":
        raise ValueError(f"unknown strategy {strategy!r}")
    specs.extend(_ray_sequences(basis.structure, x, count, seed))

    cones: list[TangentCone] = []
    diverged = 0
    rejected = 0
    for name, params, gen in specs:
        seq = [gen(n) for n in range(1, steps + 1)]
        kernels = _kernel_sequence(basis, seq)
        res = limit(kernels, tol=tol)
        if isinstance(res, tuple) and res[0] == DIVERGED:
            diverged += 1
            continue
        cone = _cone_from_kernel(osc, res, {"strategy": name, "params": params})
        if cone is None or cone.bracket_residual >= bracket_tol:
            rejected += 1
            continue
        if not any(distance(cone.subspace, c.subspace) < tol for c in cones
                   if c.subspace.dim == cone.subspace.dim):
            cones.append(cone)
    cones.sort(key=lambda c: (c.witness["strategy"], str(c.witness["params"])))
    return ConeSampleReport(cones, diverged, rejected, len(specs))


def _ray_sequences(structure, x, count: int, seed: int):
    rng = np.random.RandomState(seed)
    nu = structure.nu
    rho = Fraction(1, 2)
    specs = []
    for idx in range(count):
        exponents = [int(rng.randint(1, 4)) for _ in range(nu)]
        scales = [Fraction(int(rng.randint(1, 5)), int(rng.randint(1, 5)))
                  for _ in range(nu)]
        drift = [Fraction(int(rng.randint(-2, 3)), 8) for _ in range(structure.n_vars)]

        def gen(n, exponents=exponents, scales=scales, drift=drift):
            t = tuple(s * rho ** (e * n) for s, e in zip(scales, exponents))
            xn = tuple(xi + d * rho ** n for xi, d in zip(x, drift))
            return xn, t

        specs.append(("ray", {"exponents": exponents,
                              "scales": [str(s) for s in scales],
                              "drift": [str(d) for d in drift]}, gen))
    return specs


def is_worked_family(structure) -> bool:
    """The depth-(1, N) two-family structure on R^2 used by the catalog."""
    if structure.nu != 2 or structure.n_vars != 2:
        return False
    if structure.depth[0] != 1 or structure.depth[1] < 2:
        return False
    if len(structure.families) != 2:
        return False
    f1, f2 = structure.families
    if f1.weight != (1, 0) or f2.weight != (0, 1):
        return False
    from .polyfield import VectorField, Polynomial
    n = structure.depth[1]
    dx = VectorField.coordinate(2, 0)
    dy = VectorField.coordinate(2, 1)
    xn1dy = Polynomial.monomial(2, (n - 1, 0)) * dy
    return (list(f1.fields) == [dx, dy]
            and list(f2.fields) == [dx, xn1dy])


def _example_sequences(structure, x):
    """Ratio regimes of the worked family; t = (t, s) order matches the axes."""
    N = structure.depth[1]
    rho = Fraction(1, 2)
    x = tuple(x)
    specs = []
    lambdas = [Fraction(0), Fraction(1, 2), Fraction(1), Fraction(2)]

    for lam in lambdas:
        def gen(n, lam=lam):
            t = rho ** n
            return x, (t, lam * t)
        specs.append(("lambda", {"lambda": str(lam)}, gen))

    if x[0] != 0:
        def gen_inf(n):
            return x, (rho ** (2 * n), rho ** n)
        specs.append(("s_over_t_infinite", {}, gen_inf))
        return specs

    # x = 0 regimes
    for mu, eta in [(Fraction(0), Fraction(1)), (Fraction(1), Fraction(1)),
                    (Fraction(-1), Fraction(2)), (Fraction(1, 2), Fraction(0))]:
        def gen_me(n, mu=mu, eta=eta):
            s = rho ** n
            return (mu * s, x[1]), (eta * s ** N, s)
        specs.append(("mu_eta", {"mu": str(mu), "eta": str(eta)}, gen_me))

    zetas = [Fraction(1), Fraction(2)]
    if N % 2 == 0:
        zetas.append(Fraction(-1))
    for zeta in zetas:
        def gen_z(n, zeta=zeta):
            xn = rho ** n if zeta >= 0 or N % 2 != 0 else -(rho ** n)
            s = rho ** (2 * n)
            t = zeta * s * xn ** (N - 1)
            return (xn, x[1]), (t, s)
        specs.append(("zeta", {"zeta": str(zeta)}, gen_z))

    def gen_linf(n):
        return x, (rho ** (3 * n), rho ** (2 * n))
    specs.append(("l_infinity", {}, gen_linf))
    return specs


def example_cone_catalog(osc: OsculatingAlgebra,
                         lambdas: Sequence[Fraction] = (),
                         mu_eta: Sequence[tuple] = (),
                         zetas: Sequence[Fraction] = ()) -> list[TangentCone]:
    """Closed-form cone catalog for the worked family at the point of osc.

    At x != 0 the cones are L_lambda = span{lam X1 - Y, lam x^{N-1} X2 - Z1}
    and L_inf = span{X1, X2}; at x = 0 the four closed-form families of the
    structure.  For odd N the zeta parameter is restricted to zeta >= 0.
    """
    s = osc.structure
    if not is_worked_family(s):
        raise ValueError("cone catalog only covers the worked two-parameter family")
    N = s.depth[1]
    x0 = osc.point[0]
    lambdas = list(lambdas) or [Fraction(0), Fraction(1, 2), Fraction(1), Fraction(2)]
    cones: list[TangentCone] = []

    def make(vectors, name, params):
        cols = [[Fraction(v) for v in vec] for vec in vectors]
        sub = Subspace.exact_from_columns(osc.dim, cols).to_float()
        cone = TangentCone(osc, sub, {"strategy": "catalog:" + name,
                                      "params": params})
        cone.bracket_residual = _bracket_residual_float(osc, sub)
        return cone

    if x0 != 0:
        # algebra order: X1, X2, Y, Z1
        for lam in lambdas:
            cones.append(make([
                [lam, 0, -1, 0],
                [0, lam * x0 ** (N - 1), 0, -1],
            ], "L_lambda", {"lambda": str(lam)}))
        cones.append(make([[1, 0, 0, 0], [0, 1, 0, 0]], "L_inf", {}))
        return cones

    dim = N + 3  # X1, X2, Y, Z1..ZN
    mu_eta = list(mu_eta) or [(Fraction(0), Fraction(1)), (Fraction(1), Fraction(1)),
                              (Fraction(-1), Fraction(2)), (Fraction(1, 2), Fraction(0))]
    zetas = list(zetas) or ([Fraction(1), Fraction(2), Fraction(-1)] if N % 2 == 0
                            else [Fraction(1), Fraction(2)])

    def e(i):
        v = [Fraction(0)] * dim
        v[i] = Fraction(1)
        return v

    Z = lambda k: 2 + k  # Z_k index
    for lam in lambdas:
        vecs = [[lam, 0, -1] + [0] * N] + [e(Z(k)) for k in range(1, N + 1)]
        cones.append(make(vecs, "L_lambda", {"lambda": str(lam)}))
    for mu, eta in mu_eta:
        vecs = [e(0)]
        x2 = e(1)
        x2[Z(N)] = -Fraction(eta)
        vecs.append(x2)
        for k in range(1, N):
            v = e(Z(k))
            v[Z(k + 1)] = -Fraction(mu)
            vecs.append(v)
        cones.append(make(vecs, "L_mu_eta", {"mu": str(mu), "eta": str(eta)}))
    for zeta in zetas:
        if N % 2 == 1 and zeta < 0:
            raise ValueError("zeta must be >= 0 for odd N")
        v = e(1)
        v[Z(1)] = -Fraction(zeta)
        vecs = [e(0), v] + [e(Z(k)) for k in range(2, N + 1)]
        cones.append(make(vecs, "L_zeta", {"zeta": str(zeta)}))
    cones.append(make([e(0)] + [e(Z(k)) for k in range(1, N + 1)], "L_inf", {}))
    return cones


def _complement(q: np.ndarray, ambient: int) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of span(columns of q)."""
    if q.shape[1] == 0:
        return np.eye(ambient)
    full, _, _ = np.linalg.svd(q, full_matrices=True)
    return full[:, q.shape[1]:]


def hn_at_point(cones: Sequence[TangentCone], combo_grid: Sequence[Fraction] = (),
                group_samples: Sequence[Sequence[Fraction]] = (),
                dilations: Sequence[Sequence[Fraction]] = ()) -> HNSample:
    """Covectors annihilating the sampled cones, with translates and dilates.

    Emits annihilator basis vectors, their rational-grid combinations, their
    coadjoint translates along sampled group elements, and their dilates,
    each tagged with the source cone.
    """
    if not cones:
        raise ValueError("empty cone list")
    osc = cones[0].osc
    dim = osc.dim
    combo_grid = list(combo_grid) or [Fraction(1), Fraction(-1), Fraction(2)]
    covectors: list[dict] = []

    def push(vec: np.ndarray, source: dict):
        if np.linalg.norm(vec) < 1e-14:
            return
        covectors.append({"coords": vec, "source": source})

    for cone_idx, cone in enumerate(cones):
        q = cone.subspace.to_float().ortho
        ann = _complement(q, dim)
        basis_vecs = [ann[:, i] for i in range(ann.shape[1])]
        for i, v in enumerate(basis_vecs):
            push(v, {"cone": cone_idx, "kind": "annihilator_basis", "index": i})
        if len(basis_vecs) >= 2:
            for a in combo_grid:
                for b in combo_grid:
                    vec = float(a) * basis_vecs[0] + float(b) * basis_vecs[1]
                    push(vec, {"cone": cone_idx, "kind": "combination",
                               "coefficients": [str(a), str(b)]})
        for g_coords in group_samples:
            g = osc.algebra.element(list(g_coords))
            m = np.array([[float(v) for v in row] for row in ad_exp(-g)])
            for i, v in enumerate(basis_vecs):
                push(m.T @ v, {"cone": cone_idx, "kind": "coadjoint",
                               "g": [str(c) for c in g_coords], "index": i})
        for lam in dilations:
            scale = np.array([float(power(tuple(Fraction(l) for l in lam), w))
                              for w in osc.algebra.weights])
            for i, v in enumerate(basis_vecs):
                push(scale * v, {"cone": cone_idx, "kind": "dilate",
                                 "lambda": [str(l) for l in lam], "index": i})
    return HNSample(dim, covectors)


def hn_directional(basis: GradedBasis, osc: OsculatingAlgebra,
                   xi: Sequence[Fraction], strategy: str = "auto",
                   count: int = 6, tol: float = 1e-6, seed: int = 0,
                   steps: int = 40) -> HNSample:
    """Covector limits of xi_n o (evaluation at (x_n, t_n)) for directions xi.

    Sequences share the cone-sampling strategies; covector scalings run over
    a grid of weight normalizations t_n^{-w}.  Limits are pushed from the
    basis dual to the osculating dual through the evaluation map.
    """
    x = osc.point
    xi = tuple(Fraction(v) for v in xi)
    if not any(xi):
        raise ValueError("xi must be nonzero")
    specs = []
    if strategy == "auto":
        strategy = "example" if is_worked_family(basis.structure) else "rays"
    if strategy == "example":
        specs.extend(_example_sequences(basis.structure, x))
    specs.extend(_ray_sequences(basis.structure, x, count, seed))

    norm_weights = _normalization_weights(basis)
    qmat = _quotient_matrix(osc)
    qt = qmat.T
    results: list[dict] = []
    for name, params, gen in specs:
        seq = [gen(n) for n in range(1, steps + 1)]
        for w in norm_weights:
            vecs = []
            for xn, tn in seq:
                if power(tn, w) == 0:
                    vecs = None
                    break
                scale = Fraction(1) / power(tn, w)
                m = natural_eval(basis, xn, tn)
                row = [scale * sum((Fraction(xi[i]) * m[i][j] for i in range(len(m))),
                                   Fraction(0))
                       for j in range(basis.dim)]
                vecs.append(np.array([float(v) for v in row]))
            if not vecs:
                continue
            tail = vecs[-max(6, len(vecs) // 4):]
            diam = max(np.linalg.norm(a - b) for a in tail for b in tail)
            limit_vec = tail[-1]
            norm = np.linalg.norm(limit_vec)
            if norm < 1e-12 or diam > tol * max(1.0, norm):
                continue
            # push to the osculating dual: eta with Q^T eta = limit_vec
            eta, lsq_res, rank, _ = np.linalg.lstsq(qt, limit_vec, rcond=None)
            if np.linalg.norm(qt @ eta - limit_vec) > tol * max(1.0, norm):
                continue  # limit is not supported on the quotient
            entry = {"coords": eta, "source": {"strategy": name, "params": params,
                                               "normalization": w}}
            if not _duplicate_direction(results, eta, tol):
                results.append(entry)
    return HNSample(osc.dim, results, directional=(xi, tuple(x)))


def _duplicate_direction(entries: list[dict], eta: np.ndarray, tol: float) -> bool:
    n = np.linalg.norm(eta)
    for e in entries:
        m = np.linalg.norm(e["coords"])
        if abs(n - m) <= tol * max(1.0, n) and \
                np.linalg.norm(e["coords"] - eta) <= tol * max(1.0, n):
            return True
    return False


def _normalization_weights(basis: GradedBasis) -> list[WeightVector]:
    weights = sorted(set(e.weight for e in basis.elements), key=wv_key)
    zero = tuple(0 for _ in range(basis.structure.nu))
    return [zero] + weights


def nonsingular_filter(sample: HNSample, osc: OsculatingAlgebra,
                       threshold: float = 1e-10) -> HNSample:
    """Keep covectors with nonzero restriction to every axis block.

    Requires a weakly commutative grading (every grade pure-axis), which
    splits the algebra into per-axis blocks.
    """
    alg = osc.algebra
    if not alg.is_weakly_commutative_grading():
        raise ValueError("nonsingular filter needs a weakly commutative structure")
    blocks = [alg.axis_block(i) for i in range(alg.nu)]
    if any(not b for b in blocks):
        raise ValueError("an axis block is empty; the filter is vacuous here")
    kept = []
    for entry in sample.covectors:
        v = entry["coords"]
        if all(np.linalg.norm(v[idx]) > threshold
               for idx in (np.array(b) for b in blocks)):
            kept.append(entry)
    return HNSample(sample.algebra_dim, kept, directional=sample.directional)
