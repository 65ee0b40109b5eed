"""Subspace arithmetic in exact and floating modes.

Exact mode carries rational bases (kernels, annihilators, involution checks);
float mode carries orthonormal bases for the metric side (gap distance,
Grassmannian limits of subspace sequences).  Conversions happen only at
declared boundaries: a rational subspace can be frozen to float, never the
other way.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Sequence

import numpy as np

from . import linalg

__all__ = ["Subspace", "kernel", "distance", "limit", "annihilator", "DIVERGED"]

DIVERGED = "DIVERGED"

_SVD_TOL = 1e-10


class Subspace:
    """Linear subspace of R^ambient, tagged exact (rational) or float.

    Exact subspaces keep a rational basis matrix (columns independent, checked
    by exact rank).  Float subspaces keep an orthonormal column basis.
    """

    def __init__(self, ambient_dim: int, basis_columns, exact: bool):
        self.ambient_dim = int(ambient_dim)
        self.exact = bool(exact)
        if exact:
            cols = [[Fraction(x) for x in col] for col in basis_columns]
            for col in cols:
                if len(col) != self.ambient_dim:
                    raise ValueError("basis vector of wrong length")
            if cols:
                rows = [[col[i] for col in cols] for i in range(self.ambient_dim)]
                if linalg.rank(rows) != len(cols):
                    raise ValueError("basis columns are dependent")
            self.columns = cols
            self.ortho = None
        else:
            m = np.array(basis_columns, dtype=float).T if len(basis_columns) else \
                np.zeros((self.ambient_dim, 0))
            if m.shape[0] != self.ambient_dim:
                raise ValueError("basis vector of wrong length")
            if m.shape[1]:
                q, s, _ = np.linalg.svd(m, full_matrices=False)
                rank = int(np.sum(s > _SVD_TOL * max(1.0, s[0])))
                if rank != m.shape[1]:
                    raise ValueError("basis columns are numerically dependent")
                self.ortho = q[:, :rank]
            else:
                self.ortho = np.zeros((self.ambient_dim, 0))
            self.columns = None

    @property
    def dim(self) -> int:
        return len(self.columns) if self.exact else self.ortho.shape[1]

    @classmethod
    def exact_from_columns(cls, ambient_dim: int, cols) -> "Subspace":
        # reduce to an independent spanning subset
        rows = [[Fraction(x) for x in col] for col in cols]
        basis = linalg.row_space_basis(rows)
        return cls(ambient_dim, basis, exact=True)

    @classmethod
    def float_from_columns(cls, ambient_dim: int, cols,
                           normalize: bool = True) -> "Subspace":
        if not len(cols):
            return cls(ambient_dim, [], exact=False)
        m = np.array(cols, dtype=float).T
        if normalize:
            # normalize columns so a huge-entry generator cannot mask
            # independent small directions behind the relative SVD threshold
            norms = np.max(np.abs(m), axis=0)
            norms[norms == 0] = 1.0
            m = m / norms
        q, s, _ = np.linalg.svd(m, full_matrices=False)
        rank = int(np.sum(s > _SVD_TOL * max(1.0, s[0] if s.size else 1.0)))
        out = cls.__new__(cls)
        out.ambient_dim = ambient_dim
        out.exact = False
        out.columns = None
        out.ortho = q[:, :rank]
        return out

    def to_float(self) -> "Subspace":
        """Freeze to float mode via exact Gram-Schmidt.

        Orthogonalizing in rational arithmetic first keeps directions that
        float conversion of a raw basis would lose when two generators share
        a dominating huge entry.
        """
        if not self.exact:
            return self
        ortho: list[list[Fraction]] = []
        for col in self.columns:
            v = list(col)
            for u in ortho:
                uu = sum(x * x for x in u)
                uv = sum(x * y for x, y in zip(u, v))
                if uu:
                    f = uv / uu
                    v = [a - f * b for a, b in zip(v, u)]
            if any(v):
                top = max(abs(x) for x in v)
                ortho.append([x / top for x in v])
        cols = [[float(x) for x in v] for v in ortho]
        return Subspace.float_from_columns(self.ambient_dim, cols,
                                           normalize=False)

    def projector(self) -> np.ndarray:
        q = self.to_float().ortho
        return q @ q.T

    def contains(self, vector, tol: float = 1e-9) -> bool:
        v = np.array([float(x) for x in vector])
        norm = np.linalg.norm(v)
        if norm == 0:
            return True
        residual = v - self.projector() @ v
        return float(np.linalg.norm(residual)) <= tol * norm

    def __repr__(self):
        mode = "exact" if self.exact else "float"
        return f"Subspace(dim={self.dim}, ambient={self.ambient_dim}, {mode})"


def kernel(matrix, exact: bool = True) -> Subspace:
    """Null space of a matrix (rows = equations)."""
    if exact:
        rows = [[Fraction(x) for x in row] for row in matrix]
        if not rows:
            raise ValueError("empty matrix")
        basis = linalg.nullspace(rows)
        return Subspace(len(rows[0]), basis, exact=True)
    m = np.array(matrix, dtype=float)
    _, s, vt = np.linalg.svd(m)
    tol = _SVD_TOL * max(1.0, s[0] if s.size else 1.0)
    rank = int(np.sum(s > tol))
    basis = [vt[i] for i in range(rank, vt.shape[0])]
    return Subspace(m.shape[1], basis, exact=False)


def distance(s1: Subspace, s2: Subspace) -> float:
    """Gap metric: spectral norm of the projector difference.

    For equal dimensions this is the sine of the largest principal angle,
    symmetric, zero iff equal, and at most 1.
    """
    if s1.ambient_dim != s2.ambient_dim:
        raise ValueError("ambient dimension mismatch")
    if s1.dim != s2.dim:
        raise ValueError("gap distance requires equal dimensions")
    diff = s1.projector() - s2.projector()
    return float(np.linalg.norm(diff, 2))


def limit(sequence: Sequence[Subspace], tol: float = 1e-8):
    """Terminal representative of a Cauchy tail, or DIVERGED with a trace.

    The tail window is the last max(8, 10%) entries; its representative is
    the final element.
    """
    seq = list(sequence)
    if not seq:
        raise ValueError("empty sequence")
    window = max(8, len(seq) // 10)
    tail = seq[-window:]
    diameters = []
    for i in range(len(tail)):
        for j in range(i + 1, len(tail)):
            diameters.append(distance(tail[i], tail[j]))
    diameter = max(diameters) if diameters else 0.0
    if diameter <= tol:
        return seq[-1]
    return (DIVERGED, diameters)


def annihilator(s: Subspace) -> Subspace:
    """Exact annihilator in the dual: covectors vanishing on the subspace."""
    if not s.exact:
        raise ValueError("annihilator requires exact mode")
    if s.dim == 0:
        return Subspace(s.ambient_dim, linalg.identity(s.ambient_dim), exact=True)
    rows = [[col[i] for i in range(s.ambient_dim)] for col in s.columns]
    basis = linalg.nullspace(rows)
    return Subspace(s.ambient_dim, basis, exact=True)
