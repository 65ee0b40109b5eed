"""Hermite-basis spectral analysis of one-variable symbol operators.

Position and derivative act by ladder combinations t = (a + a*)/sqrt(2),
d/dt = (a - a*)/sqrt(2); every polynomial-coefficient operator becomes a
banded matrix.  Blocks are composed at an enlarged truncation and cropped,
so the cropped matrix equals the truncation of the infinite one (the
harmonic oscillator comes out exactly diagonal).  Smooth vectors of the
induced representations are Schwartz functions, so Hermite truncation
converges spectrally for these operators; stabilization doubles the
truncation and compares.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .diffop import DiffOp, adjoint as _formal_adjoint

__all__ = ["HermiteMatrix", "hermite_matrix", "eigenvalues",
           "injectivity_test", "rockland_scan",
           "INJECTIVE", "KERNEL_DETECTED", "UNSTABLE", "UNSUPPORTED"]

INJECTIVE = "INJECTIVE"
KERNEL_DETECTED = "KERNEL_DETECTED"
UNSTABLE = "UNSTABLE"
UNSUPPORTED = "UNSUPPORTED"

_HERMITIAN_TOL = 1e-10


@dataclass
class HermiteMatrix:
    truncation: int
    entries: np.ndarray
    source: DiffOp
    hermitian: bool


def _ladder_blocks(size: int) -> tuple[np.ndarray, np.ndarray]:
    n = np.arange(size - 1, dtype=float)
    lower = np.sqrt((n + 1) / 2.0)
    t = np.zeros((size, size))
    t[np.arange(size - 1), np.arange(1, size)] = lower
    t[np.arange(1, size), np.arange(size - 1)] = lower
    d = np.zeros((size, size))
    d[np.arange(size - 1), np.arange(1, size)] = lower
    d[np.arange(1, size), np.arange(size - 1)] = -lower
    return t, d


_block_cache: dict[tuple[int, int, int], np.ndarray] = {}


def _block(size: int, t_exp: int, d_exp: int) -> np.ndarray:
    """Cached t^a d^b block at the given size (scan families reuse them)."""
    key = (size, t_exp, d_exp)
    cached = _block_cache.get(key)
    if cached is not None:
        return cached
    if t_exp == 0 and d_exp == 0:
        out = np.eye(size)
    elif t_exp > 0:
        t, _ = _ladder_blocks(size)
        out = t @ _block(size, t_exp - 1, d_exp)
    else:
        _, d = _ladder_blocks(size)
        out = _block(size, 0, d_exp - 1) @ d
    _block_cache[key] = out
    return out


def hermite_matrix(A: DiffOp, M: int) -> HermiteMatrix:
    """Truncated Hermite-basis matrix of a one-variable operator."""
    if A.k != 1:
        raise ValueError("hermite_matrix needs a one-variable operator")
    span = max(A.coefficient_degree(), 0) + A.order()
    if M < span + 2:
        raise ValueError(f"truncation {M} too small; need at least {span + 2}")
    big = M + span + 2
    out = np.zeros((big, big), dtype=complex)
    for alpha, cpoly in A.terms.items():
        for part, unit in ((cpoly.re, 1.0), (cpoly.im, 1j)):
            for exp, c in part.terms.items():
                out += (unit * float(c)) * _block(big, exp[0], alpha[0])
    cropped = out[:M, :M]
    # formal self-adjointness decides the Hermitian flag exactly; the matrix
    # residual is a roundoff sanity bound relative to the entry scale
    herm = _formal_adjoint(A) == A
    if herm:
        scale = max(1.0, float(np.max(np.abs(cropped))))
        assert np.max(np.abs(cropped - cropped.conj().T)) < _HERMITIAN_TOL * scale
    return HermiteMatrix(M, cropped, A, herm)


def eigenvalues(H: HermiteMatrix, count: int, stabilization: bool = True):
    """Lowest-|lambda| eigenvalues with optional truncation-doubling check.

    Returns a list of {value, stable} rows; an entry is stable when the
    doubled-truncation eigenvalue agrees to relative 1e-8.
    """
    if count > H.truncation // 4:
        raise ValueError("count exceeds the truncation-safety quarter")
    vals = _lowest_eigs(H.entries, H.hermitian, count)
    if not stabilization:
        return [{"value": v, "stable": None} for v in vals]
    doubled = hermite_matrix(H.source, 2 * H.truncation)
    vals2 = _lowest_eigs(doubled.entries, doubled.hermitian, count)
    rows = []
    for v, w in zip(vals, vals2):
        scale = max(abs(v), abs(w), 1e-30)
        stable = abs(v - w) / scale < 1e-8
        rows.append({"value": w if stable else v, "stable": bool(stable)})
    return rows


def _lowest_eigs(m: np.ndarray, hermitian: bool, count: int):
    if hermitian:
        vals = np.linalg.eigvalsh((m + m.conj().T) / 2.0).astype(complex)
    else:
        vals = np.linalg.eigvals(m)
    order = np.argsort(np.abs(vals), kind="stable")
    out = vals[order][:count]
    return [complex(v) if not hermitian else float(v.real) for v in out]


def injectivity_test(A: DiffOp, M: int, margin: float = 1e-6) -> dict:
    """Smallest singular value at truncations M and 2M.

    KERNEL_DETECTED when both fall below the margin and agree; INJECTIVE
    when both clear it; UNSTABLE otherwise.
    """
    if A.k != 1:
        raise ValueError("injectivity_test needs a one-variable operator")
    s1 = _sigma_min(hermite_matrix(A, M).entries)
    s2 = _sigma_min(hermite_matrix(A, 2 * M).entries)
    if s1 < margin and s2 < margin and abs(s1 - s2) < margin:
        verdict = KERNEL_DETECTED
    elif s1 > margin and s2 > margin:
        verdict = INJECTIVE
    else:
        verdict = UNSTABLE
    return {"verdict": verdict, "sigma_min": float(s2), "sigma_min_coarse": float(s1)}


def _sigma_min(m: np.ndarray) -> float:
    scale = max(1.0, float(np.max(np.abs(m)))) if m.size else 1.0
    if np.max(np.abs(m - m.conj().T)) < _HERMITIAN_TOL * scale:
        vals = np.linalg.eigvalsh((m + m.conj().T) / 2.0)
        return float(np.min(np.abs(vals)))
    return float(np.linalg.svd(m, compute_uv=False)[-1])


def rockland_scan(family: Callable[[Fraction], Sequence[tuple[str, DiffOp]]],
                  grid: Sequence[Fraction], M: int = 256,
                  margin: float = 1e-6) -> dict:
    """Injectivity scan of a parameterized symbol family.

    family(c) yields (representation label, symbol operator) pairs; scalar
    symbols (k = 0) are checked for exact nonvanishing, one-variable symbols
    through the Hermite test, anything else is UNSUPPORTED.  The aggregate
    per grid value is hypoelliptic iff every entry passes; UNSTABLE entries
    force an INCONCLUSIVE aggregate.
    """
    rows = []
    obstructions = []
    inconclusive = []
    for c in grid:
        c = Fraction(c)
        verdicts = []
        for label, op in family(c):
            if op.k == 0:
                re, im = op.scalar_value()
                verdict = INJECTIVE if (re, im) != (0, 0) else KERNEL_DETECTED
                row = {"c": c, "rep": label, "k": 0, "M": None,
                       "verdict": verdict,
                       "sigma_min": float(np.hypot(float(re), float(im)))}
            elif op.k == 1:
                res = injectivity_test(op, M, margin)
                row = {"c": c, "rep": label, "k": 1, "M": M,
                       "verdict": res["verdict"],
                       "sigma_min": res["sigma_min"]}
            else:
                row = {"c": c, "rep": label, "k": op.k, "M": None,
                       "verdict": UNSUPPORTED, "sigma_min": float("nan")}
            verdicts.append(row["verdict"])
            rows.append(row)
        if KERNEL_DETECTED in verdicts:
            aggregate = "OBSTRUCTED"
            obstructions.append(c)
        elif UNSTABLE in verdicts or UNSUPPORTED in verdicts:
            aggregate = "INCONCLUSIVE"
            inconclusive.append(c)
        else:
            aggregate = "HYPOELLIPTIC"
        rows.append({"c": c, "rep": "aggregate", "k": None, "M": M,
                     "verdict": aggregate, "sigma_min": None})
    return {"rows": rows, "obstructions": obstructions,
            "inconclusive": inconclusive,
            "maximally_hypoelliptic_on_grid": not obstructions and not inconclusive}
