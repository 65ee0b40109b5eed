from fractions import Fraction

import numpy as np
import pytest

from nilgeom.diffop import CPoly, DiffOp, compose
from nilgeom.polyfield import Polynomial
from nilgeom.spectra import (INJECTIVE, KERNEL_DETECTED, UNSTABLE, UNSUPPORTED,
                             eigenvalues, hermite_matrix, injectivity_test,
                             rockland_scan)

F = Fraction

D = DiffOp.derivative(1, 0)
T = DiffOp.multiplication(CPoly.real(Polynomial.variable(1, 0)))
HARMONIC = -compose(D, D) + compose(T, T)
QUARTIC_SQ = compose(compose(D, D) - compose(T, T),
                     compose(D, D) - compose(T, T))


class TestHermiteMatrix:
    def test_identity(self):
        hm = hermite_matrix(DiffOp.identity(1), 16)
        assert np.allclose(hm.entries, np.eye(16))

    def test_position_tridiagonal(self):
        hm = hermite_matrix(T, 8)
        for n in range(7):
            assert abs(hm.entries[n, n + 1] - np.sqrt((n + 1) / 2)) < 1e-14
            assert abs(hm.entries[n + 1, n] - np.sqrt((n + 1) / 2)) < 1e-14

    def test_harmonic_exact_diagonal(self):
        M = 48
        hm = hermite_matrix(HARMONIC, M)
        assert np.max(np.abs(hm.entries - np.diag(np.arange(1, 2 * M, 2)))) < 1e-12

    def test_band_structure(self):
        # bandwidth = polynomial degree + derivative order
        op = compose(compose(T, T), D)  # t^2 d/dt: bandwidth 3
        hm = hermite_matrix(op, 24)
        for i in range(24):
            for j in range(24):
                if abs(i - j) > 3:
                    assert hm.entries[i, j] == 0

    def test_hermitian_flag(self):
        assert hermite_matrix(HARMONIC, 16).hermitian
        it = DiffOp.multiplication(CPoly.imag(Polynomial.variable(1, 0)))
        skew = compose(D, D) + it
        assert not hermite_matrix(skew, 16).hermitian

    def test_rejects_multivariable(self):
        with pytest.raises(ValueError):
            hermite_matrix(DiffOp.identity(2), 16)

    def test_rejects_tiny_truncation(self):
        with pytest.raises(ValueError):
            hermite_matrix(QUARTIC_SQ, 4)


class TestEigenvalues:
    def test_harmonic_ladder(self):
        rows = eigenvalues(hermite_matrix(HARMONIC, 64), 8)
        for n, row in enumerate(rows):
            assert row["stable"]
            assert abs(row["value"] - (2 * n + 1)) < 1e-10

    def test_quartic_free_square(self):
        rows = eigenvalues(hermite_matrix(QUARTIC_SQ, 200), 4)
        for n, row in enumerate(rows):
            assert row["stable"]
            assert abs(row["value"] - (2 * n + 1) ** 2) < 1e-8 * (2 * n + 1) ** 2

    def test_zero_operator(self):
        rows = eigenvalues(hermite_matrix(DiffOp.zero(1), 32), 4)
        assert all(row["value"] == 0 for row in rows)

    def test_count_guard(self):
        with pytest.raises(ValueError):
            eigenvalues(hermite_matrix(HARMONIC, 32), 20)

    def test_complex_hermitian_source_real_eigenvalues(self):
        # i d/dt is formally self-adjoint with a genuinely complex matrix
        op = DiffOp(1, {(1,): CPoly.scalar(1, 0, 1)})
        hm = hermite_matrix(op, 48)
        assert hm.hermitian
        assert np.max(np.abs(hm.entries.imag)) > 0.1
        rows = eigenvalues(hm, 4)
        for row in rows:
            assert isinstance(row["value"], float)  # real after stabilization


class TestInjectivity:
    def test_identity(self):
        out = injectivity_test(DiffOp.identity(1), 32)
        assert out["verdict"] == INJECTIVE
        assert abs(out["sigma_min"] - 1) < 1e-12

    def test_kernel_detected_on_eigenvalue(self):
        out = injectivity_test(QUARTIC_SQ - DiffOp.scalar(1, 9), 128)
        assert out["verdict"] == KERNEL_DETECTED

    def test_injective_off_spectrum(self):
        out = injectivity_test(QUARTIC_SQ - DiffOp.scalar(1, 5), 128)
        assert out["verdict"] == INJECTIVE
        assert abs(out["sigma_min"] - 4) < 1e-6

    def test_kernel_cross_check_against_ata(self):
        # KERNEL_DETECTED iff 0 is in the stabilized spectrum of A* A
        A = QUARTIC_SQ - DiffOp.scalar(1, 25)
        out = injectivity_test(A, 128, margin=1e-6)
        assert out["verdict"] == KERNEL_DETECTED
        from nilgeom.diffop import adjoint
        ata = compose(adjoint(A), A)
        rows = eigenvalues(hermite_matrix(ata, 128), 1)
        assert abs(rows[0]["value"]) < 1e-6 ** 2 * 100


class TestRocklandScan:
    def test_dc_n2_grid(self):
        def family(c):
            return [("pi3", -QUARTIC_SQ + DiffOp.scalar(1, c))]
        out = rockland_scan(family, [F(v) for v in range(0, 31)], M=128)
        assert [int(c) for c in out["obstructions"]] == [1, 9, 25]
        assert not out["inconclusive"]
        assert not out["maximally_hypoelliptic_on_grid"]

    def test_scalar_nonvanishing(self):
        def family(c):
            return [("pi1", DiffOp.scalar(0, F(1), F(2))),
                    ("pi3", -QUARTIC_SQ + DiffOp.scalar(1, c))]
        out = rockland_scan(family, [F(0), F(5)], M=96)
        assert out["maximally_hypoelliptic_on_grid"]
        scalar_rows = [r for r in out["rows"] if r["rep"] == "pi1"]
        assert all(r["verdict"] == INJECTIVE for r in scalar_rows)

    def test_scalar_zero_is_obstruction(self):
        def family(c):
            return [("pi1", DiffOp.scalar(0, c))]
        out = rockland_scan(family, [F(0), F(1)], M=96)
        assert out["obstructions"] == [F(0)]

    def test_unsupported_k2_inconclusive(self):
        def family(c):
            return [("pi_big", DiffOp.identity(2))]
        out = rockland_scan(family, [F(0)], M=96)
        assert out["inconclusive"] == [F(0)]
        assert out["rows"][0]["verdict"] == UNSUPPORTED

    def test_verdict_invariant_under_dilation_rescale(self):
        # scaling the operator by lambda^{2 order} rescales sigma_min but not
        # the verdict when the margin is rescaled accordingly
        def family(c):
            return [("pi3", -QUARTIC_SQ + DiffOp.scalar(1, c))]
        lam = F(9, 7)
        scale = lam ** 4

        def scaled_family(c):
            return [("pi3", (-QUARTIC_SQ + DiffOp.scalar(1, c)) * scale)]
        grid = [F(0), F(1), F(2), F(9)]
        base = rockland_scan(family, grid, M=96, margin=1e-6)
        scaled = rockland_scan(scaled_family, grid, M=96,
                               margin=1e-6 * float(scale))
        assert base["obstructions"] == scaled["obstructions"]
