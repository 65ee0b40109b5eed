import math
import random
from fractions import Fraction

import numpy as np
import pytest

from nilgeom.grassmann import (DIVERGED, Subspace, annihilator, distance,
                               kernel, limit)

F = Fraction


class TestKernel:
    def test_identity_has_zero_kernel(self):
        assert kernel([[1, 0], [0, 1]]).dim == 0

    def test_zero_map_full_kernel(self):
        assert kernel([[0, 0, 0], [0, 0, 0]]).dim == 3

    def test_worked_example_matrix(self):
        k = kernel([[1, 0, 1, 0, 0], [0, 1, 0, 1, 1]])
        assert k.dim == 3
        fl = k.to_float()
        assert fl.contains([1, 0, -1, 0, 0])
        assert fl.contains([0, 1, 0, -1, 0])

    def test_rank_nullity(self):
        rng = random.Random(0)
        for _ in range(10):
            rows = [[F(rng.randint(-3, 3)) for _ in range(5)] for _ in range(3)]
            import nilgeom.linalg as la
            assert kernel(rows).dim + la.rank(rows) == 5


class TestDistance:
    def test_zero_on_equal(self):
        s = Subspace(3, [[1, 2, 3]], exact=True)
        assert distance(s, s) == 0

    def test_orthogonal_lines(self):
        a = Subspace(2, [[1, 0]], exact=True)
        b = Subspace(2, [[0, 1]], exact=True)
        assert abs(distance(a, b) - 1) < 1e-14

    def test_small_angle(self):
        a = Subspace(2, [[1, 0]], exact=True)
        b = Subspace(2, [[F(1), F(1, 10)]], exact=True)
        expected = 0.1 / math.sqrt(1.01)
        assert abs(distance(a, b) - expected) < 1e-12

    def test_dimension_mismatch(self):
        a = Subspace(2, [[1, 0]], exact=True)
        b = Subspace(2, [[1, 0], [0, 1]], exact=True)
        with pytest.raises(ValueError):
            distance(a, b)

    def test_triangle_inequality(self):
        rng = np.random.RandomState(1)
        for _ in range(25):
            subs = [Subspace.float_from_columns(4, rng.randn(2, 4))
                    for _ in range(3)]
            if any(s.dim != 2 for s in subs):
                continue
            a, b, c = subs
            assert distance(a, c) <= distance(a, b) + distance(b, c) + 1e-9


class TestLimit:
    def test_constant_sequence(self):
        s = Subspace(2, [[1, 1]], exact=True).to_float()
        assert limit([s] * 12) is s

    def test_alternating_diverges(self):
        a = Subspace(2, [[1, 0]], exact=True).to_float()
        b = Subspace(2, [[0, 1]], exact=True).to_float()
        out = limit([a, b] * 8)
        assert out[0] == DIVERGED
        assert max(out[1]) > 0.9

    def test_geometric_convergence(self):
        seq = [Subspace(2, [[F(1), F(1, 2) ** n]], exact=True).to_float()
               for n in range(1, 40)]
        out = limit(seq, tol=1e-6)
        assert not isinstance(out, tuple)
        assert distance(out, Subspace(2, [[1, 0]], exact=True).to_float()) < 1e-9


class TestAnnihilator:
    def test_zero_subspace(self):
        z = Subspace(3, [], exact=True)
        assert annihilator(z).dim == 3

    def test_full_space(self):
        full = Subspace(3, [[1, 0, 0], [0, 1, 0], [0, 0, 1]], exact=True)
        assert annihilator(full).dim == 0

    def test_pairing_vanishes(self):
        s = Subspace(4, [[1, 2, 3, 4], [0, 1, 1, 0]], exact=True)
        ann = annihilator(s)
        assert ann.dim == 2
        for col in s.columns:
            for a in ann.columns:
                assert sum(x * y for x, y in zip(col, a)) == 0

    def test_involution(self):
        rng = random.Random(7)
        for _ in range(10):
            cols = [[F(rng.randint(-3, 3)) for _ in range(5)] for _ in range(2)]
            s = Subspace.exact_from_columns(5, cols)
            back = annihilator(annihilator(s))
            assert back.dim == s.dim
            assert distance(back.to_float(), s.to_float()) < 1e-12

    def test_cone_annihilator_example(self, osc_n2_right):
        # span{2 X1 - Y, 2 X2 - Z1} in the 4-dim algebra at x != 0:
        # annihilator = span{X1* + 2 Y*, X2* + 2 Z1*} up to scale... pairing:
        # (a, b, c, d) with 2a - c = 0 and 2b - d = 0
        lam = F(2)
        cone = Subspace(4, [[lam, 0, -1, 0], [0, lam, 0, -1]], exact=True)
        ann = annihilator(cone)
        assert ann.dim == 2
        f = ann.to_float()
        assert f.contains([1, 0, 2, 0])
        assert f.contains([0, 1, 0, 2])

    def test_float_mode_rejected(self):
        s = Subspace(2, [[1.0, 0.0]], exact=False)
        with pytest.raises(ValueError):
            annihilator(s)
