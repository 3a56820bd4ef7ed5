import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from heckepair import arith
from heckepair._quad import integrate
from heckepair.montecarlo import generator

angles = st.floats(0.0, 1.0, allow_nan=False)


class TestDensity:
    @pytest.mark.parametrize("t, want", [(0.0, 0.0), (0.5, 2.0), (0.25, 1.0)])
    def test_values(self, t, want):
        assert arith.st_density(t) == pytest.approx(want, abs=1e-15)

    def test_total_mass(self):
        assert integrate(arith.st_density, 0.0, 1.0) == pytest.approx(1.0, abs=1e-10)

    @given(angles)
    def test_reflection(self, t):
        assert arith.st_density(t) == pytest.approx(arith.st_density(1 - t), abs=1e-14)

    @pytest.mark.parametrize("t", [-0.1, 1.1])
    def test_out_of_range(self, t):
        with pytest.raises(ValueError):
            arith.st_density(t)


class TestStraighten:
    def test_endpoints(self):
        assert arith.straighten(0.0) == 0.0
        assert arith.straighten(1.0) == pytest.approx(1.0, abs=1e-15)

    def test_quarter_against_quadrature(self):
        q = integrate(arith.st_density, 0.0, 0.25)
        assert arith.straighten(0.25) == pytest.approx(q, abs=1e-12)
        assert q == pytest.approx(0.25 - 1 / (2 * math.pi), abs=1e-12)

    def test_monotone_grid(self):
        h = np.asarray(arith.straighten(np.linspace(0, 1, 10_000)))
        assert np.all(np.diff(h) > 0)

    @given(angles)
    def test_symmetry(self, th):
        assert arith.straighten(1 - th) == pytest.approx(1 - arith.straighten(th), abs=1e-12)


class TestAngle:
    @pytest.mark.parametrize("a, th", [(2.0, 0.0), (0.0, 0.5), (-2.0, 1.0)])
    def test_values(self, a, th):
        assert arith.angle_from_eigenvalue(a) == pytest.approx(th, abs=1e-15)

    def test_slack_clamps(self):
        assert arith.angle_from_eigenvalue(2.0 + 5e-10) == 0.0
        assert arith.angle_from_eigenvalue(-2.0 - 5e-10) == 1.0

    def test_deligne_violation(self):
        with pytest.raises(arith.DeligneBoundError):
            arith.angle_from_eigenvalue(2.001)

    @given(angles)
    def test_round_trip(self, th):
        assert arith.angle_from_eigenvalue(2 * math.cos(math.pi * th)) == pytest.approx(th, abs=1e-7)

    def test_round_trip_grid(self):
        # acos loses digits near the endpoints; interior round trip is exact to 1e-12
        th = np.linspace(0.001, 0.999, 2001)
        back = arith.angle_from_eigenvalue(2 * np.cos(np.pi * th))
        assert np.max(np.abs(back - th)) < 1e-12


class TestChebyshev:
    def test_m0(self):
        assert arith.chebyshev_eigenvalue(0.37, 0) == 1.0

    def test_theta_zero(self):
        assert arith.chebyshev_eigenvalue(0.0, 5) == 6.0

    def test_closed_form(self):
        want = math.sin(5 * 0.3 * math.pi) / math.sin(0.3 * math.pi)
        assert arith.chebyshev_eigenvalue(0.3, 4) == pytest.approx(want, abs=1e-13)

    @given(angles, st.integers(0, 60))
    def test_bound_and_oracle(self, th, m):
        v = arith.chebyshev_eigenvalue(th, m)
        assert abs(v) <= m + 1 + 1e-9
        assert v == pytest.approx(arith.chebyshev_closed_form(th, m), abs=1e-8 * (m + 1) ** 2)

    def test_table_matches_scalar(self):
        t = arith.chebyshev_table(0.137, 20)
        assert t[13] == pytest.approx(arith.chebyshev_eigenvalue(0.137, 13), abs=1e-13)


class TestIdentities:
    def test_cosine_l0(self):
        assert arith.check_cosine_identity(0.41, 0) == (2.0, 2.0)

    def test_cosine_theta0(self):
        lhs, rhs = arith.check_cosine_identity(0.0, 7)
        assert lhs == pytest.approx(2.0) and rhs == pytest.approx(2.0)

    def test_cosine_example(self):
        lhs, rhs = arith.check_cosine_identity(0.137, 12)
        assert abs(lhs - rhs) < 1e-10
        assert lhs == pytest.approx(2 * math.cos(2 * math.pi * 12 * 0.137), abs=1e-12)

    def test_products_trivial(self):
        assert arith.check_hecke_products(0.2, 0.7, 0, 0, 0, 0)

    @pytest.mark.parametrize("i, j", [(0, 3), (4, 4), (7, 2), (10, 10)])
    def test_products_theta0_exact(self, i, j):
        assert (i + 1) * (j + 1) == sum(i + j - 2 * t + 1 for t in range(min(i, j) + 1))
        res = arith.hecke_product_residuals(0.0, 0.0, i, j, i, j)
        assert max(res.values()) == 0.0

    def test_randomized_1000(self):
        rng = generator(42, 1)
        worst_c = worst_h = 0.0
        for _ in range(1000):
            th1, th2 = (float(v) for v in rng.random(2))
            i, j, l, n = (int(v) for v in rng.integers(0, 21, size=4))
            lhs, rhs = arith.check_cosine_identity(th1, l)
            worst_c = max(worst_c, abs(lhs - rhs))
            worst_h = max(worst_h, max(arith.hecke_product_residuals(th1, th2, i, j, l, n).values()))
            assert arith.check_hecke_products(th1, th2, i, j, l, n)
        assert worst_c < 1e-9 and worst_h < 1e-9

    @pytest.mark.parametrize("l, n", [(5, 2), (2, 5), (3, 3), (0, 4)])
    def test_power_times_difference_branches(self, l, n):
        th = 0.2718
        res = arith.hecke_product_residuals(th, 0.5, 1, 1, l, n)
        assert res["power_times_difference"] < 1e-12

    def test_index_cap(self):
        with pytest.raises(ValueError):
            arith.hecke_product_residuals(0.1, 0.2, arith.HECKE_INDEX_CAP + 1, 0, 0, 0)


class TestPrimeWindow:
    def test_small(self):
        w = arith.prime_window(10, 1)
        assert w.primes.tolist() == [2, 3, 5, 7] and w.count == 4

    def test_level(self):
        w = arith.prime_window(10, 6)
        assert w.primes.tolist() == [5, 7] and w.count == 2

    def test_count_1e5(self):
        # independent trial-division oracle on a coarse range, sieve count on the full one
        assert arith.prime_window(100_000, 1).count == 9592
        small = [p for p in range(2, 2000) if all(p % d for d in range(2, int(p ** 0.5) + 1))]
        assert arith.primes_upto(1999).tolist() == small

    def test_below_two_empty(self):
        assert arith.prime_window(1, 1).count == 0

    def test_read_only(self):
        w = arith.prime_window(30, 1)
        with pytest.raises(ValueError):
            w.primes[0] = 4

    @given(st.integers(2, 3000), st.integers(1, 500))
    @settings(max_examples=30)
    def test_invariants(self, x, N):
        w = arith.prime_window(x, N)
        ps = w.primes
        assert np.all(np.diff(ps) > 0)
        assert all(math.gcd(int(p), N) == 1 and p <= x for p in ps)
