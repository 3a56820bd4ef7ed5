import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from heckepair import kernels as K
from heckepair._quad import integrate
from heckepair.montecarlo import generator

WITH_SPACE = [K.FEJER, K.RAISED_COSINE]


def _terms(L):
    # Fejer tail ~ 2 / (pi^2 L^2 terms)
    return 200_000 if L < 10 else 20_000


class TestMakeKernel:
    def test_triangle_scale2(self):
        assert K.make_kernel(K.FEJER, 2).coeffs.tolist() == [0.5, 0.25, 0.0]

    @pytest.mark.parametrize("f", [K.FEJER, K.RAISED_COSINE])
    def test_scale1(self, f):
        c = K.make_kernel(f, 1).coeffs
        assert c[0] == f.value_at_zero and c[1] == pytest.approx(0.0, abs=1e-16)

    def test_raised_cosine_scale4(self):
        want = 0.25 * np.array([1, math.cos(math.pi / 8) ** 2, 0.5, math.cos(3 * math.pi / 8) ** 2, 0])
        np.testing.assert_allclose(K.make_kernel(K.RAISED_COSINE, 4).coeffs, want, atol=1e-16)

    def test_scale_zero_rejected(self):
        with pytest.raises(ValueError):
            K.make_kernel(K.FEJER, 0)

    def test_immutable(self):
        with pytest.raises(ValueError):
            K.make_kernel(K.FEJER, 3).coeffs[0] = 1.0


class TestEval:
    def test_zero(self):
        assert K.eval_kernel(K.make_kernel(K.ZERO, 7), 0.3) == 0.0

    def test_triangle_at_zero(self):
        assert K.eval_kernel(K.make_kernel(K.FEJER, 2), 0.0) == pytest.approx(1.0, abs=1e-15)

    @given(st.floats(-50, 50, allow_nan=False), st.sampled_from([1, 2, 5, 17]))
    def test_periodic(self, th, L):
        k = K.make_kernel(K.FEJER, L)
        assert K.eval_kernel(k, th + 1.0) == pytest.approx(K.eval_kernel(k, th), abs=1e-12)

    @pytest.mark.parametrize("f", [K.FEJER, K.RAISED_COSINE])
    @pytest.mark.parametrize("L", [3, 20])
    def test_mean_is_c0(self, f, L):
        k = K.make_kernel(f, L)
        assert integrate(lambda t: k(t), 0.0, 1.0) == pytest.approx(k.coeffs[0], abs=1e-9)

    def test_closed_forms_match(self):
        from heckepair._backend import periodized
        th = np.linspace(0, 1, 97)
        for f in WITH_SPACE:
            for L in (1, 4, 31):
                np.testing.assert_allclose(periodized(f.closed_kind, L, th),
                                           K.eval_kernel(K.make_kernel(f, L), th), atol=1e-12)


class TestLattice:
    def test_single_point(self):
        assert K.lattice_sum_oracle(K.FEJER, 1, 0.0, 0) == 1.0

    def test_fejer_example(self):
        k = K.make_kernel(K.FEJER, 5)
        assert abs(K.lattice_sum_oracle(K.FEJER, 5, 0.2, 10_000) - k(0.2)) < 1e-6

    def test_fejer_half(self):
        k = K.make_kernel(K.FEJER, 2)
        assert abs(K.lattice_sum_oracle(K.FEJER, 2, 0.5, 200_000) - k(0.5)) < 1e-6

    def test_missing_space_form(self):
        f = K.SpectralTestFunction("bare", K.FEJER.fourier_eval, 1.0, 2 / 3)
        with pytest.raises(ValueError):
            K.lattice_sum_oracle(f, 2, 0.1, 10)

    @pytest.mark.parametrize("f", WITH_SPACE, ids=lambda f: f.name)
    @pytest.mark.parametrize("L", [2, 10, 50])
    def test_100_random(self, f, L):
        k = K.make_kernel(f, L)
        rng = generator(2, L)
        worst = max(abs(K.lattice_sum_oracle(f, L, th, _terms(L)) - k(th)) for th in rng.random(100))
        assert worst < 1e-6


class TestTestFunctions:
    @pytest.mark.parametrize("f", list(K.BUILTINS.values()), ids=lambda f: f.name)
    def test_square_integral(self, f):
        assert K.square_integral_quadrature(f) == pytest.approx(f.square_integral, abs=1e-10)

    @pytest.mark.parametrize("f", list(K.BUILTINS.values()), ids=lambda f: f.name)
    def test_even_and_supported(self, f):
        t = np.linspace(-2, 2, 401)
        np.testing.assert_array_equal(f(t), f(-t))
        assert np.all(f(t[np.abs(t) > 1]) == 0)

    def test_lookup(self):
        assert K.get_test_function("triangle") is K.FEJER
        with pytest.raises(ValueError):
            K.get_test_function("gaussian")


class TestTables:
    def test_edge_zero(self):
        assert K.u_table(K.FEJER, 7, 0.3).U[-1] == 0.0

    def test_u0_example(self):
        assert K.u_table(K.FEJER, 2, 0.25).U[0] == pytest.approx(2.0, abs=1e-15)

    @pytest.mark.parametrize("psi", [1e-6, 0.1, 0.37, 0.8])
    def test_telescoping(self, psi):
        for f in (K.FEJER, K.RAISED_COSINE):
            U = K.u_table(f, 25, psi).U
            assert math.fsum(U) == pytest.approx(2 * f.value_at_zero, abs=1e-12)

    def test_definition(self):
        tab = K.coefficient_table(K.RAISED_COSINE, K.FEJER, 6, 40, 0.3)
        l = 4
        want = (K.RAISED_COSINE(l / 6) * 2 * math.cos(2 * math.pi * l * 0.3)
                - K.RAISED_COSINE((l + 1) / 6) * 2 * math.cos(2 * math.pi * (l + 1) * 0.3))
        assert tab.U[l] == pytest.approx(want, abs=1e-15)
        assert tab.G[10] == pytest.approx(0.75) and tab.A == pytest.approx(2 * math.sin(0.3 * math.pi) ** 2)

    @pytest.mark.parametrize("psi", [0.0, 0.5, 1.0, 1.2])
    def test_bad_psi(self, psi):
        with pytest.raises(ValueError):
            K.u_table(K.FEJER, 4, psi)


class TestMainTerm:
    def test_zero_g(self):
        assert K.t_g_rho(K.coefficient_table(K.FEJER, K.ZERO, 10, 100, 0.25)) == 0.0

    @given(st.sampled_from(list(K.BUILTINS.values())), st.sampled_from(list(K.BUILTINS.values())),
           st.integers(1, 60), st.integers(1, 500), st.floats(0.01, 0.49))
    @settings(max_examples=40)
    def test_nonnegative(self, rho, g, L, M, psi):
        assert K.t_g_rho(K.coefficient_table(rho, g, L, M, psi)) >= 0.0

    def test_oracle_sum(self):
        tab = K.coefficient_table(K.FEJER, K.FEJER, 8, 5, 0.25)
        direct = sum((tab.U[l] - tab.U[l - 1]) ** 2 * K.FEJER(l / 5) for l in range(1, 6))
        assert K.t_g_rho(tab) == pytest.approx(direct, rel=1e-14)

    def test_fejer_200(self):
        mt = K.main_term(K.coefficient_table(K.FEJER, K.FEJER, 200, 10_000, 0.25))
        assert abs(mt - 2 / 3) / (2 / 3) < 0.05

    def test_schedule(self):
        errs = [abs(K.main_term(K.coefficient_table(K.FEJER, K.FEJER, L, M, 0.25)) - 2 / 3)
                for L, M in [(50, 10**3), (100, 10**4), (200, 10**5), (400, 10**6)]]
        assert all(b < a for a, b in zip(errs, errs[1:]))
        assert errs[-1] / (2 / 3) < 0.05
        # frozen snapshot of the sequence
        assert errs[0] == pytest.approx(0.0470066666666664, rel=1e-9)


class TestPoisson:
    def test_quarter(self):
        assert K.poisson_limit(0.25, K.FEJER, K.FEJER) == pytest.approx(2 / 3, abs=1e-14)

    def test_third(self):
        assert K.poisson_limit(1 / 3, K.FEJER, K.FEJER) == pytest.approx(1.5, abs=1e-14)

    def test_half_rejected(self):
        with pytest.raises(ValueError):
            K.poisson_limit(0.5, K.FEJER, K.FEJER)


class TestMeanMass:
    def test_zero(self):
        lhs, rhs = K.mean_mass_identity(K.u_table(K.ZERO, 4, 0.25), K.make_kernel(K.ZERO, 4))
        assert lhs == 0.0 and rhs == pytest.approx(0.0, abs=1e-15)

    def test_example(self):
        lhs, rhs = K.mean_mass_identity(K.u_table(K.FEJER, 2, 0.25), K.make_kernel(K.FEJER, 2))
        assert lhs == pytest.approx(0.5) and rhs == pytest.approx(0.5, abs=1e-10)

    @pytest.mark.parametrize("f", list(K.BUILTINS.values()), ids=lambda f: f.name)
    @pytest.mark.parametrize("L", [2, 10, 50])
    @pytest.mark.parametrize("psi", [0.1, 0.25, 0.3, 0.4])
    def test_sweep(self, f, L, psi):
        lhs, rhs = K.mean_mass_identity(K.u_table(f, L, psi), K.make_kernel(f, L))
        assert abs(lhs - rhs) < 1e-8
