import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from heckepair import montecarlo as mc
from heckepair.arith import straighten
from heckepair.paircorr import PairCorrConfig

FF = PairCorrConfig(0.25, 50)


class TestConfig:
    @pytest.mark.parametrize("kw", [dict(n=0), dict(n=5, model="gue"), dict(n=5, seed=-1)])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            mc.SampleConfig(**kw)


class TestInverse:
    def test_round_trip(self):
        u = np.linspace(0, 1, 20001)
        th = mc.inverse_straighten(u)
        assert np.max(np.abs(straighten(th) - u)) < 1e-12
        assert np.all(np.diff(th) > 0)

    @given(st.floats(0, 1))
    def test_property(self, u):
        th = float(mc.inverse_straighten(u)[0])
        assert abs(straighten(th) - u) < 1e-12

    def test_theta_accuracy(self):
        # away from the flat endpoints H' = mu >= 0.1, so theta error <= 1e-11
        th = np.linspace(0.08, 0.92, 501)
        back = mc.inverse_straighten(straighten(th))
        assert np.max(np.abs(back - th)) < 1e-10

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            mc.inverse_straighten([1.5])


class TestSampling:
    def test_uniform_ks(self):
        a = mc.sample_angles(mc.SampleConfig(10_000, 3, "uniform"))
        assert mc.ks_uniform_distance(a.angles) < 1.63 / math.sqrt(10_000)

    def test_sato_tate_ks(self):
        a = mc.sample_angles(mc.SampleConfig(10_000, 3))
        assert mc.ks_uniform_distance(straighten(a.angles)) < 1.63 / math.sqrt(10_000)
        # raw angles are visibly not uniform
        assert mc.ks_uniform_distance(a.angles) > 0.05

    def test_deterministic(self):
        c = mc.SampleConfig(500, 99)
        a, b = mc.sample_angles(c, 4), mc.sample_angles(c, 4)
        assert np.array_equal(a.angles, b.angles)
        assert not np.array_equal(a.angles, mc.sample_angles(c, 5).angles)

    def test_window(self):
        a = mc.sample_angles(mc.SampleConfig(25, 0))
        assert a.window.primes[-1] == 97 and a.count == 25

    def test_moments_vanish(self):
        th = mc.sample_angles(mc.SampleConfig(10_000, 21)).angles
        ap = 2 * np.cos(np.pi * th)          # a(p), variance 1
        ap2 = 2 * np.cos(2 * np.pi * th) + 1  # a(p^2), variance 1
        se = 1 / math.sqrt(th.size)
        assert abs(ap.mean()) < 3 * se and abs(ap2.mean()) < 3 * se
        # so the mean of 2 cos(2 pi theta) itself is -1
        assert abs((2 * np.cos(2 * np.pi * th)).mean() + 1) < 3 * se


class TestExperiments:
    def test_zero_rho(self):
        c = PairCorrConfig(0.25, 10, "zero", "fejer")
        t = mc.poisson_expectation_experiment(c, mc.SampleConfig(200, 1), 3)
        assert t.mean == 0.0 and t.target == 0.0 and t.stderr == 0.0

    def test_targets(self):
        t = mc.poisson_expectation_experiment(PairCorrConfig(1 / 3, 10), mc.SampleConfig(300, 1), 2)
        assert t.target == pytest.approx(1.5)

    def test_too_few_trials(self):
        with pytest.raises(ValueError):
            mc.poisson_expectation_experiment(FF, mc.SampleConfig(100, 1), 1)

    def test_threads_identical(self):
        s = mc.SampleConfig(2000, 17)
        a = mc.poisson_expectation_experiment(FF, s, 8, threads=1)
        b = mc.poisson_expectation_experiment(FF, s, 8, threads=4)
        assert a == b

    def test_small_poisson(self):
        t = mc.poisson_expectation_experiment(PairCorrConfig(0.25, 20), mc.SampleConfig(3000, 5), 20)
        assert abs(t.z_score) < 4
        assert t.as_dict()["trials"] == 20

    def test_single_form_variance(self):
        rows = mc.variance_trend_experiment(FF, [50, 200], 1, 0)
        assert rows == [(50, 0.0), (200, 0.0)]

    def test_unsorted(self):
        with pytest.raises(ValueError):
            mc.variance_trend_experiment(FF, [200, 50], 3, 0)

    def test_small_trend(self):
        rows = mc.variance_trend_experiment(PairCorrConfig(0.25, 10), [100, 2000], 40, 3)
        assert rows[1][1] < rows[0][1]

    def test_trend_threads(self):
        c = PairCorrConfig(0.25, 10)
        assert (mc.variance_trend_experiment(c, [60, 120], 6, 9, threads=1)
                == mc.variance_trend_experiment(c, [60, 120], 6, 9, threads=3))
