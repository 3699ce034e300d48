import itertools
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from accest import stats as S
from accest.errors import DegenerateInput, InvalidInput

mpmath.mp.dps = 40


def probit_oracle(p):
    return float(mpmath.findroot(lambda z: mpmath.ncdf(z) - mpmath.mpf(p), 0))


vectors = st.integers(3, 30).flatmap(
    lambda n: st.tuples(
        st.lists(st.integers(-10**4, 10**4), min_size=n, max_size=n),
        st.lists(st.integers(-10**4, 10**4), min_size=n, max_size=n),
    )
).map(lambda xy: tuple(np.asarray(v, dtype=float) / 100 for v in xy))  # 0.01 grid, no near-ties


def spread_ok(v):
    v = np.asarray(v)
    return np.ptp(v) > 1e-6 * (1 + np.max(np.abs(v)))


class TestPearsonSpearman:
    def test_examples(self):
        assert S.pearson([1, 2, 3], [2, 4, 6]) == pytest.approx(1.0)
        assert S.pearson([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)
        assert S.pearson([1, 2, 3, 4], [1, 3, 2, 4]) == pytest.approx(0.8, abs=1e-12)
        assert S.spearman([1, 2, 3, 4], [1, 5, 9, 100]) == pytest.approx(1.0)
        assert S.spearman([1, 2, 3], [3, 2, 1]) == pytest.approx(-1.0)

    def test_tie(self):
        np.testing.assert_array_equal(S.average_ranks([1, 2, 2, 3]), [1, 2.5, 2.5, 4])
        assert S.spearman([1, 2, 2, 3], [1, 2, 3, 4]) == pytest.approx(3 / math.sqrt(10), abs=1e-12)

    def test_degenerate(self):
        with pytest.raises(DegenerateInput):
            S.pearson([1, 1, 1], [1, 2, 3])
        with pytest.raises(DegenerateInput):
            S.spearman([1, 2, 3], [5, 5, 5])
        with pytest.raises(InvalidInput):
            S.pearson([1, 2], [1, 2, 3])

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.integers(0, 5), min_size=2, max_size=9))
    def test_ranks_by_enumeration(self, v):
        # average rank of value a = mean position of a over all sorting orders
        n = len(v)
        expected = []
        for a in v:
            below = sum(b < a for b in v)
            equal = sum(b == a for b in v)
            positions = [below + j + 1 for j in range(equal)]
            expected.append(sum(positions) / equal)
        np.testing.assert_allclose(S.average_ranks(v), expected)
        assert sorted(S.average_ranks(v)).__len__() == n

    @settings(max_examples=200, deadline=None)
    @given(vectors)
    def test_symmetry_and_affine_invariance(self, xy):
        x, y = map(np.asarray, xy)
        if not (spread_ok(x) and spread_ok(y)):
            return
        r = S.pearson(x, y)
        assert -1 - 1e-12 <= r <= 1 + 1e-12
        assert S.pearson(y, x) == pytest.approx(r, abs=1e-12)
        assert S.pearson(3 * x + 7, y) == pytest.approx(r, abs=1e-9)
        rho = S.spearman(x, y)
        assert S.spearman(y, x) == pytest.approx(rho, abs=1e-12)
        assert S.spearman(2 * x - 1, y) == pytest.approx(rho, abs=1e-12)

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.integers(-20, 20), min_size=3, max_size=20),
           st.lists(st.integers(-20, 20), min_size=3, max_size=20))
    def test_spearman_monotone_invariance(self, a, b):
        n = min(len(a), len(b))
        x, y = np.array(a[:n], float), np.array(b[:n], float)
        if np.ptp(x) == 0 or np.ptp(y) == 0:
            return
        rho = S.spearman(x, y)
        assert S.spearman(np.exp(x / 10), y) == pytest.approx(rho, abs=1e-12)
        assert S.spearman(x, y**3) == pytest.approx(rho, abs=1e-12)
        assert S.spearman(-x, y) == pytest.approx(-rho, abs=1e-12)


class TestProbit:
    def test_examples(self):
        assert S.probit(0.5) == 0.0
        assert S.probit(0.975) == pytest.approx(1.959964, abs=1e-5)
        assert S.probit(0.975) == pytest.approx(1.959963984540054, abs=1e-12)

    def test_against_oracle(self):
        for p in [1e-6, 3e-5, 0.001, 0.02, 0.02425, 0.1, 0.3, 0.5, 0.77, 0.97575, 0.999, 1 - 1e-6]:
            assert S.probit(p) == pytest.approx(probit_oracle(p), abs=1e-9)

    def test_roundtrip(self):
        for p in np.arange(1, 1000) / 1000:
            assert S.normal_cdf(S.probit(p)) == pytest.approx(p, abs=1e-10)

    @settings(max_examples=200, deadline=None)
    @given(st.floats(1e-6, 1 - 1e-6))
    def test_symmetry(self, p):
        assert S.probit(p) == pytest.approx(-S.probit(1 - p), abs=1e-9)

    def test_clamping(self):
        assert S.probit_clamped(0.0) == (S.probit(1e-6), True)
        assert S.probit_clamped(1.0) == (S.probit(1 - 1e-6), True)
        assert S.probit_clamped(0.3)[1] is False
        with pytest.raises(InvalidInput):
            S.probit(float("nan"))


class TestFits:
    def test_ols_examples(self):
        x = np.arange(6.0)
        assert S.ols_fit(x, 2 * x + 1) == pytest.approx((2, 1))
        assert S.ols_fit(x, np.full(6, 3.5)) == pytest.approx((0, 3.5))
        assert S.ols_fit([0, 1, 2, 3], [1, 2, 2, 4]) == pytest.approx((0.9, 0.9), abs=1e-12)
        with pytest.raises(DegenerateInput):
            S.ols_fit([1, 1, 1], [1, 2, 3])

    def test_robust_clean(self, rng):
        x = rng.uniform(0, 10, 30)
        y = -0.7 * x + 2
        fit = S.robust_fit(x, y)
        assert fit.converged
        assert (fit.slope, fit.intercept) == pytest.approx(S.ols_fit(x, y), abs=1e-9)

    def test_robust_three_points(self):
        fit = S.robust_fit([0, 1, 2], [1, 3, 5])
        assert (fit.slope, fit.intercept) == pytest.approx((2, 1), abs=1e-12)

    def test_robust_outlier(self):
        x = np.append(np.arange(20.0), 10.0)
        y = np.append(np.arange(20.0), 100.0)
        fit = S.robust_fit(x, y)
        assert fit.converged
        assert abs(fit.slope - 1) < 0.05
        assert abs(fit.intercept) < 0.5
        ols = S.ols_fit(x, y)
        # The outlier sits mid-range, so OLS absorbs it mostly in the intercept.
        assert abs(ols[1]) > 3
        assert abs(fit.slope - 1) < abs(ols[0] - 1)

    def test_robust_leverage_outlier(self):
        x = np.append(np.arange(20.0), 40.0)
        y = np.append(np.arange(20.0), -40.0)
        assert abs(S.ols_fit(x, y)[0] - 1) > 0.5
        assert abs(S.robust_fit(x, y).slope - 1) < 0.05

    def test_robust_nonconvergence_flag(self, rng):
        x = rng.normal(size=40)
        y = x + rng.standard_cauchy(40)
        fit = S.robust_fit(x, y, max_iter=1)
        assert fit.iterations == 1
        assert fit.converged in (True, False)
        assert not S.robust_fit(x, y, max_iter=1, tol=0.0).converged

    def test_robust_too_few(self):
        with pytest.raises(InvalidInput):
            S.robust_fit([1, 2], [1, 2])

    def test_r_squared_examples(self):
        x = np.arange(5.0)
        y = np.array([1.0, 3, 2, 5, 4])
        assert S.r_squared(x, 2 * x, 2, 0) == 1.0
        assert S.r_squared(x, y, 0, y.mean()) == pytest.approx(0.0, abs=1e-15)
        with pytest.raises(DegenerateInput):
            S.r_squared(x, np.ones(5), 0, 1)

    @settings(max_examples=200, deadline=None)
    @given(vectors)
    def test_r_squared_is_pearson_squared(self, xy):
        x, y = map(np.asarray, xy)
        if not (spread_ok(x) and spread_ok(y)):
            return
        a, b = S.ols_fit(x, y)
        assert S.r_squared(x, y, a, b) == pytest.approx(S.pearson(x, y) ** 2, abs=1e-12)


class TestPrediction:
    def test_identity_scaled(self):
        for e in (0.1, 0.5, 0.93):
            v, w = S.predict_accuracy(e, 1.0, 0.0, True)
            assert v == pytest.approx(e, abs=1e-12) and w == []

    def test_constant(self):
        v, _ = S.predict_accuracy(0.3, 0.0, 0.7, True)
        assert v == pytest.approx(S.normal_cdf(0.7))

    def test_raw_flagged_not_clamped(self):
        v, w = S.predict_accuracy(0.9, 2.0, 0.0, False)
        assert v == pytest.approx(1.8) and w

    def test_scaled_clamp_warning(self):
        v, w = S.predict_accuracy(1.5, 1.0, 0.0, True)
        assert v == pytest.approx(1 - 1e-6, abs=1e-9) and w

    def test_range_mapping(self):
        v, _ = S.predict_accuracy(-0.5, 1.0, 0.0, True, estimate_range=(-1.0, 0.0))
        assert v == pytest.approx(0.5, abs=1e-12)


class TestCorrelate:
    def test_exact_probit_line(self):
        est = np.array([0.1, 0.3, 0.5, 0.7, 0.85])
        acc = [S.normal_cdf(0.8 * S.probit(e) - 0.2) for e in est]
        s = S.correlate(est, acc, scaled=True)
        assert s.r_squared == pytest.approx(1.0, abs=1e-12)
        assert (s.slope, s.intercept) == pytest.approx((0.8, -0.2), abs=1e-9)
        assert s.predict(0.6)[0] == pytest.approx(S.normal_cdf(0.8 * S.probit(0.6) - 0.2), abs=1e-9)

    def test_reversed(self):
        s = S.correlate([0.1, 0.2, 0.3, 0.4], [0.9, 0.8, 0.7, 0.6], scaled=False)
        assert s.spearman_rho == pytest.approx(-1.0)
        assert s.r_squared == pytest.approx(s.pearson_r**2, abs=1e-12)

    def test_residuals_and_dict(self):
        s = S.correlate([0.2, 0.4, 0.5, 0.9], [0.3, 0.5, 0.4, 0.8], scaled=False, robust=True)
        assert s.method == "huber"
        assert len(s.residuals) == 4
        d = s.to_dict()
        assert d["scaled"] is False and d["estimate_range"] is None

    def test_too_few(self):
        with pytest.raises(InvalidInput):
            S.correlate([0.1, 0.2], [0.1, 0.2])

    def test_clamp_warnings(self):
        s = S.correlate([0.0, 0.5, 0.7], [0.2, 0.5, 1.0], scaled=True)
        assert len(s.warnings) == 2
