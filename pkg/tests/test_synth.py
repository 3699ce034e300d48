import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from accest import synth as Y
from accest.errors import InvalidInput, InvalidParameter
from accest.predmatrix import accuracy

SMALL = Y.WorldSpec(class_count=5, feature_dim=16, mean_radius=4.0, seed=7)


def acc_of(world, scenario, tau=0.4):
    return accuracy(Y.generate_set(world, scenario).labeled(tau))


class TestWorld:
    def test_sphere(self):
        w = Y.build_world(Y.WorldSpec(2, 2, 3.0, 11))
        np.testing.assert_allclose(np.linalg.norm(w.means, axis=1), 3.0, atol=1e-12)

    def test_deterministic(self):
        a, b = Y.build_world(SMALL), Y.build_world(SMALL)
        assert a.means.tobytes() == b.means.tobytes()
        assert Y.build_world(Y.WorldSpec(seed=1)).means.tobytes() != Y.build_world(Y.WorldSpec(seed=2)).means.tobytes()

    @pytest.mark.parametrize("kw", [{"class_count": 1}, {"feature_dim": 1}, {"mean_radius": 0.0},
                                    {"classifier_scale": -1.0}, {"seed": -1}])
    def test_invalid_spec(self, kw):
        with pytest.raises(InvalidParameter):
            Y.WorldSpec(**kw)

    @pytest.mark.parametrize("beta", [0.01, 0.25, 10.0, 1000.0])
    def test_decisions_match_nearest_mean(self, beta):
        # Equal-norm means make argmax <m_j, x> the nearest-mean rule for every beta.
        w = Y.build_world(Y.WorldSpec(5, 16, 1.5, 7, beta))
        gen = Y.generate_set(w, Y.clean_scenario(w, 400, 3))
        labels = np.repeat(np.arange(5), 400)
        x = w.means[labels] + Y._rng(3).standard_normal((labels.size, 16))
        nearest = np.argmin(((x[:, None, :] - w.means[None]) ** 2).sum(-1), axis=1)
        predicted = np.argmax(gen.raw.values, axis=1)
        assert 0.5 < np.mean(nearest == labels) < 0.99  # a non-trivial error rate
        np.testing.assert_array_equal(predicted, nearest)

    def test_intensity_increasing(self):
        w = Y.build_world(SMALL)
        for fam in Y.ALL_FAMILIES:
            vals = [w.intensity_value(fam, lv) for lv in range(1, 6)]
            assert all(a < b for a, b in zip(vals, vals[1:]))
        with pytest.raises(InvalidParameter):
            w.intensity_value(Y.ShiftFamily.MEAN_DRIFT, 6)


class TestGenerate:
    def test_identity_at_zero(self):
        w = Y.build_world(SMALL)
        clean = Y.generate_set(w, Y.clean_scenario(w, 100, 5))
        for fam in Y.ALL_FAMILIES:
            sc = Y.ShiftScenario("z", fam, 1, 0.0, (100,) * 5, 5)
            gen = Y.generate_set(w, sc)
            np.testing.assert_array_equal(gen.raw.values, clean.raw.values)

    def test_noise_degrades_monotonically(self):
        w = Y.build_world(SMALL)
        accs = [acc_of(w, Y.ShiftScenario(f"n{lv}", Y.ShiftFamily.FEATURE_NOISE, lv,
                                          w.intensity_value(Y.ShiftFamily.FEATURE_NOISE, lv),
                                          (400,) * 5, 99))
                for lv in range(1, 6)]
        assert all(a >= b for a, b in zip(accs, accs[1:])), accs
        assert accs[0] > accs[-1]

    def test_counts(self):
        w = Y.build_world(Y.WorldSpec(3, 4, 2.0, 0))
        gen = Y.generate_set(w, Y.ShiftScenario("c", None, 0, 0.0, (16, 8, 4), 1))
        assert gen.raw.values.shape == (28, 3)
        np.testing.assert_array_equal(np.bincount(gen.labels), [16, 8, 4])

    def test_bad_counts(self):
        w = Y.build_world(Y.WorldSpec(3, 4, 2.0, 0))
        with pytest.raises(InvalidInput):
            Y.ShiftScenario("c", None, 0, 0.0, (0, 0, 0), 1)
        with pytest.raises(InvalidInput):
            Y.ShiftScenario("c", None, 0, 0.0, (1, -1, 0), 1)
        with pytest.raises(InvalidInput):
            Y.generate_set(w, Y.ShiftScenario("c", None, 0, 0.0, (4, 4), 1))

    def test_deterministic(self):
        w = Y.build_world(SMALL)
        sc = Y.make_benchmark(w, 3, 2, 2, seed=4, samples_per_class=20)
        for s in sc:
            a, b = Y.generate_set(w, s), Y.generate_set(w, s)
            assert a.raw.values.tobytes() == b.raw.values.tobytes()

    def test_composed_applies_in_order(self):
        w = Y.build_world(SMALL)
        steps = ((Y.ShiftFamily.FEATURE_SCALE, 0.5), (Y.ShiftFamily.FEATURE_NOISE, 1.0))
        sc = Y.ShiftScenario("c", None, 0, 0.0, (30,) * 5, 8, composed=steps)
        gen = Y.generate_set(w, sc)
        g = Y._rng(8)
        labels = np.repeat(np.arange(5), 30)
        x = w.means[labels] + g.standard_normal((150, 16))
        for fam, s in steps:
            x = Y.apply_shift(x, fam, s, w, g)
        np.testing.assert_array_equal(gen.raw.values, w.logits(x))
        assert sc.group == "composed"


class TestImbalance:
    def test_examples(self):
        np.testing.assert_array_equal(Y.imbalance_counts(3, 16, 0.25), [16, 8, 4])
        np.testing.assert_array_equal(Y.imbalance_counts(6, 50, 1.0), [50] * 6)

    @pytest.mark.parametrize("m", [0.1, 0.2, 0.4, 0.6, 0.8])
    def test_reference_ratios(self, m):
        c = Y.imbalance_counts(10, 200, m)
        assert c[0] == 200 and c[-1] == int(np.floor(200 * m + 0.5))
        assert np.all(np.diff(c) <= 0)

    @pytest.mark.parametrize("m", [0.0, -0.5, 1.01])
    def test_bad_ratio(self, m):
        with pytest.raises(InvalidParameter):
            Y.imbalance_counts(5, 10, m)


class TestSubsample:
    def labeled(self, n=10):
        w = Y.build_world(Y.WorldSpec(2, 4, 2.0, 0))
        return Y.generate_set(w, Y.ShiftScenario("s", None, 0, 0.0, (n // 2, n - n // 2), 0)).labeled()

    def test_full(self):
        L = self.labeled()
        S = Y.subsample(L, 1.0, 3)
        np.testing.assert_array_equal(S.matrix.rows, L.matrix.rows)
        np.testing.assert_array_equal(S.labels, L.labels)

    def test_half(self):
        assert Y.subsample(self.labeled(), 0.5, 3).labels.size == 5

    def test_deterministic(self):
        np.testing.assert_array_equal(Y.subsample_indices(100, 0.3, 9), Y.subsample_indices(100, 0.3, 9))
        assert not np.array_equal(Y.subsample_indices(100, 0.3, 9), Y.subsample_indices(100, 0.3, 10))

    @pytest.mark.parametrize("f", [0.0, -0.1, 1.5])
    def test_bad_fraction(self, f):
        with pytest.raises(InvalidParameter):
            Y.subsample_indices(10, f, 0)

    @settings(max_examples=200, deadline=None)
    @given(st.integers(1, 500), st.floats(0.01, 1.0), st.integers(0, 2**32))
    def test_size_and_uniqueness(self, n, f, seed):
        idx = Y.subsample_indices(n, f, seed)
        assert idx.size == min(n, int(np.ceil(round(f * n, 9))))
        assert np.all(np.diff(idx) > 0) and idx[-1] < n


class TestBenchmark:
    def test_sizes(self):
        w = Y.build_world(SMALL)
        assert len(Y.make_benchmark(w, 3, 5)) == 15
        sc = Y.make_benchmark(w, 3, 5, 200)
        assert len(sc) == 215
        assert len({s.name for s in sc}) == 215
        assert len({s.seed for s in sc}) == 215

    def test_composed_structure(self):
        w = Y.build_world(SMALL)
        for s in Y.make_benchmark(w, 3, 5, 50, seed=2)[15:]:
            fams = [f for f, _ in s.composed]
            assert len(set(fams)) == 3
            assert all(0 <= v <= w.family_max(f) for f, v in s.composed)

    def test_deterministic(self):
        w = Y.build_world(SMALL)
        assert Y.make_benchmark(w, 3, 5, 10, seed=1) == Y.make_benchmark(w, 3, 5, 10, seed=1)
        assert Y.make_benchmark(w, 3, 5, 10, seed=1) != Y.make_benchmark(w, 3, 5, 10, seed=2)

    def test_imbalanced(self):
        w = Y.build_world(Y.WorldSpec(3, 4, 2.0, 0))
        sc = Y.make_benchmark(w, 1, 2, imbalance=0.25, samples_per_class=16)
        assert all(s.samples_per_class == (16, 8, 4) for s in sc)

    @pytest.mark.parametrize("args", [(0, 5), (4, 5), (3, 0)])
    def test_invalid(self, args):
        with pytest.raises(InvalidParameter):
            Y.make_benchmark(Y.build_world(SMALL), *args)
