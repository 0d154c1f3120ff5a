import math

import numpy as np
import pytest

from tl1it.problems import (
    DctMatrixSpec,
    GaussianMatrixSpec,
    NoiseSpec,
    ProblemInstance,
    RngStream,
    SignalSpec,
    apply_noise,
    gen_dct_matrix,
    gen_gaussian_matrix,
    gen_signal,
    make_instance,
    mutual_coherence,
)


def truncated_normal_std(sigma, cap):
    # closed form for N(0, sigma^2) conditioned on |e| <= cap
    c = cap / sigma
    pdf = math.exp(-0.5 * c * c) / math.sqrt(2 * math.pi)
    mass = math.erf(c / math.sqrt(2))
    return sigma * math.sqrt(1 - 2 * c * pdf / mass)


class TestRngStream:
    def test_same_key_same_draws(self):
        a = RngStream(3, 9).generator().standard_normal(5)
        b = RngStream(3, 9).generator().standard_normal(5)
        np.testing.assert_array_equal(a, b)

    def test_distinct_keys(self):
        base = RngStream(3, 9)
        draws = [
            base.generator().standard_normal(5),
            RngStream(3, 10).generator().standard_normal(5),
            RngStream(4, 9).generator().standard_normal(5),
            base.child(0).generator().standard_normal(5),
            base.child(1).generator().standard_normal(5),
        ]
        for i in range(len(draws)):
            for j in range(i):
                assert not np.array_equal(draws[i], draws[j])


class TestGaussian:
    @pytest.mark.parametrize("r", [0.0, 0.3])
    def test_column_covariance(self, r):
        A = gen_gaussian_matrix(GaussianMatrixSpec(2000, 6, r), RngStream(1, 0))
        C = A.T @ A / 2000
        off = C[~np.eye(6, dtype=bool)]
        assert np.all(np.abs(off - r) <= 0.05)
        assert np.all(np.abs(np.diag(C) - 1.0) <= 0.1)

    def test_deterministic(self):
        spec = GaussianMatrixSpec(10, 20, 0.2)
        np.testing.assert_array_equal(
            gen_gaussian_matrix(spec, RngStream(5, 1)), gen_gaussian_matrix(spec, RngStream(5, 1))
        )

    @pytest.mark.parametrize("r", [-0.1, 1.0])
    def test_bad_r(self, r):
        with pytest.raises(ValueError):
            GaussianMatrixSpec(4, 4, r)


class TestDct:
    def test_first_column_and_norms(self):
        A = gen_dct_matrix(DctMatrixSpec(50, 300, 4.0), RngStream(2, 0))
        np.testing.assert_allclose(A[:, 0], np.full(50, 1 / math.sqrt(50)), rtol=0, atol=1e-15)
        assert np.linalg.norm(A[:, 0]) == pytest.approx(1.0, abs=1e-14)
        assert np.all(np.linalg.norm(A, axis=0) <= 1.0 + 1e-12)

    def test_bad_F(self):
        with pytest.raises(ValueError):
            DctMatrixSpec(10, 10, 0.5)

    def test_coherence_grows_with_F(self):
        mus = [
            mutual_coherence(gen_dct_matrix(DctMatrixSpec(100, 1000, F), RngStream(1, 0)))
            for F in (1.0, 10.0, 20.0)
        ]
        assert mus[0] < mus[1] < mus[2]
        assert 0.99 <= mus[1] <= 1.0
        assert mus[2] >= 0.999


class TestSignal:
    def test_sparsity_and_determinism(self):
        spec = SignalSpec(100, 7)
        x = gen_signal(spec, RngStream(1, 0))
        assert np.count_nonzero(x) == 7
        np.testing.assert_array_equal(x, gen_signal(spec, RngStream(1, 0)))

    def test_zero_k(self):
        np.testing.assert_array_equal(gen_signal(SignalSpec(10, 0), RngStream(1, 0)), np.zeros(10))

    def test_separation(self):
        for seed in range(30):
            x = gen_signal(SignalSpec(1500, 20, 16), RngStream(seed, 0))
            idx = np.flatnonzero(x)
            assert idx.size == 20
            assert np.all(np.diff(idx) >= 16)

    def test_tightest_packing(self):
        # N = (k - 1) * sep + 1 leaves exactly one admissible support
        x = gen_signal(SignalSpec(13, 4, 4), RngStream(0, 0))
        np.testing.assert_array_equal(np.flatnonzero(x), [0, 4, 8, 12])

    def test_infeasible(self):
        with pytest.raises(ValueError):
            SignalSpec(12, 4, 4)
        with pytest.raises(ValueError):
            SignalSpec(5, 6)

    def test_uniform_support(self):
        # every index equally likely without a separation constraint
        counts = np.zeros(10)
        for seed in range(4000):
            counts += gen_signal(SignalSpec(10, 2), RngStream(seed, 0)) != 0
        np.testing.assert_allclose(counts / 4000, 0.2, atol=0.03)

    def test_amplitude_std(self):
        vals = np.concatenate(
            [gen_signal(SignalSpec(400, 200, 0, 2.0), RngStream(s, 0)) for s in range(20)]
        )
        vals = vals[vals != 0]
        assert np.std(vals) == pytest.approx(2.0, rel=0.05)


class TestNoise:
    def test_sigma_zero(self):
        y = np.array([1.0, -2.0])
        out = apply_noise(y, NoiseSpec(0.0), RngStream(1, 0))
        np.testing.assert_array_equal(out, y)
        assert out is not y

    def test_capped(self):
        eps = apply_noise(np.zeros(100_000), NoiseSpec(0.01, 0.01), RngStream(1, 0))
        assert np.max(np.abs(eps)) <= 0.01
        assert 0.0 < np.std(eps) < 0.01
        assert np.std(eps) == pytest.approx(truncated_normal_std(0.01, 0.01), rel=0.02)
        assert abs(np.mean(eps)) < 1e-4

    def test_uncapped(self):
        eps = apply_noise(np.zeros(100_000), NoiseSpec(0.01), RngStream(1, 0))
        assert np.std(eps) == pytest.approx(0.01, rel=0.02)

    def test_zero_cap_rejected(self):
        with pytest.raises(ValueError):
            NoiseSpec(0.01, 0.0)
        with pytest.raises(ValueError):
            NoiseSpec(-1.0)


class TestCoherence:
    def test_identity(self):
        assert mutual_coherence(np.eye(5)) == 0.0

    def test_duplicate_column(self):
        A = np.random.default_rng(0).standard_normal((6, 4))
        A[:, 3] = -2.0 * A[:, 1]
        assert mutual_coherence(A) == pytest.approx(1.0, abs=1e-12)

    def test_zero_column(self):
        A = np.eye(3)
        A[:, 1] = 0.0
        with pytest.raises(ValueError):
            mutual_coherence(A)

    def test_brute_force(self):
        A = np.random.default_rng(1).standard_normal((8, 12))
        best = 0.0
        for i in range(12):
            for j in range(i + 1, 12):
                c = abs(A[:, i] @ A[:, j]) / (np.linalg.norm(A[:, i]) * np.linalg.norm(A[:, j]))
                best = max(best, c)
        assert mutual_coherence(A) == pytest.approx(best, abs=1e-14)


class TestInstance:
    def test_consistency(self):
        inst = make_instance("gaussian", 20, 50, 3, RngStream(4, 2))
        np.testing.assert_allclose(inst.y, inst.A @ inst.x_true)
        assert inst.k == 3 and inst.seed == 4 and inst.family == "gaussian"

    def test_dct_default_separation(self):
        inst = make_instance("dct", 100, 1500, 10, RngStream(1, 0), F=8.0)
        assert inst.params["min_sep"] == 16
        assert np.all(np.diff(np.flatnonzero(inst.x_true)) >= 16)

    def test_noise_is_bounded(self):
        inst = make_instance("gaussian", 40, 80, 4, RngStream(1, 0), noise=NoiseSpec(0.01, 0.01))
        assert np.max(np.abs(inst.y - inst.A @ inst.x_true)) <= 0.01 + 1e-15
        assert inst.params["linf_cap"] == 0.01

    def test_noise_does_not_change_matrix_or_signal(self):
        clean = make_instance("gaussian", 10, 30, 2, RngStream(1, 0))
        noisy = make_instance("gaussian", 10, 30, 2, RngStream(1, 0), noise=NoiseSpec(0.1))
        np.testing.assert_array_equal(clean.A, noisy.A)
        np.testing.assert_array_equal(clean.x_true, noisy.x_true)

    def test_json_round_trip(self):
        inst = make_instance("dct", 12, 40, 2, RngStream(7, 3), F=2.0, noise=NoiseSpec(0.05))
        back = ProblemInstance.from_json(inst.to_json())
        for name in ("A", "y", "x_true"):
            a, b = getattr(inst, name), getattr(back, name)
            np.testing.assert_allclose(b, a, rtol=1e-15, atol=0)
        assert (back.k, back.seed, back.family, back.params) == (inst.k, inst.seed, inst.family, inst.params)

    def test_from_dict_validation(self):
        with pytest.raises(ValueError):
            ProblemInstance.from_dict({"A": [[1.0]], "y": [1.0]})
        with pytest.raises(ValueError):
            ProblemInstance.from_dict({"A": [[1.0, 0.0]], "y": [1.0, 2.0], "x_true": [0.0, 0.0], "k": 1})

    def test_unknown_family(self):
        with pytest.raises(ValueError):
            make_instance("fourier", 4, 8, 1, RngStream(1, 0))
