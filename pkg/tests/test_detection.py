"""Count histograms, component separation and readout fidelity."""

import numpy as np
import pytest
import scipy.stats as sps

from rydsim.detection import (
    CountModel,
    count_histograms,
    detection_fidelity,
    poisson_mixture_pmf,
    separate_histograms,
)


def _poisson_hist(mu, k_max=80):
    return sps.poisson.pmf(np.arange(k_max + 1), mu)


class TestPoissonMixture:
    def test_single_component_is_plain_poisson(self):
        pmf = poisson_mixture_pmf(np.array([7.0]), 40)
        assert np.allclose(pmf, _poisson_hist(7.0, 40), atol=1e-15)

    def test_mixture_mean(self):
        mus = np.array([2.0, 5.0, 11.0])
        pmf = poisson_mixture_pmf(mus, 60)
        k = np.arange(61)
        assert k @ pmf == pytest.approx(mus.mean(), rel=1e-6)

    def test_normalized(self):
        pmf = poisson_mixture_pmf(np.array([3.0, 9.0]), 60)
        assert pmf.sum() == pytest.approx(1.0, abs=1e-9)


class TestDetectionFidelity:
    def test_identical_histograms_no_better_than_chance(self):
        # discreteness keeps the best worst-case score at or just below 1/2
        h = _poisson_hist(10.0)
        fid, _ = detection_fidelity(h, h)
        assert fid <= 0.5 + 1e-12
        assert fid > 0.4

    def test_disjoint_histograms_give_one(self):
        present = np.array([1.0, 0.0, 0.0, 0.0])
        absent = np.array([0.0, 0.0, 0.0, 1.0])
        fid, tau = detection_fidelity(present, absent)
        assert fid == pytest.approx(1.0)
        assert 0 < tau <= 3

    def test_two_poisson_exact_vs_sampled(self):
        # excitation present suppresses the transmitted count
        mu1, mu0, p_exc = 5.0, 20.0, 0.45
        exact, _ = detection_fidelity(_poisson_hist(mu1), _poisson_hist(mu0))
        model = CountModel(mean_no_excitation=mu0, mean_with_excitation=mu1,
                           p_excitation=p_exc)
        shots = 40000
        gate, _no_gate = count_histograms(model, shots, seed=1)
        present, absent = separate_histograms(gate, p_exc, mu0)
        sampled, _ = detection_fidelity(present, absent)
        # binomial sampling error on the fidelity estimate
        sigma = 3.0 * np.sqrt(exact * (1 - exact) / (p_exc * shots))
        assert abs(sampled - exact) < max(sigma, 0.01)

    def test_prior_weighted_not_below_worst_case(self):
        p, q = _poisson_hist(5.0), _poisson_hist(20.0)
        worst, _ = detection_fidelity(p, q)
        weighted, _ = detection_fidelity(p, q, prior_present=0.5)
        assert weighted >= worst - 1e-12

    def test_empty_histogram_rejected(self):
        with pytest.raises(ValueError):
            detection_fidelity(np.zeros(4), _poisson_hist(5.0))


class TestSeparation:
    def test_roundtrip_recovers_component_mean(self):
        model = CountModel(mean_no_excitation=20.0, mean_with_excitation=5.0,
                           p_excitation=0.4)
        gate, _ = count_histograms(model, 60000, seed=3)
        present, absent = separate_histograms(gate, 0.4, 20.0)
        k = np.arange(present.size)
        mean_present = (k @ present) / present.sum()
        # clipping against the absent tail biases the recovered mean upward
        # by a few percent at this overlap
        assert mean_present == pytest.approx(5.0, rel=0.05)
        # truncation at the largest observed count clips a little pmf tail
        assert absent.sum() == pytest.approx(0.6 * gate.sum(), rel=1e-4)

    def test_mismatched_model_warns(self):
        # data is pure Poisson(20) but the claimed absent component sits at
        # mu0 = 5, so nearly all counts end up in the present remainder
        gate = _poisson_hist(20.0) * 10000
        with pytest.warns(UserWarning, match="mass"):
            separate_histograms(gate, 0.05, 5.0)

    def test_p_excitation_bounds(self):
        with pytest.raises(ValueError):
            separate_histograms(_poisson_hist(5.0), 0.0, 5.0)


class TestCountHistograms:
    def test_shapes_and_totals(self):
        model = CountModel(mean_no_excitation=12.0, mean_with_excitation=4.0,
                           p_excitation=0.3)
        gate, no_gate = count_histograms(model, 5000, seed=0)
        assert gate.size == no_gate.size
        assert gate.sum() == 5000
        assert no_gate.sum() == 5000

    def test_deterministic_for_fixed_seed(self):
        model = CountModel(mean_no_excitation=12.0, mean_with_excitation=4.0,
                           p_excitation=0.3)
        a = count_histograms(model, 1000, seed=9)
        b = count_histograms(model, 1000, seed=9)
        assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])

    def test_rejects_zero_shots(self):
        model = CountModel(12.0, 4.0, 0.3)
        with pytest.raises(ValueError):
            count_histograms(model, 0)
