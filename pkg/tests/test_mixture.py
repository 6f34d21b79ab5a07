import itertools
import logging

import numpy as np
import pytest
from conftest import random_unit, watson_mixture_data

from watsonmle import (
    EmConfig,
    MixtureModel,
    Responsibilities,
    SharedFixed,
    WatsonParams,
    diametrical,
    e_step_hard,
    e_step_soft,
    em_fit,
    fit,
    label_accuracy,
    m_step,
    metrics,
)
from watsonmle.mixture import EmptyComponentError, Init, Mode, mixture_log_likelihood


def two_bundles(p=30, kappa=100.0, n=150, seed=0):
    return watson_mixture_data(p, [kappa, kappa], [n, n], seed)


class TestTypes:
    def test_model_invariants(self):
        mus = np.eye(3)[:2]
        model = MixtureModel.from_arrays([2.0, 6.0], mus, [1.0, -1.0])
        np.testing.assert_allclose(model.pis, [0.25, 0.75])
        assert model.K == 2 and model.p == 3
        np.testing.assert_array_equal(model.kappas, [1.0, -1.0])
        d = model.as_dict()
        assert len(d["components"]) == 2
        with pytest.raises(ValueError):
            MixtureModel.from_arrays([-1.0, 2.0], mus, [1.0, 1.0])

    def test_responsibilities_row_sums(self):
        with pytest.raises(ValueError):
            Responsibilities(np.array([[0.5, 0.6]]))
        with pytest.raises(ValueError):
            Responsibilities(np.array([[1.5, -0.5]]))
        np.testing.assert_array_equal(Responsibilities(np.array([[0.2, 0.8], [1.0, 0.0]])).labels, [1, 0])

    def test_config_validation(self):
        with pytest.raises(ValueError):
            EmConfig(max_iters=0)
        with pytest.raises(ValueError):
            EmConfig(ll_rel_tol=0.0)
        with pytest.raises(ValueError):
            SharedFixed(float("nan"))
        assert EmConfig(mode="Hard").mode is Mode.HARD


class TestEStep:
    def test_single_component(self, rng):
        X, _, mus = two_bundles(p=5, n=20)
        model = MixtureModel.from_arrays([1.0], mus[:1], [3.0])
        np.testing.assert_array_equal(e_step_soft(X, model).beta, 1.0)
        np.testing.assert_array_equal(e_step_hard(X, model).beta, 1.0)

    def test_identical_components_return_priors(self):
        X, _, mus = two_bundles(p=5, n=20)
        model = MixtureModel.from_arrays([0.3, 0.7], [mus[0], mus[0]], [4.0, 4.0])
        beta = e_step_soft(X, model).beta
        np.testing.assert_allclose(beta, np.tile([0.3, 0.7], (40, 1)), atol=1e-15)

    def test_rows_stochastic(self):
        X, _, mus = two_bundles(p=8, n=50, kappa=20.0)
        model = MixtureModel.from_arrays([0.5, 0.5], mus, [20.0, -3.0])
        beta = e_step_soft(X, model).beta
        np.testing.assert_allclose(beta.sum(axis=1), 1.0, atol=1e-12)
        assert np.all(beta >= 0)

    def test_large_shared_kappa_picks_largest_squared_cosine(self):
        X, _, mus = two_bundles(p=6, n=100, kappa=2.0, seed=3)
        model = MixtureModel.from_arrays([0.5, 0.5], mus, [1e4, 1e4])
        np.testing.assert_array_equal(e_step_soft(X, model).labels, np.argmax((X @ mus.T) ** 2, axis=1))

    def test_hard_equals_diametrical_assignment(self):
        X, _, mus = two_bundles(p=6, n=100, kappa=2.0, seed=4)
        model = MixtureModel.from_arrays([0.5, 0.5], mus, [7.0, 7.0])
        np.testing.assert_array_equal(e_step_hard(X, model).labels, np.argmax((X @ mus.T) ** 2, axis=1))

    def test_distinct_kappas_differ_from_diametrical(self):
        # p = 3, mu_1 = e1 with large kappa, mu_2 = e2 with small kappa: a point
        # slightly closer to e2 can still prefer the sharp component.  Brute
        # force over a grid of directions in the e1-e2 plane.
        mus = np.eye(3)[:2]
        model = MixtureModel.from_arrays([0.5, 0.5], mus, [50.0, 1.0])
        theta = np.linspace(0, np.pi / 2, 181)
        X = np.column_stack([np.cos(theta), np.sin(theta), np.zeros_like(theta)])
        hard = e_step_hard(X, model).labels
        diam = np.argmax((X @ mus.T) ** 2, axis=1)
        differ = np.flatnonzero(hard != diam)
        assert differ.size > 0
        # the disagreement is exactly where the log-joint ordering and the cosine ordering part
        from watsonmle.watson import log_normalizer

        c = [log_normalizer(3, k) for k in (50.0, 1.0)]
        scores = np.column_stack([c[0] + 50.0 * X[:, 0] ** 2, c[1] + 1.0 * X[:, 1] ** 2])
        np.testing.assert_array_equal(hard, np.argmax(scores, axis=1))
        # the broad component claims points that sit only moderately close to the sharp mean
        assert np.all(theta[differ] <= np.pi / 4 + 1e-12)

    def test_hard_tie_goes_to_lowest_index(self):
        mus = np.eye(2)
        model = MixtureModel.from_arrays([0.5, 0.5], mus, [3.0, 3.0])
        x = np.array([[1.0, 1.0]]) / np.sqrt(2)
        assert e_step_hard(x, model).labels[0] == 0

    def test_dimension_mismatch(self):
        model = MixtureModel.from_arrays([1.0], np.eye(3)[:1], [1.0])
        with pytest.raises(ValueError, match="dimension"):
            e_step_soft(np.eye(4), model)


class TestMStep:
    def test_single_column_reduces_to_fit(self):
        X, _, _ = two_bundles(p=5, n=100, kappa=10.0)
        model = m_step(X, np.ones((X.shape[0], 1)))
        rep = fit(X)
        assert model.pis[0] == 1.0
        np.testing.assert_allclose(model.kappas[0], rep.params.kappa, rtol=1e-12)
        np.testing.assert_allclose(abs(model.mus[0] @ rep.params.mu), 1.0, atol=1e-12)

    def test_one_hot_beta_gives_per_cluster_fits(self):
        X, labels, _ = watson_mixture_data(10, [40.0, -20.0], [300, 200], seed=6)
        beta = np.eye(2)[labels]
        model = m_step(X, beta)
        for j in range(2):
            rep = fit(X[labels == j])
            np.testing.assert_allclose(model.kappas[j], rep.params.kappa, rtol=1e-12)
            np.testing.assert_allclose(abs(model.mus[j] @ rep.params.mu), 1.0, atol=1e-12)
        np.testing.assert_allclose(model.pis, [0.6, 0.4])
        assert model.kappas[1] < 0

    def test_priors_sum_to_one_and_equal_priors(self, rng):
        X, _, _ = two_bundles(p=4, n=30, kappa=5.0)
        beta = rng.dirichlet(np.ones(3), size=X.shape[0])
        np.testing.assert_allclose(m_step(X, beta).pis.sum(), 1.0, atol=1e-12)
        np.testing.assert_array_equal(m_step(X, beta, equal_priors=True).pis, np.full(3, 1 / 3))

    def test_shared_fixed_kappa(self):
        X, _, _ = two_bundles(p=4, n=30, kappa=5.0)
        model = m_step(X, np.eye(2)[np.arange(60) % 2], kappa_policy=SharedFixed(12.0))
        np.testing.assert_array_equal(model.kappas, [12.0, 12.0])

    def test_empty_component(self):
        X, _, _ = two_bundles(p=4, n=10)
        beta = np.zeros((20, 2))
        beta[:, 0] = 1.0
        with pytest.raises(EmptyComponentError) as info:
            m_step(X, beta)
        assert info.value.component == 1


class TestEmFit:
    def test_concentrated_bundles_perfect_accuracy(self):
        X, labels, _ = two_bundles(p=30, kappa=100.0, n=200, seed=7)
        res = em_fit(X, 2, EmConfig(seed=1))
        assert label_accuracy(res.responsibilities.labels, labels) == 100.0

    def test_single_component_matches_fit(self):
        X, _, _ = two_bundles(p=6, n=80, kappa=15.0)
        res = em_fit(X, 1, EmConfig(max_iters=2))
        rep = fit(X)
        np.testing.assert_allclose(res.model.kappas[0], rep.params.kappa, rtol=1e-12)
        np.testing.assert_allclose(res.ll_trace[-1], rep.log_likelihood, rtol=1e-12)

    def test_deterministic_given_seed(self):
        X, _, _ = two_bundles(p=8, n=60, kappa=10.0)
        a, b = em_fit(X, 2, EmConfig(seed=3)), em_fit(X, 2, EmConfig(seed=3))
        np.testing.assert_array_equal(a.responsibilities.beta, b.responsibilities.beta)
        assert a.ll_trace == b.ll_trace

    def test_soft_trace_monotone(self):
        X, _, _ = watson_mixture_data(5, [8.0, 3.0, -6.0], [80, 80, 80], seed=8)
        trace = np.array(em_fit(X, 3, EmConfig(seed=0)).ll_trace)
        assert np.all(np.diff(trace) >= -1e-10)

    def test_returned_responsibilities_match_model(self):
        X, _, _ = two_bundles(p=8, n=60, kappa=10.0)
        res = em_fit(X, 2, EmConfig(seed=0))
        np.testing.assert_allclose(res.responsibilities.beta, e_step_soft(X, res.model).beta, atol=1e-12)
        np.testing.assert_allclose(res.ll_trace[-1], mixture_log_likelihood(X, res.model), rtol=1e-12)

    def test_hard_mode_stops_at_fixpoint(self):
        X, _, _ = two_bundles(p=8, n=60, kappa=30.0)
        res = em_fit(X, 2, EmConfig(mode=Mode.HARD, seed=0))
        assert np.all(np.isin(res.responsibilities.beta, [0.0, 1.0]))
        assert len(res.ll_trace) < 200

    def test_diametrical_warm_start(self):
        X, labels, _ = two_bundles(p=10, n=100, kappa=50.0, seed=9)
        res = em_fit(X, 2, EmConfig(init=Init.DIAMETRICAL_WARM_START, seed=2))
        assert label_accuracy(res.responsibilities.labels, labels) == 100.0

    def test_empty_component_is_reseeded(self, caplog):
        X, _, mus = two_bundles(p=5, n=40, kappa=20.0)
        config = EmConfig(mode=Mode.HARD, initial_means=np.vstack([mus[0], mus[0]]), seed=0)
        with caplog.at_level(logging.WARNING, logger="watsonmle.mixture"):
            res = em_fit(X, 2, config)
        assert any("empty" in rec.message for rec in caplog.records)
        assert np.all(res.responsibilities.beta.sum(axis=0) > 0)

    def test_rejects_bad_k(self):
        X, _, _ = two_bundles(p=4, n=3)
        with pytest.raises(ValueError):
            em_fit(X, 7)
        with pytest.raises(ValueError):
            em_fit(X, 2, EmConfig(initial_means=np.eye(4)[:3]))


class TestDiametrical:
    def test_single_cluster_converges_to_dominant_eigenvector(self):
        X, _, _ = two_bundles(p=6, n=100, kappa=8.0)
        res = diametrical(X, 1, seed=0)
        top = np.linalg.eigh(X.T @ X)[1][:, -1]
        np.testing.assert_allclose(abs(res.centroids[0] @ top), 1.0, atol=1e-10)

    def test_axial_circle_data(self):
        # two axial clusters on the unit circle, each split across antipodes
        rng = np.random.default_rng(10)
        angles = np.concatenate([rng.normal(0.3, 0.1, 100), rng.normal(0.3 + np.pi, 0.1, 100),
                                 rng.normal(1.9, 0.1, 100), rng.normal(1.9 + np.pi, 0.1, 100)])
        X = np.column_stack([np.cos(angles), np.sin(angles)])
        truth = np.repeat([0, 0, 1, 1], 100)
        res = diametrical(X, 2, seed=0)
        assert label_accuracy(res.partition, truth) == 100.0
        np.testing.assert_allclose(np.linalg.norm(res.centroids, axis=1), 1.0)
        # Euclidean k-means on the same data: centroids fall inside the circle
        from scipy.cluster.vq import kmeans2

        centroids, km = kmeans2(X, 2, seed=0, minit="++")
        assert np.all(np.linalg.norm(centroids, axis=1) < 0.9)
        assert label_accuracy(km, truth) < 100.0

    def test_h_trace_monotone_and_deterministic(self):
        X, _, _ = watson_mixture_data(7, [5.0, 5.0, 5.0], [60, 60, 60], seed=11)
        a, b = diametrical(X, 3, seed=4), diametrical(X, 3, seed=4)
        assert np.all(np.diff(a.h_trace) >= -1e-12)
        np.testing.assert_array_equal(a.partition, b.partition)
        assert a.iterations == len(a.h_trace)

    def test_matches_hard_em_limit(self):
        X, _, _ = watson_mixture_data(8, [20.0, 20.0, 20.0], [50, 50, 50], seed=12)
        init = X[[0, 60, 120]]
        d = diametrical(X, 3, initial_means=init)
        cfg = EmConfig(mode=Mode.HARD, kappa_policy=SharedFixed(100.0), equal_priors=True,
                       mean_update="power", initial_means=init)
        np.testing.assert_array_equal(em_fit(X, 3, cfg).responsibilities.labels, d.partition)


class TestMetrics:
    def test_perfect_homogeneity(self):
        C = np.eye(3)[:2]
        X = np.vstack([C[0], -C[0], C[1]])
        m = metrics(X, [0, 0, 1], C)
        assert m.homogeneity == 1.0
        assert m.separation == 0.0

    def test_separation_never_positive(self, rng):
        for _ in range(20):
            C = np.array([random_unit(4, rng) for _ in range(3)])
            X = np.array([random_unit(4, rng) for _ in range(30)])
            m = metrics(X, rng.integers(0, 3, 30), C)
            assert m.separation <= 0.0
            assert 0.0 <= m.homogeneity <= 1.0

    def test_separation_value(self):
        c = np.array([[1.0, 0.0], [np.cos(0.5), np.sin(0.5)]])
        X = np.vstack([c[0], c[0], c[1]])
        np.testing.assert_allclose(metrics(X, [0, 0, 1], c).separation, -np.cos(0.5))

    def test_invalid_partition(self):
        with pytest.raises(ValueError):
            metrics(np.eye(2), [0, 2], np.eye(2))

    def test_permutation_invariance(self):
        X, _, mus = watson_mixture_data(5, [10.0, 4.0, -5.0], [40, 40, 40], seed=13)
        model = MixtureModel.from_arrays([0.2, 0.3, 0.5], mus, [10.0, 4.0, -5.0])
        perm = [2, 0, 1]
        permuted = MixtureModel.from_arrays(model.pis[perm], model.mus[perm], model.kappas[perm])
        np.testing.assert_allclose(mixture_log_likelihood(X, model), mixture_log_likelihood(X, permuted), rtol=1e-13)
        labels = e_step_hard(X, model).labels
        inverse = np.argsort(perm)
        a = metrics(X, labels, model.mus)
        b = metrics(X, inverse[labels], model.mus[perm])
        np.testing.assert_allclose([a.homogeneity, a.separation], [b.homogeneity, b.separation], rtol=1e-13)


class TestLabelAccuracy:
    def test_swapped_labels(self):
        assert label_accuracy([1, 1, 0, 0], [0, 0, 1, 1]) == 100.0

    def test_random_labels_near_half(self, rng):
        scores = [label_accuracy(rng.integers(0, 2, 400), np.repeat([0, 1], 200)) for _ in range(50)]
        assert 50.0 <= np.mean(scores) < 56.0

    def test_against_brute_force(self, rng):
        for _ in range(20):
            pred, true = rng.integers(0, 3, 12), rng.integers(0, 3, 12)
            best = max(np.mean(np.array(perm)[pred] == true) for perm in itertools.permutations(range(3)))
            np.testing.assert_allclose(label_accuracy(pred, true), 100 * best)

    def test_limits(self):
        with pytest.raises(ValueError):
            label_accuracy(np.arange(9), np.arange(9))
        with pytest.raises(ValueError):
            label_accuracy([0, 1], [0])
