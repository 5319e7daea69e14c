import unittest
import warnings

import numpy as np
from numpy.testing import assert_allclose, assert_array_equal

from fuzzyseg.clustering.fcm import fcm_centers, run_fcm
from fuzzyseg.clustering.pcm import ETA_FLOOR, PcmParams, \
    PossibilisticCMeans, _floor_eta, memberships_from_scales, pcm_eta, \
    pcm_memberships, pcm_objective, run_pcm
from fuzzyseg.core import DegenerateEtaError, InvalidParametersError, \
    PcmResult, SolverParams

FOUR_POINTS = np.array([0., 1., 9., 10.])


def oracle_memberships(x, v, eta, m):
    c, n = v.shape[0], x.shape[0]
    u = np.zeros((c, n))
    for i in range(c):
        for k in range(n):
            d2 = np.sum((x[k] - v[i]) ** 2)
            u[i, k] = 1. / (1. + (d2 / eta[i]) ** (1. / (m - 1.)))
    return u


def oracle_run(x, base, k=1.):
    """Scalar PCM loop with fixed scales, started from the FCM partition"""
    m = base.m
    init = run_fcm(x, base)
    u = init.membership
    c, n = u.shape
    eta = []
    for i in range(c):
        w = [u[i, j] ** m for j in range(n)]
        eta.append(k * sum(w[j] * (x[j] - init.centroids[i, 0]) ** 2
                           for j in range(n)) / sum(w))
    for _ in range(base.max_iter):
        v = []
        for i in range(c):
            w = [u[i, j] ** m for j in range(n)]
            v.append(sum(w[j] * x[j] for j in range(n)) / sum(w))
        u_new = oracle_memberships(x.reshape(-1, 1), np.reshape(v, (-1, 1)),
                                   eta, m)
        change = np.max(np.abs(u_new - u))
        u = u_new
        if change <= base.epsilon:
            break
    return np.array(v)


class PcmOperationsTest(unittest.TestCase):

    def test_eta_example(self):
        eta = pcm_eta([[0.5, 0.5]], [2., 4.], np.array([[0.]]), 2.)
        assert_allclose(eta, [10.])
        assert_allclose(pcm_eta([[0.5, 0.5]], [2., 4.], np.array([[0.]]), 2.,
                                k=0.5), [5.])

    def test_eta_degenerate(self):
        self.assertRaises(DegenerateEtaError, pcm_eta, np.eye(2), [0., 10.],
                          np.array([[0.], [10.]]), 2.)
        self.assertRaises(InvalidParametersError, pcm_eta, [[0.5, 0.5]],
                          [2., 4.], np.array([[0.]]), 2., k=0.)

    def test_half_point(self):
        for m in (1.5, 2., 3.):
            u = memberships_from_scales([[3.]], [3.], m)
            self.assertAlmostEqual(u[0, 0], 0.5, places=12)
        self.assertEqual(memberships_from_scales([[0.]], [2.], 2.)[0, 0], 1.)
        self.assertAlmostEqual(
            memberships_from_scales([[18.]], [2.], 2.)[0, 0], 0.1, places=12)

    def test_memberships_stay_positive(self):
        u = memberships_from_scales([[1e300, 0.]], [1e-300], 1.01)
        self.assertGreater(u[0, 0], 0.)
        self.assertEqual(u[0, 1], 1.)

    def test_memberships_validation(self):
        v = np.array([[0.]])
        self.assertRaises(InvalidParametersError, pcm_memberships, [1.], v,
                          [1.], 1.)
        self.assertRaises(InvalidParametersError, pcm_memberships, [1.], v,
                          [0.], 2.)

    def test_oracle_suite(self):
        rng = np.random.default_rng(2025)
        for case in range(20):
            n = rng.integers(3, 9)
            c = rng.integers(2, min(3, n) + 1)
            p = rng.integers(1, 3)
            m = [1.5, 2., 3.][case % 3]
            x = rng.random((n, p))
            v = rng.random((c, p))
            eta = rng.uniform(0.05, 1., c)
            assert_allclose(pcm_memberships(x, v, eta, m),
                            oracle_memberships(x, v, eta, m),
                            atol=1e-12, rtol=0)

    def test_monotone_in_distance(self):
        d2 = np.linspace(0., 50., 200).reshape(1, -1)
        for m in (1.5, 2., 3.):
            u = memberships_from_scales(d2, [2.5], m).ravel()
            self.assertEqual(u[0], 1.)
            self.assertTrue(np.all(np.diff(u) < 0))

    def test_permutation_equivariance(self):
        x = np.random.default_rng(12).random((30, 2))
        result = run_pcm(x, PcmParams(base=SolverParams(epsilon=1e-8,
                                                        max_iter=500)))
        perm = np.random.default_rng(13).permutation(30)
        u = pcm_memberships(x, result.centroids, result.eta, 2.)
        assert_allclose(pcm_memberships(x[perm], result.centroids,
                                        result.eta, 2.), u[:, perm],
                        atol=1e-14, rtol=0)
        assert_allclose(fcm_centers(u[:, perm], x[perm], 2.),
                        fcm_centers(u, x, 2.), atol=1e-12, rtol=0)
        swapped = pcm_memberships(x, result.centroids[::-1], result.eta[::-1],
                                  2.)
        assert_allclose(swapped, u[::-1], atol=1e-14, rtol=0)

    def test_objective(self):
        v = np.array([[0.], [10.]])
        # crisp memberships at the centers: no distance term and
        # (1 - u)^m is 1 only for the other cluster
        value = pcm_objective(np.eye(2), v, [1., 1.], [0., 10.], 2.)
        self.assertAlmostEqual(value, 2.)

    def test_floor_eta(self):
        with self.assertWarns(UserWarning):
            eta = _floor_eta(np.array([0.3, 0.]), "in a test")
        assert_array_equal(eta, [0.3, ETA_FLOOR])
        assert_array_equal(_floor_eta(np.array([0.3, 0.2]), "in a test"),
                           [0.3, 0.2])


class RunPcmTest(unittest.TestCase):

    def test_four_points(self):
        params = PcmParams(base=SolverParams(epsilon=1e-6))
        result = run_pcm(FOUR_POINTS, params)
        self.assertIsInstance(result, PcmResult)
        self.assertTrue(result.converged)
        centers = result.centroids.ravel()
        assert_allclose(centers, oracle_run(FOUR_POINTS, params.base),
                        atol=1e-6, rtol=0)
        self.assertAlmostEqual(centers.sum(), 10., places=4)
        # with K = 1 both centers settle inside the FCM ones
        assert_allclose(np.sort(centers), [0.955079, 9.044921], atol=1e-3)
        fcm = run_fcm(FOUR_POINTS, params.base)
        self.assertGreater(centers.min(), fcm.centroids.min())
        near = int(np.argmin(centers))
        self.assertTrue(np.all(result.membership[near, 2:] < 0.1))
        self.assertTrue(np.all(result.membership[1 - near, :2] < 0.1))
        self.assertEqual(result.eta.shape, (2,))
        self.assertTrue(np.all(result.eta > 0))

    def test_outlier_gets_low_membership(self):
        x = np.concatenate([np.repeat(FOUR_POINTS, 50), [60.]])
        base = SolverParams(epsilon=1e-6, max_iter=300)
        fcm = run_fcm(x, base)
        pcm = run_pcm(x, PcmParams(base=base))
        self.assertGreater(fcm.membership[:, -1].max(), 0.45)
        self.assertLess(pcm.membership[:, -1].max(), 0.05)

    def test_memberships_in_range(self):
        x = np.random.default_rng(4).random((60, 2))
        result = run_pcm(x, PcmParams(base=SolverParams(n_clusters=3)))
        self.assertTrue(np.all(result.membership > 0))
        self.assertTrue(np.all(result.membership <= 1))

    def test_memberships_in_range_every_iteration(self):
        x = np.random.default_rng(9).random(40)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            for max_iter in range(1, 8):
                u = run_pcm(x, PcmParams(base=SolverParams(
                    n_clusters=3, max_iter=max_iter))).membership
                self.assertTrue(np.all(u > 0))
                self.assertTrue(np.all(u <= 1))

    def test_singular_covariance_warns_once(self):
        t = np.random.default_rng(5).random(30)
        x = np.column_stack([t, 2. * t])
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            pcm = PossibilisticCMeans(norm="mahalanobis").fit(x)
        fallbacks = [w for w in caught if "Mahalanobis" in str(w.message)]
        self.assertEqual(len(fallbacks), 1)
        self.assertIsNone(pcm.model_)

    def test_deterministic(self):
        params = PcmParams(base=SolverParams(seed=8))
        a = run_pcm(FOUR_POINTS, params)
        b = run_pcm(FOUR_POINTS, params)
        assert_array_equal(a.membership, b.membership)
        assert_array_equal(a.eta, b.eta)
        self.assertEqual(a.iterations, b.iterations)

    def test_per_iteration_eta(self):
        result = run_pcm(FOUR_POINTS,
                         PcmParams(base=SolverParams(epsilon=1e-6),
                                   eta_mode="per_iteration"))
        self.assertTrue(np.all(result.eta > 0))
        self.assertEqual(len(set(result.labels[:2])), 1)
        self.assertNotEqual(result.labels[0], result.labels[3])

    def test_params(self):
        self.assertRaises(InvalidParametersError, PcmParams,
                          eta_mode="adaptive")
        self.assertRaises(InvalidParametersError, PcmParams, k=-1.)


class PossibilisticCMeansTest(unittest.TestCase):

    def test_fit_predict(self):
        pcm = PossibilisticCMeans(epsilon=1e-6)
        labels = pcm.fit_predict(FOUR_POINTS)
        self.assertEqual(labels[0], labels[1])
        self.assertNotEqual(labels[1], labels[2])
        u = pcm.predict_membership([0.5, 60.])
        self.assertGreater(u[:, 0].max(), 0.4)
        self.assertLess(u[:, 1].max(), 0.01)
        self.assertIn("Krishnapuram", pcm.citations()[0])
        self.assertEqual(pcm.get_params()["eta_mode"], "fixed")


if __name__ == "__main__":
    unittest.main()
