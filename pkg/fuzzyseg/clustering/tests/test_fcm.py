import unittest
import warnings

import numpy as np
from numpy.testing import assert_allclose, assert_array_almost_equal, \
    assert_array_equal

from fuzzyseg.clustering.fcm import FuzzyCMeans, fcm_centers, \
    fcm_memberships, fcm_objective, memberships_from_distances, run_fcm
from fuzzyseg.core import EmptyClusterError, InvalidParametersError, \
    SolverParams, init_membership

FOUR_POINTS = np.array([0., 1., 9., 10.])


def oracle_centers(u, x, m):
    c, n = u.shape
    centers = np.zeros((c, x.shape[1]))
    for i in range(c):
        num = np.zeros(x.shape[1])
        den = 0.
        for k in range(n):
            num += u[i, k] ** m * x[k]
            den += u[i, k] ** m
        centers[i] = num / den
    return centers


def oracle_memberships(x, v, m):
    c, n = v.shape[0], x.shape[0]
    u = np.zeros((c, n))
    for k in range(n):
        d = [np.sqrt(np.sum((x[k] - v[i]) ** 2)) for i in range(c)]
        for i in range(c):
            u[i, k] = 1. / sum((d[i] / d[j]) ** (2. / (m - 1.))
                               for j in range(c))
    return u


class FcmOperationsTest(unittest.TestCase):

    def test_centers_examples(self):
        x = [0., 10.]
        assert_array_almost_equal(fcm_centers(np.eye(2), x, 2.),
                                  [[0.], [10.]])
        assert_array_almost_equal(fcm_centers(np.full((2, 2), 0.5), x, 2.),
                                  [[5.], [5.]])

    def test_empty_cluster(self):
        u = np.array([[1., 1.], [0., 0.]])
        self.assertRaises(EmptyClusterError, fcm_centers, u, [0., 10.], 2.)

    def test_membership_examples(self):
        v = np.array([[0.], [10.]])
        assert_array_almost_equal(fcm_memberships([5.], v, 2.),
                                  [[0.5], [0.5]])
        assert_array_equal(fcm_memberships([0.], v, 2.), [[1.], [0.]])
        u = fcm_memberships([1.], v, 2.)
        self.assertAlmostEqual(u[0, 0], 81. / 82, places=12)
        self.assertAlmostEqual(u[1, 0], 1. / 82, places=12)

    def test_zero_distance_split(self):
        d2 = np.array([[0., 4.], [0., 1.], [3., 0.]])
        u = memberships_from_distances(d2, 2.)
        assert_array_almost_equal(u[:, 0], [0.5, 0.5, 0.])
        assert_array_almost_equal(u[:, 1], [0., 0., 1.])

    def test_large_fuzzifier_is_finite(self):
        d2 = np.array([[1e-6, 1e6], [1e6, 1e-6]])
        u = memberships_from_distances(d2, 1.01)
        self.assertTrue(np.all(np.isfinite(u)))
        assert_allclose(u.sum(axis=0), [1., 1.])

    def test_bad_fuzzifier(self):
        self.assertRaises(InvalidParametersError, memberships_from_distances,
                          np.ones((2, 2)), 1.)

    def test_one_update_matches_hand_formula(self):
        x = FOUR_POINTS.reshape(-1, 1)
        v = np.array([[0.], [10.]])
        u = fcm_memberships(x, v, 2.)
        assert_allclose(u[:, 1:3], oracle_memberships(x[1:3], v, 2.),
                        atol=1e-12, rtol=0)
        # points on a center are crisp
        assert_array_equal(u[:, [0, 3]], [[1., 0.], [0., 1.]])

    def test_oracle_suite(self):
        rng = np.random.default_rng(2024)
        for case in range(20):
            n = rng.integers(3, 9)
            c = rng.integers(2, min(3, n) + 1)
            p = rng.integers(1, 3)
            m = [1.5, 2., 3.][case % 3]
            x = rng.random((n, p))
            u = init_membership(c, n, case)
            v = fcm_centers(u, x, m)
            assert_allclose(v, oracle_centers(u, x, m), atol=1e-12, rtol=0)
            assert_allclose(fcm_memberships(x, v, m),
                            oracle_memberships(x, v, m), atol=1e-12, rtol=0)

    def test_objective(self):
        x = [0., 10.]
        v = np.array([[0.], [10.]])
        self.assertEqual(fcm_objective(np.eye(2), v, x, 2.), 0.)
        u = np.array([[0.9, 0.1], [0.1, 0.9]])
        self.assertAlmostEqual(fcm_objective(u, v, x, 2.), 2.0, places=12)
        same = np.array([[2.], [2.]])
        self.assertEqual(fcm_objective(np.full((2, 1), 0.5), same, [2.], 2.),
                         0.)


class RunFcmTest(unittest.TestCase):

    def test_four_points(self):
        result = run_fcm(FOUR_POINTS, SolverParams(epsilon=1e-6))
        centers = np.sort(result.centroids.ravel())
        assert_allclose(centers, [0.498, 9.502], atol=1e-2)
        self.assertAlmostEqual(centers[0] + centers[1], 10., places=4)
        self.assertTrue(result.converged)
        self.assertEqual(len(result.objective_trace), result.iterations)
        self.assertEqual(result.labels[0], result.labels[1])
        self.assertNotEqual(result.labels[1], result.labels[2])

    def test_points_equal_clusters(self):
        result = run_fcm([0., 5.], SolverParams())
        assert_allclose(np.sort(result.centroids.ravel()), [0., 5.],
                        atol=1e-3)
        self.assertEqual(len(set(result.labels.tolist())), 2)

    def test_deterministic(self):
        a = run_fcm(FOUR_POINTS, SolverParams(seed=3))
        b = run_fcm(FOUR_POINTS, SolverParams(seed=3))
        assert_array_equal(a.membership, b.membership)
        assert_array_equal(a.objective_trace, b.objective_trace)
        self.assertEqual(a.iterations, b.iterations)

    def test_monotone_objective(self):
        for seed in range(50):
            rng = np.random.default_rng(seed)
            x = rng.random((30, 2))
            result = run_fcm(x, SolverParams(n_clusters=3, seed=seed,
                                             max_iter=300))
            trace = result.objective_trace
            self.assertTrue(np.all(trace[1:] <= trace[:-1] + 1e-9))

    def test_columns_sum_to_one_every_iteration(self):
        x = np.random.default_rng(7).random(40)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            for max_iter in range(1, 8):
                u = run_fcm(x, SolverParams(n_clusters=3,
                                            max_iter=max_iter)).membership
                self.assertTrue(np.all(np.abs(u.sum(axis=0) - 1) <= 1e-9))

    def test_permutation_equivariance(self):
        x = np.random.default_rng(10).random((30, 2))
        result = run_fcm(x, SolverParams(n_clusters=3, epsilon=1e-8,
                                         max_iter=300))
        v = result.centroids
        perm = np.random.default_rng(11).permutation(30)
        u = fcm_memberships(x, v, 2.)
        assert_allclose(fcm_memberships(x[perm], v, 2.), u[:, perm],
                        atol=1e-14, rtol=0)
        assert_allclose(fcm_centers(u[:, perm], x[perm], 2.),
                        fcm_centers(u, x, 2.), atol=1e-12, rtol=0)
        order = [2, 0, 1]
        assert_allclose(fcm_memberships(x, v[order], 2.), u[order],
                        atol=1e-14, rtol=0)

    def test_max_iter_warning(self):
        with self.assertWarns(UserWarning):
            result = run_fcm(np.random.default_rng(0).random(50),
                             SolverParams(max_iter=1, epsilon=1e-12))
        self.assertFalse(result.converged)
        self.assertEqual(result.iterations, 1)

    def test_mahalanobis(self):
        rng = np.random.default_rng(12)
        a = rng.normal([0., 0.], [1., 1.], size=(40, 2))
        b = rng.normal([10., 0.], [1., 1.], size=(40, 2))
        x = np.vstack([a, b])
        result = run_fcm(x, SolverParams(norm="mahalanobis"))
        self.assertTrue(np.all(result.labels[:40] == result.labels[0]))
        self.assertTrue(np.all(result.labels[40:] == result.labels[40]))
        self.assertNotEqual(result.labels[0], result.labels[40])

    def test_too_few_points(self):
        self.assertRaises(InvalidParametersError, run_fcm, [1., 2.],
                          SolverParams(n_clusters=3))


class FuzzyCMeansTest(unittest.TestCase):

    def test_fit_predict(self):
        fcm = FuzzyCMeans(epsilon=1e-6)
        labels = fcm.fit_predict(FOUR_POINTS)
        assert_array_equal(labels, fcm.labels_)
        self.assertEqual(fcm.cluster_centers_.shape, (2, 1))
        self.assertEqual(fcm.membership_.shape, (2, 4))
        assert_array_equal(fcm.predict([0.2, 9.8]),
                           [labels[0], labels[3]])

    def test_params(self):
        fcm = FuzzyCMeans(n_clusters=3, m=1.8)
        self.assertEqual(fcm.get_params()["n_clusters"], 3)
        fcm.set_params(m=2.5)
        self.assertEqual(fcm.m, 2.5)
        self.assertTrue(fcm.precheck([0., 1., 2.]))
        self.assertFalse(fcm.precheck([0., 0., 1.]))
        self.assertIn("Bezdek", fcm.citations()[0])


if __name__ == "__main__":
    unittest.main()
