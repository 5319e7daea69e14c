import unittest
import warnings

import numpy as np
from numpy.testing import assert_allclose, assert_array_almost_equal

from fuzzyseg.clustering.fpcm import FpcmParams, FuzzyPossibilisticCMeans, \
    fpcm_centers, fpcm_memberships, fpcm_objective, fpcm_typicalities, \
    run_fpcm, typicalities_from_distances
from fuzzyseg.core import InvalidParametersError, SolverParams, \
    init_membership

FOUR_POINTS = np.array([0., 1., 9., 10.])


def oracle_typicalities(x, v, eta):
    c, n = v.shape[0], x.shape[0]
    t = np.zeros((c, n))
    for i in range(c):
        d = [np.sqrt(np.sum((x[k] - v[i]) ** 2)) for k in range(n)]
        for k in range(n):
            t[i, k] = 1. / sum((d[k] / d[j]) ** (2. / (eta - 1.))
                               for j in range(n))
    return t


def oracle_centers(u, t, x, m, eta):
    c, n = u.shape
    centers = np.zeros((c, x.shape[1]))
    for i in range(c):
        weights = [u[i, k] ** m + t[i, k] ** eta for k in range(n)]
        centers[i] = sum(w * x[k] for k, w in enumerate(weights)) / \
            sum(weights)
    return centers


class FpcmOperationsTest(unittest.TestCase):

    def test_typicality_examples(self):
        assert_array_almost_equal(typicalities_from_distances([[4.], [9.]], 2.),
                                  [[1.], [1.]])
        t = typicalities_from_distances(np.full((2, 5), 3.), 2.)
        assert_array_almost_equal(t, np.full((2, 5), 0.2))
        self.assertRaises(InvalidParametersError,
                          typicalities_from_distances, [[1.]], 1.)

    def test_centers_examples(self):
        x = [0., 10.]
        assert_array_almost_equal(
            fpcm_centers(np.eye(2), np.eye(2), x, 2., 2.), [[0.], [10.]])
        u = np.array([[0.75, 0.25], [0.25, 0.75]])
        t = np.array([[0.5, 0.5], [0.5, 0.5]])
        # weights 0.8125 and 0.3125
        assert_array_almost_equal(fpcm_centers(u, t, x, 2., 2.)[0],
                                  [3.125 / 1.125])
        self.assertRaises(InvalidParametersError, fpcm_centers, u, t[:, :1],
                          x, 2., 2.)

    def test_objective(self):
        v = np.array([[0.], [10.]])
        self.assertEqual(fpcm_objective(np.eye(2), np.eye(2), v, [0., 10.],
                                        2., 2.), 0.)
        rng = np.random.default_rng(5)
        x = rng.random((6, 1))
        u = init_membership(2, 6, 1)
        t = init_membership(2, 6, 2)
        v = rng.random((2, 1))
        expected = sum((u[i, k] ** 2 + t[i, k] ** 3) * (x[k, 0] - v[i, 0]) ** 2
                       for i in range(2) for k in range(6))
        self.assertAlmostEqual(fpcm_objective(u, t, v, x, 2., 3.), expected,
                               places=12)

    def test_oracle_suite(self):
        rng = np.random.default_rng(77)
        for case in range(20):
            n = rng.integers(3, 9)
            c = rng.integers(2, min(3, n) + 1)
            m = [1.5, 2., 3.][case % 3]
            eta = [2., 1.5, 3.][case % 3]
            x = rng.random((n, rng.integers(1, 3)))
            v = x[rng.choice(n, c, replace=False)] + 0.01
            t = fpcm_typicalities(x, v, eta)
            assert_allclose(t, oracle_typicalities(x, v, eta), atol=1e-12,
                            rtol=0)
            u = init_membership(c, n, case)
            assert_allclose(fpcm_centers(u, t, x, m, eta),
                            oracle_centers(u, t, x, m, eta), atol=1e-12,
                            rtol=0)


class RunFpcmTest(unittest.TestCase):

    def test_four_points(self):
        result = run_fpcm(FOUR_POINTS, FpcmParams())
        self.assertTrue(result.converged)
        self.assertLess(result.iterations, 50)
        self.assertEqual(result.labels[0], result.labels[1])
        self.assertNotEqual(result.labels[1], result.labels[2])
        assert_allclose(result.typicality.sum(axis=1), [1., 1.])
        assert_allclose(result.membership.sum(axis=0), np.ones(4))

    def test_four_points_symmetric(self):
        base = SolverParams(epsilon=1e-10, max_iter=200)
        result = run_fpcm(FOUR_POINTS, FpcmParams(base=base))
        centers = np.sort(result.centroids.ravel())
        self.assertAlmostEqual(centers[0] + centers[1], 10., delta=1e-6)

    def test_monotone_objective(self):
        for seed in range(50):
            x = np.random.default_rng(seed).random((30, 2))
            base = SolverParams(n_clusters=3, seed=seed, max_iter=300)
            trace = run_fpcm(x, FpcmParams(base=base)).objective_trace
            self.assertTrue(np.all(trace[1:] <= trace[:-1] + 1e-9))

    def test_constraints_every_iteration(self):
        x = np.random.default_rng(8).random((40, 2))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            for max_iter in range(1, 8):
                base = SolverParams(n_clusters=3, max_iter=max_iter)
                result = run_fpcm(x, FpcmParams(base=base))
                assert_allclose(result.membership.sum(axis=0), np.ones(40),
                                atol=1e-9, rtol=0)
                assert_allclose(result.typicality.sum(axis=1), np.ones(3),
                                atol=1e-9, rtol=0)

    def test_permutation_equivariance(self):
        x = np.random.default_rng(14).random((25, 2))
        base = SolverParams(epsilon=1e-8, max_iter=300)
        result = run_fpcm(x, FpcmParams(base=base))
        v = result.centroids
        perm = np.random.default_rng(15).permutation(25)
        t = fpcm_typicalities(x, v, 2.)
        u = fpcm_memberships(x, v, 2.)
        assert_allclose(fpcm_typicalities(x[perm], v, 2.), t[:, perm],
                        atol=1e-12, rtol=0)
        assert_allclose(fpcm_memberships(x[perm], v, 2.), u[:, perm],
                        atol=1e-12, rtol=0)
        assert_allclose(fpcm_centers(u[:, perm], t[:, perm], x[perm], 2., 2.),
                        fpcm_centers(u, t, x, 2., 2.), atol=1e-12, rtol=0)

    def test_bad_exponent(self):
        self.assertRaises(InvalidParametersError, FpcmParams, eta_exp=1.)


class FuzzyPossibilisticCMeansTest(unittest.TestCase):

    def test_fit(self):
        fpcm = FuzzyPossibilisticCMeans(eta_exp=3.)
        fpcm.fit(FOUR_POINTS)
        self.assertEqual(fpcm.result_.typicality.shape, (2, 4))
        self.assertEqual(fpcm.predict([0.1])[0], fpcm.labels_[0])
        self.assertIn("Pal", fpcm.citations()[0])


if __name__ == "__main__":
    unittest.main()
