"""
Standard fuzzy c-means: alternating center and membership updates that
minimize sum_k sum_i u_ik^m |x_k - v_i|_A^2.
"""

import logging
import warnings

import numpy as np

from fuzzyseg.clustering.base import BaseClusterer
from fuzzyseg.core import EmptyClusterError, InvalidParametersError, \
    SegmentationResult, as_dataset, check_cluster_count, \
    converged, defuzzify, init_membership
from fuzzyseg.distance import pairwise_sq_distances, resolve_model

__author__ = "fuzzyseg developers"

logger = logging.getLogger(__name__)


def _check_fuzzifier(m):
    if not m > 1:
        raise InvalidParametersError(
            "The fuzzifier must be > 1, got {}".format(m))


def memberships_from_distances(d2, m):
    """
    Fuzzy memberships from squared distances, normalized over axis 0.

    u_ik = [sum_j (d_ik / d_jk)^(2 / (m - 1))]^-1. A column containing
    zero distances gives its whole mass, split equally, to the clusters at
    distance zero.

    Args:
        d2 (np.ndarray): c x n squared distances.
        m (float): fuzzifier, > 1.

    Returns:
        (np.ndarray) c x n matrix whose columns sum to 1.
    """
    _check_fuzzifier(m)
    d2 = np.asarray(d2, dtype=float)
    u = np.empty_like(d2)
    zero = d2 <= 0
    singular = zero.any(axis=0)
    if singular.any():
        hits = zero[:, singular].astype(float)
        u[:, singular] = hits / hits.sum(axis=0)
    regular = ~singular
    if regular.any():
        dr = d2[:, regular]
        # (d_min / d_i)^(1/(m-1)) stays in (0, 1], no overflow for large m
        inv = (dr.min(axis=0) / dr) ** (1. / (m - 1.))
        u[:, regular] = inv / inv.sum(axis=0)
    return u


def fcm_centers(u, data, m):
    """
    Cluster centers v_i = sum_k u_ik^m x_k / sum_k u_ik^m.

    Args:
        u (np.ndarray): c x n membership matrix.
        data (array-like): n x p dataset.
        m (float): fuzzifier.

    Returns:
        (np.ndarray) c x p centers.
    """
    X = as_dataset(data)
    u = np.asarray(u, dtype=float)
    if u.ndim != 2 or u.shape[1] != X.shape[0]:
        raise InvalidParametersError(
            "Membership matrix of shape {} does not match {} points".format(
                u.shape, X.shape[0]))
    w = u ** m
    denom = w.sum(axis=1)
    empty = np.flatnonzero(denom <= 0)
    if empty.size:
        raise EmptyClusterError(
            "Cluster(s) {} have no membership mass".format(empty.tolist()))
    return (w @ X) / denom[:, np.newaxis]


def fcm_memberships(data, v, m, norm="euclidean", model=None):
    """
    Membership update for fixed centers.

    Args:
        data (array-like): n x p dataset.
        v (np.ndarray): c x p centers.
        m (float): fuzzifier, > 1.
        norm (str): "euclidean" or "mahalanobis".
        model (CovarianceModel): fitted Mahalanobis model; fitted from data
            when omitted with norm="mahalanobis".

    Returns:
        (np.ndarray) c x n membership matrix.
    """
    if model is None:
        model = resolve_model(data, norm)
    return memberships_from_distances(
        pairwise_sq_distances(data, v, model), m)


def fcm_objective(u, v, data, m, norm="euclidean", model=None):
    """
    FCM distortion sum_k sum_i u_ik^m |x_k - v_i|_A^2.

    Returns:
        (float) objective value, >= 0.
    """
    if model is None:
        model = resolve_model(data, norm)
    d2 = pairwise_sq_distances(data, v, model)
    return float(np.sum(np.asarray(u, dtype=float) ** m * d2))


def run_fcm(data, params):
    """
    Run fuzzy c-means from a random partition.

    Each iteration computes centers from the current memberships, then new
    memberships from those centers; the objective of the new pair is
    recorded. The loop stops once the largest membership change is at most
    epsilon, or after max_iter iterations.

    Args:
        data (array-like): n x p dataset.
        params (SolverParams): solver settings.

    Returns:
        (SegmentationResult)
    """
    X = as_dataset(data)
    c, m = params.n_clusters, params.m
    check_cluster_count(c, X.shape[0])
    model = resolve_model(X, params.norm)

    u = init_membership(c, X.shape[0], params.seed)
    trace = []
    done = False
    v = None
    for it in range(params.max_iter):
        v = fcm_centers(u, X, m)
        d2 = pairwise_sq_distances(X, v, model)
        u_new = memberships_from_distances(d2, m)
        trace.append(float(np.sum(u_new ** m * d2)))
        change = float(np.max(np.abs(u_new - u)))
        logger.debug("FCM iteration %d: objective=%.10g change=%.3g",
                     it + 1, trace[-1], change)
        done = converged(u, u_new, params.epsilon)
        u = u_new
        if done:
            break

    if not done:
        warnings.warn("FCM stopped after max_iter={} iterations without "
                      "converging".format(params.max_iter))
    return SegmentationResult(membership=u, centroids=v, labels=defuzzify(u),
                              iterations=len(trace),
                              objective_trace=np.array(trace),
                              converged=done, model=model)


class FuzzyCMeans(BaseClusterer):
    """
    Standard fuzzy c-means clustering.

    Every point receives a membership in each cluster; memberships of a
    point sum to one. Labels are the cluster of largest membership.

    Args:
        n_clusters (int): number of clusters, >= 2.
        m (float): fuzzifier, > 1.
        epsilon (float): convergence threshold on the membership change.
        max_iter (int): iteration cap.
        seed (int): seed of the random initial partition.
        norm (str): "euclidean" or "mahalanobis".
    """

    def __init__(self, n_clusters=2, m=2., epsilon=1e-5, max_iter=100,
                 seed=1, norm="euclidean"):
        self.n_clusters = n_clusters
        self.m = m
        self.epsilon = epsilon
        self.max_iter = max_iter
        self.seed = seed
        self.norm = norm

    def _solve(self, X):
        return run_fcm(X, self.solver_params())

    def predict_membership(self, X):
        return fcm_memberships(X, self.cluster_centers_, self.m,
                               model=self.model_)

    def citations(self):
        return ["@book{Bezdek1981, "
                "title = {Pattern Recognition with Fuzzy Objective Function "
                "Algorithms}, "
                "author = {Bezdek, James C.}, "
                "publisher = {Plenum Press}, "
                "year = {1981}}"]
