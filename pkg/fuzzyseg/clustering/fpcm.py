"""
Fuzzy possibilistic c-means. Each point carries a membership (relative to
the other clusters, columns of U sum to 1) and a typicality (relative to the
other points, rows of T sum to 1); centers are weighted by u^m + t^eta.
"""

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from fuzzyseg.clustering.base import BaseClusterer
from fuzzyseg.clustering.fcm import fcm_centers, fcm_memberships, \
    memberships_from_distances
from fuzzyseg.core import InvalidParametersError, SegmentationResult, \
    SolverParams, as_dataset, check_cluster_count, converged, defuzzify, \
    init_membership
from fuzzyseg.distance import pairwise_sq_distances, resolve_model

__author__ = "fuzzyseg developers"

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FpcmParams(object):
    """
    Args:
        base (SolverParams): shared solver settings.
        eta_exp (float): typicality exponent, > 1.
    """
    base: SolverParams = field(default_factory=SolverParams)
    eta_exp: float = 2.

    def __post_init__(self):
        if not self.eta_exp > 1:
            raise InvalidParametersError(
                "eta_exp must be > 1, got {}".format(self.eta_exp))


# Same update as FCM
fpcm_memberships = fcm_memberships


def typicalities_from_distances(d2, eta_exp):
    """
    t_ik = [sum_j (D_ik / D_ij)^(2 / (eta - 1))]^-1 with j running over the
    points, so every row sums to 1. Points at distance zero from center i
    share that row equally.
    """
    if not eta_exp > 1:
        raise InvalidParametersError("eta_exp must be > 1")
    return memberships_from_distances(np.asarray(d2, dtype=float).T,
                                      eta_exp).T


def fpcm_typicalities(data, v, eta_exp, norm="euclidean", model=None):
    """
    Typicality update for fixed centers.

    Args:
        data (array-like): n x p dataset.
        v (np.ndarray): c x p centers.
        eta_exp (float): typicality exponent, > 1.

    Returns:
        (np.ndarray) c x n matrix whose rows sum to 1.
    """
    if model is None:
        model = resolve_model(data, norm)
    return typicalities_from_distances(
        pairwise_sq_distances(data, v, model), eta_exp)


def fpcm_centers(u, t, data, m, eta_exp):
    """
    v_i = sum_k (u_ik^m + t_ik^eta) x_k / sum_k (u_ik^m + t_ik^eta)

    Returns:
        (np.ndarray) c x p centers.
    """
    X = as_dataset(data)
    u = np.asarray(u, dtype=float)
    t = np.asarray(t, dtype=float)
    if u.shape != t.shape or u.shape[1] != X.shape[0]:
        raise InvalidParametersError(
            "Shapes of U {}, T {} and {} points disagree".format(
                u.shape, t.shape, X.shape[0]))
    w = u ** m + t ** eta_exp
    return (w @ X) / w.sum(axis=1)[:, np.newaxis]


def fpcm_objective(u, t, v, data, m, eta_exp, norm="euclidean", model=None):
    """
    sum_i sum_k (u_ik^m + t_ik^eta) D_ik^2

    Returns:
        (float) objective value, >= 0.
    """
    if model is None:
        model = resolve_model(data, norm)
    d2 = pairwise_sq_distances(data, v, model)
    w = np.asarray(u, dtype=float) ** m + np.asarray(t, dtype=float) ** eta_exp
    return float(np.sum(w * d2))


def run_fpcm(data, params):
    """
    Run fuzzy possibilistic c-means.

    Starts from a random partition and its FCM centers, then iterates
    membership, typicality and center updates. Convergence is tested on
    the memberships only.

    Args:
        data (array-like): n x p dataset.
        params (FpcmParams): solver settings.

    Returns:
        (SegmentationResult) with the typicality matrix filled in.
    """
    X = as_dataset(data)
    base = params.base
    c, m, eta_exp = base.n_clusters, base.m, params.eta_exp
    check_cluster_count(c, X.shape[0])
    model = resolve_model(X, base.norm)

    u = init_membership(c, X.shape[0], base.seed)
    v = fcm_centers(u, X, m)
    t = None
    trace = []
    done = False
    for it in range(base.max_iter):
        d2 = pairwise_sq_distances(X, v, model)
        u_new = memberships_from_distances(d2, m)
        t = typicalities_from_distances(d2, eta_exp)
        trace.append(float(np.sum((u_new ** m + t ** eta_exp) * d2)))
        logger.debug("FPCM iteration %d: objective=%.10g change=%.3g",
                     it + 1, trace[-1], np.max(np.abs(u_new - u)))
        done = converged(u, u_new, base.epsilon)
        u = u_new
        if done:
            break
        v = fpcm_centers(u, t, X, m, eta_exp)

    if not done:
        warnings.warn("FPCM stopped after max_iter={} iterations without "
                      "converging".format(base.max_iter))
    return SegmentationResult(membership=u, centroids=v, labels=defuzzify(u),
                              iterations=len(trace),
                              objective_trace=np.array(trace),
                              converged=done, typicality=t,
                              model=model)


class FuzzyPossibilisticCMeans(BaseClusterer):
    """
    Fuzzy possibilistic c-means clustering.

    Produces both a fuzzy membership matrix (used for labels) and a
    typicality matrix; both enter the center update.

    Args:
        n_clusters (int): number of clusters, >= 2.
        m (float): fuzzifier, > 1.
        eta_exp (float): typicality exponent, > 1.
        epsilon (float): convergence threshold on the membership change.
        max_iter (int): iteration cap.
        seed (int): seed of the random initial partition.
        norm (str): "euclidean" or "mahalanobis".
    """

    def __init__(self, n_clusters=2, m=2., eta_exp=2., epsilon=1e-5,
                 max_iter=100, seed=1, norm="euclidean"):
        self.n_clusters = n_clusters
        self.m = m
        self.eta_exp = eta_exp
        self.epsilon = epsilon
        self.max_iter = max_iter
        self.seed = seed
        self.norm = norm

    def _solve(self, X):
        return run_fpcm(X, FpcmParams(base=self.solver_params(),
                                      eta_exp=self.eta_exp))

    def predict_membership(self, X):
        return fpcm_memberships(X, self.cluster_centers_, self.m,
                                model=self.model_)

    def citations(self):
        return ["@inproceedings{Pal1997, "
                "title = {A mixed c-means clustering model}, "
                "author = {Pal, N. R. and Pal, K. and Bezdek, J. C.}, "
                "booktitle = {Proceedings of the Sixth IEEE International "
                "Conference on Fuzzy Systems}, "
                "pages = {11--21}, year = {1997}}"]
