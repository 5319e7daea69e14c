"""
Possibilistic c-means. Memberships are typicalities: a point far from every
center gets a low membership everywhere instead of being shared out.
"""

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from fuzzyseg.clustering.base import BaseClusterer
from fuzzyseg.clustering.fcm import fcm_centers, run_fcm
from fuzzyseg.core import DegenerateEtaError, InvalidParametersError, \
    PcmResult, SolverParams, as_dataset, check_cluster_count, converged, \
    defuzzify
from fuzzyseg.distance import pairwise_sq_distances, resolve_model

__author__ = "fuzzyseg developers"

logger = logging.getLogger(__name__)

ETA_MODES = ("fixed", "per_iteration")

# Scale given to a cluster whose members all sit on its center
ETA_FLOOR = np.finfo(float).eps


@dataclass(frozen=True)
class PcmParams(object):
    """
    Args:
        base (SolverParams): shared solver settings.
        eta_mode (str): "fixed" keeps the scales computed from the FCM
            initialization, "per_iteration" recomputes them every iteration.
        k (float): positive scale factor K of the eta estimate.
    """
    base: SolverParams = field(default_factory=SolverParams)
    eta_mode: str = "fixed"
    k: float = 1.

    def __post_init__(self):
        if self.eta_mode not in ETA_MODES:
            raise InvalidParametersError(
                "Unknown eta_mode {}, choose from {}".format(
                    self.eta_mode, ETA_MODES))
        if not self.k > 0:
            raise InvalidParametersError("k must be positive")


def _fuzzy_spread(u, d2, m, k):
    w = np.asarray(u, dtype=float) ** m
    mass = w.sum(axis=1)
    eta = np.zeros_like(mass)
    np.divide(k * (w * d2).sum(axis=1), mass, out=eta, where=mass > 0)
    return eta


def pcm_eta(u, data, v, m, k=1., norm="euclidean", model=None):
    """
    Per-cluster scales eta_i = K * sum_k u_ik^m d_ik^2 / sum_k u_ik^m.

    This is the fuzzy intra-cluster distance estimate; it sets the squared
    distance at which a possibilistic membership equals 0.5.

    Args:
        u (np.ndarray): c x n memberships, typically from converged FCM.
        data (array-like): n x p dataset.
        v (np.ndarray): c x p centers.
        m (float): fuzzifier.
        k (float): scale factor K > 0.

    Returns:
        (np.ndarray) c positive scales.
    """
    if not k > 0:
        raise InvalidParametersError("k must be positive")
    if model is None:
        model = resolve_model(data, norm)
    eta = _fuzzy_spread(u, pairwise_sq_distances(data, v, model), m, k)
    degenerate = np.flatnonzero(~(eta > 0))
    if degenerate.size:
        raise DegenerateEtaError(
            "Cluster(s) {} have zero spread around their center".format(
                degenerate.tolist()))
    return eta


def _floor_eta(eta, when):
    """Replace zero scales by ETA_FLOOR, with a warning"""
    degenerate = np.flatnonzero(~(eta > 0))
    if degenerate.size:
        warnings.warn("Cluster(s) {} have zero spread {}; using eta={:g}, "
                      "which makes their members crisp".format(
                          degenerate.tolist(), when, ETA_FLOOR))
        eta = np.where(eta > 0, eta, ETA_FLOOR)
    return eta


def memberships_from_scales(d2, eta, m):
    """
    mu_ij = 1 / (1 + (d_ij^2 / eta_i)^(1 / (m - 1))), clipped away from 0.
    """
    d2 = np.asarray(d2, dtype=float)
    eta = np.asarray(eta, dtype=float).reshape(-1, 1)
    with np.errstate(over="ignore"):
        u = 1. / (1. + (d2 / eta) ** (1. / (m - 1.)))
    return np.maximum(u, np.finfo(float).tiny)


def pcm_memberships(data, v, eta, m, norm="euclidean", model=None):
    """
    Possibilistic memberships for fixed centers and scales.

    Columns need not sum to 1; every entry lies in (0, 1].

    Args:
        data (array-like): n x p dataset.
        v (np.ndarray): c x p centers.
        eta (array-like): c positive scales.
        m (float): fuzzifier, > 1.

    Returns:
        (np.ndarray) c x n matrix.
    """
    if not m > 1:
        raise InvalidParametersError("The fuzzifier must be > 1")
    eta = np.asarray(eta, dtype=float)
    if np.any(~(eta > 0)):
        raise InvalidParametersError("Every eta_i must be positive")
    if model is None:
        model = resolve_model(data, norm)
    return memberships_from_scales(pairwise_sq_distances(data, v, model),
                                   eta, m)


def pcm_objective(u, v, eta, data, m, norm="euclidean", model=None):
    """
    sum_i sum_j u_ij^m d_ij^2 + sum_i eta_i sum_j (1 - u_ij)^m
    """
    if model is None:
        model = resolve_model(data, norm)
    d2 = pairwise_sq_distances(data, v, model)
    u = np.asarray(u, dtype=float)
    eta = np.asarray(eta, dtype=float)
    return float(np.sum(u ** m * d2) +
                 np.sum(eta * np.sum((1. - u) ** m, axis=1)))


def run_pcm(data, params):
    """
    Run possibilistic c-means.

    The run starts from a converged FCM partition, which fixes the initial
    centers and the scales eta. It then alternates center and possibilistic
    membership updates until the membership change is at most epsilon.

    Args:
        data (array-like): n x p dataset.
        params (PcmParams): solver settings.

    Returns:
        (PcmResult)
    """
    X = as_dataset(data)
    base = params.base
    c, m = base.n_clusters, base.m
    check_cluster_count(c, X.shape[0])
    init = run_fcm(X, base)
    model = init.model
    u = init.membership
    eta = _floor_eta(_fuzzy_spread(
        u, pairwise_sq_distances(X, init.centroids, model), m, params.k),
        "after the FCM initialization")
    logger.debug("PCM initial eta: %s", eta)

    trace = []
    done = False
    v = None
    for it in range(base.max_iter):
        v = fcm_centers(u, X, m)
        d2 = pairwise_sq_distances(X, v, model)
        if params.eta_mode == "per_iteration" and it > 0:
            eta = _floor_eta(_fuzzy_spread(u, d2, m, params.k),
                             "at iteration {}".format(it + 1))
        u_new = memberships_from_scales(d2, eta, m)
        trace.append(float(np.sum(u_new ** m * d2) +
                           np.sum(eta * np.sum((1. - u_new) ** m, axis=1))))
        logger.debug("PCM iteration %d: objective=%.10g change=%.3g",
                     it + 1, trace[-1], np.max(np.abs(u_new - u)))
        done = converged(u, u_new, base.epsilon)
        u = u_new
        if done:
            break

    if not done:
        warnings.warn("PCM stopped after max_iter={} iterations without "
                      "converging".format(base.max_iter))
    return PcmResult(membership=u, centroids=v, labels=defuzzify(u),
                     iterations=len(trace), objective_trace=np.array(trace),
                     converged=done, eta=eta, model=model)


class PossibilisticCMeans(BaseClusterer):
    """
    Possibilistic c-means clustering.

    Memberships measure how typical a point is of each cluster rather than
    how it is shared between clusters, which makes outliers receive low
    membership everywhere. The run is initialized from fuzzy c-means.

    Args:
        n_clusters (int): number of clusters, >= 2.
        m (float): fuzzifier, > 1.
        epsilon (float): convergence threshold on the membership change.
        max_iter (int): iteration cap (applies to the FCM warm start too).
        seed (int): seed of the FCM warm start.
        norm (str): "euclidean" or "mahalanobis".
        eta_mode (str): "fixed" or "per_iteration".
        k (float): scale factor of the eta estimate.
    """

    def __init__(self, n_clusters=2, m=2., epsilon=1e-5, max_iter=100,
                 seed=1, norm="euclidean", eta_mode="fixed", k=1.):
        self.n_clusters = n_clusters
        self.m = m
        self.epsilon = epsilon
        self.max_iter = max_iter
        self.seed = seed
        self.norm = norm
        self.eta_mode = eta_mode
        self.k = k

    def _solve(self, X):
        return run_pcm(X, PcmParams(base=self.solver_params(),
                                    eta_mode=self.eta_mode, k=self.k))

    def predict_membership(self, X):
        return memberships_from_scales(
            pairwise_sq_distances(X, self.cluster_centers_, self.model_),
            self.result_.eta, self.m)

    def citations(self):
        return ["@article{Krishnapuram1993, "
                "title = {A possibilistic approach to clustering}, "
                "author = {Krishnapuram, R. and Keller, J. M.}, "
                "journal = {IEEE Transactions on Fuzzy Systems}, "
                "volume = {1}, number = {2}, pages = {98--110}, "
                "year = {1993}}"]
