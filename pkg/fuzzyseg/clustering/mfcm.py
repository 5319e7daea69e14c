"""
Modified fuzzy c-means for images: FCM in which the point-to-center
distance of pixel j is replaced by a blend of a local neighborhood average
and a non-local (patch similarity) average of squared distances.

Centers are still computed from the raw intensities. The surrogate objective
sum u^m d_mixed is recorded but, unlike FCM, need not decrease.
"""

import logging
import warnings
from dataclasses import dataclass, field

import numpy as np

from fuzzyseg.clustering.base import BaseClusterer
from fuzzyseg.clustering.fcm import fcm_centers, memberships_from_distances
from fuzzyseg.core import GrayImage, InvalidParametersError, \
    SegmentationResult, SolverParams, check_cluster_count, converged, \
    defuzzify, init_membership
from fuzzyseg.distance import NonLocalConfig, WeightTables, \
    local_weight_table, mixed_distances, nonlocal_weight_table

__author__ = "fuzzyseg developers"

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MfcmParams(object):
    """
    Args:
        base (SolverParams): shared solver settings (the norm is ignored,
            the mixed dissimilarity is built on squared Euclidean distances).
        nl (NonLocalConfig): neighborhood, window and blending settings.
    """
    base: SolverParams = field(default_factory=SolverParams)
    nl: NonLocalConfig = field(default_factory=NonLocalConfig)


def precompute_weights(image, cfg):
    """
    Local and non-local weights of every pixel.

    The weights depend on the image only, so a run computes them once.
    Memory is O(N * (2 r_s + 1)^2).

    Args:
        image (GrayImage): input image.
        cfg (NonLocalConfig): settings.

    Returns:
        (WeightTables)
    """
    local_offsets, local = local_weight_table(image, cfg)
    nonlocal_offsets, nonlocal_ = nonlocal_weight_table(image, cfg)
    logger.debug("Weight tables: %d local and %d non-local offsets over "
                 "%dx%d pixels", len(local_offsets), len(nonlocal_offsets),
                 image.width, image.height)
    return WeightTables(local_offsets, local, nonlocal_offsets, nonlocal_)


def _check_tables(image, weights):
    if weights.shape != image.pixels.shape:
        raise InvalidParametersError(
            "Weight tables of shape {} do not match image of shape {}".format(
                weights.shape, image.pixels.shape))


def mfcm_memberships(image, v, params, weights):
    """
    FCM membership update with the mixed dissimilarity.

    Args:
        image (GrayImage): input image.
        v (array-like): c scalar centers.
        params (MfcmParams): settings.
        weights (WeightTables): precomputed for this image.

    Returns:
        (np.ndarray) c x N membership matrix.
    """
    _check_tables(image, weights)
    d = mixed_distances(image, v, params.nl, weights)
    return memberships_from_distances(d, params.base.m)


def mfcm_objective(u, v, image, params, weights):
    """Surrogate objective sum_k sum_i u_ki^m d_ki(mixed)"""
    _check_tables(image, weights)
    d = mixed_distances(image, v, params.nl, weights)
    return float(np.sum(np.asarray(u, dtype=float) ** params.base.m * d))


def run_mfcm(image, params):
    """
    Run the modified FCM image solver.

    Args:
        image (GrayImage): input image.
        params (MfcmParams): settings.

    Returns:
        (SegmentationResult)
    """
    if not isinstance(image, GrayImage):
        image = GrayImage(image)
    base = params.base
    c, m = base.n_clusters, base.m
    check_cluster_count(c, image.n_pixels)
    data = image.to_dataset()
    weights = precompute_weights(image, params.nl)

    u = init_membership(c, image.n_pixels, base.seed)
    trace = []
    done = False
    v = None
    for it in range(base.max_iter):
        v = fcm_centers(u, data, m)
        d = mixed_distances(image, v, params.nl, weights)
        u_new = memberships_from_distances(d, m)
        trace.append(float(np.sum(u_new ** m * d)))
        logger.debug("MFCM iteration %d: objective=%.10g change=%.3g",
                     it + 1, trace[-1], np.max(np.abs(u_new - u)))
        done = converged(u, u_new, base.epsilon)
        u = u_new
        if done:
            break

    if not done:
        warnings.warn("MFCM stopped after max_iter={} iterations without "
                      "converging".format(base.max_iter))
    return SegmentationResult(membership=u, centroids=v, labels=defuzzify(u),
                              iterations=len(trace),
                              objective_trace=np.array(trace),
                              converged=done)


class ModifiedFuzzyCMeans(BaseClusterer):
    """
    Modified fuzzy c-means for grayscale images.

    Replaces the pixel-to-center distance of FCM with
    (1 - lambda) * local + lambda * non-local weighted averages of squared
    distances, which suppresses isolated noisy pixels. Input must be an
    image (GrayImage or 2D array), not a point cloud.

    Args:
        n_clusters (int): number of clusters, >= 2.
        m (float): fuzzifier, > 1.
        epsilon (float): convergence threshold on the membership change.
        max_iter (int): iteration cap.
        seed (int): seed of the random initial partition.
        neighborhood_radius (int): local neighborhood radius r_l.
        search_radius (int): non-local search radius r_s.
        patch_radius (int): patch radius r_p.
        h (float): patch similarity bandwidth.
        lambda_ (float): weight of the non-local term.
    """

    def __init__(self, n_clusters=2, m=2., epsilon=1e-5, max_iter=100,
                 seed=1, neighborhood_radius=2, search_radius=5,
                 patch_radius=2, h=0.1, lambda_=0.5):
        self.n_clusters = n_clusters
        self.m = m
        self.epsilon = epsilon
        self.max_iter = max_iter
        self.seed = seed
        self.neighborhood_radius = neighborhood_radius
        self.search_radius = search_radius
        self.patch_radius = patch_radius
        self.h = h
        self.lambda_ = lambda_

    def mfcm_params(self):
        nl = NonLocalConfig(neighborhood_radius=self.neighborhood_radius,
                            search_radius=self.search_radius,
                            patch_radius=self.patch_radius, h=self.h,
                            lambda_=self.lambda_)
        return MfcmParams(base=self.solver_params(), nl=nl)

    def precheck(self, X):
        if not isinstance(X, GrayImage) and np.ndim(X) != 2:
            return False
        return super(ModifiedFuzzyCMeans, self).precheck(self._prepare(X))

    def _prepare(self, X):
        return X if isinstance(X, GrayImage) else GrayImage(X)

    def _solve(self, image):
        return run_mfcm(image, self.mfcm_params())

    def predict_membership(self, X):
        image = self._prepare(X)
        params = self.mfcm_params()
        return mfcm_memberships(image, self.cluster_centers_, params,
                                precompute_weights(image, params.nl))

    def citations(self):
        return ["@inproceedings{Buades2005, "
                "title = {A non-local algorithm for image denoising}, "
                "author = {Buades, A. and Coll, B. and Morel, J.-M.}, "
                "booktitle = {IEEE Conference on Computer Vision and "
                "Pattern Recognition}, "
                "pages = {60--65}, year = {2005}}"]
