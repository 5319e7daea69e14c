"""
Dissimilarity measures: squared Euclidean, Mahalanobis, and the local /
non-local weighted dissimilarity used by the modified FCM image solver.

The local weight of a neighbor is a spatial Gaussian with sigma equal to the
neighborhood radius; it ignores intensities. The non-local weight is the
classic non-local means patch similarity, truncated to a square search
window. The center pixel belongs to neither set. Neighborhoods are clipped
at the image border, patches are mirror padded.
"""

import warnings
from dataclasses import dataclass

import numpy as np
from scipy import linalg
from scipy.spatial.distance import cdist

from fuzzyseg.core import InvalidParametersError, SingularCovarianceError, \
    as_dataset
from fuzzyseg.utils.kernels import gaussian_kernel, patch_kernel, \
    window_offsets

__author__ = "fuzzyseg developers"


def euclidean_sq(x, v):
    """
    Squared Euclidean distance between two p-vectors.

    Args:
        x, v (array-like): vectors of equal dimension.

    Returns:
        (float) sum of squared coordinate differences.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    v = np.atleast_1d(np.asarray(v, dtype=float))
    if x.shape != v.shape:
        raise InvalidParametersError(
            "Dimension mismatch: {} vs {}".format(x.shape, v.shape))
    return float(np.sum((x - v) ** 2))


@dataclass(frozen=True)
class CovarianceModel(object):
    """
    Sample statistics defining the A-norm of the Mahalanobis distance.

    Attributes:
        means (np.ndarray): p sample means.
        inverse_covariance (np.ndarray): p x p matrix A.
        variances (np.ndarray): p unbiased sample variances.
        correlations (np.ndarray): p x p Pearson correlations.
    """
    means: np.ndarray
    inverse_covariance: np.ndarray
    variances: np.ndarray
    correlations: np.ndarray

    @property
    def dimension(self):
        return self.means.shape[0]

    @classmethod
    def identity(cls, p):
        """Model whose A-norm is the Euclidean norm"""
        return cls(means=np.zeros(p), inverse_covariance=np.eye(p),
                   variances=np.ones(p), correlations=np.eye(p))


def fit_covariance(data):
    """
    Fit the Mahalanobis model of a dataset.

    The covariance is assembled entrywise as rho_ij * sigma_i * sigma_j from
    unbiased (n - 1) variances and Pearson correlations, then inverted.

    Args:
        data (array-like): n x p dataset, n >= 2.

    Returns:
        (CovarianceModel)
    """
    X = as_dataset(data, min_samples=2)
    means = X.mean(axis=0)
    cov = np.atleast_2d(np.cov(X, rowvar=False, ddof=1))
    variances = np.diag(cov).copy()
    if np.any(variances <= 0):
        raise SingularCovarianceError(
            "Zero variance in dimension(s) {}".format(
                np.flatnonzero(variances <= 0).tolist()))
    sigma = np.sqrt(variances)
    correlations = cov / np.outer(sigma, sigma)
    np.fill_diagonal(correlations, 1.)
    assembled = correlations * np.outer(sigma, sigma)
    if np.linalg.matrix_rank(assembled) < assembled.shape[0]:
        raise SingularCovarianceError("Covariance matrix is singular")
    try:
        inverse = linalg.inv(assembled)
    except linalg.LinAlgError as e:
        raise SingularCovarianceError(str(e))
    inverse = (inverse + inverse.T) / 2.
    return CovarianceModel(means=means, inverse_covariance=inverse,
                           variances=variances, correlations=correlations)


def mahalanobis_sq(x, y, model):
    """
    Quadratic form sum_ij A_ij (x_i - y_i)(x_j - y_j).

    Args:
        x, y (array-like): p-vectors.
        model (CovarianceModel): supplies A.

    Returns:
        (float) squared Mahalanobis distance.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    y = np.atleast_1d(np.asarray(y, dtype=float))
    if x.shape != y.shape or x.shape[0] != model.dimension:
        raise InvalidParametersError(
            "Dimension mismatch: {}, {} vs model of dimension {}".format(
                x.shape, y.shape, model.dimension))
    d = x - y
    return float(d @ model.inverse_covariance @ d)


def resolve_model(data, norm):
    """
    Covariance model for a run, or None for the Euclidean norm.

    A singular covariance falls back to Euclidean with a warning.
    """
    if norm == "euclidean":
        return None
    if norm != "mahalanobis":
        raise InvalidParametersError("Unknown norm {}".format(norm))
    try:
        return fit_covariance(data)
    except SingularCovarianceError as e:
        warnings.warn("Mahalanobis norm unavailable ({}); falling back to "
                      "the Euclidean norm".format(e))
        return None


def pairwise_sq_distances(data, centers, model=None):
    """
    Squared distances from every center to every point.

    Args:
        data (np.ndarray): n x p points.
        centers (np.ndarray): c x p prototypes.
        model (CovarianceModel or None): Mahalanobis model, Euclidean if None.

    Returns:
        (np.ndarray) c x n matrix of squared distances.
    """
    X = as_dataset(data)
    V = np.atleast_2d(np.asarray(centers, dtype=float))
    if V.shape[1] != X.shape[1]:
        raise InvalidParametersError(
            "Centers of dimension {} for data of dimension {}".format(
                V.shape[1], X.shape[1]))
    if model is None:
        return cdist(V, X, "sqeuclidean")
    diff = X[np.newaxis, :, :] - V[:, np.newaxis, :]
    d2 = np.einsum("cnp,pq,cnq->cn", diff, model.inverse_covariance, diff)
    return np.maximum(d2, 0.)


@dataclass(frozen=True)
class NonLocalConfig(object):
    """
    Settings of the local / non-local dissimilarity.

    Args:
        neighborhood_radius (int): r_l, the local neighborhood is the
            (2 r_l + 1)^2 window without its center.
        search_radius (int): r_s, truncation of the non-local sum.
        patch_radius (int): r_p, patches are (2 r_p + 1)^2.
        h (float): filtering bandwidth of the patch similarity.
        lambda_ (float): weight of the non-local term, in [0, 1].
    """
    neighborhood_radius: int = 2
    search_radius: int = 5
    patch_radius: int = 2
    h: float = 0.1
    lambda_: float = 0.5

    def __post_init__(self):
        if self.neighborhood_radius < 1:
            raise InvalidParametersError("neighborhood_radius must be >= 1")
        if self.search_radius < self.neighborhood_radius:
            raise InvalidParametersError(
                "search_radius must be >= neighborhood_radius")
        if self.patch_radius < 0:
            raise InvalidParametersError("patch_radius must be >= 0")
        if not self.h > 0:
            raise InvalidParametersError("h must be positive")
        if not 0 <= self.lambda_ <= 1:
            raise InvalidParametersError("lambda_ must lie in [0, 1]")


def _window_members(image, j, radius):
    """In-bounds (pixel index, dy, dx) of the window around j, center excluded"""
    y, x = image.index_to_coords(j)
    members = []
    for dy, dx in window_offsets(radius):
        yy, xx = y + dy, x + dx
        if 0 <= yy < image.height and 0 <= xx < image.width:
            members.append((yy * image.width + xx, dy, dx))
    return members


def _patch(padded, y, x, r_p):
    return padded[y:y + 2 * r_p + 1, x:x + 2 * r_p + 1]


def local_weights(image, j, cfg):
    """
    Spatial Gaussian weights of the local neighborhood of pixel j.

    Args:
        image (GrayImage): input image.
        j (int): pixel index.
        cfg (NonLocalConfig): neighborhood settings.

    Returns:
        (dict) pixel index -> positive weight.
    """
    r_l = cfg.neighborhood_radius
    return {k: float(gaussian_kernel(dy ** 2 + dx ** 2, r_l))
            for k, dy, dx in _window_members(image, j, r_l)}


def nonlocal_weights(image, j, cfg, normalize=True):
    """
    Non-local means weights of the search window of pixel j.

    The raw weight of pixel k is exp(-|P(k) - P(j)|^2 / h^2), where P is the
    mirror padded intensity patch.

    Args:
        image (GrayImage): input image.
        j (int): pixel index.
        cfg (NonLocalConfig): window, patch and bandwidth settings.
        normalize (bool): if True, weights are scaled to sum to 1.

    Returns:
        (dict) pixel index -> weight.
    """
    r_p = cfg.patch_radius
    padded = np.pad(image.pixels, r_p, mode="symmetric")
    y, x = image.index_to_coords(j)
    ref = _patch(padded, y, x, r_p)
    members = _window_members(image, j, cfg.search_radius)
    dist = {}
    for k, dy, dx in members:
        dist[k] = float(np.sum((_patch(padded, y + dy, x + dx, r_p) - ref) ** 2))
    if not normalize:
        return {k: float(patch_kernel(d, cfg.h)) for k, d in dist.items()}
    if not dist:
        return {}
    # Shifting by the smallest distance keeps far patches from underflowing
    d_min = min(dist.values())
    raw = {k: float(patch_kernel(d - d_min, cfg.h)) for k, d in dist.items()}
    total = sum(raw.values())
    return {k: w / total for k, w in raw.items()}


def mixed_distance(image, j, center, cfg):
    """
    Local / non-local dissimilarity of pixel j to a scalar cluster center.

    d = (1 - lambda) * d_l^2 + lambda * d_nl^2, where d_l^2 is the local
    weighted average of the squared distances of the neighbors to the center
    and d_nl^2 is the non-local weighted average over the search window.

    Args:
        image (GrayImage): input image.
        j (int): pixel index.
        center (float): cluster center intensity.
        cfg (NonLocalConfig): settings.

    Returns:
        (float) mixed squared dissimilarity.
    """
    image.index_to_coords(j)
    values = image.intensities
    center = float(np.squeeze(center))
    own = (values[j] - center) ** 2

    wl = local_weights(image, j, cfg)
    wl_total = sum(wl.values())
    if wl_total > 0:
        d_l = sum(w * (values[k] - center) ** 2 for k, w in wl.items()) \
            / wl_total
    else:
        d_l = own

    wnl = nonlocal_weights(image, j, cfg)
    if wnl:
        d_nl = sum(w * (values[k] - center) ** 2 for k, w in wnl.items())
    else:
        d_nl = own
    lam = cfg.lambda_
    return float((1. - lam) * d_l + lam * d_nl)


class WeightTables(object):
    """
    Dense per-pixel weight tables of an image.

    Each table has shape (n_offsets, height, width); entry [s, y, x] is the
    weight that pixel (y, x) gives to its neighbor at offsets[s], zero when
    the neighbor falls outside the image.

    Attributes:
        local_offsets (list): (dy, dx) offsets of the local neighborhood.
        local (np.ndarray): raw spatial Gaussian weights.
        local_total (np.ndarray): per-pixel sum of the local weights.
        nonlocal_offsets (list): (dy, dx) offsets of the search window.
        nonlocal_ (np.ndarray): normalized non-local weights.
    """

    def __init__(self, local_offsets, local, nonlocal_offsets, nonlocal_):
        self.local_offsets = local_offsets
        self.local = local
        self.local_total = local.sum(axis=0)
        self.nonlocal_offsets = nonlocal_offsets
        self.nonlocal_ = nonlocal_

    @property
    def shape(self):
        return self.local.shape[1:]

    def for_pixel(self, j):
        """
        Weight maps of one pixel, as returned by local_weights and
        nonlocal_weights.

        Returns:
            (dict, dict) local and non-local pixel index -> weight maps.
        """
        height, width = self.shape
        y, x = divmod(int(j), width)

        def _collect(offsets, table):
            out = {}
            for s, (dy, dx) in enumerate(offsets):
                yy, xx = y + dy, x + dx
                if 0 <= yy < height and 0 <= xx < width:
                    out[yy * width + xx] = float(table[s, y, x])
            return out

        return (_collect(self.local_offsets, self.local),
                _collect(self.nonlocal_offsets, self.nonlocal_))


def _valid_mask(shape, dy, dx):
    """Pixels whose neighbor at offset (dy, dx) lies inside the image"""
    height, width = shape
    ys = np.arange(height)[:, np.newaxis] + dy
    xs = np.arange(width)[np.newaxis, :] + dx
    return (ys >= 0) & (ys < height) & (xs >= 0) & (xs < width)


def local_weight_table(image, cfg):
    """Spatial Gaussian weights of every pixel, see local_weights"""
    r_l = cfg.neighborhood_radius
    offsets = window_offsets(r_l)
    table = np.zeros((len(offsets),) + image.pixels.shape)
    for s, (dy, dx) in enumerate(offsets):
        table[s] = gaussian_kernel(dy ** 2 + dx ** 2, r_l) * \
            _valid_mask(image.pixels.shape, dy, dx)
    return offsets, table


def nonlocal_weight_table(image, cfg):
    """Normalized non-local means weights of every pixel, see nonlocal_weights"""
    r_p, r_s = cfg.patch_radius, cfg.search_radius
    height, width = image.pixels.shape
    padded = np.pad(image.pixels, r_p, mode="symmetric")
    framed = np.pad(padded, r_s, mode="constant")
    span_y, span_x = padded.shape
    offsets = window_offsets(r_s)

    dist = np.full((len(offsets), height, width), np.inf)
    for s, (dy, dx) in enumerate(offsets):
        shifted = framed[r_s + dy:r_s + dy + span_y, r_s + dx:r_s + dx + span_x]
        sq = (padded - shifted) ** 2
        acc = np.zeros((height, width))
        for qy in range(2 * r_p + 1):
            for qx in range(2 * r_p + 1):
                acc += sq[qy:qy + height, qx:qx + width]
        valid = _valid_mask((height, width), dy, dx)
        dist[s][valid] = acc[valid]

    d_min = dist.min(axis=0)
    d_min[~np.isfinite(d_min)] = 0.
    weights = patch_kernel(dist - d_min, cfg.h)
    total = weights.sum(axis=0)
    np.divide(weights, total, out=weights, where=total > 0)
    return offsets, weights


def window_sum(values, offsets, table):
    """
    Per-pixel weighted sum of neighbor values, sum_s table[s] * values[p + s].

    Args:
        values (np.ndarray): height x width array.
        offsets (list): (dy, dx) offsets.
        table (np.ndarray): weights, shape (len(offsets), height, width).

    Returns:
        (np.ndarray) height x width array.
    """
    height, width = values.shape
    radius = max(max(abs(dy), abs(dx)) for dy, dx in offsets)
    framed = np.pad(values, radius, mode="constant")
    acc = np.zeros((height, width))
    for s, (dy, dx) in enumerate(offsets):
        acc += table[s] * framed[radius + dy:radius + dy + height,
                                 radius + dx:radius + dx + width]
    return acc


def mixed_distances(image, centers, cfg, tables):
    """
    Mixed dissimilarity of every pixel to every center.

    Vectorized form of mixed_distance over precomputed weight tables.

    Args:
        image (GrayImage): input image.
        centers (array-like): c scalar centers (or c x 1).
        cfg (NonLocalConfig): settings, lambda_ is read from here.
        tables (WeightTables): weights of this image.

    Returns:
        (np.ndarray) c x N matrix of mixed squared dissimilarities.
    """
    centers = np.asarray(centers, dtype=float).reshape(-1)
    pixels = image.pixels
    lam = cfg.lambda_
    has_local = tables.local_total > 0
    has_nonlocal = tables.nonlocal_.sum(axis=0) > 0
    out = np.empty((centers.shape[0], pixels.size))
    for i, v in enumerate(centers):
        d2 = (pixels - v) ** 2
        d_l = d2.copy()
        np.divide(window_sum(d2, tables.local_offsets, tables.local),
                  tables.local_total, out=d_l, where=has_local)
        d_nl = np.where(has_nonlocal,
                        window_sum(d2, tables.nonlocal_offsets,
                                   tables.nonlocal_), d2)
        out[i] = ((1. - lam) * d_l + lam * d_nl).ravel()
    return out
