"""
Value types shared by every solver, the error hierarchy, partition
initialization and the membership convergence test.

Pixel index k maps to (row, col) = divmod(k, width), i.e. row-major order.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from sklearn.utils import check_array

__author__ = "fuzzyseg developers"

NORMS = ("euclidean", "mahalanobis")


class FuzzySegError(Exception):
    """Base class for every error raised by fuzzyseg"""


class InvalidParametersError(FuzzySegError, ValueError):
    """A parameter, shape or dimension is out of its allowed range"""


class InvalidReferenceError(FuzzySegError, ValueError):
    """The ground-truth mask cannot be used for evaluation"""


class SolverError(FuzzySegError):
    """A clustering run cannot continue"""


class EmptyClusterError(SolverError):
    """A cluster lost all of its membership mass"""


class DegenerateEtaError(SolverError):
    """A possibilistic scale eta_i collapsed to zero"""


class SingularCovarianceError(SolverError):
    """The sample covariance matrix cannot be inverted"""


class GrayImage(object):
    """
    A 2D grayscale image with intensities in [0, 1].

    The pixel array is stored read-only with shape (height, width).

    Args:
        pixels (array-like): 2D array of intensities in [0, 1].
    """

    def __init__(self, pixels):
        pixels = np.array(pixels, dtype=float)
        if pixels.ndim != 2:
            raise InvalidParametersError(
                "GrayImage needs a 2D array, got {} dimensions".format(
                    pixels.ndim))
        if pixels.shape[0] < 1 or pixels.shape[1] < 1:
            raise InvalidParametersError("GrayImage must be at least 1x1")
        if not np.all(np.isfinite(pixels)) or pixels.min() < 0 \
                or pixels.max() > 1:
            raise InvalidParametersError(
                "GrayImage intensities must lie in [0, 1]")
        pixels.flags.writeable = False
        self._pixels = pixels

    @classmethod
    def from_uint8(cls, values):
        """Build an image from 8-bit values, dividing by 255"""
        values = np.asarray(values)
        if values.min() < 0 or values.max() > 255:
            raise InvalidParametersError("8-bit values must lie in [0, 255]")
        return cls(values.astype(float) / 255.0)

    @property
    def pixels(self):
        return self._pixels

    @property
    def height(self):
        return self._pixels.shape[0]

    @property
    def width(self):
        return self._pixels.shape[1]

    @property
    def n_pixels(self):
        return self._pixels.size

    @property
    def intensities(self):
        """Flat row-major intensity vector of length width * height"""
        return self._pixels.ravel()

    def to_dataset(self):
        """Return the image as an (N, 1) dataset"""
        return self.intensities.reshape(-1, 1)

    def index_to_coords(self, k):
        if not 0 <= k < self.n_pixels:
            raise InvalidParametersError(
                "Pixel index {} outside image of {} pixels".format(
                    k, self.n_pixels))
        return divmod(int(k), self.width)

    def __eq__(self, other):
        return isinstance(other, GrayImage) and \
            np.array_equal(self._pixels, other._pixels)

    def __repr__(self):
        return "GrayImage({}x{})".format(self.width, self.height)


class BinaryMask(object):
    """
    A boolean object/background mask with shape (height, width).

    Args:
        bits (array-like): 2D array, True (or nonzero) marks object pixels.
    """

    def __init__(self, bits):
        bits = np.array(bits, dtype=bool)
        if bits.ndim != 2:
            raise InvalidParametersError("BinaryMask needs a 2D array")
        bits.flags.writeable = False
        self._bits = bits

    @property
    def bits(self):
        return self._bits

    @property
    def height(self):
        return self._bits.shape[0]

    @property
    def width(self):
        return self._bits.shape[1]

    @property
    def shape(self):
        return self._bits.shape

    @property
    def n_object(self):
        return int(self._bits.sum())

    def __eq__(self, other):
        return isinstance(other, BinaryMask) and \
            np.array_equal(self._bits, other._bits)

    def __repr__(self):
        return "BinaryMask({}x{}, {} object pixels)".format(
            self.width, self.height, self.n_object)


def as_dataset(X, min_samples=1):
    """
    Convert input data to an (n, p) float array.

    Accepts a GrayImage, a 1D sequence of scalars (p = 1) or a 2D array.

    Args:
        X (GrayImage or array-like): data points.
        min_samples (int): minimum number of points required.

    Returns:
        (np.ndarray) array of shape (n, p).
    """
    if isinstance(X, GrayImage):
        return X.to_dataset()
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    try:
        return check_array(X, ensure_min_samples=min_samples)
    except ValueError as e:
        raise InvalidParametersError(str(e))


@dataclass(frozen=True)
class SolverParams(object):
    """
    Parameters shared by all c-means solvers.

    Args:
        n_clusters (int): number of clusters c, at least 2.
        m (float): fuzzifier, strictly greater than 1.
        epsilon (float): convergence threshold on the max membership change.
        max_iter (int): iteration cap.
        seed (int): seed of the partition initialization.
        norm (str): "euclidean" or "mahalanobis".
    """
    n_clusters: int = 2
    m: float = 2.0
    epsilon: float = 1e-5
    max_iter: int = 100
    seed: int = 1
    norm: str = "euclidean"

    def __post_init__(self):
        if int(self.n_clusters) != self.n_clusters or self.n_clusters < 2:
            raise InvalidParametersError(
                "n_clusters must be an integer >= 2, got {}".format(
                    self.n_clusters))
        if not self.m > 1:
            raise InvalidParametersError(
                "The fuzzifier m must be > 1, got {}".format(self.m))
        if not self.epsilon > 0:
            raise InvalidParametersError("epsilon must be positive")
        if int(self.max_iter) != self.max_iter or self.max_iter < 1:
            raise InvalidParametersError("max_iter must be a positive integer")
        if int(self.seed) != self.seed or self.seed < 0:
            raise InvalidParametersError(
                "seed must be a non-negative integer, got {}".format(
                    self.seed))
        if self.norm not in NORMS:
            raise InvalidParametersError(
                "Unknown norm {}, choose from {}".format(self.norm, NORMS))


@dataclass(frozen=True)
class SegmentationResult(object):
    """
    Output of every solver.

    Attributes:
        membership (np.ndarray): c x N matrix U.
        centroids (np.ndarray): c x p cluster prototypes.
        labels (np.ndarray): defuzzified labels, argmax over clusters.
        iterations (int): number of iterations run.
        objective_trace (np.ndarray): objective value after each iteration.
        converged (bool): whether the membership change fell below epsilon.
        typicality (np.ndarray or None): c x N matrix T (FPCM only).
        eta (np.ndarray or None): possibilistic scales (PCM only).
        model (CovarianceModel or None): Mahalanobis model the distances
            were measured with; None for the Euclidean norm and for MFCM.
    """
    membership: np.ndarray
    centroids: np.ndarray
    labels: np.ndarray
    iterations: int
    objective_trace: np.ndarray
    converged: bool
    typicality: Optional[np.ndarray] = None
    eta: Optional[np.ndarray] = field(default=None)
    model: Optional[object] = None

    @property
    def n_clusters(self):
        return self.membership.shape[0]

    @property
    def objective(self):
        """Objective value of the final iteration"""
        return float(self.objective_trace[-1])


@dataclass(frozen=True)
class PcmResult(SegmentationResult):
    """
    Possibilistic result. Membership entries lie in (0, 1] and columns are
    not constrained to sum to 1; `eta` holds the per-cluster scales.
    """


def check_cluster_count(c, n):
    if int(c) != c or c < 2:
        raise InvalidParametersError(
            "The number of clusters must be >= 2, got {}".format(c))
    if n < c:
        raise InvalidParametersError(
            "Need at least as many points as clusters ({} < {})".format(n, c))


def init_membership(c, n, seed):
    """
    Create a random fuzzy c-partition.

    Every column holds c independent uniform draws normalized to sum to 1.

    Args:
        c (int): number of clusters, at least 2.
        n (int): number of points, at least c.
        seed (int): RNG seed; the same seed gives a bit-identical matrix.

    Returns:
        (np.ndarray) c x n membership matrix.
    """
    check_cluster_count(c, n)
    rng = np.random.default_rng(seed)
    u = rng.random((c, n))
    return u / u.sum(axis=0, keepdims=True)


def converged(u_prev, u_next, epsilon):
    """
    Membership convergence test, inclusive of the threshold.

    Returns:
        (bool) True iff max |u_next - u_prev| <= epsilon.
    """
    u_prev = np.asarray(u_prev)
    u_next = np.asarray(u_next)
    if u_prev.shape != u_next.shape:
        raise InvalidParametersError(
            "Cannot compare matrices of shapes {} and {}".format(
                u_prev.shape, u_next.shape))
    return bool(np.max(np.abs(u_next - u_prev)) <= epsilon)


def defuzzify(u):
    """
    Hard labels from a membership matrix; ties go to the lowest index.

    Args:
        u (np.ndarray): c x N membership matrix.

    Returns:
        (np.ndarray) N integer labels.
    """
    return np.argmax(np.asarray(u), axis=0)
