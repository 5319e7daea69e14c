import numpy as np
from sklearn.base import BaseEstimator, ClusterMixin

from fuzzyseg.core import GrayImage, SolverParams, as_dataset, defuzzify

__author__ = "fuzzyseg developers"


class BaseClusterer(BaseEstimator, ClusterMixin):
    """
    Abstract class for the c-means solvers of fuzzyseg.

    ## Using a BaseClusterer Class

    Clusterers follow the ScikitLearn estimator protocol:

        `fit`: Run the solver on a dataset (n x p array, a 1D array of
            scalars, or a GrayImage) and store the outcome
        `predict`: Hard labels of new points against the fitted centers
        `fit_predict`: Fit, then return the labels of the training data
        `segment`: Fit a GrayImage and return the full SegmentationResult

    After fitting, the following attributes are available:

        `result_` - the SegmentationResult of the run
        `labels_` - defuzzified labels of the training points
        `cluster_centers_` - c x p cluster prototypes
        `membership_` - the c x N membership matrix (clusters first, as in
            the objective functions, not ScikitLearn's samples first)
        `model_` - Mahalanobis covariance model of the run, or None

    You can use `precheck` to find out whether a dataset holds at least as
    many distinct points as there are clusters; with fewer, a cluster is
    bound to end up empty or duplicated.

    ## Implementing a New BaseClusterer Class

    These operations must be implemented for each new clusterer:
        `_solve` - Takes the prepared dataset, returns a SegmentationResult
        `predict_membership` - Memberships of new points for the fitted
            centers
        `citations` - Returns a list of citations in BibTeX format

    All options of the clusterer must be set by the `__init__` function as
    keyword arguments with default values, stored under the same attribute
    name. This keeps `get_params` and `set_params` of `BaseEstimator`
    working. Attributes set by fitting end with an underscore.
    """

    def solver_params(self):
        """SolverParams built from the shared estimator options"""
        return SolverParams(n_clusters=self.n_clusters, m=self.m,
                            epsilon=self.epsilon, max_iter=self.max_iter,
                            seed=self.seed,
                            norm=getattr(self, "norm", "euclidean"))

    def precheck(self, X):
        """
        Estimate whether clustering X can succeed.

        Args:
            X (array-like or GrayImage): data to cluster.

        Returns:
            (bool) True if X holds at least n_clusters distinct points.
        """
        data = as_dataset(X)
        return len(np.unique(data, axis=0)) >= self.n_clusters

    def _prepare(self, X):
        return as_dataset(X)

    def fit(self, X, y=None):
        """Run the solver on X

        Args:
            X (array-like or GrayImage): training data.
        Returns:
            self
        """
        data = self._prepare(X)
        self.result_ = self._solve(data)
        self.labels_ = self.result_.labels
        self.cluster_centers_ = self.result_.centroids
        self.membership_ = self.result_.membership
        self.model_ = self.result_.model
        return self

    def predict(self, X):
        """Hard labels of X for the fitted centers"""
        return defuzzify(self.predict_membership(X))

    def segment(self, image):
        """
        Cluster the pixels of an image.

        Args:
            image (GrayImage): image to segment.

        Returns:
            (SegmentationResult) result, with labels in row-major pixel order.
        """
        if not isinstance(image, GrayImage):
            image = GrayImage(image)
        return self.fit(image).result_

    def _solve(self, X):
        """
        Solver entry point, which has to be implemented in any derived
        clusterer subclass.

        Args:
            X: prepared input data.

        Returns:
            (SegmentationResult)
        """

        raise NotImplementedError("_solve() is not defined!")

    def predict_membership(self, X):
        """
        Memberships of new points for the fitted centers.

        Returns:
            (np.ndarray) c x n matrix.
        """

        raise NotImplementedError("predict_membership() is not defined!")

    def citations(self):
        """
        Citation(s) and reference(s) for this algorithm.

        Returns:
            (list) each element should be a string citation,
                ideally in BibTeX format.
        """

        raise NotImplementedError("citations() is not defined!")
