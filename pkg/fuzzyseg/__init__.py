"""fuzzyseg is a library of fuzzy clustering algorithms for segmenting
grayscale images, with synthetic phantoms and evaluation indices."""

__version__ = "0.1.0"

from fuzzyseg.clustering import FuzzyCMeans, FuzzyPossibilisticCMeans, \
    ModifiedFuzzyCMeans, PossibilisticCMeans, get_clusterer
from fuzzyseg.core import BinaryMask, FuzzySegError, GrayImage, \
    SegmentationResult
from fuzzyseg.metrics import evaluate, match_clusters
from fuzzyseg.phantom import PhantomSpec, generate
