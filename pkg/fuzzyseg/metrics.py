"""
Defuzzification, cluster-to-ground-truth matching, and the evaluation
indices: similarity, false positive ratio and false negative ratio.

Similarity defaults to the Dice coefficient (Jaccard on request); both
error ratios are normalized by the size of the ground-truth object, all in
percent.
"""

from dataclasses import asdict, dataclass

import numpy as np
from sklearn.metrics import confusion_matrix

from fuzzyseg.core import BinaryMask, InvalidParametersError, \
    InvalidReferenceError, defuzzify

__author__ = "fuzzyseg developers"

SIMILARITY_INDICES = ("dice", "jaccard")

CSV_COLUMNS = ["algo", "similarity", "fpr", "fnr", "tp", "fp", "fn", "tn"]

__all__ = ["EvalReport", "defuzzify", "match_clusters", "labels_to_mask",
           "evaluate", "SIMILARITY_INDICES", "CSV_COLUMNS"]


@dataclass(frozen=True)
class EvalReport(object):
    """
    Evaluation of a binary segmentation against a reference.

    Attributes:
        similarity (float): Dice (or Jaccard) index in percent.
        false_positive_ratio (float): 100 * fp / |reference object|.
        false_negative_ratio (float): 100 * fn / |reference object|.
        tp, fp, fn, tn (int): pixel counts.
    """
    similarity: float
    false_positive_ratio: float
    false_negative_ratio: float
    tp: int
    fp: int
    fn: int
    tn: int

    def as_row(self, algo):
        """Flat dict keyed by CSV_COLUMNS"""
        return {"algo": algo, "similarity": self.similarity,
                "fpr": self.false_positive_ratio,
                "fnr": self.false_negative_ratio,
                "tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn}

    def to_text(self):
        """key=value lines, one per field"""
        lines = []
        for key, value in asdict(self).items():
            if isinstance(value, float):
                lines.append("{}={:.6f}".format(key, value))
            else:
                lines.append("{}={}".format(key, value))
        return "\n".join(lines)


def _as_bits(mask):
    if isinstance(mask, BinaryMask):
        return mask.bits
    return np.asarray(mask, dtype=bool)


def match_clusters(labels, gt, c):
    """
    Decide which clusters make up the object.

    Each cluster is assigned to whichever side (object or background) it
    agrees with on more pixels; ties go to background. The agreement of a
    cluster does not depend on the others, so this choice is also the
    optimum over all 2^c assignments.

    Args:
        labels (array-like): N cluster labels in row-major pixel order.
        gt (BinaryMask): reference mask with N pixels.
        c (int): number of clusters.

    Returns:
        (frozenset) indices of the object clusters.
    """
    labels = np.asarray(labels).ravel()
    bits = _as_bits(gt).ravel()
    if labels.shape != bits.shape:
        raise InvalidParametersError(
            "{} labels for a mask of {} pixels".format(labels.size, bits.size))
    selected = set()
    for i in range(c):
        in_cluster = labels == i
        inside = int(np.count_nonzero(in_cluster & bits))
        outside = int(np.count_nonzero(in_cluster & ~bits))
        if inside > outside:
            selected.add(i)
    return frozenset(selected)


def labels_to_mask(labels, object_clusters, shape):
    """Binary mask of the pixels whose label is an object cluster"""
    labels = np.asarray(labels).reshape(shape)
    return BinaryMask(np.isin(labels, sorted(object_clusters)))


def evaluate(seg, gt, similarity="dice"):
    """
    Compare a segmentation to a reference mask.

    Args:
        seg (BinaryMask): segmented object.
        gt (BinaryMask): reference object, must be nonempty.
        similarity (str): "dice" (2tp / (2tp + fp + fn)) or
            "jaccard" (tp / (tp + fp + fn)).

    Returns:
        (EvalReport)
    """
    if similarity not in SIMILARITY_INDICES:
        raise InvalidParametersError(
            "Unknown similarity index {}, choose from {}".format(
                similarity, SIMILARITY_INDICES))
    seg_bits = _as_bits(seg)
    gt_bits = _as_bits(gt)
    if seg_bits.shape != gt_bits.shape:
        raise InvalidParametersError(
            "Mask shapes differ: {} vs {}".format(seg_bits.shape,
                                                  gt_bits.shape))
    n_object = int(gt_bits.sum())
    if n_object == 0:
        raise InvalidReferenceError("The reference mask has no object pixel")

    tn, fp, fn, tp = (int(x) for x in confusion_matrix(
        gt_bits.ravel(), seg_bits.ravel(), labels=[False, True]).ravel())
    if similarity == "dice":
        index = 2. * tp / (2. * tp + fp + fn)
    else:
        index = float(tp) / (tp + fp + fn)
    return EvalReport(similarity=100. * index,
                      false_positive_ratio=100. * fp / n_object,
                      false_negative_ratio=100. * fn / n_object,
                      tp=tp, fp=fp, fn=fn, tn=tn)
