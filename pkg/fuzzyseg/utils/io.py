"""
This module defines functions for reading and writing fuzzyseg images,
masks, label maps and membership matrices.

Images are binary PGM (P5, maxval 255) or 8-bit grayscale PNG. Writers pick
PNG when the path ends in ".png" and PGM otherwise. All paths go through
monty's zopen, so ".gz" and ".bz2" suffixes are handled transparently; gzip
output is written with a zero timestamp so identical content gives identical
bytes.
"""

import gzip
import io
from dataclasses import dataclass

import numpy as np
import pandas
import png
from monty.io import zopen

from fuzzyseg.core import BinaryMask, FuzzySegError, GrayImage, \
    InvalidParametersError

__author__ = "fuzzyseg developers"

PGM_MAGIC = b"P5"
PNG_MAGIC = b"\x89PNG\r\n\x1a\n"


class ImageFormatError(FuzzySegError, IOError):
    """An image file could not be decoded"""


class UnsupportedFormatError(ImageFormatError):
    """Valid image of a kind this package does not read"""


class MalformedHeaderError(ImageFormatError):
    """Corrupt or incomplete header"""


class TruncatedPayloadError(ImageFormatError):
    """Fewer pixel bytes than the header announces"""


@dataclass(frozen=True, eq=False)
class LabelImage(object):
    """
    Hard cluster labels laid out as an image.

    Args:
        labels (np.ndarray): (height, width) array of cluster indices.
        n_clusters (int): number of clusters c, at most 256.
    """
    labels: np.ndarray
    n_clusters: int

    def __post_init__(self):
        labels = np.array(self.labels, dtype=np.int64)
        if labels.ndim != 2:
            raise InvalidParametersError("LabelImage needs a 2D array")
        if not 1 <= self.n_clusters <= 256:
            raise InvalidParametersError(
                "n_clusters must lie in [1, 256], got {}".format(
                    self.n_clusters))
        if labels.size and (labels.min() < 0 or
                            labels.max() >= self.n_clusters):
            raise InvalidParametersError(
                "Labels must lie in [0, {})".format(self.n_clusters))
        labels.flags.writeable = False
        object.__setattr__(self, "labels", labels)

    @property
    def height(self):
        return self.labels.shape[0]

    @property
    def width(self):
        return self.labels.shape[1]

    @classmethod
    def from_result(cls, result, shape):
        """
        Args:
            result (SegmentationResult): solver output with N labels.
            shape (tuple): (height, width) with height * width = N.
        """
        labels = np.asarray(result.labels)
        if labels.size != shape[0] * shape[1]:
            raise InvalidParametersError(
                "{} labels do not fill a {}x{} image".format(
                    labels.size, shape[1], shape[0]))
        return cls(labels.reshape(shape), result.n_clusters)

    def to_gray_values(self):
        """8-bit values floor(255 i / (c - 1)), all 0 when c = 1"""
        if self.n_clusters == 1:
            return np.zeros(self.labels.shape, dtype=np.uint8)
        return (255 * self.labels // (self.n_clusters - 1)).astype(np.uint8)


def _pgm_tokens(data, count):
    """
    Read `count` whitespace separated header tokens, skipping # comments.

    Returns:
        (list, int) the tokens and the offset just past the last one.
    """
    tokens = []
    pos = 0
    n = len(data)
    while len(tokens) < count:
        while pos < n and data[pos:pos + 1].isspace():
            pos += 1
        if pos < n and data[pos:pos + 1] == b"#":
            while pos < n and data[pos:pos + 1] not in (b"\n", b"\r"):
                pos += 1
            continue
        if pos >= n:
            raise MalformedHeaderError("PGM header ends after {} of {} "
                                       "fields".format(len(tokens), count))
        start = pos
        while pos < n and not data[pos:pos + 1].isspace() and \
                data[pos:pos + 1] != b"#":
            pos += 1
        tokens.append(data[start:pos])
    return tokens, pos


def decode_pgm(data):
    """
    Decode a binary PGM.

    Args:
        data (bytes): file contents.

    Returns:
        (np.ndarray) (height, width) uint8 array.
    """
    tokens, pos = _pgm_tokens(data, 4)
    if tokens[0] != PGM_MAGIC:
        raise UnsupportedFormatError(
            "Only binary PGM (P5) is supported, got {!r}".format(tokens[0]))
    try:
        width, height, maxval = (int(t) for t in tokens[1:])
    except ValueError:
        raise MalformedHeaderError(
            "Non-integer PGM header field in {}".format(tokens[1:]))
    if width < 1 or height < 1 or not 1 <= maxval <= 65535:
        raise MalformedHeaderError(
            "Invalid PGM header: width={} height={} maxval={}".format(
                width, height, maxval))
    if maxval != 255:
        raise UnsupportedFormatError(
            "Only 8-bit PGM (maxval 255) is supported, got maxval {}".format(
                maxval))
    if pos >= len(data) or not data[pos:pos + 1].isspace():
        raise MalformedHeaderError("Missing whitespace after PGM maxval")
    payload = data[pos + 1:pos + 1 + width * height]
    if len(payload) < width * height:
        raise TruncatedPayloadError(
            "PGM payload has {} of {} bytes".format(len(payload),
                                                    width * height))
    return np.frombuffer(payload, dtype=np.uint8).reshape(height, width)


def encode_pgm(values):
    values = np.asarray(values, dtype=np.uint8)
    header = "P5\n{} {}\n255\n".format(values.shape[1], values.shape[0])
    return header.encode("ascii") + values.tobytes()


def decode_png(data):
    """
    Decode an 8-bit grayscale PNG with pypng.

    Returns:
        (np.ndarray) (height, width) uint8 array.
    """
    reader = png.Reader(bytes=data)
    try:
        width, height, rows, info = reader.read()
        if not info["greyscale"] or info["alpha"] or info["bitdepth"] != 8:
            raise UnsupportedFormatError(
                "Only 8-bit grayscale PNG without alpha is supported")
        values = np.vstack([np.asarray(row, dtype=np.uint8)
                            for row in rows])
    except png.ChunkError as e:
        raise TruncatedPayloadError("Corrupt PNG data: {}".format(e))
    except png.FormatError as e:
        raise MalformedHeaderError("Invalid PNG: {}".format(e))
    if values.shape != (height, width):
        raise TruncatedPayloadError(
            "PNG has {} of {} rows".format(values.shape[0], height))
    return values


def _is_png_path(filename):
    name = filename.lower()
    for suffix in (".gz", ".bz2"):
        if name.endswith(suffix):
            name = name[:-len(suffix)]
    return name.endswith(".png")


def open_output(filename, mode="wb"):
    """
    Open a file for writing or appending through zopen. ".gz" files get a
    gzip header without a timestamp.

    Args:
        filename (str): output path.
        mode (str): "wb", "wt", "ab" or "at".
    """
    if filename.lower().endswith(".gz"):
        raw = gzip.GzipFile(filename, mode=mode[0] + "b", mtime=0)
        return raw if "b" in mode else io.TextIOWrapper(raw)
    return zopen(filename, mode)


def read_uint8(filename):
    """
    Read a PGM or PNG file as raw 8-bit values.

    The format is detected from the leading bytes, not the file name.

    Args:
        filename (str): path to the image.

    Returns:
        (np.ndarray) (height, width) uint8 array.
    """
    with zopen(filename, "rb") as f:
        data = f.read()
    if data.startswith(PNG_MAGIC):
        return decode_png(data)
    if data.startswith(b"P") and data[1:2].isdigit():
        return decode_pgm(data)
    raise UnsupportedFormatError(
        "{} is neither a PGM nor a PNG file".format(filename))


def write_uint8(values, filename):
    """Write 8-bit values as PNG (".png" paths) or binary PGM"""
    values = np.asarray(values, dtype=np.uint8)
    with open_output(filename, "wb") as f:
        if _is_png_path(filename):
            writer = png.Writer(width=values.shape[1],
                                height=values.shape[0],
                                greyscale=True, bitdepth=8)
            writer.write(f, values.tolist())
        else:
            f.write(encode_pgm(values))


def read_gray(filename):
    """
    Load a grayscale image, intensities scaled to [0, 1].

    Args:
        filename (str): PGM (P5, maxval 255) or 8-bit grayscale PNG.

    Returns:
        (GrayImage)
    """
    return GrayImage.from_uint8(read_uint8(filename))


def write_gray(image, filename):
    """Write a GrayImage, intensities rounded to the nearest of 256 levels"""
    values = np.rint(np.asarray(image.pixels) * 255.)
    write_uint8(values.astype(np.uint8), filename)


def write_labels(labels, filename):
    """
    Write a label map, label i as gray value floor(255 i / (c - 1)).

    Args:
        labels (LabelImage): label map.
        filename (str): output path.
    """
    write_uint8(labels.to_gray_values(), filename)


def read_mask(filename):
    """Read a mask image; gray values >= 128 are object"""
    return BinaryMask(read_uint8(filename) >= 128)


def write_mask(mask, filename):
    """Write a mask with 0 for background and 255 for object"""
    write_uint8(np.where(mask.bits, 255, 0), filename)


def membership_frame(u):
    """
    Tabulate a c x N membership matrix, one row per pixel.

    Returns:
        (pandas.DataFrame) columns pixel, c0, ..., c{c-1}.
    """
    u = np.asarray(u, dtype=float)
    if u.ndim != 2:
        raise InvalidParametersError("Membership matrix must be 2D")
    df = pandas.DataFrame(u.T, columns=["c{}".format(i)
                                        for i in range(u.shape[0])])
    df.insert(0, "pixel", np.arange(u.shape[1]))
    return df


def write_membership_csv(u, filename):
    """
    Store a membership matrix as CSV with 9 significant digits.

    Args:
        u (array-like): c x N membership matrix.
        filename (str): output path.
    """
    with open_output(filename, "wt") as f:
        membership_frame(u).to_csv(f, index=False, float_format="%.9g")
