import numpy as np


def gaussian_kernel(distance_sq, sigma):
    """
    Returns a Gaussian kernel of squared distances,
    exp(-d^2 / (2 sigma^2)).
    """
    return np.exp(-np.asarray(distance_sq, dtype=float) / 2. / sigma ** 2)


def patch_kernel(patch_distance_sq, h):
    """
    Returns the non-local means similarity of squared patch distances,
    exp(-d^2 / h^2).
    """
    return np.exp(-np.asarray(patch_distance_sq, dtype=float) / h ** 2)


def window_offsets(radius, include_center=False):
    """
    Row-major (dy, dx) offsets of a (2 * radius + 1)^2 square window.

    Args:
        radius (int): half width of the window.
        include_center (bool): whether to keep the (0, 0) offset.

    Returns:
        (list of tuple) offsets.
    """
    return [(dy, dx)
            for dy in range(-radius, radius + 1)
            for dx in range(-radius, radius + 1)
            if include_center or (dy, dx) != (0, 0)]
