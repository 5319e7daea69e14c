import os
import warnings

THREADS_ENV_VAR = "FUZZYSEG_THREADS"


def get_thread_count(default=0):
    """
    Worker process cap taken from the FUZZYSEG_THREADS environment variable.

    Args:
        default (int): value used when the variable is unset.

    Returns:
        (int) worker count; 0 means run sequentially.
    """
    raw = os.environ.get(THREADS_ENV_VAR)
    if raw is None or not raw.strip():
        return default
    try:
        n = int(raw)
    except ValueError:
        warnings.warn("Ignoring non-integer {}={!r}".format(
            THREADS_ENV_VAR, raw))
        return default
    return max(n, 0)
