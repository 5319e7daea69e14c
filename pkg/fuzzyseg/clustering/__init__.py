from fuzzyseg.core import InvalidParametersError
from fuzzyseg.clustering.base import BaseClusterer
from fuzzyseg.clustering.fcm import FuzzyCMeans, fcm_centers, \
    fcm_memberships, fcm_objective, run_fcm
from fuzzyseg.clustering.fpcm import FpcmParams, FuzzyPossibilisticCMeans, \
    fpcm_centers, fpcm_memberships, fpcm_objective, fpcm_typicalities, \
    run_fpcm
from fuzzyseg.clustering.mfcm import MfcmParams, ModifiedFuzzyCMeans, \
    mfcm_memberships, mfcm_objective, precompute_weights, run_mfcm
from fuzzyseg.clustering.pcm import PcmParams, PossibilisticCMeans, \
    pcm_eta, pcm_memberships, pcm_objective, run_pcm

ALGORITHMS = {
    "fcm": FuzzyCMeans,
    "mfcm": ModifiedFuzzyCMeans,
    "pcm": PossibilisticCMeans,
    "fpcm": FuzzyPossibilisticCMeans,
}


def get_clusterer(name, **params):
    """
    Instantiate a clusterer by algorithm name.

    Args:
        name (str): one of "fcm", "mfcm", "pcm", "fpcm".
        **params: options accepted by that clusterer; options it does not
            know are dropped, so one parameter set can drive every algorithm.

    Returns:
        (BaseClusterer)
    """
    try:
        cls = ALGORITHMS[name.lower()]
    except KeyError:
        raise InvalidParametersError(
            "Unknown algorithm {}, choose from {}".format(
                name, sorted(ALGORITHMS)))
    accepted = cls._get_param_names()
    return cls(**{k: v for k, v in params.items() if k in accepted})
