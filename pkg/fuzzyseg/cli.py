"""
Command line interface: fuzzyseg <segment|evaluate|phantom|benchmark>.

Results go to standard output as key=value lines; diagnostics go to standard
error. Exit codes: 0 success, 2 bad arguments, 3 solver failure, 4 I/O
failure.
"""

import argparse
import logging
import os
import sys
from dataclasses import dataclass, fields, replace
from multiprocessing import Pool
from typing import Optional

import numpy as np
import pandas
from tqdm.auto import tqdm

from fuzzyseg import __version__
from fuzzyseg.clustering import ALGORITHMS, get_clusterer
from fuzzyseg.clustering.fpcm import FpcmParams
from fuzzyseg.clustering.pcm import ETA_MODES, PcmParams
from fuzzyseg.core import NORMS, FuzzySegError, InvalidParametersError, \
    InvalidReferenceError, SolverError, SolverParams
from fuzzyseg.distance import NonLocalConfig
from fuzzyseg.metrics import CSV_COLUMNS, SIMILARITY_INDICES, evaluate, \
    labels_to_mask, match_clusters
from fuzzyseg.phantom import NOISE_KINDS, Disk, PhantomSpec, Rectangle, \
    generate
from fuzzyseg.utils.io import LabelImage, open_output, read_gray, read_mask, \
    read_uint8, write_gray, write_labels, write_mask, write_membership_csv
from fuzzyseg.utils.utils import get_thread_count

__author__ = "fuzzyseg developers"

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_SOLVER = 3
EXIT_IO = 4

DEFAULT_SEEDS = tuple(range(1, 11))


@dataclass(frozen=True)
class RunConfig(object):
    """
    Every option of a segmentation run, with the command line defaults.

    Field names match the flags (kebab-case on the command line).
    """
    algorithm: str = "fcm"
    clusters: int = 2
    m: float = 2.
    eta_exp: float = 2.
    epsilon: float = 1e-5
    max_iter: int = 100
    seed: int = 1
    norm: str = "euclidean"
    lambda_: float = 0.5
    r_l: int = 2
    r_s: int = 5
    r_p: int = 2
    h: float = 0.1
    k: float = 1.
    eta_mode: str = "fixed"
    similarity: str = "dice"
    input: Optional[str] = None
    output: Optional[str] = None
    membership: Optional[str] = None

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise InvalidParametersError(
                "Unknown algorithm {}, choose from {}".format(
                    self.algorithm, sorted(ALGORITHMS)))
        if self.similarity not in SIMILARITY_INDICES:
            raise InvalidParametersError(
                "Unknown similarity index {}".format(self.similarity))
        base = self.solver_params()
        NonLocalConfig(neighborhood_radius=self.r_l,
                       search_radius=self.r_s, patch_radius=self.r_p,
                       h=self.h, lambda_=self.lambda_)
        PcmParams(base=base, eta_mode=self.eta_mode, k=self.k)
        FpcmParams(base=base, eta_exp=self.eta_exp)

    @classmethod
    def from_namespace(cls, args):
        names = {f.name for f in fields(cls)}
        return cls(**{k: v for k, v in vars(args).items()
                      if k in names and v is not None})

    def solver_params(self):
        return SolverParams(n_clusters=self.clusters, m=self.m,
                            epsilon=self.epsilon, max_iter=self.max_iter,
                            seed=self.seed, norm=self.norm)

    def clusterer_params(self):
        """Keyword arguments understood by the clusterer classes"""
        return dict(n_clusters=self.clusters, m=self.m, epsilon=self.epsilon,
                    max_iter=self.max_iter, seed=self.seed, norm=self.norm,
                    eta_exp=self.eta_exp, eta_mode=self.eta_mode, k=self.k,
                    neighborhood_radius=self.r_l, search_radius=self.r_s,
                    patch_radius=self.r_p, h=self.h, lambda_=self.lambda_)

    def make_clusterer(self):
        return get_clusterer(self.algorithm, **self.clusterer_params())


def _emit(pairs):
    for key, value in pairs:
        if isinstance(value, bool):
            value = str(value).lower()
        elif isinstance(value, float):
            value = "{:.10g}".format(value)
        print("{}={}".format(key, value))


def cmd_segment(args):
    config = RunConfig.from_namespace(args)
    image = read_gray(config.input)
    clusterer = config.make_clusterer()
    logger.info("Segmenting %s with %s", config.input, clusterer)
    result = clusterer.segment(image)
    write_labels(LabelImage.from_result(result, image.pixels.shape),
                 config.output)
    if config.membership:
        write_membership_csv(result.membership, config.membership)
    _emit([("algorithm", config.algorithm),
           ("iterations", result.iterations),
           ("converged", result.converged),
           ("objective", result.objective)])
    return EXIT_OK


def _append_csv(rows, filename):
    exists = os.path.exists(filename) and os.path.getsize(filename) > 0
    with open_output(filename, "at") as f:
        pandas.DataFrame(rows, columns=CSV_COLUMNS).to_csv(
            f, header=not exists, index=False, float_format="%.6f")


def cmd_evaluate(args):
    config = RunConfig.from_namespace(args)
    gt = read_mask(args.reference)
    if args.match_clusters:
        values = read_uint8(args.segmentation)
        levels = np.unique(values)
        labels = np.searchsorted(levels, values)
        selected = match_clusters(labels, gt, len(levels))
        seg = labels_to_mask(labels, selected, values.shape)
        logger.info("Gray levels %s matched to the object",
                    [int(levels[i]) for i in sorted(selected)])
    else:
        seg = read_mask(args.segmentation)
    report = evaluate(seg, gt, config.similarity)
    print(report.to_text())
    if args.csv:
        _append_csv([report.as_row(config.algorithm)], args.csv)
    return EXIT_OK


def _phantom_spec(args, default_preset):
    if args.spec:
        spec = PhantomSpec.from_file(args.spec)
    else:
        spec = PhantomSpec.from_preset(args.preset or default_preset)
    overrides = {}
    for flag, name in (("width", "width"), ("height", "height"),
                       ("background", "background_intensity"),
                       ("object", "object_intensity"), ("noise", "noise"),
                       ("sigma", "sigma"), ("prob", "prob"),
                       ("halo_width", "halo_width"),
                       ("halo", "halo_intensity")):
        value = getattr(args, flag, None)
        if value is not None:
            overrides[name] = value
    shapes = [Disk(*d) for d in getattr(args, "disk", None) or []] + \
        [Rectangle(*r) for r in getattr(args, "rect", None) or []]
    if shapes:
        overrides["objects"] = tuple(shapes)
    return replace(spec, **overrides) if overrides else spec


def cmd_phantom(args):
    spec = _phantom_spec(args, "two_region")
    if args.phantom_seed is not None:
        spec = spec.with_seed(args.phantom_seed)
    image, mask = generate(spec)
    write_gray(image, args.out_image)
    write_mask(mask, args.out_mask)
    _emit([("width", spec.width), ("height", spec.height),
           ("object_pixels", mask.n_object), ("noise", spec.noise),
           ("seed", spec.seed)])
    return EXIT_OK


def benchmark_cell(task):
    """
    Generate, segment and score one (algorithm, seed) cell.

    Args:
        task (tuple): (algorithm, seed, PhantomSpec, RunConfig). The seed
            drives both the phantom noise and the solver initialization.

    Returns:
        (dict) CSV row.
    """
    algorithm, seed, spec, config = task
    config = replace(config, algorithm=algorithm, seed=seed)
    image, truth = generate(spec.with_seed(seed))
    result = config.make_clusterer().segment(image)
    selected = match_clusters(result.labels, truth, result.n_clusters)
    seg = labels_to_mask(result.labels, selected, image.pixels.shape)
    report = evaluate(seg, truth, config.similarity)
    logger.debug("%s seed %d: similarity %.4f after %d iterations",
                 algorithm, seed, report.similarity, result.iterations)
    return report.as_row(algorithm)


def run_benchmark(spec, config, algorithms, seeds, n_workers=0,
                  pbar=False):
    """
    Score every algorithm on every seed.

    Args:
        spec (PhantomSpec): phantom; its seed is replaced per cell.
        config (RunConfig): solver options shared by all cells.
        algorithms (list): algorithm names.
        seeds (list): seeds.
        n_workers (int): worker processes, 0 runs in this process.
        pbar (bool): show a progress bar.

    Returns:
        (pandas.DataFrame) one row per cell in (algorithm, seed) order,
            then one "<algorithm>-mean" row per algorithm.
    """
    tasks = [(a, s, spec, config) for a in algorithms for s in seeds]
    if n_workers > 0:
        with Pool(min(n_workers, len(tasks))) as p:
            rows = list(tqdm(p.imap(benchmark_cell, tasks), total=len(tasks),
                             disable=not pbar, desc="benchmark"))
    else:
        rows = [benchmark_cell(t) for t in tqdm(tasks, disable=not pbar,
                                               desc="benchmark")]
    cells = pandas.DataFrame(rows, columns=CSV_COLUMNS)
    means = cells.groupby("algo", sort=False).mean().reset_index()
    means["algo"] = means["algo"] + "-mean"
    return pandas.concat([cells, means[CSV_COLUMNS]], ignore_index=True)


def cmd_benchmark(args):
    config = RunConfig.from_namespace(args)
    spec = _phantom_spec(args, "two_disk")
    table = run_benchmark(spec, config, args.algorithms, args.seeds,
                          n_workers=get_thread_count(), pbar=args.verbose)
    with open_output(args.csv, "wt") as f:
        table.to_csv(f, index=False, float_format="%.6f")
    summary = []
    for algorithm in args.algorithms:
        row = table[table["algo"] == algorithm + "-mean"].iloc[0]
        summary.extend([("{}.similarity".format(algorithm), row["similarity"]),
                        ("{}.fpr".format(algorithm), row["fpr"]),
                        ("{}.fnr".format(algorithm), row["fnr"])])
    _emit([(k, float(v)) for k, v in summary])
    return EXIT_OK


def _algorithm_list(text):
    names = [n.strip().lower() for n in text.split(",") if n.strip()]
    unknown = [n for n in names if n not in ALGORITHMS]
    if not names or unknown:
        raise argparse.ArgumentTypeError(
            "expected a comma separated subset of {}".format(
                ",".join(ALGORITHMS)))
    return names


def _seed_list(text):
    """'1-10' or '1,2,5'"""
    try:
        if "-" in text.strip("-"):
            lo, hi = (int(s) for s in text.split("-", 1))
            seeds = list(range(lo, hi + 1))
        else:
            seeds = [int(s) for s in text.split(",") if s.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError("expected seeds like 1-10 or 1,2,3")
    if not seeds:
        raise argparse.ArgumentTypeError("empty seed list")
    return seeds


def _numbers(count, cast):
    def parse(text):
        try:
            values = [cast(v) for v in text.split(",")]
        except ValueError:
            values = []
        if len(values) != count:
            raise argparse.ArgumentTypeError(
                "expected {} comma separated numbers".format(count))
        return values
    return parse


def _solver_options():
    defaults = RunConfig()
    parent = argparse.ArgumentParser(add_help=False)
    group = parent.add_argument_group("solver options")
    group.add_argument("--algorithm", "--algo", dest="algorithm",
                       choices=sorted(ALGORITHMS), default=defaults.algorithm)
    group.add_argument("--clusters", type=int, default=defaults.clusters,
                       help="number of clusters c")
    group.add_argument("--m", type=float, default=defaults.m,
                       help="fuzzifier")
    group.add_argument("--eta-exp", type=float, default=defaults.eta_exp,
                       help="FPCM typicality exponent")
    group.add_argument("--epsilon", type=float, default=defaults.epsilon,
                       help="convergence threshold on memberships")
    group.add_argument("--max-iter", type=int, default=defaults.max_iter)
    group.add_argument("--seed", type=int, default=defaults.seed,
                       help="initialization seed")
    group.add_argument("--norm", choices=NORMS, default=defaults.norm)
    group.add_argument("--lambda", dest="lambda_", type=float,
                       default=defaults.lambda_,
                       help="MFCM weight of the non-local term")
    group.add_argument("--r-l", type=int, default=defaults.r_l,
                       help="MFCM local neighborhood radius")
    group.add_argument("--r-s", type=int, default=defaults.r_s,
                       help="MFCM non-local search radius")
    group.add_argument("--r-p", type=int, default=defaults.r_p,
                       help="MFCM patch radius")
    group.add_argument("--h", type=float, default=defaults.h,
                       help="MFCM patch similarity bandwidth")
    group.add_argument("--k", type=float, default=defaults.k,
                       help="PCM eta scale factor")
    group.add_argument("--eta-mode", choices=ETA_MODES,
                       default=defaults.eta_mode,
                       help="PCM eta estimation")
    return parent


def _phantom_options(include_seed):
    parent = argparse.ArgumentParser(add_help=False)
    group = parent.add_argument_group(
        "phantom options",
        "Start from --spec FILE or a --preset and override single fields. "
        "Spec file keys: width, height, background, object, "
        "disk = cx,cy,r, rect = x,y,w,h, noise = {}, sigma, prob, seed, "
        "halo_width, halo.".format("|".join(NOISE_KINDS)))
    group.add_argument("--spec", help="key = value phantom file")
    group.add_argument("--preset", choices=["two_region", "two_disk", "halo"])
    group.add_argument("--width", type=int)
    group.add_argument("--height", type=int)
    group.add_argument("--background", type=float,
                       help="background intensity")
    group.add_argument("--object", type=float, help="object intensity")
    group.add_argument("--disk", action="append", type=_numbers(3, float),
                       metavar="CX,CY,R")
    group.add_argument("--rect", action="append", type=_numbers(4, int),
                       metavar="X,Y,W,H")
    group.add_argument("--noise", choices=NOISE_KINDS)
    group.add_argument("--sigma", type=float)
    group.add_argument("--prob", type=float)
    group.add_argument("--halo-width", type=int)
    group.add_argument("--halo", type=float, help="halo intensity")
    if include_seed:
        group.add_argument("--seed", dest="phantom_seed", type=int,
                           help="noise seed")
    return parent


def build_parser():
    formatter = argparse.ArgumentDefaultsHelpFormatter
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-v", "--verbose", action="store_true",
                        help="log every solver iteration to stderr")

    parser = argparse.ArgumentParser(
        prog="fuzzyseg", formatter_class=formatter,
        description="Fuzzy clustering segmentation of grayscale images. "
                    "FUZZYSEG_THREADS caps the benchmark worker processes "
                    "(0 or unset runs sequentially).")
    parser.add_argument("--version", action="version",
                        version="%(prog)s " + __version__)
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")
    sub.required = True
    solver = _solver_options()

    p = sub.add_parser("segment", parents=[common, solver],
                       formatter_class=formatter,
                       help="segment an image, write a label map")
    p.add_argument("--input", required=True, help="PGM or PNG image")
    p.add_argument("--output", required=True,
                   help="label map (PNG if the name ends in .png)")
    p.add_argument("--membership", help="optional membership CSV")
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("evaluate", parents=[common],
                       formatter_class=formatter,
                       help="score a segmentation against a reference mask")
    p.add_argument("--segmentation", "--seg", required=True,
                   help="segmentation mask (gray >= 128 is object)")
    p.add_argument("--reference", "--gt", required=True,
                   help="reference mask (gray >= 128 is object)")
    p.add_argument("--match-clusters", action="store_true",
                   help="read the segmentation as a label map and assign "
                        "each gray level to object or background by "
                        "majority vote against the reference")
    p.add_argument("--similarity", choices=SIMILARITY_INDICES,
                   default=RunConfig.similarity)
    p.add_argument("--algorithm", "--algo", dest="algorithm",
                   choices=sorted(ALGORITHMS), default=RunConfig.algorithm,
                   help="algorithm name recorded in the CSV row")
    p.add_argument("--csv", help="append the result row to this CSV")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("phantom", parents=[common, _phantom_options(True)],
                       formatter_class=formatter,
                       help="generate a phantom image and its mask")
    p.add_argument("--out-image", required=True)
    p.add_argument("--out-mask", required=True)
    p.set_defaults(func=cmd_phantom)

    p = sub.add_parser("benchmark",
                       parents=[common, solver, _phantom_options(False)],
                       formatter_class=formatter,
                       help="score algorithms over seeds on a phantom "
                            "(two_disk preset unless --spec/--preset)")
    p.add_argument("--algorithms", type=_algorithm_list,
                   default=list(ALGORITHMS),
                   help="comma separated algorithm names")
    p.add_argument("--seeds", type=_seed_list, default=list(DEFAULT_SEEDS),
                   help="seed range 1-10 or list 1,2,3")
    p.add_argument("--similarity", choices=SIMILARITY_INDICES,
                   default=RunConfig.similarity)
    p.add_argument("--csv", required=True, help="output CSV")
    p.set_defaults(func=cmd_benchmark)
    return parser


def _configure_logging(verbose):
    logging.basicConfig(stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    logging.getLogger().setLevel(logging.DEBUG if verbose else logging.WARNING)
    logging.captureWarnings(verbose)


def main(argv=None):
    """
    Entry point of the fuzzyseg console script.

    Args:
        argv (list): arguments without the program name, sys.argv by default.

    Returns:
        (int) exit code.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    _configure_logging(args.verbose)
    try:
        return args.func(args)
    except (InvalidParametersError, InvalidReferenceError) as e:
        logger.error("%s", e)
        return EXIT_USAGE
    except SolverError as e:
        logger.error("Solver failed: %s", e)
        return EXIT_SOLVER
    except (OSError, FuzzySegError) as e:
        logger.error("I/O error: %s", e)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
