"""
wavecancoh command-line interface.

    simulate mvlsw|ar2mix   seeded panels plus a manifest
    estimate                WaveCanCoh / Causal-WaveCanCoh / LSP fields for a panel or a directory of panels
    permtest                windowed permutation tests between two directories of fields
    replicate               fig2-left, fig2-right and causal-sweep experiments

Exit codes: 0 success, 2 parse error, 3 validation error, 4 numerical error, 5 I/O error.
"""

import argparse
import logging
import sys
from typing import List, Optional

from cli.commands import (
    cmd_estimate,
    cmd_permtest,
    cmd_replicate,
    cmd_simulate,
    parse_band,
    parse_float_list,
    parse_int_list,
)
from constants import (
    AR2_ALPHA,
    AR2_BETA,
    AR2_FS,
    CAUSAL_LAGS,
    CAUSAL_SURROGATE_DELAY,
    CHANGE_POINT,
    DEFAULT_FAMILY,
    EXIT_IO,
    EXIT_OK,
    EXPERIMENTS,
    LOG_LEVEL,
    LSP_BAND,
    NOISE_FLOOR,
    PERM_N,
    PERM_WINDOW,
    STFT_HOP,
    STFT_WINDOW,
    SUPPORTED_FAMILIES,
    WALD_LEVEL,
    WORKERS,
)
from errors import WaveCanCohError

logger = logging.getLogger(__name__)


def _add_common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "-o", "--output", default=None, help="Output path or directory (default: under $WAVECANCOH_OUTPUT_DIR)"
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="Log at DEBUG level")
    parser.add_argument("-q", "--quiet", action="store_true", help="Log warnings only and hide progress bars")


def _add_wavelet_options(parser: argparse.ArgumentParser, with_scales: bool = True) -> None:
    parser.add_argument("--family", default=DEFAULT_FAMILY, choices=sorted(SUPPORTED_FAMILIES), help="Wavelet family")
    parser.add_argument("--M", type=int, default=None, help="Smoothing half-width (default: ceil(T^0.7 / 2))")
    parser.add_argument("--epsilon", type=float, default=None, help="Absolute eigenvalue floor (default: relative)")
    parser.add_argument(
        "--noise-floor",
        type=float,
        default=NOISE_FLOOR,
        help="Lift spectra to this multiple of their sampling-noise scale, 0 to disable",
    )
    if with_scales:
        parser.add_argument("--J", type=int, default=None, help="Number of scales (default: floor(log2 T))")
        parser.add_argument("--scales", type=parse_int_list, default=None, help="Comma-separated scales, e.g. 1,2,3")


def _add_stft_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--band", type=parse_band, default=LSP_BAND, help="LSP band in Hz as LO:HI (default: 25:50)")
    parser.add_argument("--window", type=int, default=STFT_WINDOW, help="STFT window length in samples")
    parser.add_argument("--hop", type=int, default=STFT_HOP, help="STFT hop in samples")
    parser.add_argument("--sigma", type=float, default=None, help="Gaussian width in samples (default: window/6)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="wavecancoh", description="Wavelet canonical coherence toolkit")
    commands = parser.add_subparsers(dest="command", required=True)

    simulate = commands.add_parser("simulate", help="Simulate panels with known coherence structure")
    models = simulate.add_subparsers(dest="model", required=True)

    mvlsw = models.add_parser("mvlsw", help="Multivariate locally stationary wavelet process")
    source = mvlsw.add_mutually_exclusive_group()
    source.add_argument("--builtin", default="c1", help="Builtin spectrum (default: c1)")
    source.add_argument("--spec-file", dest="spec_file", default=None, help="JSON spectrum definition")
    mvlsw.add_argument("--family", default=DEFAULT_FAMILY, choices=sorted(SUPPORTED_FAMILIES))
    mvlsw.add_argument("--fs", type=float, default=None, help="Sampling rate in Hz (default: 1)")

    ar2mix = models.add_parser("ar2mix", help="Mixture of latent AR(2) sources with a change point")
    ar2mix.add_argument("--fs", type=float, default=None, help=f"Sampling rate in Hz (default: {AR2_FS:g})")
    ar2mix.add_argument("--alpha", type=float, default=AR2_ALPHA, help="Shared gamma weight in X")
    ar2mix.add_argument("--beta", type=float, default=AR2_BETA, help="Shared gamma weight in Y")
    ar2mix.add_argument("--change-point", dest="change_point", type=float, default=CHANGE_POINT)
    ar2mix.add_argument(
        "--shared-delay", dest="shared_delay", type=int, default=0, help="Samples by which Y's shared source trails X's"
    )

    for model in (mvlsw, ar2mix):
        model.add_argument("--T", type=int, required=True, help="Series length")
        model.add_argument("--reps", type=int, default=1, help="Number of replicates")
        model.add_argument("--seed", type=int, default=0, help="Master seed")
        model.add_argument("--origin", type=float, default=0.0, help="Time of sample 0 in seconds")
        _add_common(model)
        model.set_defaults(handler=cmd_simulate)

    estimate = commands.add_parser("estimate", help="Estimate canonical coherence of a panel or directory of panels")
    estimate.add_argument("input", help="Panel CSV or directory of panel CSVs")
    estimate.add_argument("--P", type=int, default=None, help="Number of X channels (default: sidecar or manifest)")
    estimate.add_argument("--method", choices=("wavecancoh", "lsp"), default="wavecancoh")
    estimate.add_argument("--lag", type=int, default=0, help="Lag h for Causal-WaveCanCoh")
    estimate.add_argument("--direction", choices=("xy", "yx"), default="xy")
    estimate.add_argument("--fs", type=float, default=None, help="Override the panel sampling rate")
    estimate.add_argument("--origin", type=float, default=None, help="Override the panel time origin")
    estimate.add_argument("--dump-lws", dest="dump_lws", action="store_true", help="Also write the LWS field")
    _add_wavelet_options(estimate)
    _add_stft_options(estimate)
    _add_common(estimate)
    estimate.set_defaults(handler=cmd_estimate)

    permtest = commands.add_parser("permtest", help="Windowed permutation test between two conditions")
    permtest.add_argument("dir_a", help="Directory of coherence fields for condition A")
    permtest.add_argument("dir_b", help="Directory of coherence fields for condition B")
    permtest.add_argument("--scales", type=parse_int_list, required=True, help="Comma-separated scales")
    permtest.add_argument(
        "--times", type=parse_float_list, required=True, help="Test times in seconds, e.g. --times=-0.5,0.5"
    )
    permtest.add_argument("--window", type=float, default=PERM_WINDOW, help="Window width in seconds")
    permtest.add_argument("--n-perm", dest="n_perm", type=int, default=PERM_N)
    permtest.add_argument("--seed", type=int, default=0)
    permtest.add_argument("--corrected", action="store_true", help="Report (count + 1) / (n_perm + 1) p-values")
    permtest.add_argument("--distribution", action="store_true", help="Include permutation statistics in reports")
    permtest.add_argument(
        "--open-coarsest", dest="open_coarsest", action="store_true", help="Label the coarsest scale as '< f Hz'"
    )
    permtest.add_argument("--label-a", dest="label_a", default=None)
    permtest.add_argument("--label-b", dest="label_b", default=None)
    _add_common(permtest)
    permtest.set_defaults(handler=cmd_permtest)

    replicate = commands.add_parser("replicate", help="Run a replication experiment")
    replicate.add_argument("experiment", help=f"One of {', '.join(EXPERIMENTS)}")
    replicate.add_argument("--reps", type=int, default=None, help="Replicates (default: 200 fig2-left, 50 others)")
    replicate.add_argument("--seed", type=int, default=0)
    replicate.add_argument("--T", type=int, default=1024)
    replicate.add_argument("--lags", type=parse_int_list, default=CAUSAL_LAGS)
    replicate.add_argument("--shared-delay", dest="shared_delay", type=int, default=CAUSAL_SURROGATE_DELAY)
    replicate.add_argument("--fs", type=float, default=AR2_FS, help="Sampling rate of the AR(2) experiments")
    replicate.add_argument("--level", type=float, default=WALD_LEVEL, help="Wald band confidence level")
    replicate.add_argument("--workers", type=int, default=WORKERS, help="Worker processes")
    _add_wavelet_options(replicate, with_scales=False)
    _add_stft_options(replicate)
    _add_common(replicate)
    replicate.set_defaults(handler=cmd_replicate)
    return parser


def configure_logging(verbose: bool = False, quiet: bool = False) -> None:
    level = getattr(logging, LOG_LEVEL.upper(), logging.INFO)
    if verbose:
        level = logging.DEBUG
    elif quiet:
        level = logging.WARNING
    logging.basicConfig(
        level=level,
        format="%(asctime)s %(levelname)-8s %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
        force=True,
    )


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    configure_logging(args.verbose, args.quiet)

    try:
        args.handler(args)
    except WaveCanCohError as e:
        logger.error("%s", e)
        return e.exit_code
    except OSError as e:
        logger.error("I/O failure: %s", e)
        return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
