# Copyright 2021 Rosalind Franklin Institute
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
# http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing,
# software distributed under the License is distributed on an
# "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND,
# either express or implied. See the License for the specific
# language governing permissions and limitations under the License.


import argparse
import sys

from . import series as serMod
from . import noise as nseMod


USAGE_EXIT_CODE = 1


class ArgumentParser(argparse.ArgumentParser):
    """
    ArgumentParser that exits with the usage code (1) on bad arguments
    """

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_EXIT_CODE, f"{self.prog}: error: {message}\n")


def _add_system_args(parser):
    parser.add_argument("--name",
                        type=str,
                        default="fratio",
                        help="Name of current run, used as prefix of output files (Default: fratio)")
    parser.add_argument("--seed",
                        type=int,
                        default=0,
                        help="Base random seed (Default: 0)")
    parser.add_argument("--format",
                        type=str,
                        choices=["json", "csv"],
                        default="json",
                        help="Format of report files (Default: json)")
    parser.add_argument("--no-timestamp",
                        action="store_true",
                        help="Omit the timestamp field so that reruns are byte-identical")
    parser.add_argument("-o", "--output",
                        type=str,
                        default=None,
                        help="Output folder (Default: $FRATIO_OUTPUT_DIR or current folder)")
    parser.add_argument("--processes",
                        type=int,
                        default=1,
                        help="Number of parallel workers for trial loops (Default: 1)")


def _add_series_args(parser, positional=True):
    if positional:
        parser.add_argument("series",
                            type=str,
                            help="Path to CSV time series")
    else:
        parser.add_argument("--series",
                            type=str,
                            default=None,
                            help="Path to CSV time series (Default: synthetic signal)")
    parser.add_argument("--column",
                        type=str,
                        default=None,
                        help="Value column, by name or position (Default: value_re, value, or last column)")
    parser.add_argument("--imag-column",
                        type=str,
                        default=None,
                        help="Imaginary-part column, by name or position")
    parser.add_argument("--no-header",
                        action="store_true",
                        help="Use this flag if the CSV has no header row.")
    parser.add_argument("--detrend",
                        type=str,
                        nargs="?",
                        const="linear",
                        default="none",
                        choices=serMod.DETREND_CHOICES,
                        help="Remove a mean or linear trend before analysis (Default: none; flag alone: linear)")


def get_args_analyze():
    """
    Function to add arguments to parser for FR analysis

    OUTPUTs:
    ArgumentParser
    """
    parser = ArgumentParser(prog="fr.analyze",
                            description="Fourier ratio and related quantities of a time series")
    _add_series_args(parser)
    _add_system_args(parser)
    parser.add_argument("--eta", "--large-spectrum",
                        dest="large_spectrum",
                        type=float,
                        default=None,
                        help="List the large spectrum at this level")
    parser.add_argument("--reference",
                        type=float,
                        default=None,
                        help="Published FR value to compare with (informational)")
    parser.add_argument("--support-threshold",
                        type=float,
                        default=0.0,
                        help="Entries with modulus above this count as support (Default: 0)")

    return parser


def get_args_approx():
    """
    Function to add arguments to parser for trigonometric approximation

    OUTPUTs:
    ArgumentParser
    """
    parser = ArgumentParser(prog="fr.approx",
                            description="Low-degree trigonometric approximation of a time series")
    parser.add_argument("mode",
                        type=str,
                        choices=["l2", "linf", "l1", "truncate"],
                        help="Approximation norm, or deterministic truncation to the large spectrum")
    _add_series_args(parser)
    _add_system_args(parser)
    parser.add_argument("--eta",
                        type=float,
                        default=0.5,
                        help="Relative accuracy (Default: 0.5)")
    parser.add_argument("--max-attempts",
                        type=int,
                        default=50,
                        help="Random draws before giving up (Default: 50)")
    parser.add_argument("--encode",
                        type=float,
                        default=None,
                        metavar="EPS",
                        help="Quantise the polynomial at relative distortion EPS and save it")

    return parser


def get_args_impute():
    """
    Function to add arguments to parser for imputation

    OUTPUTs:
    ArgumentParser
    """
    parser = ArgumentParser(prog="fr.impute",
                            description="Impute missing values by spectral l1 minimisation")
    _add_series_args(parser)
    _add_system_args(parser)
    parser.add_argument("--eta",
                        type=float,
                        default=0.0,
                        help="Relative data-fidelity radius epsilon (Default: 0, exact fit)")
    parser.add_argument("--solver-tol",
                        type=float,
                        default=1e-8,
                        help="Solver tolerance (Default: 1e-8)")
    parser.add_argument("--max-iters",
                        type=int,
                        default=50000,
                        help="Solver iteration cap (Default: 50000)")
    parser.add_argument("--step-scale",
                        type=float,
                        default=0.1,
                        help="Proximal step relative to the largest back-projected coefficient (Default: 0.1)")
    parser.add_argument("--oracle-l2",
                        type=float,
                        default=None,
                        help="True ||f||_2, if known, for the oracle error bound")
    parser.add_argument("--sweep",
                        action="store_true",
                        help="Sweep the number of samples on a complete series and save the phase transition")
    parser.add_argument("--p",
                        type=float,
                        nargs="+",
                        default=None,
                        help="Bernoulli keep-probability. On a complete series, drop each value with "
                             "probability 1-p and impute it back; with --sweep, the keep-probabilities swept")
    parser.add_argument("--trials",
                        type=int,
                        default=20,
                        help="Mask draws per sample count in a sweep (Default: 20)")

    return parser


def _add_constants_args(parser):
    parser.add_argument("--profile",
                        type=str,
                        choices=["desk", "full"],
                        default="desk",
                        help="Grid preset; explicit grid flags override it (Default: desk)")
    parser.add_argument("--n-grid",
                        type=int,
                        nargs="+",
                        default=None,
                        help="Domain sizes N")
    parser.add_argument("--q",
                        type=float,
                        nargs="+",
                        default=None,
                        help="Exponents q > 2")
    parser.add_argument("--trials",
                        type=int,
                        default=None,
                        help="Generic sets drawn per (N, q)")
    parser.add_argument("--percentile",
                        type=float,
                        default=90.0,
                        help="Percentile taken as the estimate (Default: 90)")


def get_args_constants():
    """
    Function to add arguments to parser for constant estimation

    OUTPUTs:
    ArgumentParser
    """
    parser = ArgumentParser(prog="fr.constants",
                            description="Monte-Carlo estimation of the Talagrand and Bourgain constants")
    _add_system_args(parser)
    _add_constants_args(parser)

    return parser


def get_args_constants_run():
    """
    Function to add arguments to parser for a constant-estimation run from yaml

    OUTPUTs:
    ArgumentParser
    """
    parser = ArgumentParser(prog="fr.constants.run",
                            description="Run constant estimation configured by fr.constants.new")
    parser.add_argument("name",
                        type=str,
                        help="Name of the run given to fr.constants.new")
    parser.add_argument("-o", "--output",
                        type=str,
                        default=None,
                        help="Folder holding <name>_constants.yaml (Default: $FRATIO_OUTPUT_DIR or current folder)")

    return parser


def get_args_noise():
    """
    Function to add arguments to parser for noise experiments

    OUTPUTs:
    ArgumentParser
    """
    parser = ArgumentParser(prog="fr.noise",
                            description="Stability of the Fourier ratio under perturbation and noise")
    parser.add_argument("experiment",
                        type=str,
                        choices=["perturbation", "gaussian", "average", "fr-average"],
                        help="Experiment to run")
    _add_series_args(parser, positional=False)
    _add_system_args(parser)
    parser.add_argument("--signal",
                        type=str,
                        choices=["subgroup", "sparse", "random"],
                        default="subgroup",
                        help="Synthetic signal when no series is given (Default: subgroup, 1 on 3Z_5 in Z_15)")
    parser.add_argument("--N",
                        type=int,
                        default=256,
                        help="Domain size of sparse/random signals and of perturbation pairs (Default: 256)")
    parser.add_argument("--sigma",
                        type=float,
                        default=0.1,
                        help="Noise standard deviation (Default: 0.1)")
    parser.add_argument("--gamma",
                        type=float,
                        default=0.1,
                        help="Failure probability of the high-probability bounds (Default: 0.1)")
    parser.add_argument("--copies",
                        type=int,
                        nargs="+",
                        default=list(nseMod.DEFAULT_N_SWEEP),
                        help="Numbers of averaged copies (Default: 1 4 16 64)")
    parser.add_argument("--trials",
                        type=int,
                        default=1000,
                        help="Monte-Carlo trials (Default: 1000)")
    parser.add_argument("--laurent-massart",
                        action="store_true",
                        help="Use the chi-square radius in the averaging experiment")

    return parser
