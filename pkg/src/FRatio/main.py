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


import functools
import logging
import os
import sys

import numpy as np
import pandas as pd
from beautifultable import BeautifulTable as bt

from . import VERSION
from . import core
from . import fr as frMod
from . import approx as apxMod
from . import recover as recMod
from . import noise as nseMod
from . import constants as cstMod
from . import experiment as expMod
from . import series as serMod
from . import params as prmMod
from . import logger as logMod
from . import user_args as uaMod


EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INPUT = 2
EXIT_NUMERICAL = 3
SIGNAL_STREAM = 7919


def _with_exit_codes(func):
    """
    Map exceptions to exit codes: 2 for input problems, 3 for numerical failures
    """
    @functools.wraps(func)
    def wrapper(argv=None):
        try:
            return func(argv)
        except (OSError, ValueError) as err:
            logging.getLogger("FRatio").error(str(err))
            print(err, file=sys.stderr)
            return EXIT_INPUT
        except (FloatingPointError, AssertionError) as err:
            logging.getLogger("FRatio").error(str(err))
            print(err, file=sys.stderr)
            return EXIT_NUMERICAL
        finally:
            for handler in list(logging.getLogger("FRatio").handlers):
                if isinstance(handler, logging.FileHandler):
                    logging.getLogger("FRatio").removeHandler(handler)
                    handler.close()

    return wrapper


def _fmt(value):
    if isinstance(value, (bool, np.bool_)) or value is None:
        return str(value)
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.9g}"
    return str(value)


def _print_table(rows, headers=("Quantity", "Value")):
    table = bt()
    table.columns.header = list(headers)
    for row in rows:
        table.rows.append([_fmt(val) for val in row])
    print(table)


def _output_dir(params):
    path = params.system['output_path']
    os.makedirs(path, exist_ok=True)
    return path


def _start(params, job):
    logger = logMod.Logger(log_path=os.path.join(_output_dir(params), f"fratio_{job}.log"))
    logger(f"FRatio {job} started.", stdout=False)
    return logger


def _load_series(params, logger):
    section = params.params['Series']
    series_file = serMod.SeriesFile(path=section['path'],
                                    column=section['column'],
                                    has_header=section['has_header'],
                                    imag_column=section['imag_column'])
    loaded = series_file.load(detrend=section['detrend'])
    logger(f"Series read: {loaded.preprocessing}", stdout=False)
    return loaded


def _write_report(params, job, payload, fmt=None):
    """
    Embed seed, config and version into the payload and write it in the configured format

    RETURNS:
    path of the report
    """
    system = params.system
    full = dict(payload)
    full.update({"seed": system['seed'],
                 "config": params.params,
                 "artifact_version": VERSION})
    if system['timestamp']:
        full["timestamp"] = expMod.now_stamp()

    stem = os.path.join(_output_dir(params), f"{params.project_name}_{job}")
    if (fmt or system['output_format']) == "csv":
        path = stem + ".csv"
        pd.json_normalize(expMod.to_builtin(full)).to_csv(path, index=False, float_format="%.9g")
    else:
        path = stem + ".json"
        expMod.dump_json({"schema": expMod.SCHEMA, **full}, path)

    return path


@_with_exit_codes
def cmd_analyze(argv=None):
    """
    Print and save the Fourier-ratio report of a complete time series
    """
    args = uaMod.get_args_analyze().parse_args(argv)
    params = prmMod.new_analyze_params(args)
    logger = _start(params, "analyze")

    loaded = _load_series(params, logger)
    if not loaded.complete:
        raise ValueError(f"Error in FRatio.main.cmd_analyze: {args.series}: "
                         f"{loaded.domain_size - len(loaded.observed)} missing values; run fr.impute first.")

    report = frMod.fr_report(loaded.values)
    lower = frMod.support_lower_bound(loaded.values, threshold=args.support_threshold)
    payload = {"report": report.to_dict(),
               "support_lower_bound": lower,
               "preprocessing": loaded.preprocessing}

    rows = [["N", report.domain_size],
            ["FR", report.fr],
            ["FR of transform", report.fr_hat],
            ["bi-FR", report.bi_fr],
            ["Coherence", report.coherence],
            ["Numerical sparsity", report.numerical_sparsity],
            ["||f_hat||_1", report.l1_spectral_norm],
            ["||f||_2", report.l2_norm],
            ["Support lower bound", lower]]

    if args.large_spectrum is not None:
        gamma = apxMod.large_spectrum(loaded.values, args.large_spectrum)
        payload["large_spectrum"] = {"eta": args.large_spectrum, "members": gamma.members.tolist()}
        rows.append([f"|Gamma| (eta={args.large_spectrum:g})", len(gamma)])

    if args.reference is not None:
        deviation = report.fr - args.reference
        payload["reference"] = {"value": args.reference, "deviation": deviation}
        logger(f"FR deviates from the reference {args.reference:.9g} by {deviation:.9g} "
               f"(preprocessing: {loaded.preprocessing})", level="warning" if abs(deviation) > 0.05 else "info",
               stdout=False)
        rows.append(["Deviation from reference", deviation])

    _print_table(rows)
    path = _write_report(params, "analyze", payload)
    logger(f"FRatio analyze finished, report saved to {path}.", stdout=False)

    return EXIT_OK


@_with_exit_codes
def cmd_approx(argv=None):
    """
    Approximate a series by a low-degree trigonometric polynomial and save the reconstruction
    """
    args = uaMod.get_args_approx().parse_args(argv)
    params = prmMod.new_approx_params(args)
    logger = _start(params, "approx")
    system = params.system

    loaded = _load_series(params, logger)
    if not loaded.complete:
        raise ValueError(f"Error in FRatio.main.cmd_approx: {args.series}: series has missing values.")
    f = loaded.values.values
    f_l2 = core.lp_norm(f, 2)

    if args.mode == "truncate":
        poly = apxMod.spectral_truncation(f, args.eta)
        error = core.lp_norm(f - poly.eval().values, 2)
        payload = {"mode": "truncate", "k": len(poly), "threshold": None,
                   "error": error, "target": args.eta * f_l2, "attempts": 1, "failed": False}
    else:
        func = {"l2": apxMod.approx_l2, "linf": apxMod.approx_linf, "l1": apxMod.approx_l1}[args.mode]
        result = func(f, args.eta, system['seed'], max_attempts=args.max_attempts)
        poly = result.poly
        payload = {"mode": args.mode, "k": result.k, "threshold": result.threshold,
                   "error": result.error, "target": result.target,
                   "attempts": result.attempts, "failed": result.failed}
    payload["degree"] = poly.degree

    recon = poly.eval()
    csv_path = os.path.join(_output_dir(params), f"{params.project_name}_approx.csv")
    serMod.write_reconstruction(csv_path, f, recon)

    rows = [["Mode", args.mode], ["k", payload["k"]], ["Distinct frequencies", poly.degree],
            ["Error", payload["error"]], ["Target", payload["target"]],
            ["Attempts", payload["attempts"]], ["Failed", payload["failed"]]]

    if args.encode is not None:
        quantized = apxMod.rate_distortion_encode(poly, f_l2, args.encode)
        bin_path = os.path.join(_output_dir(params), f"{params.project_name}_approx.bin")
        with open(bin_path, 'wb') as fh:
            fh.write(quantized.to_bytes())
        total = core.lp_norm(f - quantized.decode().eval().values, 2)
        payload["encoding"] = {"eps": args.encode,
                               "m_bits": quantized.m_bits,
                               "bit_length": quantized.bit_length,
                               "bound_shape": apxMod.rate_distortion_bound_shape(quantized.k, len(f), args.encode),
                               "total_distortion": total}
        rows += [["M", quantized.m_bits], ["Bit length", quantized.bit_length],
                 ["Total distortion", total]]

    _print_table(rows)
    path = _write_report(params, "approx", payload)
    logger(f"FRatio approx finished, report saved to {path}.", stdout=False)

    if payload["failed"]:
        logger(f"Approximation did not reach the target in {args.max_attempts} attempts.", level="warning")
        return EXIT_NUMERICAL
    return EXIT_OK


@_with_exit_codes
def cmd_impute(argv=None):
    """
    Fill the gaps of a series by spectral l1 minimisation, or sweep the number of samples
    """
    args = uaMod.get_args_impute().parse_args(argv)
    params = prmMod.new_impute_params(args)
    logger = _start(params, "impute")
    system = params.system
    section = params.params['Impute']
    cfg = recMod.SolverConfig(tol=section['solver_tol'],
                              max_iters=section['max_iters'],
                              step_scale=section['step_scale'])

    loaded = _load_series(params, logger)
    values = loaded.values.values
    N = loaded.domain_size
    if len(loaded.observed) == 0:
        raise ValueError(f"Error in FRatio.main.cmd_impute: {args.series}: all values are missing.")

    p_values = section['p']
    if section['sweep']:
        if not loaded.complete:
            raise ValueError("Error in FRatio.main.cmd_impute: a sweep needs a complete series as ground truth.")
        if p_values is None:
            scheme = "uniform"
            grid = sorted({max(1, int(round(frac * N))) for frac in np.linspace(0.1, 0.9, 9)})
        else:
            scheme = "bernoulli"
            grid = sorted(set(p_values))
        table = recMod.phase_transition(values, grid, section['trials'], system['seed'],
                                        eps=section['eps'], solver_cfg=cfg, processes=system['processes'],
                                        progress=True, scheme=scheme)
        csv_path = os.path.join(_output_dir(params), f"{params.project_name}_phase_transition.csv")
        table.to_csv(csv_path, index=False, float_format="%.9g")
        _print_table(table.values.tolist(), headers=list(table.columns))
        logger(f"Phase transition ({scheme} masks) saved to {csv_path}.", stdout=False)
        return EXIT_OK

    truth = None
    mask = loaded.observed
    if p_values is not None:
        if not loaded.complete:
            raise ValueError(f"Error in FRatio.main.cmd_impute: {args.series}: --p drops values from a "
                             "complete series; this one already has gaps.")
        if len(p_values) != 1:
            raise ValueError("Error in FRatio.main.cmd_impute: give a single --p outside --sweep.")
        mask = recMod.sample_bernoulli(N, p_values[0], system['seed'])
        if len(mask.indices) == 0:
            raise ValueError(f"Error in FRatio.main.cmd_impute: no values kept at p = {p_values[0]:g}.")
        truth = values
        values = recMod.restrict(values, mask).values
        logger(f"Bernoulli mask at p = {p_values[0]:g} keeps {len(mask.indices)} of {N} values.", stdout=False)
    observed = mask.indices if isinstance(mask, recMod.SampleMask) else mask

    bounds = recMod.certified_bounds(values, mask, section['eps'], f_l2=section['oracle_l2'])
    if len(observed) == N:
        logger("No missing values, series copied unchanged.", stdout=False)
        imputed, converged = values, True
        stats = {"objective": core.lp_norm(core.dft(values), 1), "constraint_residual": 0.0, "iterations": 0}
    else:
        result = recMod.impute(values, mask, bounds.eta, cfg)
        imputed, converged = result.x_star.values, result.converged
        stats = {"objective": result.objective, "constraint_residual": result.constraint_residual,
                 "iterations": result.iterations}
        logger(f"Solver finished after {result.iterations} iterations (converged: {converged}).", stdout=False)

    csv_path = os.path.join(_output_dir(params), f"{params.project_name}_imputed.csv")
    serMod.write_imputed(csv_path, imputed, observed)

    fraction = len(observed) / N
    payload = dict(stats)
    payload.update({"converged": converged,
                    "observed": len(observed),
                    "observed_fraction": fraction,
                    "eta": bounds.eta,
                    "oracle_bound": bounds.oracle,
                    "leakage_free_bound": bounds.leakage_free,
                    "l2_estimate": bounds.l2_estimate,
                    "fr_estimate": bounds.fr_estimate,
                    "preprocessing": loaded.preprocessing})
    if truth is not None:
        payload["mask"] = {"scheme": "bernoulli", "p": mask.parameter, "kept": len(observed)}
        payload["relative_error"] = core.lp_norm(imputed - truth, 2) / core.lp_norm(truth, 2)
    if section['eps'] > 0:
        payload["sample_count_shape"] = recMod.theorem_sample_count(max(bounds.fr_estimate, 1.0),
                                                                    section['eps'], N)

    _print_table([["N", N], ["Observed", len(observed)], ["Iterations", stats["iterations"]],
                  ["Converged", converged], ["||x_hat||_1", stats["objective"]],
                  ["Leakage-free bound", bounds.leakage_free], ["Oracle bound", bounds.oracle]])
    path = _write_report(params, "impute", payload)
    logger(f"FRatio impute finished, report saved to {path}.", stdout=False)

    if not converged:
        logger("Imputation solver did not converge; output is the last feasible iterate.", level="warning")
        return EXIT_NUMERICAL
    return EXIT_OK


def _run_constants(params, logger):
    section = params.params['Constants']
    system = params.system
    logger(f"Estimating constants on N={section['n_grid']}, q={section['q_grid']}, "
           f"{section['trials']} trials per cell.", stdout=False)

    estimate = cstMod.estimate_constants(section['n_grid'], section['q_grid'], section['trials'],
                                         percentile=section['percentile'], seed=system['seed'],
                                         processes=system['processes'], logger=logger,
                                         progress=True)

    csv_paths = cstMod.write_heatmaps(estimate, _output_dir(params), prefix=f"{params.project_name}_constants")
    payload = {"estimate": estimate.to_dict()}
    path = _write_report(params, "constants", payload, fmt="json")

    rows = []
    for i, N in enumerate(estimate.n_grid):
        for j, q in enumerate(estimate.q_grid):
            rows.append([N, q, estimate.ct_estimates[i, j], estimate.cq_exp_estimates[i, j]])
    _print_table(rows, headers=["N", "q", "C_T", "C(q)^(q/(q-2))"])
    logger(f"Heatmaps saved to {', '.join(csv_paths)}; report saved to {path}.", stdout=False)

    if estimate.holder_violations:
        raise AssertionError(f"Error in FRatio.main.cmd_constants: {estimate.holder_violations} draws "
                             "violate C_T <= C(q)^(q/(q-2)).")
    return EXIT_OK


@_with_exit_codes
def cmd_constants(argv=None):
    """
    Estimate C_T and C(q)^{q/(q-2)} over a grid and save the heatmaps
    """
    args = uaMod.get_args_constants().parse_args(argv)
    params = prmMod.new_constants_params(args)
    logger = _start(params, "constants")

    return _run_constants(params, logger)


@_with_exit_codes
def cmd_constants_new(argv=None):
    """
    Write a constant-estimation config (<name>_constants.yaml) for fr.constants.run
    """
    args = uaMod.get_args_constants().parse_args(argv)
    yaml_name = prmMod.new_constants_yaml(args)
    print(f"Constants config file created: {yaml_name}")

    return EXIT_OK


@_with_exit_codes
def cmd_constants_run(argv=None):
    """
    Run constant estimation from a config written by fr.constants.new
    """
    args = uaMod.get_args_constants_run().parse_args(argv)
    folder = args.output if args.output is not None else prmMod.default_output_dir()
    params = prmMod.read_yaml(project_name=args.name,
                              filename=os.path.join(folder, args.name + '_constants.yaml'))
    logger = _start(params, "constants")

    return _run_constants(params, logger)


def _noise_signal(params, args, logger):
    if params.params['Series'] is not None:
        loaded = _load_series(params, logger)
        if not loaded.complete:
            raise ValueError("Error in FRatio.main.cmd_noise: series has missing values.")
        return loaded.values

    rng = expMod.make_rng(params.system['seed'], SIGNAL_STREAM)
    if args.signal == "subgroup":
        return core.subgroup_indicator(5, 3)
    if args.signal == "sparse":
        return core.sparse_spectrum_signal(args.N, 5, rng)
    return core.Signal(nseMod.complex_gaussian(rng, args.N, 1.0))


@_with_exit_codes
def cmd_noise(argv=None):
    """
    Run one of the noise-stability experiments and save the JSON reports
    """
    args = uaMod.get_args_noise().parse_args(argv)
    params = prmMod.new_noise_params(args)
    logger = _start(params, "noise")
    system = params.system
    seed = system['seed']
    procs = system['processes']

    if args.experiment == "perturbation":
        f = _noise_signal(params, args, logger) if args.series is not None else None
        reports = [nseMod.perturbation_experiment(f, args.N, args.trials, seed, processes=procs,
                                                  progress=True)]
    else:
        f = _noise_signal(params, args, logger)
        if args.experiment == "gaussian":
            reports = [nseMod.gaussian_deviation_experiment(f, args.sigma, args.gamma, args.trials, seed,
                                                           processes=procs, progress=True)]
        elif args.experiment == "average":
            reports = [nseMod.averaging_mse_experiment(f, args.sigma, n, args.trials, seed, gamma=args.gamma,
                                                       laurent_massart=args.laurent_massart, processes=procs,
                                                       progress=True)
                       for n in args.copies]
        else:
            reports, _ = nseMod.fr_of_average_sweep(f, args.sigma, args.gamma, args.trials, seed,
                                                    n_values=args.copies, processes=procs, progress=True)

    rows = []
    for rep in reports:
        rep.config = params.params
        rep.artifact_version = VERSION
        label = rep.name if "n" not in rep.params else f"{rep.name} (n={rep.params['n']})"
        rows.append([label, rep.trials, rep.violations, rep.coverage, rep.slack, rep.regime_violation])
        if rep.regime_violation:
            logger(f"{label}: signal is outside the regime of the bound.", level="warning")
        elif rep.name == "perturbation" and rep.violations:
            logger(f"{label}: {rep.violations} violations of an exact inequality.", level="error")
        elif rep.name != "perturbation" and rep.violations / rep.trials > args.gamma + rep.slack:
            logger(f"{label}: violation rate {rep.violations / rep.trials:.9g} exceeds gamma + slack.",
                   level="warning")

    _print_table(rows, headers=["Experiment", "Trials", "Violations", "Coverage", "Slack", "Regime violation"])

    stem = os.path.join(_output_dir(params), f"{params.project_name}_noise_{args.experiment}")
    dicts = [rep.to_dict(timestamp=system['timestamp']) for rep in reports]
    if system['output_format'] == "csv":
        pd.json_normalize(dicts).to_csv(stem + ".csv", index=False, float_format="%.9g")
    else:
        expMod.dump_json({"schema": expMod.SCHEMA, "reports": dicts}, stem + ".json")
    logger(f"FRatio noise finished, reports saved to {stem}.", stdout=False)

    return EXIT_OK
