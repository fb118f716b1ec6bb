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


import math
from dataclasses import dataclass

import numpy as np
import pandas as pd

from . import core
from . import experiment as expMod


DEFAULT_N_SWEEP = (1, 4, 16, 64)


@dataclass(frozen=True)
class PerturbationReport:
    """
    Both sides of the deterministic perturbation inequality for FR(f + n)
    """
    fr_f: float
    fr_n: float
    fr_sum: float
    deterministic_bound: float
    observed_deviation: float
    bound_applicable: bool
    coarse_bound: float
    sqrt_n_bound: float
    delta: float
    delta_bound: float

    @property
    def holds(self):
        if not self.bound_applicable:
            return True
        return self.observed_deviation <= self.deterministic_bound + 1e-9 * max(1.0, self.deterministic_bound)


def complex_gaussian(rng, shape, sigma):
    """
    Circular complex Gaussian samples with E|n|^2 = sigma^2 (sigma^2/2 per real component)
    """
    parts = rng.standard_normal((2,) + tuple(np.atleast_1d(shape)))
    return (parts[0] + 1j * parts[1]) * (sigma / math.sqrt(2.0))


def add_complex_gaussian(f, sigma, seed):
    """
    f + n with n(x) i.i.d. circular complex Gaussian of variance sigma^2
    """
    if not sigma >= 0:
        raise ValueError(f"Error in FRatio.noise.add_complex_gaussian: sigma must be >= 0 (got {sigma}).")
    arr = core.as_array(f)
    rng = expMod.make_rng(seed)

    return core.Signal(arr + complex_gaussian(rng, arr.size, sigma))


def _fr_or_zero(arr):
    """
    FR of arr, and 0 for the zero vector (its l1 norm is 0 in every bound)
    """
    spectrum = np.abs(core.dft(arr).values)
    l2 = float(np.sqrt(np.sum(spectrum**2)))
    if l2 == 0:
        return 0.0
    return float(np.sum(spectrum)) / l2


def perturbation_bound(f, n):
    """
    Evaluate |FR(f+n) - FR(f)| against (||n_hat||_1 + FR(f) ||n_hat||_2) / (||f_hat||_2 - ||n_hat||_2),
    valid whenever ||n_hat||_2 < ||f_hat||_2. The coarser forms
      (sqrt(N) + FR(f)) t / (s - t),  2 sqrt(N) t / (s - t)  and  delta/(1-delta) (FR(f) + FR(n))
    with delta = t/s are reported alongside.
    """
    f_arr = core.as_array(f)
    n_arr = core.as_array(n)
    if f_arr.size != n_arr.size:
        raise ValueError("Error in FRatio.noise.perturbation_bound: f and n differ in length.")
    N = f_arr.size

    f_hat = core.dft(f_arr).values
    n_hat = core.dft(n_arr).values
    s = core.lp_norm(f_hat, 2)
    if s == 0:
        raise ValueError("Error in FRatio.noise.perturbation_bound: zero signal has no Fourier ratio.")
    t = core.lp_norm(n_hat, 2)
    B = core.lp_norm(n_hat, 1)

    fr_f = core.lp_norm(f_hat, 1) / s
    fr_n = B / t if t > 0 else 0.0
    applicable = t < s
    if applicable:
        fr_sum = _fr_or_zero(f_arr + n_arr)
        det = (B + fr_f * t) / (s - t)
        coarse = (math.sqrt(N) + fr_f) * t / (s - t)
        sqrt_n = 2.0 * math.sqrt(N) * t / (s - t)
        delta_bound = (t / s) / (1.0 - t / s) * (fr_f + fr_n)
        deviation = abs(fr_sum - fr_f)
    else:
        sum_arr = f_arr + n_arr
        fr_sum = _fr_or_zero(sum_arr) if np.any(sum_arr) else math.nan
        det = coarse = sqrt_n = delta_bound = math.inf
        deviation = abs(fr_sum - fr_f) if not math.isnan(fr_sum) else math.nan

    return PerturbationReport(fr_f=fr_f,
                              fr_n=fr_n,
                              fr_sum=fr_sum,
                              deterministic_bound=det,
                              observed_deviation=deviation,
                              bound_applicable=applicable,
                              coarse_bound=coarse,
                              sqrt_n_bound=sqrt_n,
                              delta=t / s,
                              delta_bound=delta_bound)


def noise_radius(N, gamma, laurent_massart=False):
    """
    r_gamma = sqrt(N) + sqrt(log(1/gamma)), plus log(1/gamma)/(2 sqrt(N)) for the
    chi-square (Laurent-Massart) variant
    """
    if not 0 < gamma < 1:
        raise ValueError(f"Error in FRatio.noise.noise_radius: gamma must lie in (0, 1) (got {gamma}).")
    log_term = math.log(1.0 / gamma)
    radius = math.sqrt(N) + math.sqrt(log_term)
    if laurent_massart:
        radius += log_term / (2.0 * math.sqrt(N))
    return radius


def gaussian_threshold(sigma, N, gamma):
    """
    t_gamma = sigma (sqrt(N) + sqrt(log(1/gamma)))
    """
    return sigma * noise_radius(N, gamma)


def smoothing_radius(sigma, n, N, gamma, laurent_massart=False):
    """
    High-probability bound (sigma/sqrt(n)) r_gamma on ||average - s||_2
    """
    return sigma / math.sqrt(n) * noise_radius(N, gamma, laurent_massart)


def average_signals(copies):
    """
    Entrywise mean of n >= 1 signals of equal length
    """
    arrays = [core.as_array(copy) for copy in copies]
    if not arrays:
        raise ValueError("Error in FRatio.noise.average_signals: need at least one copy.")
    if len({arr.size for arr in arrays}) != 1:
        raise ValueError("Error in FRatio.noise.average_signals: copies have mismatched lengths.")

    return core.Signal(np.mean(np.stack(arrays), axis=0))


def _report(name, params, deviations, violations, trials, gamma, seed, regime_violation, estimates):
    return expMod.ExperimentReport(name=name,
                                   params=params,
                                   trials=trials,
                                   violations=int(violations),
                                   coverage=1.0 - violations / trials,
                                   slack=expMod.binomial_slack(gamma, trials),
                                   seed=seed,
                                   quantiles=expMod.quantile_summary(deviations),
                                   estimates=estimates,
                                   regime_violation=regime_violation)


def gaussian_deviation_experiment(f, sigma, gamma, trials, seed, processes=1, progress=False):
    """
    Coverage of the Gaussian perturbation bound
      |FR(f+n) - FR(f)| <= (FR(n) + FR(f)) t_gamma / (||f_hat||_2 - t_gamma),
    evaluated per trial with that trial's FR(n). The bound should fail in at most a
    gamma fraction of trials (plus binomial slack). The frequency of ||n_hat||_2 <= t_gamma
    is also recorded.

    RETURNS:
    ExperimentReport
    """
    if not sigma >= 0:
        raise ValueError(f"Error in FRatio.noise.gaussian_deviation_experiment: sigma must be >= 0 (got {sigma}).")
    if trials < 1:
        raise ValueError("Error in FRatio.noise.gaussian_deviation_experiment: need at least one trial.")

    arr = core.as_array(f)
    N = arr.size
    f_hat = core.dft(arr).values
    s = core.lp_norm(f_hat, 2)
    fr_f = core.lp_norm(f_hat, 1) / s
    t_gamma = gaussian_threshold(sigma, N, gamma)
    regime_violation = not s > t_gamma

    def trial(idx):
        noise = complex_gaussian(expMod.make_rng(seed, idx), N, sigma)
        deviation = abs(_fr_or_zero(arr + noise) - fr_f)
        fr_n = _fr_or_zero(noise)
        bound = (fr_n + fr_f) * t_gamma / (s - t_gamma) if not regime_violation else math.inf
        norm_ok = core.lp_norm(noise, 2) <= t_gamma
        return deviation, deviation > bound + 1e-12, norm_ok

    outcomes = expMod.run_trials(trial, trials, processes=processes, desc="gaussian", progress=progress)
    deviations = [out[0] for out in outcomes]
    violations = sum(out[1] for out in outcomes)
    norm_coverage = float(np.mean([out[2] for out in outcomes]))

    params = {"sigma": sigma, "gamma": gamma, "N": N, "t_gamma": t_gamma}
    return _report("gaussian_deviation", params, deviations, violations, trials, gamma, seed,
                   regime_violation, {"fr_f": fr_f, "noise_norm_coverage": norm_coverage})


def averaging_mse_experiment(s, sigma, n, meta_trials, seed, gamma=0.1, laurent_massart=False,
                             processes=1, progress=False):
    """
    Mean squared error of the n-fold average against N sigma^2 / n, and the coverage of the
    high-probability radius (sigma/sqrt(n)) r_gamma

    RETURNS:
    ExperimentReport; estimates hold mse, its standard error and the expected value
    """
    arr = core.as_array(s)
    N = arr.size
    radius = smoothing_radius(sigma, n, N, gamma, laurent_massart)

    def trial(idx):
        rng = expMod.make_rng(seed, n, idx)
        copies = arr + complex_gaussian(rng, (n, N), sigma)
        err = core.lp_norm(average_signals(list(copies)).values - arr, 2)
        return err**2, err > radius

    outcomes = expMod.run_trials(trial, meta_trials, processes=processes, desc=f"average n={n}",
                                 progress=progress)
    sq_errors = np.array([out[0] for out in outcomes])
    violations = sum(out[1] for out in outcomes)

    estimates = {"mse": float(np.mean(sq_errors)),
                 "mse_se": float(np.std(sq_errors, ddof=1) / math.sqrt(meta_trials)) if meta_trials > 1 else math.nan,
                 "expected_mse": N * sigma**2 / n,
                 "radius": radius}
    params = {"sigma": sigma, "n": n, "gamma": gamma, "N": N, "laurent_massart": laurent_massart}
    return _report("averaging_mse", params, np.sqrt(sq_errors), violations, meta_trials, gamma, seed,
                   False, estimates)


def fr_of_average_experiment(s, sigma, n, gamma, trials, seed, processes=1, progress=False):
    """
    Per-trial check of
      |FR(f_bar) - FR(s)| <= 2 sigma r_gamma / (sqrt(n) ||s||_2) (FR(n_bar) + FR(s))
    and of the single-copy bound with the first copy. Requires ||s||_2 >= 2 sigma r_gamma.

    RETURNS:
    ExperimentReport; violations count the averaged bound, estimates carry the single-copy
    violation count and the median deviation
    """
    arr = core.as_array(s)
    N = arr.size
    s_l2 = core.lp_norm(arr, 2)
    fr_s = _fr_or_zero(arr)
    if fr_s == 0:
        raise ValueError("Error in FRatio.noise.fr_of_average_experiment: zero signal has no Fourier ratio.")
    r_gamma = noise_radius(N, gamma)
    regime_violation = s_l2 < 2.0 * sigma * r_gamma
    scale = 2.0 * sigma * r_gamma / s_l2

    def trial(idx):
        rng = expMod.make_rng(seed, n, idx)
        noises = complex_gaussian(rng, (n, N), sigma)
        noise_bar = noises.mean(axis=0)
        deviation = abs(_fr_or_zero(arr + noise_bar) - fr_s)
        bound = scale / math.sqrt(n) * (_fr_or_zero(noise_bar) + fr_s)
        single_dev = abs(_fr_or_zero(arr + noises[0]) - fr_s)
        single_bound = scale * (_fr_or_zero(noises[0]) + fr_s)
        return deviation, deviation > bound + 1e-12, single_dev > single_bound + 1e-12

    outcomes = expMod.run_trials(trial, trials, processes=processes, desc=f"fr average n={n}",
                                 progress=progress)
    deviations = [out[0] for out in outcomes]
    violations = sum(out[1] for out in outcomes)
    single = sum(out[2] for out in outcomes)

    params = {"sigma": sigma, "n": n, "gamma": gamma, "N": N, "r_gamma": r_gamma}
    estimates = {"fr_s": fr_s,
                 "median_deviation": float(np.median(deviations)),
                 "single_copy_violations": int(single)}
    return _report("fr_of_average", params, deviations, violations, trials, gamma, seed,
                   regime_violation, estimates)


def fr_of_average_sweep(s, sigma, gamma, trials, seed, n_values=DEFAULT_N_SWEEP, processes=1,
                        progress=False):
    """
    Run fr_of_average_experiment over several copy counts

    RETURNS:
    (list of ExperimentReport, pandas DataFrame of n against median deviation)
    """
    reports = [fr_of_average_experiment(s, sigma, n, gamma, trials, seed, processes=processes,
                                        progress=progress)
               for n in n_values]
    table = pd.DataFrame({"n": list(n_values),
                          "median_deviation": [rep.estimates["median_deviation"] for rep in reports],
                          "violations": [rep.violations for rep in reports]})
    return reports, table


def perturbation_experiment(f, N, trials, seed, processes=1, progress=False):
    """
    Property run of the deterministic perturbation inequality over random perturbations
    with ||n_hat||_2 < ||f_hat||_2. When f is None a fresh complex Gaussian f of length N
    is drawn in every trial.

    RETURNS:
    ExperimentReport; any violation is a failure of an exact inequality
    """
    fixed = None if f is None else core.as_array(f)
    size = N if fixed is None else fixed.size

    def trial(idx):
        rng = expMod.make_rng(seed, idx)
        f_arr = fixed if fixed is not None else complex_gaussian(rng, size, 1.0)
        direction = complex_gaussian(rng, size, 1.0)
        # ||n||_2 = u ||f||_2 with u uniform in [0, 0.99)
        scale = 0.99 * rng.random() * core.lp_norm(f_arr, 2) / core.lp_norm(direction, 2)
        report = perturbation_bound(f_arr, direction * scale)
        return report.observed_deviation, not report.holds, report.deterministic_bound

    outcomes = expMod.run_trials(trial, trials, processes=processes, desc="perturbation", progress=progress)
    deviations = [out[0] for out in outcomes]
    violations = sum(out[1] for out in outcomes)

    return expMod.ExperimentReport(name="perturbation",
                                   params={"N": size, "fixed_signal": fixed is not None},
                                   trials=trials,
                                   violations=int(violations),
                                   coverage=1.0 - violations / trials,
                                   slack=0.0,
                                   seed=seed,
                                   quantiles=expMod.quantile_summary(deviations),
                                   estimates={"median_bound": float(np.median([out[2] for out in outcomes]))})
