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
import os
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
import pandas as pd
import scipy.fft as sfft

from . import core
from . import experiment as expMod


PROFILES = {
    "desk": {"n_grid": [100, 1000, 10000],
             "q_grid": [3.0, 3.25, 3.5, 3.75, 4.0],
             "trials": 10000},
    "full": {"n_grid": [100000],
              "q_grid": [3.0, 3.25, 3.5, 3.75, 4.0],
              "trials": 1000000},
}
DEFAULT_PERCENTILE = 90.0
MAX_BATCH_ENTRIES = 2**22


@dataclass
class ConstantEstimate:
    """
    Percentile estimates of the Talagrand ratio and of C(q)^{q/(q-2)} over a (N, q) grid
    """
    n_grid: list
    q_grid: list
    trials: int
    percentile: float
    ct_estimates: np.ndarray
    cq_exp_estimates: np.ndarray
    seed: int
    holder_violations: int = 0
    quantiles: dict = field(default_factory=dict)

    def ct_frame(self):
        return pd.DataFrame(self.ct_estimates,
                            index=pd.Index(self.n_grid, name="N"),
                            columns=[f"{q:g}" for q in self.q_grid])

    def cq_exp_frame(self):
        return pd.DataFrame(self.cq_exp_estimates,
                            index=pd.Index(self.n_grid, name="N"),
                            columns=[f"{q:g}" for q in self.q_grid])

    def to_dict(self):
        return {"n_grid": list(self.n_grid),
                "q_grid": list(self.q_grid),
                "trials": self.trials,
                "percentile": self.percentile,
                "ct_estimates": self.ct_estimates,
                "cq_exp_estimates": self.cq_exp_estimates,
                "seed": self.seed,
                "holder_violations": self.holder_violations,
                "quantiles": self.quantiles}


class ConcentrationBound(NamedTuple):
    bound: float
    regime: str
    level: float
    r_limit: float
    regime_violation: bool


def generic_set_size(N, q_exponent):
    """
    ceil(N^{2/q}), with values within rounding of an integer taken as that integer
    """
    if not q_exponent > 2:
        raise ValueError(f"Error in FRatio.constants.generic_set_size: q must be > 2 (got {q_exponent}).")
    raw = N**(2.0 / q_exponent)
    nearest = round(raw)
    if abs(raw - nearest) <= 1e-9 * raw:
        return int(nearest)
    return int(math.ceil(raw))


def generic_set(N, q_exponent, seed):
    """
    Uniformly random subset of Z_N of size ceil(N^{2/q})
    """
    size = generic_set_size(N, q_exponent)
    rng = expMod.make_rng(seed)
    return core.IndexSet(rng.choice(N, size=size, replace=False), N)


def generic_set_bernoulli(N, p, seed):
    """
    Random subset keeping each element of Z_N independently with probability p
    """
    if not 0 < p <= 1:
        raise ValueError(f"Error in FRatio.constants.generic_set_bernoulli: p must lie in (0, 1] (got {p}).")
    rng = expMod.make_rng(seed)
    return core.IndexSet.from_mask(rng.random(N) < p)


def _indicator_spectrum(M, N, caller):
    members = M.members if isinstance(M, core.IndexSet) else core.IndexSet(M, N).members
    if members.size == 0:
        raise ValueError(f"Error in FRatio.constants.{caller}: the set M is empty.")
    return np.abs(core.dft(core.indicator(members, N)).values)


def _mu_norm_rows(mags, p):
    """
    L^p(mu) norm of every row of a nonnegative array
    """
    if p == 1:
        return mags.mean(axis=-1)
    if p == 2:
        return np.sqrt((mags**2).mean(axis=-1))
    peak = mags.max(axis=-1, keepdims=True)
    peak = np.where(peak == 0, 1.0, peak)
    return peak[..., 0] * ((mags / peak)**p).mean(axis=-1)**(1.0 / p)


def talagrand_ratio(M, N):
    """
    ||h_hat||_{L2(mu)} / ||h_hat||_{L1(mu)} for h = 1_M
    """
    mags = _indicator_spectrum(M, N, "talagrand_ratio")
    return float(_mu_norm_rows(mags, 2) / _mu_norm_rows(mags, 1))


def bourgain_ratio(M, N, q):
    """
    ratio = ||h_hat||_{Lq(mu)} / ||h_hat||_{L2(mu)} for h = 1_M, and ratio^{q/(q-2)}.
    Hoelder gives talagrand_ratio(M) <= ratio^{q/(q-2)}, checked here.

    RETURNS:
    (ratio, ratio_exp)
    """
    if not q > 2:
        raise ValueError(f"Error in FRatio.constants.bourgain_ratio: q must be > 2 (got {q}).")
    mags = _indicator_spectrum(M, N, "bourgain_ratio")
    l2 = float(_mu_norm_rows(mags, 2))
    ratio = float(_mu_norm_rows(mags, q)) / l2
    ratio_exp = ratio**(q / (q - 2.0))

    talagrand = l2 / float(_mu_norm_rows(mags, 1))
    if talagrand > ratio_exp + 1e-9:
        raise AssertionError(f"Error in FRatio.constants.bourgain_ratio: Talagrand ratio {talagrand} "
                             f"exceeds C(q)^(q/(q-2)) = {ratio_exp}.")

    return ratio, ratio_exp


def _cell_ratios(N, q, trials, seed, processes, progress=False):
    """
    Talagrand ratios and C(q)^{q/(q-2)} for `trials` generic sets of one grid cell.
    Set t is drawn from the child seed (seed, N, round(1000 q), t).
    """
    size = generic_set_size(N, q)
    q_key = int(round(1000 * q))
    batch = max(1, min(256, MAX_BATCH_ENTRIES // N))
    n_batches = math.ceil(trials / batch)

    def run_batch(b_idx):
        start = b_idx * batch
        stop = min(trials, start + batch)
        rows = np.zeros((stop - start, N), dtype=np.float64)
        for row, trial in enumerate(range(start, stop)):
            rng = expMod.make_rng(seed, N, q_key, trial)
            rows[row, rng.choice(N, size=size, replace=False)] = 1.0

        mags = np.abs(sfft.fft(rows, axis=1, norm="ortho"))
        l1 = _mu_norm_rows(mags, 1)
        l2 = _mu_norm_rows(mags, 2)
        lq = _mu_norm_rows(mags, q)
        return l2 / l1, (lq / l2)**(q / (q - 2.0))

    parts = expMod.run_trials(run_batch, n_batches, processes=processes, desc=f"N={N} q={q:g}",
                               progress=progress)
    talagrand = np.concatenate([part[0] for part in parts])
    cq_exp = np.concatenate([part[1] for part in parts])

    return talagrand, cq_exp


def estimate_constants(n_grid, q_grid, trials, percentile=DEFAULT_PERCENTILE, seed=0, processes=1,
                       logger=None, progress=False):
    """
    Monte-Carlo estimates of C_T and C(q)^{q/(q-2)}: for each (N, q) draw `trials`
    generic sets of size ceil(N^{2/q}) and take the given percentile of each ratio.

    ARGS:
    n_grid     :: domain sizes
    q_grid     :: exponents, each > 2
    trials     :: draws per cell, >= 100
    percentile :: in (0, 100), linear interpolation between order statistics
    seed       :: base seed
    processes  :: joblib workers
    logger     :: optional FRatio Logger for per-cell progress
    progress   :: show a tqdm bar per grid cell

    RETURNS:
    ConstantEstimate
    """
    n_grid = [int(N) for N in n_grid]
    q_grid = [float(q) for q in q_grid]
    if not n_grid or not q_grid:
        raise ValueError("Error in FRatio.constants.estimate_constants: empty N or q grid.")
    if trials < 100:
        raise ValueError(f"Error in FRatio.constants.estimate_constants: need at least 100 trials (got {trials}).")
    if not 0 < percentile < 100:
        raise ValueError(f"Error in FRatio.constants.estimate_constants: percentile must lie in (0, 100).")
    if any(q <= 2 for q in q_grid):
        raise ValueError("Error in FRatio.constants.estimate_constants: every q must be > 2.")

    ct = np.zeros((len(n_grid), len(q_grid)))
    cq = np.zeros_like(ct)
    violations = 0
    quantiles = {}
    for i, N in enumerate(n_grid):
        for j, q in enumerate(q_grid):
            talagrand, cq_exp = _cell_ratios(N, q, trials, seed, processes, progress=progress)
            violations += int(np.count_nonzero(talagrand > cq_exp + 1e-9))
            ct[i, j] = expMod.percentile(talagrand, percentile)
            cq[i, j] = expMod.percentile(cq_exp, percentile)
            quantiles[f"N={N},q={q:g}"] = {"talagrand": expMod.quantile_summary(talagrand),
                                          "cq_exp": expMod.quantile_summary(cq_exp)}
            if logger is not None:
                logger(message=f"N={N}, q={q:g}: C_T ~ {ct[i, j]:.9g}, C(q)^(q/(q-2)) ~ {cq[i, j]:.9g}",
                       stdout=False)

    return ConstantEstimate(n_grid=n_grid,
                            q_grid=q_grid,
                            trials=trials,
                            percentile=percentile,
                            ct_estimates=ct,
                            cq_exp_estimates=cq,
                            seed=seed,
                            holder_violations=violations,
                            quantiles=quantiles)


def write_heatmaps(estimate, output_dir, prefix="constants", fmt="csv"):
    """
    Write the two heatmap matrices (rows N, columns q) as CSV files, or one JSON file

    RETURNS:
    list of written paths
    """
    os.makedirs(output_dir, exist_ok=True)
    if fmt == "json":
        path = os.path.join(output_dir, f"{prefix}.json")
        expMod.dump_json(estimate.to_dict(), path)
        return [path]

    paths = []
    for name, frame in (("ct", estimate.ct_frame()), ("cq_exp", estimate.cq_exp_frame())):
        path = os.path.join(output_dir, f"{prefix}_{name}.csv")
        frame.to_csv(path, float_format="%.9g")
        paths.append(path)
    return paths


def concentration_fr_bound(r, N, C_T, regime="log"):
    """
    Lower bound on FR(f) for f with ||f||_{L2(M^c)} <= r ||f||_2 on a generic M:
      sqrt(N) (1 - r L/(1-r)) / (L/(1-r)),
    L = C_T sqrt(log N log log N) in the log regime and L = C_T in the power_law regime.
    r must satisfy r <= (1-r)/L; otherwise a regime violation is reported.

    RETURNS:
    ConcentrationBound
    """
    if regime not in ("log", "power_law"):
        raise ValueError(f"Error in FRatio.constants.concentration_fr_bound: unknown regime '{regime}'.")
    if not 0 <= r < 1:
        raise ValueError(f"Error in FRatio.constants.concentration_fr_bound: r must lie in [0, 1) (got {r}).")
    if not C_T > 0:
        raise ValueError("Error in FRatio.constants.concentration_fr_bound: C_T must be > 0.")

    if regime == "log":
        if N < 3:
            raise ValueError("Error in FRatio.constants.concentration_fr_bound: log regime needs N >= 3.")
        level = C_T * math.sqrt(math.log(N) * math.log(math.log(N)))
    else:
        level = C_T
    r_limit = 1.0 / (1.0 + level)

    if r > r_limit * (1.0 + 1e-12):
        return ConcentrationBound(math.nan, regime, level, r_limit, True)

    scaled = level / (1.0 - r)
    bound = max(0.0, math.sqrt(N) * (1.0 - r * scaled) / scaled)
    return ConcentrationBound(bound, regime, level, r_limit, False)
