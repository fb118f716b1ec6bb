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


import logging
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Optional

import numpy as np
import pandas as pd
import scipy.fft as sfft

from . import core
from . import experiment as expMod


logger = logging.getLogger(__name__)

ERROR_CONSTANT = 11.47


@dataclass(frozen=True)
class SampleMask:
    """
    Sample set X together with the scheme that produced it
    """
    indices: core.IndexSet
    scheme: str
    parameter: float
    seed: int

    @property
    def domain_size(self):
        return self.indices.domain_size

    @property
    def fraction(self):
        return len(self.indices) / self.indices.domain_size


@dataclass
class SolverConfig:
    """
    Settings of the splitting solver

    tol        :: relative tolerance on the splitting residual and objective change
    max_iters  :: iteration cap
    step_scale :: proximal step as a fraction of ||A^H y||_inf
    window     :: iterations over which the objective change is measured
    """
    tol: float = 1e-8
    max_iters: int = 50000
    step_scale: float = 0.1
    window: int = 10


@dataclass
class ImputationResult:
    x_star: core.Signal
    objective: float
    constraint_residual: float
    iterations: int
    converged: bool
    certified_error_bound: float
    eta: float
    history: list = field(default_factory=list, repr=False)


class RestrictedFr(NamedTuple):
    fr_raw: float
    fr_estimate: float
    l1_estimate: float
    l2_estimate: float


class CertifiedBounds(NamedTuple):
    eta: float
    oracle: Optional[float]
    leakage_free: float
    l2_estimate: float
    fr_estimate: float


def sample_uniform(N, q, seed):
    """
    q i.i.d. uniform draws from [0, N), duplicates collapsed
    """
    if int(q) < 1:
        raise ValueError(f"Error in FRatio.recover.sample_uniform: q must be >= 1 (got {q}).")
    rng = expMod.make_rng(seed)
    draws = rng.integers(0, N, size=int(q))

    return SampleMask(indices=core.IndexSet(draws, N),
                      scheme="uniform",
                      parameter=int(q),
                      seed=seed)


def sample_bernoulli(N, p, seed):
    """
    Keep each index of [0, N) independently with probability p
    """
    if not 0 < p <= 1:
        raise ValueError(f"Error in FRatio.recover.sample_bernoulli: p must lie in (0, 1] (got {p}).")
    rng = expMod.make_rng(seed)
    keep = rng.random(N) < p

    return SampleMask(indices=core.IndexSet.from_mask(keep),
                      scheme="bernoulli",
                      parameter=float(p),
                      seed=seed)


def _soft_threshold(z, gamma):
    mags = np.abs(z)
    scale = np.maximum(0.0, 1.0 - gamma / np.maximum(mags, np.finfo(float).tiny))
    return z * scale


class _SamplingOperator:
    """
    A z = (F^{-1} z)[X], a partial isometry (A A^H = I) under the unitary transform
    """

    def __init__(self, idx, N):
        self.idx = idx
        self.N = N

    def forward(self, z):
        return sfft.ifft(z, norm="ortho")[self.idx]

    def adjoint(self, y):
        full = np.zeros(self.N, dtype=np.complex128)
        full[self.idx] = y
        return sfft.fft(full, norm="ortho")


def _ball_projection(v, centre, radius):
    diff = v - centre
    dist = np.linalg.norm(diff)
    if dist <= radius:
        return v
    if radius == 0:
        return centre.copy()
    return centre + diff * (radius / dist)


def impute(observed, X, eta, solver_cfg=None):
    """
    Solve  min ||x_hat||_1  subject to  ||observed - x||_{L2(X)} <= eta
    by Douglas-Rachford splitting on the spectral variable.

    ARGS:
    observed   :: Signal (or array) of length N; only entries on X are read
    X          :: SampleMask or IndexSet of observed positions
    eta        :: constraint radius, >= 0 (0 is an equality constraint)
    solver_cfg :: SolverConfig

    RETURNS:
    ImputationResult; non-convergence is flagged, not raised
    """
    cfg = solver_cfg if solver_cfg is not None else SolverConfig()
    if not eta >= 0:
        raise ValueError(f"Error in FRatio.recover.impute: eta must be >= 0 (got {eta}).")

    arr = core.as_array(observed)
    N = arr.size
    mask = X.indices if isinstance(X, SampleMask) else X
    if not isinstance(mask, core.IndexSet):
        mask = core.IndexSet(mask, N)
    if mask.domain_size != N:
        raise ValueError("Error in FRatio.recover.impute: mask and signal disagree on N.")
    if len(mask) == 0:
        raise ValueError("Error in FRatio.recover.impute: empty sample mask, nothing is observed.")

    idx = mask.members
    y = arr[idx]
    op = _SamplingOperator(idx, N)

    def project(z):
        Az = op.forward(z)
        return z + op.adjoint(_ball_projection(Az, y, eta) - Az)

    w = op.adjoint(y)
    gamma = cfg.step_scale * float(np.max(np.abs(w)))
    if gamma == 0:
        # y = 0: the zero signal is feasible and optimal
        return ImputationResult(x_star=core.Signal(np.zeros(N)), objective=0.0,
                                constraint_residual=0.0, iterations=0, converged=True,
                                certified_error_bound=ERROR_CONSTANT * eta, eta=eta)

    history = []
    converged = False
    u = project(w)
    iteration = 0
    for iteration in range(1, cfg.max_iters + 1):
        z = _soft_threshold(w, gamma)
        u = project(2.0 * z - w)
        w = w + u - z

        objective = float(np.sum(np.abs(u)))
        history.append(objective)
        gap = float(np.linalg.norm(u - z))
        scale = max(float(np.linalg.norm(z)), np.finfo(float).tiny)

        if iteration > cfg.window and gap <= cfg.tol * scale:
            prev = history[-1 - cfg.window]
            if abs(objective - prev) <= cfg.tol * max(objective, np.finfo(float).tiny):
                converged = True
                break

        if iteration % 1000 == 0:
            logger.debug("impute: iteration %d, objective %.6e, gap %.3e", iteration, objective, gap)

    x_star = sfft.ifft(u, norm="ortho")
    residual = float(np.linalg.norm(x_star[idx] - y))
    if converged and residual > eta * (1.0 + cfg.tol) + 1e-9 * max(1.0, float(np.linalg.norm(y))):
        raise FloatingPointError(f"Error in FRatio.recover.impute: constraint residual {residual} "
                                 f"exceeds eta = {eta} after convergence.")

    return ImputationResult(x_star=core.Signal(x_star),
                            objective=float(np.sum(np.abs(u))),
                            constraint_residual=residual,
                            iterations=iteration,
                            converged=converged,
                            certified_error_bound=ERROR_CONSTANT * eta,
                            eta=eta,
                            history=history)


def restricted_fr(f_X, p):
    """
    Estimators from a randomly restricted signal f_X (zero off X, X kept with probability p)

    RETURNS:
    RestrictedFr with
      fr_raw      = FR(f_X)
      fr_estimate = FR(f_X) / sqrt(p)
      l1_estimate = ||f_X_hat||_1 / p
      l2_estimate = ||f_X||_2 / sqrt(p)
    """
    if not 0 < p <= 1:
        raise ValueError(f"Error in FRatio.recover.restricted_fr: p must lie in (0, 1] (got {p}).")

    arr = core.as_array(f_X)
    spectrum = core.dft(arr)
    l1_hat = core.lp_norm(spectrum, 1)
    l2 = core.lp_norm(arr, 2)
    if l2 == 0:
        raise ValueError("Error in FRatio.recover.restricted_fr: restricted signal is zero.")

    fr_raw = l1_hat / l2
    return RestrictedFr(fr_raw=fr_raw,
                        fr_estimate=fr_raw / math.sqrt(p),
                        l1_estimate=l1_hat / p,
                        l2_estimate=l2 / math.sqrt(p))


def restrict(f, X):
    """
    f_X: f on X, zero elsewhere
    """
    arr = np.array(core.as_array(f))
    mask = X.indices if isinstance(X, SampleMask) else X
    out = np.zeros_like(arr)
    out[mask.members] = arr[mask.members]
    return core.Signal(out)


def certified_bounds(observed, X, eps, f_l2=None):
    """
    Error bounds 11.47 eps ||f||_2 for imputation at relative level eps. The oracle
    bound needs the true ||f||_2; the leakage-free one uses ||f_X||_2 / sqrt(p) instead.
    p is the keep-probability of a Bernoulli mask and the observed fraction otherwise.

    RETURNS:
    CertifiedBounds; eta is the leakage-free constraint radius eps * l2_estimate
    """
    if not eps >= 0:
        raise ValueError(f"Error in FRatio.recover.certified_bounds: eps must be >= 0 (got {eps}).")
    mask = X if isinstance(X, SampleMask) else SampleMask(X, "given", len(X) / X.domain_size, 0)
    p = mask.parameter if mask.scheme == "bernoulli" else mask.fraction
    estimate = restricted_fr(restrict(observed, mask), p)

    return CertifiedBounds(eta=eps * estimate.l2_estimate,
                           oracle=None if f_l2 is None else ERROR_CONSTANT * eps * f_l2,
                           leakage_free=ERROR_CONSTANT * eps * estimate.l2_estimate,
                           l2_estimate=estimate.l2_estimate,
                           fr_estimate=estimate.fr_raw)


def theorem_sample_count(r, eps, N, C=1.0):
    """
    Sample count C r^2/eps^2 log(r/eps)^2 log N of the imputation guarantee (C unspecified)
    """
    if not eps > 0:
        raise ValueError(f"Error in FRatio.recover.theorem_sample_count: eps must be > 0 (got {eps}).")
    return C * r**2 / eps**2 * math.log(r / eps)**2 * math.log(N)


def draw_mask(N, value, scheme, seed):
    """
    Mask of q = value uniform samples, or Bernoulli with keep-probability p = value
    """
    if scheme == "uniform":
        return sample_uniform(N, int(value), seed)
    if scheme == "bernoulli":
        return sample_bernoulli(N, float(value), seed)
    raise ValueError(f"Error in FRatio.recover.draw_mask: unknown sampling scheme {scheme!r}.")


def phase_transition(f, q_grid, n_seeds, seed, eps=0.0, solver_cfg=None, success_tol=1e-4,
                     processes=1, progress=False, scheme="uniform"):
    """
    Success rate of noiseless (eps = 0) or noisy imputation against the number of samples

    ARGS:
    f           :: ground-truth Signal
    q_grid      :: sample counts (uniform) or keep-probabilities (bernoulli) to sweep
    n_seeds     :: mask draws per grid value
    seed        :: base seed; the mask for (q, trial) uses the child seed (seed, q, trial),
                   with q in millionths for keep-probabilities
    eps         :: relative constraint radius
    success_tol :: relative error counted as success when eps = 0
    processes   :: joblib workers
    progress    :: show a tqdm bar per grid value
    scheme      :: "uniform" or "bernoulli"

    RETURNS:
    pandas DataFrame with columns q (or p), success_rate, median_error, converged_rate,
    mean_observed
    """
    if scheme not in ("uniform", "bernoulli"):
        raise ValueError(f"Error in FRatio.recover.phase_transition: unknown sampling scheme {scheme!r}.")
    arr = core.as_array(f)
    N = arr.size
    f_l2 = core.lp_norm(arr, 2)
    key = "q" if scheme == "uniform" else "p"
    rows = []
    for q in q_grid:
        stream = int(q) if scheme == "uniform" else int(round(q * 1e6))

        def trial(idx, q=q, stream=stream):
            mask = draw_mask(N, q, scheme, int(expMod.seed_sequence(seed, stream, idx).generate_state(1)[0]))
            if len(mask.indices) == 0:
                # Nothing observed: the estimate is zero
                return 1.0, False, True, 0
            result = impute(restrict(arr, mask), mask, eps * f_l2, solver_cfg)
            error = core.lp_norm(result.x_star.values - arr, 2) / f_l2
            target = success_tol if eps == 0 else ERROR_CONSTANT * eps
            return error, error <= target, result.converged, len(mask.indices)

        outcomes = expMod.run_trials(trial, n_seeds, processes=processes, desc=f"{key}={q:g}",
                                     progress=progress)
        errors = [out[0] for out in outcomes]
        rows.append({key: int(q) if scheme == "uniform" else float(q),
                     "success_rate": float(np.mean([out[1] for out in outcomes])),
                     "median_error": float(np.median(errors)),
                     "converged_rate": float(np.mean([out[2] for out in outcomes])),
                     "mean_observed": float(np.mean([out[3] for out in outcomes]))})

    return pd.DataFrame(rows, columns=[key, "success_rate", "median_error", "converged_rate", "mean_observed"])
