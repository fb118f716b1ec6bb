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
from dataclasses import dataclass, asdict
from typing import NamedTuple

import numpy as np

from . import core


ZERO_SIGNAL_MSG = "zero signal has no Fourier ratio"


@dataclass(frozen=True)
class FrReport:
    """
    Summary of the Fourier-side complexity of one signal
    """
    fr: float
    fr_hat: float
    bi_fr: float
    coherence: float
    numerical_sparsity: float
    l1_spectral_norm: float
    l2_norm: float
    domain_size: int

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class ConcentrationLevels:
    """
    Concentration defects of f on E (time, L2) and of f_hat on S (frequency, L1)
    """
    a: float
    b: float
    e_size: int
    s_size: int
    domain_size: int


@dataclass(frozen=True)
class UncertaintyCheck:
    lower: float
    fr_sq: float
    upper: float
    holds: bool
    levels: ConcentrationLevels
    classical_holds: bool


class BiFourierRatio(NamedTuple):
    bi_fr: float
    fr: float
    fr_hat: float


def _ratio_of(arr, caller):
    mags = np.abs(arr)
    l2 = float(np.sqrt(np.sum(mags**2)))
    if l2 == 0:
        raise ValueError(f"Error in FRatio.fr.{caller}: {ZERO_SIGNAL_MSG}.")
    return float(np.sum(mags)) / l2


def fourier_ratio(f):
    """
    Fourier ratio FR(f) = ||f_hat||_1 / ||f_hat||_2, a value in [1, sqrt(N)]

    ARGS:
    f :: Signal (or array-like)

    RETURNS:
    float
    """
    return _ratio_of(core.dft(f).values, "fourier_ratio")


def bi_fourier_ratio(f):
    """
    Two-sided ratio min(FR(f), FR(f_hat)), where FR(f_hat) transforms dft(f) once more

    RETURNS:
    BiFourierRatio(bi_fr, fr, fr_hat)
    """
    spectrum = core.dft(f)
    fr = _ratio_of(spectrum.values, "bi_fourier_ratio")
    fr_hat = _ratio_of(core.dft(spectrum).values, "bi_fourier_ratio")

    return BiFourierRatio(min(fr, fr_hat), fr, fr_hat)


def coherence(f):
    """
    Coherence mu(f) = N ||f||_inf^2 / ||f||_2^2, a value in [1, N]
    """
    arr = core.as_array(f)
    l2_sq = float(np.sum(np.abs(arr)**2))
    if l2_sq == 0:
        raise ValueError("Error in FRatio.fr.coherence: zero signal has no coherence.")

    return arr.size * float(np.max(np.abs(arr)))**2 / l2_sq


def numerical_sparsity(g):
    """
    Numerical sparsity (||g||_1 / ||g||_2)^2 of a vector; equals FR(f)^2 when g = dft(f)
    """
    return _ratio_of(core.as_array(g), "numerical_sparsity")**2


def fr_report(f):
    """
    Compute every quantity of FrReport in one pass
    """
    arr = core.as_array(f)
    spectrum = core.dft(arr)
    bi = bi_fourier_ratio(arr)

    return FrReport(fr=bi.fr,
                    fr_hat=bi.fr_hat,
                    bi_fr=bi.bi_fr,
                    coherence=coherence(arr),
                    numerical_sparsity=numerical_sparsity(spectrum),
                    l1_spectral_norm=core.lp_norm(spectrum, 1),
                    l2_norm=core.lp_norm(arr, 2),
                    domain_size=arr.size)


def _as_index_set(E, N, caller):
    if isinstance(E, core.IndexSet):
        if E.domain_size != N:
            raise ValueError(f"Error in FRatio.fr.{caller}: index set and signal disagree on N.")
        return E
    try:
        return core.IndexSet(E, N)
    except ValueError as err:
        raise ValueError(f"Error in FRatio.fr.{caller}: {err}") from err


def concentration_levels(f, E, S):
    """
    Exact concentration quotients
      a = ||f||_{L2(E^c)} / ||f||_2
      b = ||f_hat||_{L1(S^c)} / ||f_hat||_1

    ARGS:
    f :: Signal
    E :: time-domain IndexSet
    S :: frequency-domain IndexSet
    """
    arr = core.as_array(f)
    N = arr.size
    E = _as_index_set(E, N, "concentration_levels")
    S = _as_index_set(S, N, "concentration_levels")

    spectrum = core.dft(arr).values
    l2 = core.lp_norm(arr, 2)
    l1_hat = core.lp_norm(spectrum, 1)
    if l2 == 0:
        raise ValueError(f"Error in FRatio.fr.concentration_levels: {ZERO_SIGNAL_MSG}.")

    a = core.restricted_lp_norm(arr, E.complement(), 2) / l2
    b = core.restricted_lp_norm(spectrum, S.complement(), 1) / l1_hat

    return ConcentrationLevels(a=min(a, 1.0),
                               b=min(b, 1.0),
                               e_size=len(E),
                               s_size=len(S),
                               domain_size=N)


def uncertainty_check(f, E, S, tol=1e-9):
    """
    Evaluate the Fourier-ratio uncertainty bounds
      (1-a)^2 N/|E|  <=  FR(f)^2  <=  |S|/(1-b)^2
    An upper bound with b = 1 is vacuous and reported as inf.

    ARGS:
    f   :: Signal
    E   :: IndexSet on which f is L2-concentrated
    S   :: IndexSet on which f_hat is L1-concentrated
    tol :: relative tolerance of the comparison
    """
    arr = core.as_array(f)
    E = _as_index_set(E, arr.size, "uncertainty_check")
    if len(E) == 0:
        raise ValueError("Error in FRatio.fr.uncertainty_check: degenerate input, E is empty.")

    levels = concentration_levels(arr, E, S)
    N = levels.domain_size
    fr_sq = fourier_ratio(arr)**2

    lower = (1.0 - levels.a)**2 * N / levels.e_size
    if levels.b < 1.0:
        upper = levels.s_size / (1.0 - levels.b)**2
    else:
        upper = math.inf

    slack = tol * max(1.0, fr_sq)
    holds = (lower <= fr_sq + slack) and (fr_sq <= upper + slack)

    # |E||S| >= (1-a)^2 (1-b)^2 N follows from the two bounds
    classical = (levels.e_size * levels.s_size
                 >= (1.0 - levels.a)**2 * (1.0 - levels.b)**2 * N * (1.0 - tol))

    return UncertaintyCheck(lower=lower,
                            fr_sq=fr_sq,
                            upper=upper,
                            holds=bool(holds),
                            levels=levels,
                            classical_holds=bool(classical))


def l1_l2_concentration(f, S):
    """
    Spectral concentration defects of f on S in both L1 and L2

    RETURNS:
    (b1, b2) with b1 = ||f_hat||_{L1(S^c)}/||f_hat||_1, b2 = ||f_hat||_{L2(S^c)}/||f_hat||_2
    """
    spectrum = core.dft(f).values
    S = _as_index_set(S, spectrum.size, "l1_l2_concentration")
    l1 = core.lp_norm(spectrum, 1)
    if l1 == 0:
        raise ValueError(f"Error in FRatio.fr.l1_l2_concentration: {ZERO_SIGNAL_MSG}.")
    Sc = S.complement()

    return (core.restricted_lp_norm(spectrum, Sc, 1) / l1,
            core.restricted_lp_norm(spectrum, Sc, 2) / core.lp_norm(spectrum, 2))


def l2_concentration_counterexample(N, S, b):
    """
    Signal whose spectrum is L2-concentrated on S at level b but whose FR exceeds
    |S|/(1-b)^2 once |S| is small against N: f_hat = sqrt(1-b^2)/sqrt|S| on S and
    b/sqrt(N-|S|) off S.

    ARGS:
    N :: domain size
    S :: IndexSet or iterable of frequencies, 0 < |S| < N
    b :: level in (0, 1)
    """
    S = _as_index_set(S, N, "l2_concentration_counterexample")
    if not 0 < len(S) < N:
        raise ValueError("Error in FRatio.fr.l2_concentration_counterexample: need 0 < |S| < N.")
    if not 0 < b < 1:
        raise ValueError("Error in FRatio.fr.l2_concentration_counterexample: b must lie in (0, 1).")

    spectrum = np.full(N, b / math.sqrt(N - len(S)), dtype=np.complex128)
    spectrum[S.members] = math.sqrt(1.0 - b**2) / math.sqrt(len(S))

    return core.idft(spectrum)


def support_lower_bound(f, threshold=0.0):
    """
    Lower bound sqrt(N/|E|) on FR(f), E being the support {x : |f(x)| > threshold}
    """
    arr = core.as_array(f)
    support = int(np.count_nonzero(np.abs(arr) > threshold))
    if support == 0:
        raise ValueError(f"Error in FRatio.fr.support_lower_bound: {ZERO_SIGNAL_MSG}.")

    return math.sqrt(arr.size / support)


def sq_dimension_bound(r, N):
    """
    log2 of the statistical-query dimension bound for functions with FR <= r,
      (1/eps)^D (e/D)^D N^D,  D = r^2/eps^2,  eps = 1/(4(1+2r)),
    which simplifies to D log2(e N / (4 r^2 (1+2r))).

    ARGS:
    r :: Fourier ratio level, >= 1
    N :: domain size

    RETURNS:
    float, log2 of the bound
    """
    if not r >= 1:
        raise ValueError(f"Error in FRatio.fr.sq_dimension_bound: r must be >= 1 (got {r}).")
    if N < 1:
        raise ValueError(f"Error in FRatio.fr.sq_dimension_bound: N must be >= 1 (got {N}).")

    eps = 1.0 / (4.0 * (1.0 + 2.0 * r))
    dim = r**2 / eps**2

    return dim * (math.log2(math.e) + math.log2(N) - math.log2(4.0 * r**2 * (1.0 + 2.0 * r)))
