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


"""
Dissociated subsets of the large spectrum.

A set L in Z_N is dissociated when the only {-1,0,1}-combination of its elements
that vanishes mod N is the trivial one; equivalently, its 2^|L| subset sums are
pairwise distinct mod N.
"""


import math
from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from . import core
from . import approx as apxMod


DEFAULT_GUARD = 16
HARD_CAP = 20


@dataclass
class DissociationCertificate:
    lambda_set: core.IndexSet
    gamma: core.IndexSet
    span_verified: bool
    dissociation_verified: bool
    bound_lognorm: float
    bound_l2l1: Optional[float]
    eta: float

    @property
    def ratio(self):
        """
        |Lambda| / bound_lognorm, an empirical estimate of the unknown constant
        """
        return len(self.lambda_set) / self.bound_lognorm


class ChangBounds(NamedTuple):
    bound_lognorm: float
    bound_l2l1: Optional[float]


def _check_guard(size, guard, caller):
    if guard > HARD_CAP:
        raise ValueError(f"Error in FRatio.chang.{caller}: guard {guard} exceeds the hard cap {HARD_CAP}.")
    if size > guard:
        raise ValueError(f"Error in FRatio.chang.{caller}: dissociated set would exceed {guard} elements; "
                         "use a larger eta to shrink the large spectrum.")


def _members(index_set, N, caller):
    if isinstance(index_set, core.IndexSet):
        if index_set.domain_size != N:
            raise ValueError(f"Error in FRatio.chang.{caller}: index set and N disagree.")
        return index_set.members
    return core.IndexSet(index_set, N).members


def signed_sum_mask(lambda_set, N):
    """
    Boolean mask of {sum_i e_i l_i mod N : e in {-1,0,1}^|L|}
    """
    reach = np.zeros(N, dtype=bool)
    reach[0] = True
    for m in lambda_set:
        reach = reach | np.roll(reach, int(m)) | np.roll(reach, -int(m))
    return reach


def subset_sums(lambda_set, N):
    """
    All 2^|L| subset sums mod N, with multiplicity
    """
    sums = np.zeros(1, dtype=np.int64)
    for m in lambda_set:
        sums = np.concatenate([sums, (sums + int(m)) % N])
    return sums


def is_dissociated(lambda_set, N, guard=HARD_CAP):
    lam = _members(lambda_set, N, "is_dissociated")
    _check_guard(lam.size, guard, "is_dissociated")
    if 2**lam.size > N:
        return False
    return np.unique(subset_sums(lam, N)).size == 2**lam.size


def maximal_dissociated_subset(gamma, N, guard=DEFAULT_GUARD):
    """
    Greedy maximal dissociated subset of gamma, scanning in ascending order

    ARGS:
    gamma :: IndexSet (or iterable) of frequencies in [0, N)
    N     :: domain size
    guard :: largest |Lambda| allowed before giving up (at most 20)

    RETURNS:
    IndexSet
    """
    members = _members(gamma, N, "maximal_dissociated_subset")
    if guard > HARD_CAP:
        raise ValueError(f"Error in FRatio.chang.maximal_dissociated_subset: guard {guard} "
                         f"exceeds the hard cap {HARD_CAP}.")

    chosen = []
    reach = np.zeros(N, dtype=bool)
    reach[0] = True
    for m in members.tolist():
        # m extends a dissociated set iff it is not already a signed sum of it
        if reach[m]:
            continue
        _check_guard(len(chosen) + 1, guard, "maximal_dissociated_subset")
        chosen.append(m)
        reach = reach | np.roll(reach, m) | np.roll(reach, -m)

    return core.IndexSet(chosen, N)


def verify_span(gamma, lambda_set, N, guard=DEFAULT_GUARD):
    """
    True iff every element of gamma is a {-1,0,1}-combination of lambda_set mod N
    """
    lam = _members(lambda_set, N, "verify_span")
    _check_guard(lam.size, guard, "verify_span")
    reach = signed_sum_mask(lam, N)
    return bool(np.all(reach[_members(gamma, N, "verify_span")]))


def chang_bounds(f, eta):
    """
    Right-hand sides of the generalised Chang bounds with the absolute constant set to 1:
      lognorm: eta^-2 (||f||_p' / ||f||_2)^2 log N,  p' = log N / (log N - 1)
      l2l1:    eta^-2 (||f||_1 / ||f||_2)^2 log(N (||f||_2 / ||f||_1)^2),
               only when ||f||_1 / ||f||_2 <= sqrt(N) / e

    RETURNS:
    ChangBounds(bound_lognorm, bound_l2l1 or None)
    """
    if not eta > 0:
        raise ValueError(f"Error in FRatio.chang.chang_bounds: eta must be > 0 (got {eta}).")

    arr = core.as_array(f)
    N = arr.size
    if N < 3:
        raise ValueError("Error in FRatio.chang.chang_bounds: need N >= 3 so that log N > 1.")
    l2 = core.lp_norm(arr, 2)
    if l2 == 0:
        raise ValueError("Error in FRatio.chang.chang_bounds: zero signal.")

    log_n = math.log(N)
    p_dual = log_n / (log_n - 1.0)
    lognorm = (core.lp_norm(arr, p_dual) / l2)**2 * log_n / eta**2

    ratio = core.lp_norm(arr, 1) / l2
    l2l1 = None
    if ratio <= math.sqrt(N) / math.e:
        l2l1 = ratio**2 * math.log(N / ratio**2) / eta**2

    return ChangBounds(lognorm, l2l1)


def certify(f, eta, guard=DEFAULT_GUARD):
    """
    Large spectrum, greedy dissociated subset, both verifications and the bounds

    RETURNS:
    DissociationCertificate
    """
    arr = core.as_array(f)
    N = arr.size
    gamma = apxMod.large_spectrum(arr, eta)
    lam = maximal_dissociated_subset(gamma, N, guard=guard)
    bounds = chang_bounds(arr, eta)

    return DissociationCertificate(lambda_set=lam,
                                   gamma=gamma,
                                   span_verified=verify_span(gamma, lam, N, guard=guard),
                                   dissociation_verified=is_dissociated(lam, N, guard=guard),
                                   bound_lognorm=bounds.bound_lognorm,
                                   bound_l2l1=bounds.bound_l2l1,
                                   eta=eta)


def empirical_constant(certificates):
    """
    Largest |Lambda| / bound_lognorm observed over a corpus of certificates
    """
    ratios = [cert.ratio for cert in certificates]
    if not ratios:
        raise ValueError("Error in FRatio.chang.empirical_constant: no certificates given.")
    return max(ratios)
