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
Fourier analysis on the cyclic group Z_N.

Signals and spectra are complex-valued functions on Z_N stored as read-only
complex128 arrays. The transform is unitary (factor N^{-1/2}), and two norm
systems are provided: counting norms (l^p) and probability-normalised norms
(L^p(mu)), the latter being N^{-1/p} times the former.
"""


import numpy as np
import scipy.fft as sfft


class _ZnFunction:
    """
    Class encapsulating a complex-valued function on Z_N
    """

    def __init__(self,
                 values,
                 ):
        """
        Initialise function object

        ARGS:
        values :: sequence of (complex) numbers, one per element of Z_N
        """
        arr = np.array(values, dtype=np.complex128).reshape(-1)
        name = type(self).__name__
        if arr.size == 0:
            raise ValueError(f"Error in FRatio.core.{name}: domain size must be at least 1.")
        if not np.all(np.isfinite(arr)):
            raise ValueError(f"Error in FRatio.core.{name}: non-finite entries are not allowed.")

        arr.setflags(write=False)
        self._values = arr


    @property
    def values(self):
        return self._values

    @property
    def domain_size(self):
        return self._values.size

    def __len__(self):
        return self._values.size

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self._values
        return self._values.astype(dtype)

    def __repr__(self):
        return f"{type(self).__name__}(N={self.domain_size})"


class Signal(_ZnFunction):
    """
    Time-domain function f: Z_N -> C
    """


class Spectrum(_ZnFunction):
    """
    Frequency-domain function, as produced by dft
    """


class IndexSet:
    """
    Class encapsulating a subset of Z_N, kept sorted and duplicate-free
    """

    def __init__(self,
                 members,
                 domain_size: int,
                 ):
        """
        Initialise IndexSet object

        ARGS:
        members     :: iterable of integers in [0, N)
        domain_size :: N
        """
        domain_size = int(domain_size)
        if domain_size < 1:
            raise ValueError("Error in FRatio.core.IndexSet: domain size must be at least 1.")

        arr = np.unique(np.asarray(list(members) if not isinstance(members, np.ndarray) else members,
                                   dtype=np.int64).reshape(-1))
        if arr.size and (arr[0] < 0 or arr[-1] >= domain_size):
            raise ValueError(f"Error in FRatio.core.IndexSet: indices must lie in [0, {domain_size}).")

        arr.setflags(write=False)
        self._members = arr
        self._domain_size = domain_size


    @classmethod
    def full(cls, domain_size: int):
        return cls(np.arange(domain_size), domain_size)

    @classmethod
    def from_mask(cls, mask):
        mask = np.asarray(mask, dtype=bool).reshape(-1)
        return cls(np.flatnonzero(mask), mask.size)

    @property
    def members(self):
        return self._members

    @property
    def domain_size(self):
        return self._domain_size

    def complement(self):
        return IndexSet.from_mask(~self.mask())

    def mask(self):
        """
        Boolean indicator of the set as an array of length N
        """
        out = np.zeros(self._domain_size, dtype=bool)
        out[self._members] = True
        return out

    def __len__(self):
        return self._members.size

    def __iter__(self):
        return iter(self._members.tolist())

    def __contains__(self, item):
        idx = np.searchsorted(self._members, item)
        return idx < self._members.size and self._members[idx] == item

    def __eq__(self, other):
        if not isinstance(other, IndexSet):
            return NotImplemented
        return (self._domain_size == other._domain_size
                and np.array_equal(self._members, other._members))

    def __repr__(self):
        return f"IndexSet({self._members.tolist()}, N={self._domain_size})"


def as_array(g):
    """
    Return the underlying complex array of a Signal, Spectrum or array-like
    """
    if isinstance(g, _ZnFunction):
        return g.values
    return _ZnFunction(g).values


def indicator(members, domain_size: int):
    """
    Signal equal to 1 on the given indices and 0 elsewhere
    """
    index_set = members if isinstance(members, IndexSet) else IndexSet(members, domain_size)
    return Signal(index_set.mask().astype(np.complex128))


def dft(f):
    """
    Unitary discrete Fourier transform, f_hat(m) = N^{-1/2} sum_x e^{-2 pi i x m / N} f(x)

    ARGS:
    f :: Signal (or array-like)

    RETURNS:
    Spectrum
    """
    return Spectrum(sfft.fft(as_array(f), norm="ortho"))


def idft(F):
    """
    Inverse of dft

    ARGS:
    F :: Spectrum (or array-like)

    RETURNS:
    Signal
    """
    return Signal(sfft.ifft(as_array(F), norm="ortho"))


def _check_exponent(p, caller):
    if p != np.inf and not p >= 1:
        raise ValueError(f"Error in FRatio.core.{caller}: exponent p must be >= 1 or inf (got {p}).")


def _abs_pnorm(mags, p):
    if mags.size == 0:
        return 0.0
    if p == np.inf:
        return float(np.max(mags))
    if p == 1:
        return float(np.sum(mags))
    if p == 2:
        return float(np.sqrt(np.sum(mags**2)))

    # Rescale by the max to keep |g|^p finite
    peak = np.max(mags)
    if peak == 0:
        return 0.0
    return float(peak * np.sum((mags / peak)**p)**(1.0 / p))


def lp_norm(g, p=2):
    """
    Counting norm (sum |g|^p)^{1/p}; max |g| for p = inf
    """
    _check_exponent(p, "lp_norm")
    return _abs_pnorm(np.abs(as_array(g)), p)


def lp_mu_norm(g, p=2):
    """
    Probability-normalised norm (N^{-1} sum |g|^p)^{1/p}
    """
    _check_exponent(p, "lp_mu_norm")
    arr = as_array(g)
    norm = _abs_pnorm(np.abs(arr), p)
    if p == np.inf:
        return norm
    return norm * arr.size**(-1.0 / p)


def restricted_lp_norm(g, E, p=2):
    """
    Counting norm over the indices in E only

    ARGS:
    g :: Signal, Spectrum or array-like of length N
    E :: IndexSet or iterable of indices in [0, N)
    p :: exponent, >= 1 or inf
    """
    _check_exponent(p, "restricted_lp_norm")
    arr = as_array(g)
    if isinstance(E, IndexSet):
        if E.domain_size != arr.size:
            raise ValueError("Error in FRatio.core.restricted_lp_norm: index set and signal disagree on N.")
        idx = E.members
    else:
        idx = np.asarray(list(E), dtype=np.int64)
        if idx.size and (idx.min() < 0 or idx.max() >= arr.size):
            raise ValueError(f"Error in FRatio.core.restricted_lp_norm: indices must lie in [0, {arr.size}).")
        idx = np.unique(idx)

    return _abs_pnorm(np.abs(arr[idx]), p)


def subgroup_indicator(p, q):
    """
    Indicator of the subgroup q Z_p = {0, q, 2q, ...} inside Z_{pq}.
    FR of this signal is sqrt(q) and FR of its transform is sqrt(p).
    """
    if p < 1 or q < 1:
        raise ValueError("Error in FRatio.core.subgroup_indicator: p and q must be positive.")
    return indicator(np.arange(p) * q, p * q)


def sparse_spectrum_signal(N, size, rng):
    """
    Inverse transform of the indicator of a uniformly random frequency set of the given size

    ARGS:
    N    :: domain size
    size :: number of frequencies, 1 <= size <= N
    rng  :: numpy Generator
    """
    if not 1 <= size <= N:
        raise ValueError("Error in FRatio.core.sparse_spectrum_signal: need 1 <= size <= N.")
    support = rng.choice(N, size=size, replace=False)
    spectrum = np.zeros(N, dtype=np.complex128)
    spectrum[support] = 1.0
    return idft(spectrum)
