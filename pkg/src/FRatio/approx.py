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
import struct
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from . import core
from . import experiment as expMod


logger = logging.getLogger(__name__)

# N, k, M, integer bits per component
HEADER_FORMAT = "<IIHB"
HEADER_BITS = 8 * struct.calcsize(HEADER_FORMAT)
DEFAULT_MAX_ATTEMPTS = 50


class TrigPoly:
    """
    Class encapsulating a trigonometric polynomial P(x) = sum_i c_i exp(2 pi i m_i x / N)
    """

    def __init__(self,
                 frequencies,
                 coefficients,
                 domain_size: int,
                 ):
        """
        Initialise TrigPoly object. Frequencies may repeat (draws with replacement).

        ARGS:
        frequencies  :: integers in [0, N)
        coefficients :: complex coefficient per frequency
        domain_size  :: N
        """
        freqs = np.asarray(frequencies, dtype=np.int64).reshape(-1)
        coefs = np.asarray(coefficients, dtype=np.complex128).reshape(-1)
        if freqs.size != coefs.size:
            raise ValueError("Error in FRatio.approx.TrigPoly: frequencies and coefficients differ in length.")
        if domain_size < 1:
            raise ValueError("Error in FRatio.approx.TrigPoly: domain size must be at least 1.")
        if freqs.size and (freqs.min() < 0 or freqs.max() >= domain_size):
            raise ValueError(f"Error in FRatio.approx.TrigPoly: frequencies must lie in [0, {domain_size}).")

        freqs.setflags(write=False)
        coefs.setflags(write=False)
        self.frequencies = freqs
        self.coefficients = coefs
        self.domain_size = int(domain_size)


    @classmethod
    def zero(cls, domain_size):
        return cls([], [], domain_size)

    @property
    def terms(self):
        return list(zip(self.frequencies.tolist(), self.coefficients.tolist()))

    @property
    def degree(self):
        """
        Number of distinct frequencies
        """
        return int(np.unique(self.frequencies).size)

    def __len__(self):
        return self.frequencies.size

    def dense_coefficients(self):
        """
        Length-N array with duplicate frequencies summed
        """
        dense = np.zeros(self.domain_size, dtype=np.complex128)
        np.add.at(dense, self.frequencies, self.coefficients)
        return dense

    def canonicalize(self):
        """
        Equivalent polynomial with distinct, ascending frequencies
        """
        freqs = np.unique(self.frequencies)
        return TrigPoly(freqs, self.dense_coefficients()[freqs], self.domain_size)

    def spectrum(self):
        """
        Spectrum whose inverse transform is P (F(m) = sqrt(N) c_m)
        """
        return core.Spectrum(math.sqrt(self.domain_size) * self.dense_coefficients())

    def eval(self):
        """
        Evaluate P on all of Z_N
        """
        # Unscaled inverse FFT is exactly sum_m c_m exp(2 pi i m x / N)
        return core.Signal(sfft.ifft(self.dense_coefficients(), norm="forward"))

    def __repr__(self):
        return f"TrigPoly(terms={len(self)}, N={self.domain_size})"


def eval(P):
    """
    Materialise a TrigPoly on Z_N
    """
    return P.eval()


@dataclass
class ApproxResult:
    """
    Outcome of a randomised approximation with retries
    """
    poly: TrigPoly
    norm: str
    k: int
    threshold: float
    error: float
    target: float
    attempts: int
    failed: bool
    seed: int


def _strict_degree(threshold):
    """
    Smallest integer k with k > threshold. Thresholds within 1e-9 (relative) of an
    integer are snapped to it first so that exact formulas are not lost to rounding.
    """
    nearest = round(threshold)
    if abs(threshold - nearest) <= 1e-9 * max(1.0, abs(threshold)):
        threshold = nearest
    return int(math.floor(threshold)) + 1


class _FrequencySampler:
    """
    Inverse-CDF sampler of m with probability |F(m)| / ||F||_1
    """

    def __init__(self, spectrum, caller):
        mags = np.abs(core.as_array(spectrum))
        total = float(np.sum(mags))
        if total == 0:
            raise ValueError(f"Error in FRatio.approx.{caller}: zero spectrum cannot be sampled.")

        cdf = np.cumsum(mags) / total
        cdf[-1] = 1.0
        self.cdf = cdf
        self.l1 = total
        self.last = int(np.flatnonzero(mags)[-1])

    def draw(self, rng, size=None):
        u = rng.random(size)
        # First index with cdf > u: ties go to the lowest index, zero masses are skipped.
        # Rounding can leave u at or past the last real mass, so never step beyond it
        return np.minimum(np.searchsorted(self.cdf, u, side="right"), self.last)


def sample_frequency(F, rng_seed):
    """
    Draw m with probability |F(m)| / ||F||_1

    ARGS:
    F        :: Spectrum
    rng_seed :: integer seed or numpy Generator

    RETURNS:
    int
    """
    sampler = _FrequencySampler(F, "sample_frequency")
    return int(sampler.draw(expMod.make_rng(rng_seed)))


def random_approximant(f, k, rng_seed):
    """
    Empirical mean of k i.i.d. copies of
      Z(x) = ||f_hat||_1 sgn(f_hat(m)) N^{-1/2} exp(2 pi i m x / N),
    m drawn with probability |f_hat(m)| / ||f_hat||_1. E[P(x)] = f(x).

    ARGS:
    f        :: Signal
    k        :: number of draws, >= 1
    rng_seed :: integer seed or numpy Generator

    RETURNS:
    TrigPoly with k (possibly repeated) terms
    """
    if int(k) < 1:
        raise ValueError(f"Error in FRatio.approx.random_approximant: k must be >= 1 (got {k}).")
    k = int(k)

    spectrum = core.dft(f).values
    N = spectrum.size
    sampler = _FrequencySampler(spectrum, "random_approximant")
    freqs = sampler.draw(expMod.make_rng(rng_seed), k)

    picked = spectrum[freqs]
    coefs = sampler.l1 * (picked / np.abs(picked)) / (math.sqrt(N) * k)

    return TrigPoly(freqs, coefs, N)


def expected_l2_error(f, k):
    """
    E ||f - P||_2^2 = (||f_hat||_1^2 - ||f||_2^2) / k for the random approximant
    """
    spectrum = core.dft(f)
    return (core.lp_norm(spectrum, 1)**2 - core.lp_norm(f, 2)**2) / k


def expected_l1_error_bound(f, k):
    """
    Upper bound 2 sqrt(8 pi N) ||f_hat||_1 / sqrt(k) on E ||f - P||_1
    """
    spectrum = core.dft(f)
    return 2.0 * math.sqrt(8.0 * math.pi * spectrum.domain_size) * core.lp_norm(spectrum, 1) / math.sqrt(k)


def l2_degree_threshold(f, eta):
    spectrum = core.dft(f).values
    fr = core.lp_norm(spectrum, 1) / core.lp_norm(spectrum, 2)
    return (fr**2 - 1.0) / eta**2


def linf_degree_threshold(f, eta):
    arr = core.as_array(f)
    N = arr.size
    l1_mu_hat = core.lp_mu_norm(core.dft(arr), 1)
    return 8.0 * (l1_mu_hat / core.lp_norm(arr, np.inf))**2 * N * math.log(4 * N) / eta**2


def l1_degree_threshold(f, eta):
    arr = core.as_array(f)
    l1_hat = core.lp_norm(core.dft(arr), 1)
    return 32.0 * math.pi * (l1_hat / core.lp_norm(arr, 1))**2 * arr.size / eta**2


_NORMS = {
    "l2": (2, l2_degree_threshold),
    "linf": (np.inf, linf_degree_threshold),
    "l1": (1, l1_degree_threshold),
}


def _approx_with_retries(f, eta, rng_seed, max_attempts, norm):
    caller = f"approx_{norm}"
    if not 0 < eta < 1:
        raise ValueError(f"Error in FRatio.approx.{caller}: eta must lie in (0, 1) (got {eta}).")
    if max_attempts < 1:
        raise ValueError(f"Error in FRatio.approx.{caller}: max_attempts must be >= 1.")

    arr = core.as_array(f)
    if core.lp_norm(arr, 2) == 0:
        raise ValueError(f"Error in FRatio.approx.{caller}: zero signal cannot be approximated.")

    p, threshold_func = _NORMS[norm]
    threshold = threshold_func(arr, eta)
    k = _strict_degree(threshold)
    target = eta * core.lp_norm(arr, p)

    best = None
    for attempt in range(max_attempts):
        poly = random_approximant(arr, k, expMod.make_rng(rng_seed, attempt))
        error = core.lp_norm(arr - poly.eval().values, p)
        if best is None or error < best[1]:
            best = (poly, error, attempt + 1)
        if error < target:
            logger.debug("%s: success after %d attempt(s), k=%d", caller, attempt + 1, k)
            return ApproxResult(poly=poly, norm=norm, k=k, threshold=threshold,
                                error=error, target=target, attempts=attempt + 1,
                                failed=False, seed=rng_seed)

    logger.debug("%s: no success in %d attempts, k=%d", caller, max_attempts, k)
    return ApproxResult(poly=best[0], norm=norm, k=k, threshold=threshold,
                        error=best[1], target=target, attempts=max_attempts,
                        failed=True, seed=rng_seed)


def approx_l2(f, eta, rng_seed, max_attempts=DEFAULT_MAX_ATTEMPTS):
    """
    Random approximant with ||f - P||_2 < eta ||f||_2, k = floor((FR^2 - 1)/eta^2) + 1.
    Attempt i uses the child seed (rng_seed, i); the first success is returned, else
    the best attempt with failed=True.
    """
    return _approx_with_retries(f, eta, rng_seed, max_attempts, "l2")


def approx_linf(f, eta, rng_seed, max_attempts=DEFAULT_MAX_ATTEMPTS):
    """
    Random approximant with ||f - P||_inf < eta ||f||_inf,
    k > 8 (||f_hat||_{L1(mu)} / ||f||_inf)^2 N log(4N) / eta^2
    """
    return _approx_with_retries(f, eta, rng_seed, max_attempts, "linf")


def approx_l1(f, eta, rng_seed, max_attempts=DEFAULT_MAX_ATTEMPTS):
    """
    Random approximant with ||f - P||_1 < eta ||f||_1,
    k > 32 pi (||f_hat||_1 / ||f||_1)^2 N / eta^2
    """
    return _approx_with_retries(f, eta, rng_seed, max_attempts, "l1")


def large_spectrum(f, eta):
    """
    Large spectrum {m : |f_hat(m)| >= eta ||f||_{L2(mu)}}, of size at most FR(f) sqrt(N) / eta

    ARGS:
    f   :: Signal
    eta :: threshold level, > 0

    RETURNS:
    IndexSet
    """
    if not eta > 0:
        raise ValueError(f"Error in FRatio.approx.large_spectrum: eta must be > 0 (got {eta}).")

    arr = core.as_array(f)
    N = arr.size
    l2 = core.lp_norm(arr, 2)
    if l2 == 0:
        raise ValueError("Error in FRatio.approx.large_spectrum: zero signal has no large spectrum.")

    mags = np.abs(core.dft(arr).values)
    level = eta * l2 / math.sqrt(N)
    gamma = core.IndexSet(np.flatnonzero(mags >= level * (1.0 - 1e-12)), N)

    fr = float(np.sum(mags)) / l2
    bound = fr * math.sqrt(N) / eta
    if len(gamma) > bound * (1.0 + 1e-9):
        raise AssertionError(f"Error in FRatio.approx.large_spectrum: |Gamma| = {len(gamma)} "
                             f"exceeds FR sqrt(N)/eta = {bound}.")

    return gamma


def spectral_truncation(f, eta):
    """
    Deterministic approximant P = N^{-1/2} sum_{m in Gamma} f_hat(m) exp(2 pi i m x / N)
    over the large spectrum; ||f - P||_2 <= eta ||f||_2.
    """
    arr = core.as_array(f)
    N = arr.size
    gamma = large_spectrum(arr, eta)
    spectrum = core.dft(arr).values
    poly = TrigPoly(gamma.members, spectrum[gamma.members] / math.sqrt(N), N)

    l2 = core.lp_norm(arr, 2)
    error = core.lp_norm(arr - poly.eval().values, 2)
    if error > eta * l2 + 1e-9 * l2:
        raise AssertionError(f"Error in FRatio.approx.spectral_truncation: error {error} "
                             f"exceeds eta ||f||_2 = {eta * l2}.")

    return poly


def _bit_planes(values, width):
    """
    (len(values), width) uint8 array of the low `width` bits of each value, least
    significant first. Negative values contribute their two's complement bits.
    """
    raw = np.asarray(values, dtype=np.int64).reshape(-1).view(np.uint64)
    shifts = np.arange(width, dtype=np.uint64)
    return ((raw[:, None] >> shifts) & np.uint64(1)).astype(np.uint8)


def _from_bit_planes(bits, signed):
    width = bits.shape[1]
    if width == 0:
        return np.zeros(bits.shape[0], dtype=np.int64)
    weights = np.left_shift(np.uint64(1), np.arange(width, dtype=np.uint64))
    raw = (bits.astype(np.uint64) * weights).sum(axis=1, dtype=np.uint64)
    if not signed:
        return raw.astype(np.int64)
    # Sign-extend from `width` bits
    pad = np.uint64(64 - width)
    return (raw << pad).view(np.int64) >> pad.astype(np.int64)


class QuantizedPoly:
    """
    Trigonometric polynomial with coefficients truncated to M fractional bits per
    real component, stored as the integers trunc(c * 2^M)
    """

    def __init__(self,
                 frequencies,
                 re_ints,
                 im_ints,
                 m_bits: int,
                 domain_size: int,
                 ):
        self.frequencies = np.asarray(frequencies, dtype=np.int64).reshape(-1)
        self.re_ints = np.asarray(re_ints, dtype=np.int64).reshape(-1)
        self.im_ints = np.asarray(im_ints, dtype=np.int64).reshape(-1)
        self.m_bits = int(m_bits)
        self.domain_size = int(domain_size)
        if not (self.frequencies.size == self.re_ints.size == self.im_ints.size):
            raise ValueError("Error in FRatio.approx.QuantizedPoly: term arrays differ in length.")
        if not 0 <= self.m_bits < 2**16:
            raise ValueError("Error in FRatio.approx.QuantizedPoly: M must fit in 16 bits.")


    @property
    def k(self):
        return self.frequencies.size

    @property
    def coefficients(self):
        scale = 2.0**-self.m_bits
        return self.re_ints * scale + 1j * (self.im_ints * scale)

    @property
    def terms(self):
        return list(zip(self.frequencies.tolist(), self.coefficients.tolist()))

    @property
    def freq_bits(self):
        return max(0, math.ceil(math.log2(self.domain_size)))

    @property
    def integer_bits(self):
        """
        Bits needed for the integer part of the largest component
        """
        if self.k == 0:
            return 0
        peak = int(max(np.max(np.abs(self.re_ints)), np.max(np.abs(self.im_ints))))
        return (peak >> self.m_bits).bit_length()

    @property
    def bit_length(self):
        """
        Header plus, per term, the frequency and two signed fixed-point components
        """
        per_term = self.freq_bits + 2 * (self.m_bits + self.integer_bits + 1)
        return HEADER_BITS + self.k * per_term

    def decode(self):
        return TrigPoly(self.frequencies, self.coefficients, self.domain_size)

    def to_bytes(self):
        """
        Serialise: header <u32 N, u32 k, u16 M, u8 integer bits>, then one little-endian
        bit stream holding, per term, the frequency in ceil(log2 N) bits and the two
        components as (M + integer bits + 1)-bit two's complement, zero-padded to a
        whole byte at the end. len(to_bytes()) * 8 - bit_length is at most 7.
        """
        width = self.m_bits + self.integer_bits + 1
        if width > 64:
            raise ValueError("Error in FRatio.approx.QuantizedPoly.to_bytes: components wider than 64 bits.")
        rows = np.hstack([_bit_planes(self.frequencies, self.freq_bits),
                          _bit_planes(self.re_ints, width),
                          _bit_planes(self.im_ints, width)])
        body = np.packbits(rows.reshape(-1), bitorder="little").tobytes()
        return struct.pack(HEADER_FORMAT, self.domain_size, self.k, self.m_bits, self.integer_bits) + body

    @classmethod
    def from_bytes(cls, payload: bytes):
        head = struct.calcsize(HEADER_FORMAT)
        if len(payload) < head:
            raise ValueError("Error in FRatio.approx.QuantizedPoly.from_bytes: truncated header.")
        N, k, M, int_bits = struct.unpack(HEADER_FORMAT, payload[:head])
        if N < 1:
            raise ValueError("Error in FRatio.approx.QuantizedPoly.from_bytes: domain size must be >= 1.")

        freq_bits = max(0, math.ceil(math.log2(N)))
        width = M + int_bits + 1
        if width > 64:
            raise ValueError("Error in FRatio.approx.QuantizedPoly.from_bytes: components wider than 64 bits.")
        per_term = freq_bits + 2 * width
        expected = head + math.ceil(k * per_term / 8)
        if len(payload) != expected:
            raise ValueError("Error in FRatio.approx.QuantizedPoly.from_bytes: "
                             f"expected {expected} bytes, got {len(payload)}.")

        bits = np.unpackbits(np.frombuffer(payload[head:], dtype=np.uint8), bitorder="little")
        if np.any(bits[k * per_term:]):
            raise ValueError("Error in FRatio.approx.QuantizedPoly.from_bytes: nonzero padding bits.")
        rows = bits[:k * per_term].reshape(k, per_term)

        quantized = cls(_from_bit_planes(rows[:, :freq_bits], signed=False),
                        _from_bit_planes(rows[:, freq_bits:freq_bits + width], signed=True),
                        _from_bit_planes(rows[:, freq_bits + width:], signed=True),
                        M, N)
        if quantized.integer_bits != int_bits:
            raise ValueError("Error in FRatio.approx.QuantizedPoly.from_bytes: header integer bits "
                             f"{int_bits} do not match the coefficients ({quantized.integer_bits}).")

        return quantized

    def __eq__(self, other):
        if not isinstance(other, QuantizedPoly):
            return NotImplemented
        return (self.domain_size == other.domain_size and self.m_bits == other.m_bits
                and np.array_equal(self.frequencies, other.frequencies)
                and np.array_equal(self.re_ints, other.re_ints)
                and np.array_equal(self.im_ints, other.im_ints))


def quantization_bits(k, N, f_l2, eps):
    """
    M = ceil(log2(sqrt(2k) sqrt(N) / (eps ||f||_2))), floored at 0. The factor sqrt(2)
    covers truncating both the real and the imaginary part.
    """
    if k == 0:
        return 0
    return max(0, math.ceil(math.log2(math.sqrt(2 * k) * math.sqrt(N) / (eps * f_l2))))


def rate_distortion_bound_shape(k, N, eps):
    """
    k log2((1 + eps) N sqrt(k) / eps), the description-length shape without machine constants
    """
    if k == 0:
        return 0.0
    return k * math.log2((1.0 + eps) * N * math.sqrt(k) / eps)


def rate_distortion_encode(P, f_l2, eps):
    """
    Quantise the coefficients of P so that ||P - decode(encode(P))||_2 <= eps ||f||_2

    ARGS:
    P    :: TrigPoly (canonicalised here if it has repeated frequencies)
    f_l2 :: ||f||_2 of the signal P approximates
    eps  :: relative distortion, > 0

    RETURNS:
    QuantizedPoly
    """
    if not eps > 0:
        raise ValueError(f"Error in FRatio.approx.rate_distortion_encode: eps must be > 0 (got {eps}).")
    if not f_l2 > 0:
        raise ValueError(f"Error in FRatio.approx.rate_distortion_encode: ||f||_2 must be > 0 (got {f_l2}).")

    P = P.canonicalize()
    N = P.domain_size
    M = quantization_bits(len(P), N, f_l2, eps)

    scaled = P.coefficients * 2.0**M
    if len(P) and max(np.max(np.abs(scaled.real)), np.max(np.abs(scaled.imag))) >= 2.0**63:
        raise ValueError("Error in FRatio.approx.rate_distortion_encode: coefficients too large for int64 fixed point.")

    quantized = QuantizedPoly(P.frequencies,
                              np.trunc(scaled.real).astype(np.int64),
                              np.trunc(scaled.imag).astype(np.int64),
                              M, N)

    distortion = core.lp_norm(P.eval().values - quantized.decode().eval().values, 2)
    if distortion > eps * f_l2 * (1.0 + 1e-9):
        raise AssertionError(f"Error in FRatio.approx.rate_distortion_encode: distortion {distortion} "
                             f"exceeds eps ||f||_2 = {eps * f_l2}.")

    return quantized
