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
import unittest

import numpy as np
from FRatio import core
from FRatio import fr


def _random_signal(rng, N):
    return rng.standard_normal(N) + 1j * rng.standard_normal(N)


class FourierRatioTest(unittest.TestCase):
    """
    Tests for FR, bi-FR, coherence and numerical sparsity
    """

    def test_extremes(self):
        """Constant signal has FR 1 and the delta has FR sqrt(N)"""
        self.assertAlmostEqual(fr.fourier_ratio(np.ones(100)), 1.0, places=10)
        delta = np.zeros(100)
        delta[0] = 1.0
        self.assertAlmostEqual(fr.fourier_ratio(delta), 10.0, places=10)

    def test_range(self):
        """1 <= FR <= sqrt(N) over 10^4 random signals per length"""
        rng = np.random.default_rng(0)
        for N in (4, 16, 64, 256, 1024):
            with self.subTest(N=N):
                values = np.array([fr.fourier_ratio(_random_signal(rng, N)) for _ in range(10000)])
                self.assertGreaterEqual(values.min(), 1 - 1e-9)
                self.assertLessEqual(values.max(), math.sqrt(N) + 1e-9)

    def test_subgroup_examples(self):
        """FR(1_{qZ_p}) = sqrt(q) and the transform has FR sqrt(p)"""
        for p, q in ((5, 3), (7, 5), (11, 3)):
            with self.subTest(p=p, q=q):
                f = core.subgroup_indicator(p, q)
                bi = fr.bi_fourier_ratio(f)
                self.assertAlmostEqual(bi.fr, math.sqrt(q), places=9)
                self.assertAlmostEqual(bi.fr_hat, math.sqrt(p), places=9)
                self.assertAlmostEqual(bi.bi_fr, min(math.sqrt(p), math.sqrt(q)), places=9)

    def test_bi_fr_constant(self):
        bi = fr.bi_fourier_ratio(np.ones(16))
        self.assertAlmostEqual(bi.bi_fr, 1.0, places=10)
        self.assertAlmostEqual(bi.fr, 1.0, places=10)
        self.assertAlmostEqual(bi.fr_hat, 4.0, places=10)

    def test_random_set_signal(self):
        """Inverse transform of 1_S has FR sqrt|S|"""
        rng = np.random.default_rng(11)
        f = core.sparse_spectrum_signal(256, 9, rng)
        self.assertAlmostEqual(fr.fourier_ratio(f), 3.0, places=9)
        self.assertLessEqual(fr.bi_fourier_ratio(f).bi_fr, 3.0 + 1e-9)

    def test_scale_invariance(self):
        rng = np.random.default_rng(2)
        f = _random_signal(rng, 64)
        alpha = 3.7 - 2.1j
        self.assertAlmostEqual(fr.fourier_ratio(alpha * f) / fr.fourier_ratio(f), 1.0, places=10)

    def test_zero_signal(self):
        with self.assertRaises(ValueError) as ctx:
            fr.fourier_ratio(np.zeros(8))
        self.assertIn("zero signal has no Fourier ratio", str(ctx.exception))

    def test_coherence(self):
        self.assertAlmostEqual(fr.coherence(np.ones(10)), 1.0)
        delta = np.zeros(50)
        delta[3] = 2.0
        self.assertAlmostEqual(fr.coherence(delta), 50.0)

        rng = np.random.default_rng(5)
        unimodular = np.exp(2j * np.pi * rng.random(64))
        self.assertAlmostEqual(fr.coherence(unimodular), 1.0, places=10)

    def test_coherence_below_fr_squared(self):
        rng = np.random.default_rng(6)
        for _ in range(100):
            f = _random_signal(rng, 32)
            self.assertLessEqual(fr.coherence(f), fr.fourier_ratio(f)**2 + 1e-9)

    def test_numerical_sparsity(self):
        self.assertAlmostEqual(fr.numerical_sparsity([0, 0, 5, 0]), 1.0)
        self.assertAlmostEqual(fr.numerical_sparsity([1, -1, 1j, 0, 0]), 3.0)
        f = core.subgroup_indicator(5, 3)
        self.assertAlmostEqual(fr.numerical_sparsity(core.dft(f)), 3.0, places=9)

        rng = np.random.default_rng(8)
        g = _random_signal(rng, 40)
        self.assertAlmostEqual(fr.numerical_sparsity(core.dft(g)) / fr.fourier_ratio(g)**2, 1.0, places=9)

    def test_report(self):
        report = fr.fr_report(core.subgroup_indicator(5, 3))
        self.assertEqual(report.domain_size, 15)
        self.assertAlmostEqual(report.fr, math.sqrt(3), places=9)
        self.assertAlmostEqual(report.l2_norm, math.sqrt(5), places=9)
        self.assertAlmostEqual(report.numerical_sparsity, 3.0, places=9)
        self.assertIn("coherence", report.to_dict())


class UncertaintyTest(unittest.TestCase):
    """
    Tests for concentration levels and the uncertainty bounds
    """

    def test_levels(self):
        f = np.array([1.0, 0.0, 2.0, 0.0])
        levels = fr.concentration_levels(f, [0, 2], core.IndexSet.full(4))
        self.assertAlmostEqual(levels.a, 0.0)
        self.assertAlmostEqual(levels.b, 0.0)

    def test_levels_brute_force(self):
        rng = np.random.default_rng(9)
        N = 32
        f = _random_signal(rng, N)
        E = rng.choice(N, 10, replace=False)
        S = rng.choice(N, 12, replace=False)
        levels = fr.concentration_levels(f, E, S)

        spectrum = np.fft.fft(f) / math.sqrt(N)
        Ec = np.setdiff1d(np.arange(N), E)
        Sc = np.setdiff1d(np.arange(N), S)
        a = math.sqrt(np.sum(np.abs(f[Ec])**2)) / np.linalg.norm(f)
        b = np.sum(np.abs(spectrum[Sc])) / np.sum(np.abs(spectrum))
        self.assertAlmostEqual(levels.a, a, places=10)
        self.assertAlmostEqual(levels.b, b, places=10)

    def test_subgroup_equality(self):
        """Both bounds are met with equality on 1_{qZ_p}"""
        p, q = 5, 3
        f = core.subgroup_indicator(p, q)
        E = np.arange(p) * q
        S = np.arange(q) * p
        check = fr.uncertainty_check(f, E, S)
        self.assertTrue(check.holds)
        self.assertTrue(check.classical_holds)
        self.assertAlmostEqual(check.lower, 3.0, places=9)
        self.assertAlmostEqual(check.fr_sq, 3.0, places=9)
        self.assertAlmostEqual(check.upper, 3.0, places=9)

    def test_constant(self):
        check = fr.uncertainty_check(np.ones(12), core.IndexSet.full(12), [0])
        self.assertAlmostEqual(check.lower, 1.0, places=9)
        self.assertAlmostEqual(check.upper, 1.0, places=9)
        self.assertTrue(check.holds)

    def test_random_inputs_hold(self):
        rng = np.random.default_rng(10)
        N = 64
        for _ in range(1000):
            f = _random_signal(rng, N)
            E = rng.choice(N, rng.integers(1, N + 1), replace=False)
            S = rng.choice(N, rng.integers(0, N + 1), replace=False)
            check = fr.uncertainty_check(f, E, S)
            self.assertTrue(check.holds)
            self.assertTrue(check.classical_holds)

    def test_empty_time_set(self):
        with self.assertRaises(ValueError):
            fr.uncertainty_check(np.ones(4), [], [0])

    def test_vacuous_upper(self):
        """S missing all of the spectrum leaves the upper bound vacuous"""
        check = fr.uncertainty_check(np.ones(8), core.IndexSet.full(8), [3])
        self.assertGreater(check.upper, 1e12)
        self.assertTrue(check.holds)

    def test_l1_l2_concentration(self):
        b1, b2 = fr.l1_l2_concentration(np.ones(8), [0])
        self.assertAlmostEqual(b1, 0.0)
        self.assertAlmostEqual(b2, 0.0)

    def test_l2_counterexample(self):
        """L2 concentration alone does not bound FR"""
        N, b = 4096, 0.5
        S = [0, 1]
        f = fr.l2_concentration_counterexample(N, S, b)
        spectrum = core.dft(f).values
        np.testing.assert_allclose(spectrum[S], math.sqrt(1 - b**2) / math.sqrt(2), atol=1e-12)
        np.testing.assert_allclose(spectrum[2:], b / math.sqrt(N - 2), atol=1e-12)
        _, b2 = fr.l1_l2_concentration(f, S)
        self.assertAlmostEqual(b2, b, places=9)

        expected = b * math.sqrt(N - 2) + math.sqrt(1 - b**2) * math.sqrt(2)
        self.assertAlmostEqual(fr.fourier_ratio(f), expected, places=6)
        self.assertGreater(fr.fourier_ratio(f)**2, len(S) / (1 - b)**2)


class BoundTest(unittest.TestCase):
    """
    Tests for the support and statistical-query bounds
    """

    def test_support_bound(self):
        f = core.subgroup_indicator(5, 3)
        self.assertAlmostEqual(fr.support_lower_bound(f), math.sqrt(3), places=12)
        self.assertAlmostEqual(fr.support_lower_bound(np.ones(49)), 1.0)

    def test_support_bound_below_fr(self):
        rng = np.random.default_rng(12)
        for _ in range(100):
            f = np.zeros(128, dtype=complex)
            f[rng.choice(128, 8, replace=False)] = _random_signal(rng, 8)
            self.assertAlmostEqual(fr.support_lower_bound(f), 4.0)
            self.assertGreaterEqual(fr.fourier_ratio(f), 4.0 - 1e-9)

    def test_support_threshold(self):
        f = np.array([1.0, 1e-6, 0.0, 1.0])
        self.assertAlmostEqual(fr.support_lower_bound(f), math.sqrt(4 / 3))
        self.assertAlmostEqual(fr.support_lower_bound(f, threshold=1e-3), math.sqrt(2))

    def test_sq_dimension_closed_form(self):
        """r = 1, N = 2 gives 144 log2(e/6)"""
        self.assertAlmostEqual(fr.sq_dimension_bound(1, 2), 144 * math.log2(math.e / 6), places=9)

    def test_sq_dimension_monotone(self):
        values = [fr.sq_dimension_bound(2, N) for N in (10, 100, 1000, 10**6)]
        self.assertEqual(values, sorted(values))

        values = [fr.sq_dimension_bound(r, 10**6) for r in (1, 2, 3, 4, 5)]
        self.assertEqual(values, sorted(values))

    def test_sq_dimension_rejects_small_r(self):
        with self.assertRaises(ValueError):
            fr.sq_dimension_bound(0.5, 10)


if __name__ == '__main__':
    unittest.main()
