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

import itertools
import math
import unittest

import numpy as np
from FRatio import chang
from FRatio import core


def _dissociated_by_enumeration(members, N):
    """Every nonzero {-1,0,1}-combination must be nonzero mod N"""
    members = list(members)
    for signs in itertools.product((-1, 0, 1), repeat=len(members)):
        if any(signs) and sum(s * m for s, m in zip(signs, members)) % N == 0:
            return False
    return True


def _span_by_enumeration(gamma, members, N):
    reachable = {sum(s * m for s, m in zip(signs, members)) % N
                 for signs in itertools.product((-1, 0, 1), repeat=len(members))}
    return all(g in reachable for g in gamma)


class DissociationTest(unittest.TestCase):
    """
    Tests for dissociation checks and the greedy construction
    """

    def test_powers_of_two(self):
        lam = chang.maximal_dissociated_subset([1, 2, 4], 64)
        self.assertEqual(lam.members.tolist(), [1, 2, 4])
        self.assertTrue(chang.is_dissociated(lam, 64))
        self.assertTrue(_dissociated_by_enumeration(lam, 64))

    def test_sum_is_rejected(self):
        lam = chang.maximal_dissociated_subset([1, 2, 3], 64)
        self.assertEqual(lam.members.tolist(), [1, 2])
        self.assertFalse(chang.is_dissociated([1, 2, 3], 64))

    def test_singleton(self):
        for m in (1, 17, 63):
            with self.subTest(m=m):
                self.assertEqual(chang.maximal_dissociated_subset([m], 64).members.tolist(), [m])
        self.assertEqual(len(chang.maximal_dissociated_subset([0], 64)), 0)

    def test_wraparound(self):
        """Sums are taken mod N"""
        self.assertFalse(chang.is_dissociated([5, 6], 11))
        self.assertTrue(chang.is_dissociated([5, 6], 12))

    def test_agrees_with_enumeration(self):
        rng = np.random.default_rng(0)
        for _ in range(200):
            N = int(rng.integers(8, 80))
            members = rng.choice(np.arange(1, N), size=int(rng.integers(1, 6)), replace=False)
            with self.subTest(N=N, members=sorted(members.tolist())):
                self.assertEqual(chang.is_dissociated(members, N),
                                 _dissociated_by_enumeration(sorted(members.tolist()), N))

    def test_signed_sum_mask(self):
        mask = chang.signed_sum_mask([1, 2], 64)
        self.assertEqual(np.flatnonzero(mask).tolist(), [0, 1, 2, 3, 61, 62, 63])

    def test_subset_sums(self):
        self.assertEqual(sorted(chang.subset_sums([1, 2], 10).tolist()), [0, 1, 2, 3])

    def test_guard(self):
        gamma = [2**i for i in range(12)]
        with self.assertRaises(ValueError) as ctx:
            chang.maximal_dissociated_subset(gamma, 2**14, guard=5)
        self.assertIn("larger eta", str(ctx.exception))
        with self.assertRaises(ValueError):
            chang.maximal_dissociated_subset(gamma, 2**14, guard=chang.HARD_CAP + 1)


class SpanTest(unittest.TestCase):

    def test_identity(self):
        self.assertTrue(chang.verify_span([3, 7], [3, 7], 64))

    def test_examples(self):
        self.assertTrue(chang.verify_span([3], [1, 2], 64))
        self.assertFalse(chang.verify_span([5], [1, 2], 64))


class BoundsTest(unittest.TestCase):
    """
    Tests for the Chang bound evaluation
    """

    def test_constant_signal(self):
        N, eta = 256, 0.5
        bounds = chang.chang_bounds(np.ones(N), eta)
        p_dual = math.log(N) / (math.log(N) - 1)
        expected = 4 * (N**(1 / p_dual) / math.sqrt(N))**2 * math.log(N)
        self.assertAlmostEqual(bounds.bound_lognorm / expected, 1.0, places=9)
        self.assertIsNone(bounds.bound_l2l1)

    def test_delta_gate(self):
        for N in (8, 64, 1000):
            with self.subTest(N=N):
                delta = np.zeros(N)
                delta[0] = 1.0
                bounds = chang.chang_bounds(delta, 0.5)
                self.assertIsNotNone(bounds.bound_l2l1)
                self.assertAlmostEqual(bounds.bound_l2l1, 4 * math.log(N), places=9)

    def test_small_domain(self):
        with self.assertRaises(ValueError):
            chang.chang_bounds(np.ones(2), 0.5)


class CertifyTest(unittest.TestCase):
    """
    End-to-end certificates on sparse-spectrum signals
    """

    def test_sparse_spectrum_corpus(self):
        rng = np.random.default_rng(1)
        certs = []
        for _ in range(100):
            N = int(rng.choice([64, 128, 256, 512]))
            size = int(rng.integers(1, 13))
            f = core.sparse_spectrum_signal(N, size, rng)
            cert = chang.certify(f, 0.5)
            certs.append(cert)

            lam = cert.lambda_set.members.tolist()
            self.assertEqual(len(cert.gamma), size)
            self.assertTrue(set(lam) <= set(cert.gamma.members.tolist()))
            self.assertTrue(cert.dissociation_verified)
            self.assertTrue(cert.span_verified)
            self.assertTrue(_dissociated_by_enumeration(lam, N))
            self.assertTrue(_span_by_enumeration(cert.gamma.members.tolist(), lam, N))

        constant = chang.empirical_constant(certs)
        self.assertTrue(math.isfinite(constant))
        self.assertGreater(constant, 0)

    def test_empty_corpus(self):
        with self.assertRaises(ValueError):
            chang.empirical_constant([])


if __name__ == '__main__':
    unittest.main()
