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

import os
import tempfile
import unittest

import numpy as np
import pandas as pd
from FRatio import core
from FRatio import series as serMod


FIXTURES = os.path.join(os.path.dirname(__file__), "fixtures")


class SeriesFileTest(unittest.TestCase):
    """
    Tests for CSV series ingestion
    """

    def _write(self, tmpdir, text, name="series.csv"):
        path = os.path.join(tmpdir, name)
        with open(path, 'w') as f:
            f.write(text)
        return path

    def test_subgroup_fixture(self):
        loaded = serMod.SeriesFile(os.path.join(FIXTURES, "subgroup_15.csv")).load()
        self.assertEqual(loaded.domain_size, 15)
        self.assertTrue(loaded.complete)
        self.assertEqual(np.flatnonzero(loaded.values.values).tolist(), [0, 3, 6, 9, 12])
        self.assertEqual(loaded.preprocessing["column"], "value")
        self.assertEqual(loaded.preprocessing["detrend"], "none")

    def test_missing_values(self):
        loaded = serMod.SeriesFile(os.path.join(FIXTURES, "gappy_cosine_16.csv")).load()
        self.assertFalse(loaded.complete)
        self.assertEqual(loaded.observed.complement().members.tolist(), [2, 6, 9])
        self.assertEqual(loaded.values.values[2], 0)
        self.assertEqual(loaded.preprocessing["observed"], 13)

    def test_parse_error_names_line(self):
        with self.assertRaises(ValueError) as ctx:
            serMod.SeriesFile(os.path.join(FIXTURES, "bad_value.csv")).load()
        self.assertIn("line 4", str(ctx.exception))

    def test_missing_file(self):
        with self.assertRaises(IOError):
            serMod.SeriesFile("/nonexistent/series.csv").load()

    def test_column_selection(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = self._write(tmpdir, "a,b,c\n1,2,3\n4,5,6\n")
            self.assertEqual(serMod.SeriesFile(path).load().values.values.real.tolist(), [3.0, 6.0])
            self.assertEqual(serMod.SeriesFile(path, column="a").load().values.values.real.tolist(), [1.0, 4.0])
            self.assertEqual(serMod.SeriesFile(path, column="1").load().values.values.real.tolist(), [2.0, 5.0])
            with self.assertRaises(ValueError):
                serMod.SeriesFile(path, column="z").load()

    def test_no_header(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = self._write(tmpdir, "1.5\n2.5\n3.5\n")
            loaded = serMod.SeriesFile(path, has_header=False).load()
            self.assertEqual(loaded.values.values.real.tolist(), [1.5, 2.5, 3.5])

    def test_imaginary_column(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = self._write(tmpdir, "re,im\n1,2\n3,-4\n")
            loaded = serMod.SeriesFile(path, column="re", imag_column="im").load()
            self.assertEqual(loaded.values.values.tolist(), [1 + 2j, 3 - 4j])

    def test_observed_column(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = self._write(tmpdir, "value,observed\n1,1\n7,0\n3,1\n")
            loaded = serMod.SeriesFile(path).load()
            self.assertEqual(loaded.observed.members.tolist(), [0, 2])
            self.assertEqual(loaded.values.values.real.tolist(), [1.0, 0.0, 3.0])

            path = self._write(tmpdir, "value,observed\n1,1\n,1\n3,1\n", name="clash.csv")
            with self.assertRaises(ValueError) as ctx:
                serMod.SeriesFile(path).load()
            self.assertIn("line 3", str(ctx.exception))

    def test_infinite_rejected(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = self._write(tmpdir, "value\n1\ninf\n")
            with self.assertRaises(ValueError):
                serMod.SeriesFile(path).load()

    def test_detrend(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = self._write(tmpdir, "value\n" + "\n".join(str(2.0 + 0.5 * x) for x in range(10)) + "\n")
            linear = serMod.SeriesFile(path).load(detrend="linear")
            self.assertTrue(np.allclose(linear.values.values, 0.0, atol=1e-9))
            mean = serMod.SeriesFile(path).load(detrend="mean")
            self.assertAlmostEqual(float(np.sum(mean.values.values.real)), 0.0, places=9)
            self.assertEqual(mean.preprocessing["detrend"], "mean")
            with self.assertRaises(ValueError):
                serMod.SeriesFile(path).load(detrend="quadratic")


class WriterTest(unittest.TestCase):
    """
    Tests for the CSV writers
    """

    def test_series_roundtrip(self):
        rng = np.random.default_rng(0)
        values = rng.standard_normal(20) + 1j * rng.standard_normal(20)
        observed = core.IndexSet(range(0, 20, 2), 20)
        with tempfile.TemporaryDirectory() as tmpdir:
            path = os.path.join(tmpdir, "series.csv")
            serMod.write_series(path, values, observed)
            loaded = serMod.SeriesFile(path).load()
            self.assertEqual(loaded.observed, observed)
            self.assertTrue(np.array_equal(loaded.values.values[observed.members], values[observed.members]))

    def test_reconstruction_columns(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = os.path.join(tmpdir, "recon.csv")
            serMod.write_reconstruction(path, np.array([1.0, 2.0]), np.array([0.5, 2.0]))
            frame = pd.read_csv(path)
            self.assertEqual(frame.columns.tolist(),
                             ["index", "original_re", "original_im", "reconstruction_re",
                              "reconstruction_im", "residual_re", "residual_im"])
            self.assertEqual(frame["residual_re"].tolist(), [0.5, 0.0])

    def test_imputed_columns(self):
        with tempfile.TemporaryDirectory() as tmpdir:
            path = os.path.join(tmpdir, "imputed.csv")
            serMod.write_imputed(path, np.array([1.0, 2.0, 3.0]), core.IndexSet([1], 3))
            frame = pd.read_csv(path)
            self.assertEqual(frame["was_observed"].tolist(), [0, 1, 0])
            self.assertEqual(frame["imputed_re"].tolist(), [1.0, 2.0, 3.0])


if __name__ == '__main__':
    unittest.main()
