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
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
import pandas as pd

from . import core


MISSING_TOKENS = {"", "nan"}
RESERVED_COLUMNS = {"index", "observed", "value_im", "imag"}
DETREND_CHOICES = ("none", "mean", "linear")


@dataclass
class LoadedSeries:
    """
    Parsed series: values (missing entries set to 0), observation mask and the
    record of preprocessing applied
    """
    values: core.Signal
    observed: core.IndexSet
    preprocessing: dict = field(default_factory=dict)

    @property
    def domain_size(self):
        return self.values.domain_size

    @property
    def complete(self):
        return len(self.observed) == self.domain_size


@dataclass
class SeriesFile:
    """
    CSV time series. The value column is chosen by name or position; an optional
    imaginary column and an `observed` 0/1 column are read when present.
    """
    path: str
    column: Optional[Union[str, int]] = None
    has_header: bool = True
    imag_column: Optional[Union[str, int]] = None
    observed_column: str = "observed"

    def _read_frame(self):
        if not os.path.isfile(self.path):
            raise IOError(f"Error in FRatio.series.SeriesFile: {self.path}: File not found.")
        try:
            frame = pd.read_csv(self.path,
                                header=0 if self.has_header else None,
                                dtype=str,
                                keep_default_na=False,
                                skipinitialspace=True)
        except (pd.errors.ParserError, pd.errors.EmptyDataError, UnicodeDecodeError) as err:
            raise ValueError(f"Error in FRatio.series.SeriesFile: {self.path}: {err}") from err
        if len(frame) == 0:
            raise ValueError(f"Error in FRatio.series.SeriesFile: {self.path}: series is empty.")
        return frame

    def _resolve(self, frame, selector, role):
        columns = list(frame.columns)
        if isinstance(selector, str) and selector.lstrip("-").isdigit() and selector not in columns:
            selector = int(selector)
        if isinstance(selector, int):
            if not -len(columns) <= selector < len(columns):
                raise ValueError(f"Error in FRatio.series.SeriesFile: {self.path}: "
                                 f"{role} column {selector} out of range.")
            return columns[selector]
        if selector not in columns:
            raise ValueError(f"Error in FRatio.series.SeriesFile: {self.path}: no {role} column '{selector}'.")
        return selector

    def _default_column(self, frame):
        columns = list(frame.columns)
        for name in ("value_re", "value"):
            if name in columns:
                return name
        candidates = [col for col in columns
                      if str(col) not in RESERVED_COLUMNS and str(col) != self.observed_column]
        if not candidates:
            raise ValueError(f"Error in FRatio.series.SeriesFile: {self.path}: no value column found.")
        return candidates[-1]

    def _parse(self, raw, column):
        """
        Numeric values of one column; NaN marks missing cells. Unparseable or
        infinite cells are errors naming the file line.
        """
        text = raw.astype(str).str.strip()
        missing = text.str.lower().isin(MISSING_TOKENS)
        numbers = pd.to_numeric(text.where(~missing), errors="coerce")
        bad = (~missing) & (numbers.isna() | ~np.isfinite(numbers.fillna(0.0)))
        if bad.any():
            row = int(np.flatnonzero(bad.to_numpy())[0])
            line = row + (2 if self.has_header else 1)
            raise ValueError(f"Error in FRatio.series.SeriesFile: {self.path}: line {line}: "
                             f"cannot parse '{text.iloc[row]}' in column '{column}'.")
        return numbers.to_numpy(dtype=float)

    def load(self, detrend="none"):
        """
        Parse the file into a LoadedSeries

        ARGS:
        detrend :: "none", "mean" (subtract the mean of observed values) or
                   "linear" (subtract a least-squares line through observed values)
        """
        if detrend not in DETREND_CHOICES:
            raise ValueError(f"Error in FRatio.series.SeriesFile.load: unknown detrend option '{detrend}'.")

        frame = self._read_frame()
        value_col = self._resolve(frame, self.column, "value") if self.column is not None \
            else self._default_column(frame)
        real = self._parse(frame[value_col], value_col)

        imag_col = self.imag_column
        if imag_col is None and self.column is None and "value_im" in frame.columns:
            imag_col = "value_im"
        imag = np.zeros_like(real)
        if imag_col is not None:
            imag_col = self._resolve(frame, imag_col, "imaginary")
            imag = self._parse(frame[imag_col], imag_col)

        missing = np.isnan(real) | np.isnan(imag)
        if self.observed_column in frame.columns:
            flags = self._parse(frame[self.observed_column], self.observed_column)
            if np.any(np.isnan(flags)) or not np.all(np.isin(flags, (0.0, 1.0))):
                raise ValueError(f"Error in FRatio.series.SeriesFile: {self.path}: "
                                 f"column '{self.observed_column}' must hold 0/1 flags.")
            observed = flags == 1.0
            clash = observed & missing
            if clash.any():
                line = int(np.flatnonzero(clash)[0]) + (2 if self.has_header else 1)
                raise ValueError(f"Error in FRatio.series.SeriesFile: {self.path}: line {line}: "
                                 "row is marked observed but has no value.")
        else:
            observed = ~missing

        values = np.where(observed, np.nan_to_num(real) + 1j * np.nan_to_num(imag), 0.0)
        record = {"source": os.path.basename(self.path),
                  "column": str(value_col),
                  "imag_column": None if imag_col is None else str(imag_col),
                  "length": int(values.size),
                  "observed": int(np.count_nonzero(observed)),
                  "detrend": detrend}

        if detrend != "none" and observed.any():
            values = np.where(observed, values - _trend(values, observed, detrend), 0.0)

        return LoadedSeries(values=core.Signal(values),
                            observed=core.IndexSet.from_mask(observed),
                            preprocessing=record)


def _trend(values, observed, detrend):
    idx = np.flatnonzero(observed)
    if detrend == "mean" or idx.size < 2:
        return np.mean(values[idx])
    x = np.arange(values.size, dtype=float)
    slope_re, icpt_re = np.polyfit(idx, values[idx].real, 1)
    slope_im, icpt_im = np.polyfit(idx, values[idx].imag, 1)
    return (icpt_re + slope_re * x) + 1j * (icpt_im + slope_im * x)


def write_series(path, values, observed=None):
    """
    Write a series in the ingestion format: index, value_re, value_im[, observed]
    """
    arr = core.as_array(values)
    frame = pd.DataFrame({"index": np.arange(arr.size),
                          "value_re": arr.real,
                          "value_im": arr.imag})
    if observed is not None:
        mask = observed.mask() if isinstance(observed, core.IndexSet) else np.asarray(observed, dtype=bool)
        frame["observed"] = mask.astype(int)
    frame.to_csv(path, index=False, float_format="%.17g")


def write_reconstruction(path, original, reconstruction):
    """
    Columns: index, original, reconstruction and residual (real and imaginary parts)
    """
    orig = core.as_array(original)
    recon = core.as_array(reconstruction)
    resid = orig - recon
    frame = pd.DataFrame({"index": np.arange(orig.size),
                          "original_re": orig.real, "original_im": orig.imag,
                          "reconstruction_re": recon.real, "reconstruction_im": recon.imag,
                          "residual_re": resid.real, "residual_im": resid.imag})
    frame.to_csv(path, index=False, float_format="%.9g")


def write_imputed(path, imputed, observed):
    """
    Columns: index, imputed_re, imputed_im, was_observed
    """
    arr = core.as_array(imputed)
    mask = observed.mask() if isinstance(observed, core.IndexSet) else np.asarray(observed, dtype=bool)
    frame = pd.DataFrame({"index": np.arange(arr.size),
                          "imputed_re": arr.real,
                          "imputed_im": arr.imag,
                          "was_observed": mask.astype(int)})
    frame.to_csv(path, index=False, float_format="%.9g")
