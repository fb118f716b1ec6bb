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


import contextlib
import datetime as dt
import json
import math
from dataclasses import dataclass, field, asdict

import joblib
import numpy as np
from tqdm import tqdm


SCHEMA = "fratio.report/1"
REPORT_QUANTILES = (10, 50, 90, 99)


@contextlib.contextmanager
def tqdm_joblib(tqdm_object):
    """
    Context manager to patch joblib to report into tqdm progress bar given as argument
    """
    class TqdmBatchCompletionCallback(joblib.parallel.BatchCompletionCallBack):
        def __call__(self, *args, **kwargs):
            tqdm_object.update(n=self.batch_size)
            return super().__call__(*args, **kwargs)

    old_batch_callback = joblib.parallel.BatchCompletionCallBack
    joblib.parallel.BatchCompletionCallBack = TqdmBatchCompletionCallback
    try:
        yield tqdm_object
    finally:
        joblib.parallel.BatchCompletionCallBack = old_batch_callback
        tqdm_object.close()


def seed_sequence(seed, *keys):
    """
    SeedSequence for the stream identified by (seed, *keys). Streams depend only on
    their coordinates, so trials give the same numbers in any execution order.
    """
    if seed is None:
        raise ValueError("Error in FRatio.experiment.seed_sequence: an explicit seed is required.")
    return np.random.SeedSequence(entropy=int(seed),
                                  spawn_key=tuple(int(k) for k in keys))


def make_rng(seed, *keys):
    """
    numpy Generator for (seed, *keys); a Generator passed in without keys is returned as is
    """
    if isinstance(seed, np.random.Generator):
        if keys:
            raise ValueError("Error in FRatio.experiment.make_rng: keys need an integer seed.")
        return seed
    return np.random.default_rng(seed_sequence(seed, *keys))


def run_trials(trial_func, n_trials, processes=1, desc=None, progress=False):
    """
    Evaluate trial_func(0), ..., trial_func(n_trials - 1), in parallel when processes > 1

    ARGS:
    trial_func :: callable taking the trial index
    n_trials   :: number of trials
    processes  :: number of joblib workers
    desc       :: progress bar description
    progress   :: whether to show a tqdm bar

    RETURNS:
    list of results, in trial order
    """
    if processes is None or processes <= 1:
        trial_iter = range(n_trials)
        if progress:
            trial_iter = tqdm(trial_iter, ncols=100, desc=desc)
        return [trial_func(idx) for idx in trial_iter]

    tqdm_iter = tqdm(total=n_trials, ncols=100, desc=desc, disable=not progress)
    with tqdm_joblib(tqdm_iter):
        results = joblib.Parallel(n_jobs=processes)(
            joblib.delayed(trial_func)(idx) for idx in range(n_trials)
        )
    return list(results)


def now_stamp():
    return dt.datetime.now().strftime("%d%b%Y-%H:%M:%S")


def binomial_slack(gamma, trials, width=3.0):
    """
    Monte-Carlo slack on a coverage frequency, width * sqrt(gamma (1-gamma) / trials)
    """
    if trials < 1:
        raise ValueError("Error in FRatio.experiment.binomial_slack: need at least one trial.")
    return width * math.sqrt(gamma * (1.0 - gamma) / trials)


def percentile(values, q):
    """
    Percentile with linear interpolation between order statistics
    """
    return float(np.percentile(np.asarray(values, dtype=float), q, method="linear"))


def quantile_summary(values, levels=REPORT_QUANTILES):
    return {f"p{lvl:g}": percentile(values, lvl) for lvl in levels}


def to_builtin(obj):
    """
    Recursively convert numpy scalars/arrays and tuples into JSON-ready builtins
    """
    if isinstance(obj, dict):
        return {str(key): to_builtin(val) for key, val in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_builtin(val) for val in obj]
    if isinstance(obj, np.ndarray):
        return to_builtin(obj.tolist())
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        val = float(obj)
        if math.isnan(val) or math.isinf(val):
            return str(val)
        return val
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    return obj


@dataclass
class ExperimentReport:
    """
    Seeded, parameterised record of a Monte-Carlo run
    """
    name: str
    params: dict
    trials: int
    violations: int
    coverage: float
    slack: float
    seed: int
    quantiles: dict = field(default_factory=dict)
    estimates: dict = field(default_factory=dict)
    regime_violation: bool = False
    config: dict = field(default_factory=dict)
    artifact_version: str = ""

    def to_dict(self, timestamp=True):
        out = {"schema": SCHEMA}
        out.update(asdict(self))
        if timestamp:
            out["timestamp"] = now_stamp()
        return to_builtin(out)


def dump_json(payload, path):
    """
    Write a report dict as JSON; identical payloads give identical bytes
    """
    with open(path, 'w') as f:
        json.dump(to_builtin(payload), f, indent=2, sort_keys=False)
        f.write("\n")
