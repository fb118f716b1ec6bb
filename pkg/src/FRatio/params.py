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
import yaml

from . import constants as cstMod


OUTPUT_DIR_ENV = "FRATIO_OUTPUT_DIR"


class Params:
    """
    Class encapsulating Params objects
    """

    def __init__(self,
                 project_name: str,
                 params_in=None):
        """
        Initialise Params object

        ARGS:
        project_name :: Name of current run (prefix of output files)
        params_in    :: Nested dict of resolved parameters
        """

        self.project_name = project_name
        self.params = params_in if params_in is not None else {}

    @property
    def system(self):
        return self.params['System']

    def to_yaml(self, filename):
        """
        Dump the parameters to a yaml file
        """
        with open(filename, 'w') as f:
            yaml.dump(self.params, f, indent=4, sort_keys=False)


def default_output_dir():
    """
    Output folder from the FRATIO_OUTPUT_DIR environment variable, else the working directory
    """
    return os.environ.get(OUTPUT_DIR_ENV) or "."


def _system_section(args):
    return {
        'seed': int(args.seed),
        'output_path': str(args.output if args.output is not None else default_output_dir()),
        'output_format': args.format,
        'timestamp': not args.no_timestamp,
        'processes': int(args.processes),
    }


def _series_section(args):
    return {
        'path': str(args.series),
        'column': args.column,
        'imag_column': args.imag_column,
        'has_header': not args.no_header,
        'detrend': args.detrend,
    }


def new_analyze_params(args):
    """
    Subroutine to resolve parameters of an analysis run

    ARGS:
    args (Namespace) :: Namespace generated with user inputs
    """
    return Params(args.name, {
        'System': _system_section(args),
        'Series': _series_section(args),
        'Analyze': {
            'large_spectrum_eta': args.large_spectrum,
            'reference_fr': args.reference,
            'support_threshold': args.support_threshold,
        },
    })


def new_approx_params(args):
    """
    Subroutine to resolve parameters of an approximation run

    ARGS:
    args (Namespace) :: Namespace generated with user inputs
    """
    return Params(args.name, {
        'System': _system_section(args),
        'Series': _series_section(args),
        'Approx': {
            'mode': args.mode,
            'eta': float(args.eta),
            'max_attempts': int(args.max_attempts),
            'encode_eps': args.encode,
        },
    })


def new_impute_params(args):
    """
    Subroutine to resolve parameters of an imputation run

    ARGS:
    args (Namespace) :: Namespace generated with user inputs
    """
    return Params(args.name, {
        'System': _system_section(args),
        'Series': _series_section(args),
        'Impute': {
            'eps': float(args.eta),
            'solver_tol': float(args.solver_tol),
            'max_iters': int(args.max_iters),
            'step_scale': float(args.step_scale),
            'oracle_l2': args.oracle_l2,
            'sweep': bool(args.sweep),
            'p': None if args.p is None else [float(p) for p in args.p],
            'trials': int(args.trials),
        },
    })


def new_constants_params(args):
    """
    Subroutine to resolve parameters of a constant-estimation run. Grid values not
    given on the command line come from the selected profile.

    ARGS:
    args (Namespace) :: Namespace generated with user inputs
    """
    profile = cstMod.PROFILES[args.profile]
    return Params(args.name, {
        'System': _system_section(args),
        'Constants': {
            'profile': args.profile,
            'n_grid': [int(N) for N in (args.n_grid or profile['n_grid'])],
            'q_grid': [float(q) for q in (args.q or profile['q_grid'])],
            'trials': int(args.trials if args.trials is not None else profile['trials']),
            'percentile': float(args.percentile),
        },
    })


def new_constants_yaml(args):
    """
    Subroutine to create yaml file for constant estimation

    ARGS:
    args (Namespace) :: Namespace generated with user inputs

    RETURNS:
    str, path of the yaml file
    """
    params = new_constants_params(args)
    os.makedirs(params.system['output_path'], exist_ok=True)
    yaml_name = os.path.join(params.system['output_path'], args.name + '_constants.yaml')
    params.to_yaml(yaml_name)

    return yaml_name


def new_noise_params(args):
    """
    Subroutine to resolve parameters of a noise experiment

    ARGS:
    args (Namespace) :: Namespace generated with user inputs
    """
    return Params(args.name, {
        'System': _system_section(args),
        'Series': _series_section(args) if args.series is not None else None,
        'Noise': {
            'experiment': args.experiment,
            'signal': args.signal,
            'domain_size': int(args.N),
            'sigma': float(args.sigma),
            'gamma': float(args.gamma),
            'copies': [int(n) for n in args.copies],
            'trials': int(args.trials),
            'laurent_massart': bool(args.laurent_massart),
        },
    })


def read_yaml(project_name, filename):
    """
    Function to read in YAML file containing parameters

    ARGS:
    project_name :: Name of current run
    filename     :: Name of the YAML file to be read

    RETURNS:
    Params
    """

    if not os.path.isfile(filename):
        raise IOError(f"Error in FRatio.params.read_yaml: {filename}: File not found.")

    with open(filename, 'r') as f:
        params = yaml.load(f, Loader=yaml.FullLoader)

    if not isinstance(params, dict) or 'System' not in params:
        raise ValueError(f"Error in FRatio.params.read_yaml: {filename}: missing 'System' section.")

    return Params(project_name, params)
