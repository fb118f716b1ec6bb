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


from setuptools import setup, find_packages


setup(
    version='0.1.0',
    name='FRatio',
    description='Fourier ratio analysis, approximation and imputation of signals on Z_N',
    packages=find_packages('src'),
    package_dir={'': 'src'},
    test_suite='tests',
    license='Apache License, Version 2.0',
    zip_safe=False,
    python_requires='>=3.8',
    install_requires=[
        'numpy',
        'scipy',
        'tqdm',
        'pandas',
        'pyyaml',
        'beautifultable',
        'joblib'
    ],
    entry_points={
        "console_scripts": [
            "fr.analyze=FRatio.main:cmd_analyze",

            "fr.approx=FRatio.main:cmd_approx",

            "fr.impute=FRatio.main:cmd_impute",

            "fr.constants=FRatio.main:cmd_constants",
            "fr.constants.new=FRatio.main:cmd_constants_new",
            "fr.constants.run=FRatio.main:cmd_constants_run",

            "fr.noise=FRatio.main:cmd_noise",
        ]
    }
)
