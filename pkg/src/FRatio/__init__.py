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


VERSION = 'v0.1.0'
"""
str : FRatio version string.
"""


# FRatio Imports
from . import core
from . import fr
from . import approx
from . import chang
from . import recover
from . import noise
from . import constants
from . import experiment
from . import series
from . import params
from . import logger
from . import main
