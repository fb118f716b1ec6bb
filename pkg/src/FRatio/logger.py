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
import os


class Logger():
    """
    Class encapsulating a Logger object
    """
    LEVELS = {"debug": logging.DEBUG,
              "info": logging.INFO,
              "warning": logging.WARNING,
              "error": logging.ERROR,
              "critical": logging.CRITICAL}


    def __init__(self,
                 log_path: str = None,
                 level: str = "info",
                 ):
        """
        Initialise Logger object

        ARGS:
        log_path :: Path to the log file (no file output if None)
        level    :: lowest level written to the file
        """
        self.log_path = log_path
        self._logger = logging.getLogger("FRatio")
        self._logger.setLevel(self.LEVELS[level.lower()])

        # One file handler per log path
        if log_path is not None:
            log_path = os.path.abspath(log_path)
            known = [getattr(h, "baseFilename", None) for h in self._logger.handlers]
            if log_path not in known:
                os.makedirs(os.path.dirname(log_path), exist_ok=True)
                handler = logging.FileHandler(log_path)
                handler.setFormatter(logging.Formatter(
                    fmt='[%(asctime)s] %(levelname)s - %(message)s',
                    datefmt="%d%b%Y-%H:%M:%S"))
                self._logger.addHandler(handler)


    def __call__(self,
                 message: str,
                 level: str = "info",
                 stdout: bool = True,
    ):
        """
        Send a string to the log file and, optionally, stdout

        ARGS:
        message  :: message to be output to file
        level    :: type of log (debug / info / warning / error / critical)
        stdout   :: whether to output to shell
        """
        self._logger.log(level=self.LEVELS[level.lower()],
                         msg=message)

        if stdout:
            print(message)


    def close(self):
        """
        Detach and close the file handler of this logger
        """
        if self.log_path is None:
            return
        log_path = os.path.abspath(self.log_path)
        for handler in list(self._logger.handlers):
            if getattr(handler, "baseFilename", None) == log_path:
                self._logger.removeHandler(handler)
                handler.close()
