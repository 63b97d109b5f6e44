"""Exceptions shared by the OD estimation modules"""


class ODError(Exception):
    pass


class ConfigError(ODError):
    """Invalid input files, keywords or command line usage (exit code 2)."""


class NumericalError(ODError):
    """Numerical failure during simulation or estimation (exit code 3)."""


class NotPSDError(NumericalError):
    def __init__(self, message, min_eigenvalue=None):
        super().__init__(message)
        self.min_eigenvalue = min_eigenvalue


class FilterError(NumericalError):
    def __init__(self, message, t=None):
        super().__init__(message)
        self.t = t


class SamplerError(NumericalError):
    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration


class InsufficientHistoryError(ConfigError, IndexError):
    def __init__(self, missing):
        super().__init__(f"route cost history has no entry for day {missing}")
        self.missing = missing
