"""Exception hierarchy. Each class maps to a distinct CLI exit code."""


class EstimatorError(ValueError):
    exit_code = 1


class NetworkError(EstimatorError):
    """Malformed or inconsistent network description."""

    exit_code = 3


class TraceError(EstimatorError):
    """Activity trace does not fit the network or holds invalid values."""

    exit_code = 4


class ProfileError(EstimatorError):
    """Invalid technology profile."""

    exit_code = 5
