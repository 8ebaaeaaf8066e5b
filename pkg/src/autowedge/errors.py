"""Exception hierarchy.

Every pipeline failure carries a stable machine-readable ``code`` and the
CLI exit status it maps to.
"""


class AutowedgeError(Exception):
    code = "ERROR"
    exit_status = 1


class NotStronglyElliptic(AutowedgeError):
    code = "NOT_STRONGLY_ELLIPTIC"
    exit_status = 2

    def __init__(self, message, z=None):
        super().__init__(message)
        self.z = z


class DegenerateCharacteristics(AutowedgeError):
    code = "DEGENERATE_CHARACTERISTICS"
    exit_status = 2


class OutOfAnalyticity(AutowedgeError):
    code = "OUT_OF_ANALYTICITY"
    exit_status = 4


class UnderdeterminedTraces(AutowedgeError):
    code = "UNDERDETERMINED_TRACES"
    exit_status = 64


class RequiresZeroSideData(AutowedgeError):
    code = "REQUIRES_ZERO_SIDE_DATA"
    exit_status = 4


class SingularJumpData(AutowedgeError):
    code = "SINGULAR_JUMP"
    exit_status = 3


class BranchDiscontinuity(AutowedgeError):
    code = "BRANCH_DISCONTINUITY"
    exit_status = 3


class NearEndpoint(AutowedgeError):
    code = "NEAR_ENDPOINT"
    exit_status = 4


class DivisionBySmallS1(AutowedgeError):
    code = "DIVISION_BY_SMALL_S1"
    exit_status = 4

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class TruncationNotConverged(AutowedgeError):
    code = "TRUNCATION_NOT_CONVERGED"
    exit_status = 4


class NoDecayingDirection(AutowedgeError):
    code = "NO_DECAYING_DIRECTION"
    exit_status = 64


class SolverDiverged(AutowedgeError):
    code = "SOLVER_DIVERGED"
    exit_status = 4


class IllConditioned(AutowedgeError):
    code = "ILL_CONDITIONED"
    exit_status = 4


class ConfigError(AutowedgeError):
    code = "CONFIG_PARSE_ERROR"
    exit_status = 64
