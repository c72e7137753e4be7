"""
Error hierarchy shared by every app in the workbench.

exit_code groups the errors the way the management commands report them:
2 for bad input/parameters, 3 for failures while doing the work.
"""

EXIT_VALIDATION = 2
EXIT_RUNTIME = 3
EXIT_IO = 4


class WorkbenchError(Exception):
    exit_code = EXIT_RUNTIME


class ValidationError(WorkbenchError):
    exit_code = EXIT_VALIDATION


# ---- validation ----

class InvalidPmf(ValidationError):
    pass


class InvalidDistortion(ValidationError):
    pass


class SpecParseError(ValidationError):
    pass


class DistortionOutOfRange(ValidationError):
    def __init__(self, distortion: float, d_max: float):
        self.distortion = distortion
        self.d_max = d_max
        super().__init__(f"distortion {distortion} is outside (0, Dmax) with Dmax={d_max}")


class RateOutOfRange(ValidationError):
    pass


class ParamInvariantViolation(ValidationError):
    pass


class ParamMismatch(ValidationError):
    pass


class GammaOutOfRange(ValidationError):
    pass


class EpsilonOutOfRange(ValidationError):
    pass


class InvalidScheduleArgument(ValidationError):
    pass


class EmptyCandidates(ValidationError):
    pass


class InvalidScenario(ValidationError):
    pass


# ---- runtime ----

class NoConvergence(WorkbenchError):
    pass


class DegenerateConstants(WorkbenchError):
    pass


class MemoryCap(WorkbenchError):
    pass


class StreamError(WorkbenchError):
    pass


class StreamLengthMismatch(StreamError):
    pass


class StreamExhausted(StreamError):
    pass


class IndexOutOfRange(StreamError):
    pass


class PointerOutOfRange(StreamError):
    pass


class SeedMismatch(StreamError):
    pass


class ContainerFormatError(StreamError):
    pass


class RoundtripMismatch(WorkbenchError):
    pass


class DistortionBudgetExceeded(WorkbenchError):
    pass


class ScenarioError(WorkbenchError):
    def __init__(self, message: str, codec: str, d_target: float, seed: int | None):
        self.codec = codec
        self.d_target = d_target
        self.seed = seed
        super().__init__(message)


class PublishedDistortionMismatch(WorkbenchError):
    """Mean achieved distortion outside the band around a reference value."""
