"""Exception types shared across the package."""


class SliceplanError(Exception):
    """Base class for all package errors."""


class ScenarioParseError(SliceplanError):
    """Scenario or windows file could not be parsed; message carries file/line."""


class ScenarioValidationError(SliceplanError):
    """Parsed input violates a model invariant; message names the field."""


class MgfOverflowError(SliceplanError):
    """theta * max packet size exceeds the float64 exponent range."""


class StabilityViolatedError(SliceplanError):
    """Service envelope minus delta does not exceed arrival envelope plus delta."""


class NumericUnderflowError(SliceplanError):
    """1 - exp(-theta*delta) underflowed to zero."""


class UnknownOptionError(SliceplanError):
    """Deployment option identifier not recognised."""


class EmptyScenarioError(SliceplanError):
    """Scenario has no flows."""


class MissingSliceError(SliceplanError):
    """Allocation does not cover every slice of the layout."""


class CellTooSmallError(SliceplanError):
    """Fewer cell RBs than slices; no valid allocation exists."""


class PreconditionInfeasibleError(SliceplanError):
    """Resource tightening was given an allocation that misses delay targets."""


class UnknownFlowError(SliceplanError):
    """Flow id not present in the simulation statistics."""


class InvalidDimensionsError(SliceplanError):
    """Scenario generator called with flows < lines or lines < 1."""
