"""Exception types shared across the engine.

Every error that can cross a module boundary lives here so the service
layer can map each one to a stable HTTP status + error code.
"""

from __future__ import annotations


class PortalAgentError(Exception):
    """Base class for all engine errors."""

    code = "InternalError"


class ParseError(PortalAgentError):
    """A document (inventory, scenario, composition) is malformed."""

    code = "ParseError"


class InventoryInvariantError(PortalAgentError):
    """A structurally well-formed inventory violates a catalog invariant.

    The message names the violated invariant and the offending identifier.
    """

    code = "InventoryInvariantError"


class UnknownComponentTypeError(PortalAgentError):
    """A composition references a component type absent from the inventory."""

    code = "UnknownComponentType"


class RepairFailedError(PortalAgentError):
    """One full repair pass left the composition invalid."""

    code = "RepairFailed"

    def __init__(self, message: str, log=None, violations=None):
        super().__init__(message)
        self.log = list(log or [])
        self.violations = list(violations or [])


class PlanningFailedError(PortalAgentError):
    """The planner exhausted its retries without a valid composition."""

    code = "PlanningFailed"

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = trace


class EndpointError(PortalAgentError):
    """Transport or auth failure talking to a remote model endpoint.

    Never carries prompt text or credentials.
    """

    code = "EndpointError"


class InvalidCompositionError(PortalAgentError):
    """The renderer refused a composition that fails validation."""

    code = "InvalidComposition"

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report


class DepthExceededError(PortalAgentError):
    """Component nesting exceeds the supported depth."""

    code = "DepthExceeded"


class DomainError(PortalAgentError):
    """A subscore fell outside [0, 1]."""

    code = "DomainError"


class JudgeUnavailableError(PortalAgentError):
    """Remote judge transport failure."""

    code = "JudgeUnavailable"


class JudgeParseError(PortalAgentError):
    """Remote judge reply could not be parsed into rubric scores."""

    code = "JudgeParseError"


class RunNotFoundError(PortalAgentError):
    """No persisted run with the requested id."""

    code = "RunNotFound"


class EmptyInputError(PortalAgentError):
    """An aggregate was requested over zero records."""

    code = "EmptyInput"
