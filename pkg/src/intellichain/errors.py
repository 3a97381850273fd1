"""Exception types shared across the engine."""


class IntelliChainError(Exception):
    """Base class for all domain errors."""


# -- knowledge graph ---------------------------------------------------------

class MalformedDocument(IntelliChainError):
    pass


class DuplicateNodeId(IntelliChainError):
    pass


class DuplicateAlias(IntelliChainError):
    pass


class DanglingEdge(IntelliChainError):
    pass


class SelfLoopEdge(IntelliChainError):
    pass


class UnknownSeed(IntelliChainError):
    pass


# -- dialogue ----------------------------------------------------------------

class InvalidProblem(IntelliChainError):
    pass


class SessionCompleted(IntelliChainError):
    pass


class RoleOrderViolation(IntelliChainError):
    pass


# -- backends ----------------------------------------------------------------

class BackendFailure(IntelliChainError):
    pass


class MalformedResponse(BackendFailure):
    pass


class ScriptExhausted(IntelliChainError):
    pass


# -- bandit ------------------------------------------------------------------

class EmptyArmSet(IntelliChainError):
    pass


class UnknownArm(IntelliChainError):
    pass


class RewardOutOfRange(IntelliChainError):
    pass


# -- evaluation --------------------------------------------------------------

class InfeasibleProblem(IntelliChainError):
    pass
