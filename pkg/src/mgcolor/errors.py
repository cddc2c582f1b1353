"""Exception taxonomy shared across the package."""


class MgcolorError(Exception):
    """Base class for all package errors."""


class InputError(MgcolorError):
    """Malformed input or violated operation precondition."""


class CapacityError(MgcolorError):
    """Instance exceeds an exact-enumeration cap; caller should use witness-based bounds."""


class ConsistencyError(MgcolorError):
    """Stale or internally inconsistent data handed to a mutator."""


class LemmaStress(MgcolorError):
    """A case-analysis step reached a configuration its argument rules out.

    Carries a diagnostic payload so the driver can wrap the event into a
    replayable escalation bundle instead of crashing.
    """

    def __init__(self, reason: str, detail: dict | None = None):
        super().__init__(reason)
        self.reason = reason
        self.detail = detail or {}
