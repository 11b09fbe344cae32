"""Exception types shared across the package."""


class BPMSRError(Exception):
    """Base class for all package errors."""


class ScenarioError(BPMSRError):
    """A scenario (or one of its parts) violates a structural invariant."""


class ProtocolViolation(BPMSRError):
    """An adversary emitted something the protocol would detect.

    Raised for non-binary or non-monotone activation reports and for
    non-finite consensus values.
    """

    def __init__(self, message, adversary=None, receiver=None, t=None, k=None):
        super().__init__(message)
        self.adversary = adversary
        self.receiver = receiver
        self.t = t
        self.k = k


class NonFiniteValueError(BPMSRError, ValueError):
    """A consensus value entering the MSR filter is NaN or infinite."""

    def __init__(self, sender, value):
        super().__init__(f"non-finite value {value!r} from sender {sender}")
        self.sender = sender
        self.value = value


class InstanceTooLarge(BPMSRError):
    """The brute-force robustness oracle refuses instances over its guard."""


class UnsupportedSchedule(BPMSRError):
    """The requested analysis is only defined for periodic schedules."""


class SafetyViolation(BPMSRError):
    """A normal agent left the safety interval during a checked run."""

    def __init__(self, message, node=None, t=None):
        super().__init__(message)
        self.node = node
        self.t = t


class ConfigError(BPMSRError):
    """A scenario file could not be parsed; carries a 1-based position."""

    def __init__(self, message, line=None, column=None, path=None):
        loc = ""
        if path is not None:
            loc += f"{path}:"
        if line is not None:
            loc += f"{line}:{column or 1}: "
        super().__init__(loc + message)
        self.line = line
        self.column = column
        self.path = path
