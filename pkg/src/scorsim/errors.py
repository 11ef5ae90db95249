class ConfigError(ValueError):
    """Invalid scenario, distribution, or scheduling parameter."""


class RegistrationError(KeyError):
    """An event or message addressed to an agent the kernel does not know."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "unknown agent"


class SimulationFault(RuntimeError):
    """A broken model invariant detected during a run.

    ``event`` carries the event being dispatched when the fault surfaced,
    if any.
    """

    def __init__(self, message: str, event=None):
        super().__init__(message)
        self.event = event
