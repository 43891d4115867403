"""Exception hierarchy shared by all rilsim modules."""

from __future__ import annotations


class RilError(Exception):
    """Base class for every error raised by rilsim."""


class InvalidLP(RilError, ValueError):
    pass


class InvalidPolicy(RilError, ValueError):
    pass


class NotInBase(RilError, KeyError):
    def __str__(self) -> str:  # KeyError repr-quotes its message otherwise
        return str(self.args[0]) if self.args else "not in base"


class NoCommunities(RilError):
    """A Definition-style classification was asked over an empty community level."""

    def __init__(self, level: int):
        super().__init__(f"no level-{level} communities at the requested time")
        self.level = level


class NoCourts(RilError):
    pass


class EmptyPlan(RilError, ValueError):
    pass


class ScenarioInvalid(RilError, ValueError):
    """Carries a list of ``(json_pointer, message)`` diagnostics."""

    def __init__(self, diagnostics: list[tuple[str, str]]):
        self.diagnostics = list(diagnostics)
        lines = [f"{ptr or '/'}: {msg}" for ptr, msg in self.diagnostics]
        super().__init__("scenario invalid:\n  " + "\n  ".join(lines))
