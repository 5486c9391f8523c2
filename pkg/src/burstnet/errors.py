"""Exception hierarchy.

Everything raised deliberately by the package derives from ``BurstnetError``
so the CLI can map failures onto exit codes in one place.
"""


class BurstnetError(Exception):
    pass


# network construction


class NetworkError(BurstnetError, ValueError):
    pass


class SpecSyntaxError(NetworkError):
    pass


class DuplicateSynapse(NetworkError):
    pass


class DanglingEndpoint(NetworkError):
    pass


class InvalidWeight(NetworkError):
    pass


class MissingRegion(NetworkError):
    pass


class InvalidStimulus(BurstnetError, ValueError):
    pass


# dynamics


class PhaseMissing(BurstnetError):
    pass


class PhaseOverflow(BurstnetError):
    pass


# episodic


class EmptyCue(BurstnetError, ValueError):
    pass


# neuromodulation


class ZeroDelta(BurstnetError):
    """No learning event: the prediction error is exactly zero."""


class ZeroValence(BurstnetError, ValueError):
    pass


# plasticity


class EmptyStore(BurstnetError):
    pass


# harness


class ConfigInvalid(BurstnetError):
    pass


class SnapshotMissing(BurstnetError):
    pass


class Divergence(BurstnetError):
    def __init__(self, window: int, detail: str = ""):
        self.window = window
        self.detail = detail
        msg = f"replay diverged at window {window}"
        super().__init__(f"{msg}: {detail}" if detail else msg)


class UnknownSeries(BurstnetError, ValueError):
    pass
