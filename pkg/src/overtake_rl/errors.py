"""Exception hierarchy shared across the simulator, trainer and harness."""


class OvertakeError(Exception):
    """Base class for every error raised by this package."""


class InvalidWidth(OvertakeError, ValueError):
    pass


class SelfIntersectingTrack(OvertakeError, ValueError):
    pass


class OffTrackQuery(OvertakeError, ValueError):
    pass


class IndivisibleRayCount(OvertakeError, ValueError):
    pass


class NoGapFound(OvertakeError):
    """Every ray of the scan is at or below the gap threshold."""


class SpawnConflict(OvertakeError, ValueError):
    pass


class SteppedDoneEpisode(OvertakeError, RuntimeError):
    pass


class BufferTooSmall(OvertakeError, RuntimeError):
    pass


class CorruptCheckpoint(OvertakeError, IOError):
    pass


class IncompatibleCheckpoint(OvertakeError, ValueError):
    pass


class ConfigError(OvertakeError, ValueError):
    pass
