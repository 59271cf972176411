"""Exception hierarchy shared by all gloss modules."""

from __future__ import annotations


class GlossError(Exception):
    """Base class for every error raised by this package."""


class InvariantViolation(GlossError):
    """An internal invariant failed; indicates a bug, not bad input."""


# geo

class GeoError(GlossError):
    pass


class PointOutsideWorld(GeoError):
    def __init__(self, point):
        super().__init__(f"point {point} lies outside the world root")
        self.point = point


class TargetOutsideWorld(GeoError):
    pass


class UnknownRegion(GeoError):
    def __init__(self, region_id):
        super().__init__(f"unknown region {region_id!r}")
        self.region_id = region_id


class WorldValidationError(GeoError):
    """Raised by the world loader; ``region_id`` names the offender."""

    def __init__(self, region_id, message, other=None):
        self.region_id = region_id
        self.other = other
        super().__init__(f"region {region_id!r}: {message}")


# pipeline

class NmeaError(GlossError):
    pass


class ChecksumMismatch(NmeaError):
    pass


class MalformedSentence(NmeaError):
    pass


class NoFix(NmeaError):
    """GGA fix-quality field is zero."""


class UnsupportedSentence(NmeaError):
    """Valid NMEA, but not a GGA sentence."""


class AssemblyError(GlossError):
    pass


class UnknownComponent(AssemblyError):
    pass


class CycleDetected(AssemblyError):
    pass


class KindIncompatible(AssemblyError):
    pass


class KindMismatch(AssemblyError):
    pass


class UnknownSource(AssemblyError):
    pass


# overlay / hearsay / profiles

class TopologyError(GlossError):
    def __init__(self, node_id, message):
        self.node_id = node_id
        super().__init__(f"node {node_id!r}: {message}")


class UnknownTargetRegion(GlossError):
    pass


class Undeliverable(GlossError):
    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = trace


class UnknownWhere(GlossError):
    pass


class UnknownUser(GlossError):
    pass


class ProfileUnavailable(GlossError):
    pass


class AllChannelsFailed(GlossError):
    pass


# scenarios

class ScenarioError(GlossError):
    """Problem in a scenario file; ``line`` is 1-based when known."""

    def __init__(self, message, path=None, line=None):
        self.message = message
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}:{line}: " if line is not None else f"{path}: "
        elif line is not None:
            where = f"line {line}: "
        super().__init__(where + message)


class ScenarioParseError(ScenarioError):
    pass


class ScenarioValidationError(ScenarioError):
    pass
