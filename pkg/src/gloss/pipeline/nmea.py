"""NMEA 0183 GGA parsing/formatting and great-circle distance."""

from __future__ import annotations

import math
from functools import reduce
from operator import xor

from ..errors import ChecksumMismatch, MalformedSentence, NoFix, UnsupportedSentence
from ..geo import GeoPoint
from .events import Event, EventKind

EARTH_RADIUS_M = 6_371_000.0


def nmea_checksum(body: str) -> int:
    """XOR of the characters between '$' and '*'."""
    return reduce(xor, body.encode("ascii"), 0)


def split_sentence(line: str) -> list[str]:
    """Validate framing and checksum, return the comma-separated fields."""
    text = line.strip()
    if not text.isascii():
        raise MalformedSentence("sentence contains non-ASCII characters")
    if not text.startswith("$"):
        raise MalformedSentence(f"sentence does not start with '$': {text!r}")
    body, star, tail = text[1:].partition("*")
    if not star:
        raise MalformedSentence("missing '*hh' checksum")
    if len(tail) != 2:
        raise MalformedSentence(f"checksum must be two hex digits, got {tail!r}")
    try:
        expected = int(tail, 16)
    except ValueError:
        raise MalformedSentence(f"checksum {tail!r} is not hex") from None
    actual = nmea_checksum(body)
    if actual != expected:
        raise ChecksumMismatch(f"checksum {expected:02X} != computed {actual:02X}")
    return body.split(",")


def _coord(value: str, hemi: str, positive: str, negative: str, max_deg: int) -> float:
    whole, dot, _frac = value.partition(".")
    if len(whole) < 3 or not whole.isdigit() or (dot and not _frac.isdigit()):
        raise MalformedSentence(f"bad coordinate {value!r}")
    degrees = int(whole[:-2])
    minutes = float(value[len(whole) - 2:])
    if minutes >= 60.0 or degrees > max_deg:
        raise MalformedSentence(f"coordinate out of range {value!r}")
    if hemi not in (positive, negative):
        raise MalformedSentence(f"bad hemisphere {hemi!r}")
    deg = degrees + minutes / 60.0
    return -deg if hemi == negative else deg


def parse_gga(line: str) -> tuple[GeoPoint, int]:
    """Return ``(point, fix_quality)`` for a GGA sentence.

    Raises ChecksumMismatch, MalformedSentence, NoFix, or UnsupportedSentence
    for well-formed sentences of another type.
    """
    fields = split_sentence(line)
    kind = fields[0]
    if len(kind) != 5 or not kind.isalnum():
        raise MalformedSentence(f"bad sentence address {kind!r}")
    if kind[2:] != "GGA":
        raise UnsupportedSentence(kind)
    if len(fields) < 7:
        raise MalformedSentence(f"GGA needs at least 7 fields, got {len(fields)}")
    try:
        fix = int(fields[6])
    except ValueError:
        raise MalformedSentence(f"bad fix quality {fields[6]!r}") from None
    if fix == 0:
        raise NoFix("fix quality 0")
    lat = _coord(fields[2], fields[3], "N", "S", 90)
    lon = _coord(fields[4], fields[5], "E", "W", 180)
    try:
        point = GeoPoint(lat, lon)
    except ValueError as exc:
        raise MalformedSentence(str(exc)) from None
    if not point.is_geographic:
        raise MalformedSentence(f"coordinate out of range {point}")
    return point, fix


def nmea_adapt(raw: Event | str, user: str, now: int) -> Event:
    line = raw["line"] if isinstance(raw, Event) else raw
    point, _ = parse_gga(line)
    return Event.location(user, point, now)


def _ddmm(value: float, deg_width: int, limit: int) -> str:
    # integer ten-thousandths of a minute so rounding carries into degrees
    units = round(abs(value) * 600_000)
    if value >= 0:
        # the upper edge is excluded, so never round up onto it
        units = min(units, limit * 600_000 - 1)
    deg, rem = divmod(units, 600_000)
    return f"{deg:0{deg_width}d}{rem // 10_000:02d}.{rem % 10_000:04d}"


def format_gga(
    point: GeoPoint,
    time: str = "000000",
    fix: int = 1,
    talker: str = "GP",
    satellites: int = 8,
) -> str:
    body = ",".join([
        f"{talker}GGA",
        time,
        _ddmm(point.lat, 2, 90),
        "S" if point.lat < 0 else "N",
        _ddmm(point.lon, 3, 180),
        "W" if point.lon < 0 else "E",
        str(fix),
        f"{satellites:02d}",
        "0.9",
        "545.4",
        "M",
        "46.9",
        "M",
        "",
        "",
    ])
    return f"${body}*{nmea_checksum(body):02X}"


def haversine_m(a: GeoPoint, b: GeoPoint, radius: float = EARTH_RADIUS_M) -> float:
    phi1, phi2 = math.radians(a.lat), math.radians(b.lat)
    dphi = phi2 - phi1
    dlmb = math.radians(b.lon - a.lon)
    h = math.sin(dphi / 2) ** 2 + math.cos(phi1) * math.cos(phi2) * math.sin(dlmb / 2) ** 2
    return 2 * radius * math.asin(min(1.0, math.sqrt(h)))


def threshold_filter(
    state: GeoPoint | None, event: Event, threshold: float
) -> tuple[GeoPoint | None, Event | None]:
    """Return ``(new_state, event_or_None)``; None means suppressed."""
    if threshold <= 0:
        raise ValueError("threshold must be positive")
    if event.kind is not EventKind.LOCATION:
        raise TypeError(f"threshold_filter expects Location, got {event.kind.value}")
    point = event.point
    if state is None or haversine_m(state, point) > threshold:
        return point, event
    return state, None
