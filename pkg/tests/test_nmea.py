import random

import pytest
from hypothesis import given, settings, strategies as st

from gloss.errors import ChecksumMismatch, MalformedSentence, NoFix, UnsupportedSentence
from gloss.geo import GeoPoint
from gloss.oracles import chord_distance_m
from gloss.pipeline import Event, EventKind, format_gga, haversine_m, nmea_adapt, parse_gga, threshold_filter

MUNICH = "$GPGGA,123519,4807.038,N,01131.000,E,1,08,0.9,545.4,M,46.9,M,,*47"


def xor_oracle(sentence):
    body = sentence[sentence.index("$") + 1:sentence.index("*")]
    acc = 0
    for byte in body.encode("ascii"):
        acc ^= byte
    return acc


def test_munich_sentence():
    assert xor_oracle(MUNICH) == 0x47
    # ddmm.mmm -> dd + mm.mmm / 60
    exp_lat = 48 + 7.038 / 60
    exp_lon = 11 + 31.000 / 60
    ev = nmea_adapt(Event.raw(MUNICH), "bob", 12)
    assert ev.kind is EventKind.LOCATION
    assert ev["user"] == "bob" and ev["t"] == 12
    assert ev.point.lat == pytest.approx(exp_lat, abs=1e-9)
    assert ev.point.lon == pytest.approx(exp_lon, abs=1e-9)
    assert round(ev.point.lat, 4) == 48.1173 and round(ev.point.lon, 6) == 11.516667


def test_checksum_altered():
    with pytest.raises(ChecksumMismatch):
        parse_gga(MUNICH[:-2] + "00")


def test_fix_quality_zero():
    body = "GPGGA,123519,4807.038,N,01131.000,E,0,08,0.9,545.4,M,46.9,M,,"
    line = f"${body}*{xor_oracle('$' + body + '*'):02X}"
    with pytest.raises(NoFix):
        parse_gga(line)


@pytest.mark.parametrize("line", [
    "GPGGA,1,2*00",
    "$GPGGA,123519,4807.038,N,01131.000,E,1,08",
    "$GPGGA,123519*4",
    "$GPGGA,123519*ZZ",
])
def test_malformed(line):
    with pytest.raises(MalformedSentence):
        parse_gga(line)


def _with_checksum(body):
    return f"${body}*{xor_oracle('$' + body + '*'):02X}"


@pytest.mark.parametrize("body", [
    "GPGGA,123519,4807.038,X,01131.000,E,1,08,0.9,545.4,M,46.9,M,,",
    "GPGGA,123519,4867.038,N,01131.000,E,1,08,0.9,545.4,M,46.9,M,,",
    "GPGGA,123519,48x7.038,N,01131.000,E,1,08,0.9,545.4,M,46.9,M,,",
    "GPGGA,123519,4807.038,N,01131.000,E,q,08,0.9,545.4,M,46.9,M,,",
    "GPGGA,123519,9507.038,N,01131.000,E,1,08,0.9,545.4,M,46.9,M,,",
])
def test_malformed_fields(body):
    with pytest.raises(MalformedSentence):
        parse_gga(_with_checksum(body))


def test_other_sentence_types_are_unsupported():
    with pytest.raises(UnsupportedSentence):
        parse_gga(_with_checksum("GPRMC,120000,A,4851.2100,N,00219.8000,E,000.0,000.0,181026,,,A"))


def test_south_west_hemispheres():
    p, _ = parse_gga(format_gga(GeoPoint(-33.8688, -151.2093)))
    assert p.lat == pytest.approx(-33.8688, abs=1e-6)
    assert p.lon == pytest.approx(-151.2093, abs=1e-6)


def test_format_carries_rounded_minutes():
    line = format_gga(GeoPoint(10.99999999, 20.0))
    assert ",1100.0000,N," in line
    assert parse_gga(line)[0].lat == pytest.approx(11.0)


geo_points = st.builds(
    GeoPoint,
    st.floats(-90, 90, exclude_max=True, allow_nan=False),
    st.floats(-180, 180, exclude_max=True, allow_nan=False),
)


@settings(max_examples=300)
@given(geo_points)
def test_round_trip_within_minute_precision(p):
    q, _ = parse_gga(format_gga(p))
    assert abs(q.lat - p.lat) <= 1e-4 and abs(q.lon - p.lon) <= 1e-4


@given(geo_points, st.integers(0, 255))
def test_any_wrong_checksum_rejected(p, bad):
    line = format_gga(p)
    if int(line[-2:], 16) == bad:
        bad ^= 0xFF
    with pytest.raises(ChecksumMismatch):
        parse_gga(line[:-2] + f"{bad:02X}")


def test_haversine_examples():
    a = GeoPoint(48.0, 11.0)
    near, far = GeoPoint(48.0005, 11.0), GeoPoint(48.0010, 11.0)
    assert chord_distance_m(a, near) == pytest.approx(55.6, abs=0.05)
    assert chord_distance_m(a, far) == pytest.approx(111.2, abs=0.05)
    assert haversine_m(a, near) == pytest.approx(chord_distance_m(a, near), rel=1e-9)
    assert haversine_m(a, far) == pytest.approx(chord_distance_m(a, far), rel=1e-9)


@given(geo_points, geo_points)
def test_haversine_matches_chord_oracle(a, b):
    assert haversine_m(a, b) == pytest.approx(chord_distance_m(a, b), rel=1e-6, abs=1e-3)


def test_threshold_filter_examples():
    ev = Event.location("bob", GeoPoint(48.0, 11.0), 0)
    state, out = threshold_filter(None, ev, 100)
    assert out is ev and state == ev.point
    state, out = threshold_filter(state, Event.location("bob", GeoPoint(48.0005, 11.0), 1), 100)
    assert out is None and state == GeoPoint(48.0, 11.0)
    moved = Event.location("bob", GeoPoint(48.0010, 11.0), 2)
    state, out = threshold_filter(state, moved, 100)
    assert out is moved and state == moved.point


def test_threshold_must_be_positive():
    with pytest.raises(ValueError):
        threshold_filter(None, Event.location("u", GeoPoint(0, 0), 0), 0)
