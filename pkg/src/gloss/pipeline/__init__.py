"""Local event-pipeline architecture: events, components, assemblies."""

from .assembly import (
    Assembly,
    AssemblySpec,
    SERVER_TEMPLATE,
    SinkOutput,
    assemble,
    bus_publish,
    conduit_spec,
    inject,
    load_assembly_spec,
    parse_assembly_spec,
)
from .components import REGISTRY, Component, register
from .events import Event, EventKind, from_xml, to_xml
from .nmea import format_gga, haversine_m, nmea_adapt, parse_gga, threshold_filter

__all__ = [
    "Assembly", "AssemblySpec", "Component", "Event", "EventKind", "REGISTRY",
    "SERVER_TEMPLATE", "SinkOutput", "assemble", "bus_publish", "conduit_spec",
    "format_gga", "from_xml", "haversine_m", "inject", "load_assembly_spec",
    "nmea_adapt", "parse_assembly_spec", "parse_gga", "register",
    "threshold_filter", "to_xml",
]
