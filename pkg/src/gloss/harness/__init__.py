"""Scenario loading, deterministic replay and reporting."""

from .report import Report, emit_human, emit_machine, report_emit
from .scenario import Scenario, ScheduledInput, bundled_scenarios, load_scenario, parse_scenario
from .simulator import Clock, Simulator, run

__all__ = [
    "Clock", "Report", "Scenario", "ScheduledInput", "Simulator", "bundled_scenarios",
    "emit_human", "emit_machine", "load_scenario", "parse_scenario", "report_emit", "run",
]
