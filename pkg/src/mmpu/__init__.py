"""Simulator and single-row compiler for a memristive memory processing unit."""

from .costmodel import CpuConfig, PimConfig, compare
from .crossbar import Crossbar, GateEval, Orientation, eval_gate
from .device import DEFAULT_PARAMS, DeviceParams, VariationSpec, sample_params
from .errors import MMPUError
from .executor import StatsReport, load_inputs, read_outputs, run
from .isa import Init, Nor, Read, Trace, Write, emit_trace, parse_trace, validate_trace
from .mapper import Mapping, compile_dag, schedule
from .netlist import GateDag, Kind, eval_dag, lower_to_nor, parse_netlist
from .reliability import FailureStats, check_margins, monte_carlo

__all__ = [
    "CpuConfig", "PimConfig", "compare",
    "Crossbar", "GateEval", "Orientation", "eval_gate",
    "DEFAULT_PARAMS", "DeviceParams", "VariationSpec", "sample_params",
    "MMPUError",
    "StatsReport", "load_inputs", "read_outputs", "run",
    "Init", "Nor", "Read", "Trace", "Write", "emit_trace", "parse_trace", "validate_trace",
    "Mapping", "compile_dag", "schedule",
    "GateDag", "Kind", "eval_dag", "lower_to_nor", "parse_netlist",
    "FailureStats", "check_margins", "monte_carlo",
]
