"""Analytical energy estimation for formal (FNN) and spiking (SNN) neural networks."""

from .activity import ActivityTrace, input_presentations, load_trace, load_trace_file, synthesize_uniform
from .addressing import AddrCounts
from .energy import (
    EnergyBreakdown,
    EnergyReport,
    EstimateOptions,
    Policy,
    TechProfile,
    compare,
    load_profile,
    network_energy,
    sram_access_energy,
)
from .errors import EstimatorError, NetworkError, ProfileError, TraceError
from .memory import MemCounts
from .network import (
    ConvLayer,
    EncodingScheme,
    FcLayer,
    Mode,
    NetworkSpec,
    NeuronModel,
    load_network,
    parse_network,
)
from .ops import OpCounts
from .study import CASES, estimate_pair, load_case, sweep

__all__ = [
    "ActivityTrace", "AddrCounts", "CASES", "ConvLayer", "EncodingScheme", "EnergyBreakdown",
    "EnergyReport", "EstimateOptions", "EstimatorError", "FcLayer", "MemCounts", "Mode",
    "NetworkError", "NetworkSpec", "NeuronModel", "OpCounts", "Policy", "ProfileError",
    "TechProfile", "TraceError", "compare", "estimate_pair", "input_presentations", "load_case",
    "load_network", "load_profile", "load_trace", "load_trace_file", "network_energy",
    "parse_network", "sram_access_energy", "sweep", "synthesize_uniform",
]
