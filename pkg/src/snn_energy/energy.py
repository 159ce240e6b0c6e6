"""Energy model: technology profile, memory sizing and per-layer pricing.

Every access to a memory costs the SRAM access energy interpolated from the
memory's size; reads and writes cost the same. Each layer owns separate
weight, bias, potential and I/O memories. SNN layers exchange spikes
through fixed-depth FIFOs, FNN layers through full feature-map buffers.

Energies are accumulated in pJ and reported in nJ.
"""

from __future__ import annotations

import bisect
import json
import math
import os
from dataclasses import dataclass, field, replace
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import Any, Mapping, Optional, Sequence, Union

from . import addressing, memory, ops
from .activity import ActivityTrace, check_against
from .addressing import AddrCounts
from .errors import EstimatorError, ProfileError
from .memory import MemCounts
from .network import ConvLayer, EncodingScheme, Layer, Mode, NetworkSpec, NeuronModel
from .ops import OpCounts

PJ_PER_NJ = 1000.0
PROFILE_ENV = "SNN_ENERGY_TECH"


class Policy(str, Enum):
    CLAMP = "clamp"
    EXTRAPOLATE = "extrapolate"


@dataclass(frozen=True)
class TechProfile:
    e_add_pj: float = 0.1
    e_mul_pj: float = 3.1
    sram_points: tuple[tuple[float, float], ...] = ((8192, 10.0), (32768, 20.0), (1048576, 100.0))
    policy: Policy = Policy.CLAMP
    word_bits: int = 32
    fifo_depth: int = 1000
    name: str = "45nm"

    def __post_init__(self) -> None:
        object.__setattr__(self, "policy", Policy(self.policy))
        object.__setattr__(self, "sram_points", tuple((float(s), float(e)) for s, e in self.sram_points))
        if not (self.e_add_pj > 0 and self.e_mul_pj > 0):
            raise ProfileError("e_add_pj and e_mul_pj must be positive")
        if isinstance(self.word_bits, bool) or not isinstance(self.word_bits, int) or self.word_bits <= 0:
            raise ProfileError("word_bits must be a positive integer")
        if isinstance(self.fifo_depth, bool) or not isinstance(self.fifo_depth, int) or self.fifo_depth <= 0:
            raise ProfileError("fifo_depth must be a positive integer")
        pts = self.sram_points
        if len(pts) < 2:
            raise ProfileError("sram_points needs at least two (bytes, pJ) pairs")
        for (s0, e0), (s1, e1) in zip(pts, pts[1:]):
            if not (s1 > s0 and e1 > e0):
                raise ProfileError("sram_points must be strictly increasing in size and energy")
        if pts[0][0] <= 0 or pts[0][1] <= 0:
            raise ProfileError("sram_points must be positive")

    @property
    def word_bytes(self) -> float:
        return self.word_bits / 8

    @property
    def e_mac_pj(self) -> float:
        return self.e_add_pj + self.e_mul_pj

    def to_document(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "e_add_pj": self.e_add_pj,
            "e_mul_pj": self.e_mul_pj,
            "word_bits": self.word_bits,
            "sram_points": [list(p) for p in self.sram_points],
            "policy": self.policy.value,
            "fifo_depth": self.fifo_depth,
        }


def parse_profile(document: Union[str, bytes, Mapping[str, Any]]) -> TechProfile:
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ProfileError(f"malformed technology profile: {exc}") from None
    if not isinstance(document, Mapping):
        raise ProfileError("malformed technology profile: top level must be an object")
    known = {"name", "e_add_pj", "e_mul_pj", "word_bits", "sram_points", "policy", "fifo_depth", "note"}
    extra = set(document) - known
    if extra:
        raise ProfileError(f"malformed technology profile: unknown keys {sorted(extra)}")
    defaults = TechProfile()
    try:
        points = document.get("sram_points", defaults.sram_points)
        return TechProfile(
            e_add_pj=float(document.get("e_add_pj", defaults.e_add_pj)),
            e_mul_pj=float(document.get("e_mul_pj", defaults.e_mul_pj)),
            sram_points=tuple((p[0], p[1]) for p in points),
            policy=Policy(str(document.get("policy", defaults.policy.value)).lower()),
            word_bits=document.get("word_bits", defaults.word_bits),
            fifo_depth=document.get("fifo_depth", defaults.fifo_depth),
            name=str(document.get("name", "custom")),
        )
    except (TypeError, IndexError, ValueError) as exc:
        if isinstance(exc, ProfileError):
            raise
        raise ProfileError(f"malformed technology profile: {exc}") from None


def load_profile(path: Union[str, Path, None] = None) -> TechProfile:
    """Load a profile file; ``None`` falls back to $SNN_ENERGY_TECH, then the bundled 45nm profile."""
    if path is None:
        path = os.environ.get(PROFILE_ENV) or None
    if path is None:
        return parse_profile(resources.files("snn_energy").joinpath("data/tech_45nm.json").read_text())
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ProfileError(f"cannot read technology profile {path}: {exc.strerror}") from None
    return parse_profile(text)


def sram_out_of_range(profile: TechProfile, size_bytes: float) -> bool:
    return not (profile.sram_points[0][0] <= size_bytes <= profile.sram_points[-1][0])


def sram_access_energy(profile: TechProfile, size_bytes: float) -> float:
    """Energy (pJ) of one access to an SRAM of ``size_bytes``, piecewise-linear in size."""
    if not size_bytes > 0:
        raise ProfileError(f"memory size must be positive, got {size_bytes}")
    pts = profile.sram_points
    sizes = [p[0] for p in pts]
    if size_bytes <= sizes[0] or size_bytes >= sizes[-1]:
        if profile.policy is Policy.CLAMP:
            return pts[0][1] if size_bytes <= sizes[0] else pts[-1][1]
        (s0, e0), (s1, e1) = (pts[0], pts[1]) if size_bytes <= sizes[0] else (pts[-2], pts[-1])
    else:
        i = bisect.bisect_right(sizes, size_bytes)
        (s0, e0), (s1, e1) = pts[i - 1], pts[i]
    energy = e0 + (size_bytes - s0) * (e1 - e0) / (s1 - s0)
    return max(energy, 0.0)


@dataclass(frozen=True)
class MemorySizing:
    weights_bytes: float
    bias_bytes: float
    pot_bytes: float
    in_bytes: float
    out_bytes: float
    mode: Mode

    def as_dict(self) -> dict[str, float]:
        return {
            "weights": self.weights_bytes, "bias": self.bias_bytes, "potentials": self.pot_bytes,
            "in": self.in_bytes, "out": self.out_bytes,
        }


def layer_memory_sizes(layer: Layer, mode: Mode | str, profile: TechProfile,
                       fifo_depth: Optional[int] = None) -> MemorySizing:
    mode = Mode(mode)
    wb = profile.word_bytes
    if mode is Mode.SNN:
        fifo = (fifo_depth if fifo_depth is not None else profile.fifo_depth) * wb
        in_bytes = out_bytes = fifo
        pot_bytes = layer.output_size * wb
    else:
        in_bytes = layer.input_size * wb
        out_bytes = layer.output_size * wb
        pot_bytes = 0.0
    return MemorySizing(
        weights_bytes=layer.weight_count * wb,
        bias_bytes=layer.bias_count * wb,
        pot_bytes=pot_bytes,
        in_bytes=in_bytes,
        out_bytes=out_bytes,
        mode=mode,
    )


CATEGORIES = ("mem_pot", "mem_weights", "mem_bias", "mem_io", "ops", "addressing")


@dataclass(frozen=True)
class EnergyBreakdown:
    """Energies in nJ. ``total`` is always the sum of the six categories."""

    mem_pot: float = 0.0
    mem_weights: float = 0.0
    mem_bias: float = 0.0
    mem_io: float = 0.0
    ops: float = 0.0
    addressing: float = 0.0

    @property
    def memory(self) -> float:
        return math.fsum((self.mem_pot, self.mem_weights, self.mem_bias, self.mem_io))

    @property
    def total(self) -> float:
        return math.fsum(getattr(self, name) for name in CATEGORIES)

    def __add__(self, other: "EnergyBreakdown") -> "EnergyBreakdown":
        return EnergyBreakdown(*(getattr(self, n) + getattr(other, n) for n in CATEGORIES))

    @classmethod
    def sum(cls, parts: Sequence["EnergyBreakdown"]) -> "EnergyBreakdown":
        return cls(*(math.fsum(getattr(p, n) for p in parts) for n in CATEGORIES))


def _access_cost(profile: TechProfile, accesses: float, size_bytes: float, what: str) -> float:
    if accesses == 0:
        return 0.0
    if not size_bytes > 0:
        raise EstimatorError(f"inconsistent mode: {accesses:g} {what} accesses but no {what} memory in this sizing")
    return accesses * sram_access_energy(profile, size_bytes)


def compute_energy_pj(profile: TechProfile, counts: OpCounts | AddrCounts) -> float:
    return profile.e_mac_pj * counts.mac + profile.e_add_pj * counts.acc


def layer_energy(layer: Layer, op_counts: OpCounts, mem_counts: MemCounts, addr_counts: AddrCounts,
                 sizing: MemorySizing, profile: TechProfile) -> EnergyBreakdown:
    if sizing.mode is Mode.FNN and mem_counts.potentials > 0:
        raise EstimatorError("inconsistent mode: potential accesses priced with an FNN sizing")
    pot = _access_cost(profile, mem_counts.potentials, sizing.pot_bytes, "potential")
    weights = _access_cost(profile, mem_counts.rd_weights, sizing.weights_bytes, "weight")
    bias = _access_cost(profile, mem_counts.rd_bias, sizing.bias_bytes, "bias")
    io = (_access_cost(profile, mem_counts.rd_in, sizing.in_bytes, "input")
          + _access_cost(profile, mem_counts.wr_out, sizing.out_bytes, "output"))
    return EnergyBreakdown(
        mem_pot=pot / PJ_PER_NJ,
        mem_weights=weights / PJ_PER_NJ,
        mem_bias=bias / PJ_PER_NJ,
        mem_io=io / PJ_PER_NJ,
        ops=compute_energy_pj(profile, op_counts) / PJ_PER_NJ,
        addressing=compute_energy_pj(profile, addr_counts) / PJ_PER_NJ,
    )


# ---------------------------------------------------------------------------
# Whole-network estimation
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EstimateOptions:
    # Dense SNN layers: theta * N_in * N_out ACCs and no reset term.
    strict_paper: bool = False
    # How the first SNN layer integrates a frame-encoded input:
    #   "event": every presented input value is an incoming event (ACC fan-out)
    #   "dense": dense MACs over the input, repeated once per presented frame
    first_layer: str = "event"

    def __post_init__(self) -> None:
        if self.first_layer not in ("event", "dense"):
            raise EstimatorError(f"first_layer must be 'event' or 'dense', got {self.first_layer!r}")


@dataclass(frozen=True)
class LayerEnergy:
    index: int
    layer: Layer
    ops: OpCounts
    mem: MemCounts
    addr: AddrCounts
    sizing: MemorySizing
    energy: EnergyBreakdown
    # memories whose size falls outside the interpolation table
    out_of_range: tuple[str, ...] = ()
    dense_encoding: bool = False

    @property
    def label(self) -> str:
        return f"L{self.index + 1}:{self.layer.kind}"


@dataclass(frozen=True)
class EnergyReport:
    network: str
    mode: Mode
    layers: tuple[LayerEnergy, ...]
    timesteps: int
    neuron: NeuronModel
    policy: Policy
    options: EstimateOptions = field(default_factory=EstimateOptions)

    @property
    def aggregate(self) -> EnergyBreakdown:
        return EnergyBreakdown.sum([le.energy for le in self.layers])

    @property
    def total(self) -> float:
        return self.aggregate.total

    @property
    def ops(self) -> OpCounts:
        total = OpCounts()
        for le in self.layers:
            total = total + le.ops
        return total

    @property
    def mem(self) -> MemCounts:
        total = MemCounts()
        for le in self.layers:
            total = total + le.mem
        return total

    @property
    def addr(self) -> AddrCounts:
        total = AddrCounts()
        for le in self.layers:
            total = total + le.addr
        return total

    @property
    def out_of_range_layers(self) -> tuple[str, ...]:
        return tuple(f"{le.label}({','.join(le.out_of_range)})" for le in self.layers if le.out_of_range)


def _fnn_counts(layer: Layer) -> tuple[OpCounts, MemCounts, AddrCounts]:
    if isinstance(layer, ConvLayer):
        return ops.conv_ops_fnn(layer), memory.conv_mem_fnn(layer), addressing.conv_addr_fnn(layer)
    return ops.fc_ops_fnn(layer), memory.fc_mem_fnn(layer), addressing.fc_addr_fnn(layer)


def _snn_counts(layer: Layer, theta_in: float, theta_out: float, timesteps: int, neuron: NeuronModel,
                strict_paper: bool) -> tuple[OpCounts, MemCounts, AddrCounts]:
    if isinstance(layer, ConvLayer):
        return (ops.conv_ops_snn(layer, theta_in, theta_out, timesteps, neuron),
                memory.conv_mem_snn(layer, theta_in, theta_out, timesteps),
                addressing.conv_addr_snn(layer, theta_in))
    return (ops.fc_ops_snn(layer, theta_in, theta_out, timesteps, neuron, strict_paper),
            memory.fc_mem_snn(layer, theta_in, theta_out, timesteps),
            addressing.fc_addr_snn(layer, theta_in))


def encoding_layer_counts(layer: Layer, theta_in: float, theta_out: float, timesteps: int,
                          neuron: NeuronModel) -> tuple[OpCounts, MemCounts, AddrCounts]:
    """First SNN layer fed with analog frames, integrated densely.

    ``theta_in / input_size`` frames are presented; each costs one dense
    pass. Potentials are read and rewritten once per neuron per timestep,
    outputs are spikes.
    """
    ops.check_theta(theta_in, theta_out)
    frames = theta_in / layer.input_size
    d_ops, d_mem, d_addr = _fnn_counts(layer)
    per_step = timesteps * layer.output_size
    op_counts = OpCounts(
        mac=d_ops.mac * frames + (per_step if NeuronModel(neuron).leaky else 0),
        acc=d_ops.acc * frames + theta_out,
    )
    mem_counts = MemCounts(
        rd_in=d_mem.rd_in * frames,
        rd_weights=d_mem.rd_weights * frames,
        rd_bias=d_mem.rd_bias * frames,
        rd_pot=per_step,
        wr_out=theta_out,
        wr_pot=per_step,
    )
    addr_counts = AddrCounts(mac=d_addr.mac * frames, acc=d_addr.acc * frames)
    return op_counts, mem_counts, addr_counts


def _out_of_range(profile: TechProfile, sizing: MemorySizing, mem: MemCounts) -> tuple[str, ...]:
    used = {
        "weights": mem.rd_weights, "bias": mem.rd_bias, "potentials": mem.potentials,
        "in": mem.rd_in, "out": mem.wr_out,
    }
    return tuple(name for name, size in sizing.as_dict().items()
                 if used[name] > 0 and sram_out_of_range(profile, size))


def network_energy(spec: NetworkSpec, trace: Optional[ActivityTrace], profile: TechProfile,
                   options: Optional[EstimateOptions] = None) -> EnergyReport:
    """Price every layer of ``spec`` in its own mode and collect a report.

    FNN estimates ignore ``trace``. SNN estimates use the per-timestep view
    of the network and require a trace with one entry per layer.
    """
    options = options or EstimateOptions()
    layers: list[LayerEnergy] = []
    if spec.mode is Mode.FNN:
        for idx, layer in enumerate(spec.layers):
            op_c, mem_c, addr_c = _fnn_counts(layer)
            op_c = op_c + OpCounts(acc=ops.readout_acc(layer, spiking=False))
            sizing = layer_memory_sizes(layer, Mode.FNN, profile)
            layers.append(LayerEnergy(
                idx, layer, op_c, mem_c, addr_c, sizing,
                layer_energy(layer, op_c, mem_c, addr_c, sizing, profile),
                _out_of_range(profile, sizing, mem_c),
            ))
    else:
        if trace is None:
            raise EstimatorError("an SNN estimate needs an activity trace or a spike rate")
        view = spec.timestep_view()
        check_against(trace, view)
        dense_first = options.first_layer == "dense" and spec.encoding is not EncodingScheme.EVENT_VOXEL
        for idx, (layer, th_in, th_out) in enumerate(zip(view.layers, trace.layer_inputs(), trace.theta)):
            sizing = layer_memory_sizes(layer, Mode.SNN, profile)
            dense = dense_first and idx == 0
            if dense:
                op_c, mem_c, addr_c = encoding_layer_counts(layer, th_in, th_out, view.timesteps, view.neuron)
                sizing = replace(sizing, in_bytes=layer.input_size * profile.word_bytes)
            else:
                op_c, mem_c, addr_c = _snn_counts(layer, th_in, th_out, view.timesteps, view.neuron,
                                                  options.strict_paper)
            op_c = op_c + OpCounts(acc=ops.readout_acc(layer, spiking=True, theta_out=th_out))
            layers.append(LayerEnergy(
                idx, layer, op_c, mem_c, addr_c, sizing,
                layer_energy(layer, op_c, mem_c, addr_c, sizing, profile),
                _out_of_range(profile, sizing, mem_c),
                dense,
            ))
    return EnergyReport(
        network=spec.name,
        mode=spec.mode,
        layers=tuple(layers),
        timesteps=spec.effective_timesteps,
        neuron=spec.neuron,
        policy=profile.policy,
        options=options,
    )


def compare(report_fnn: EnergyReport, report_snn: EnergyReport) -> float:
    """E_FNN / E_SNN for two reports of the same architecture."""
    if len(report_fnn.layers) != len(report_snn.layers):
        raise EstimatorError("compare needs two reports of the same architecture")
    snn_total = report_snn.total
    if snn_total == 0:
        raise EstimatorError("cannot compare against a zero SNN total")
    return report_fnn.total / snn_total
