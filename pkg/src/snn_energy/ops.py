"""Synaptic operation counts (MAC / ACC) per layer.

SNN counts take per-inference spike totals: ``theta_in`` spikes received,
``theta_out`` spikes emitted, over ``timesteps`` steps.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import TraceError
from .network import ConvLayer, FcLayer, Layer, NeuronModel


def check_theta(theta_in: float, theta_out: float = 0.0) -> None:
    for name, value in (("theta_in", theta_in), ("theta_out", theta_out)):
        if not math.isfinite(value) or value < 0:
            raise TraceError(f"negative entry: {name} = {value}")


def check_timesteps(timesteps: float) -> None:
    if not timesteps >= 1:
        raise TraceError(f"timesteps must be >= 1, got {timesteps}")


def _check_spiking(neuron: NeuronModel) -> None:
    if not NeuronModel(neuron).spiking:
        raise TraceError("SNN counts need a spiking neuron model (if or lif)")


@dataclass(frozen=True)
class OpCounts:
    mac: float = 0.0
    acc: float = 0.0

    def __add__(self, other: "OpCounts") -> "OpCounts":
        return OpCounts(self.mac + other.mac, self.acc + other.acc)


def conv_ops_fnn(layer: ConvLayer) -> OpCounts:
    n = layer.output_size
    return OpCounts(mac=n * layer.c_in * layer.kernel_area, acc=n if layer.has_bias else 0)


def conv_ops_snn(layer: ConvLayer, theta_in: float, theta_out: float, timesteps: int,
                 neuron: NeuronModel = NeuronModel.IF) -> OpCounts:
    """Integration of each input spike over its fan-out, per-step bias, one ACC per reset.

    The leak multiply (one per neuron per timestep) applies to LIF only.
    """
    check_theta(theta_in, theta_out)
    check_timesteps(timesteps)
    _check_spiking(neuron)
    per_step = timesteps * layer.output_size
    acc = theta_in * layer.spike_fanout + (per_step if layer.has_bias else 0) + theta_out
    mac = per_step if NeuronModel(neuron).leaky else 0
    return OpCounts(mac=mac, acc=acc)


def fc_ops_fnn(layer: FcLayer) -> OpCounts:
    return OpCounts(mac=layer.n_in * layer.n_out, acc=layer.n_out if layer.has_bias else 0)


def fc_ops_snn(layer: FcLayer, theta_in: float, theta_out: float, timesteps: int,
               neuron: NeuronModel = NeuronModel.IF, strict_paper: bool = False) -> OpCounts:
    """Dense-layer SNN counts.

    Default: one ACC per (input spike, output neuron) pair, per-step bias and
    one reset ACC per output spike. ``strict_paper`` reproduces the published
    expression verbatim: ``theta_in * N_in * N_out + T * N_out`` with no reset
    term and an unconditional bias term.
    """
    check_theta(theta_in, theta_out)
    check_timesteps(timesteps)
    _check_spiking(neuron)
    per_step = timesteps * layer.n_out
    if strict_paper:
        acc = theta_in * layer.n_in * layer.n_out + per_step
    else:
        acc = theta_in * layer.n_out + (per_step if layer.has_bias else 0) + theta_out
    mac = per_step if NeuronModel(neuron).leaky else 0
    return OpCounts(mac=mac, acc=acc)


def readout_acc(layer: Layer, spiking: bool, theta_out: float = 0.0) -> float:
    """ACCs of a summing output head.

    A formal head sums every output element over space; a spiking head
    increments a class counter once per emitted spike.
    """
    if not layer.readout:
        return 0.0
    return float(theta_out) if spiking else float(layer.output_size)
