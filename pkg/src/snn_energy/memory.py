"""Memory-access counts per layer, split into the reported categories.

All counts are per inference. Per-timestep housekeeping (bias and potential
updates) is multiplied by ``timesteps``; spike-driven terms use the
aggregate spike counts.
"""

from __future__ import annotations

from dataclasses import dataclass, fields

from .network import ConvLayer, FcLayer, Layer
from .ops import check_theta, check_timesteps


@dataclass(frozen=True)
class MemCounts:
    rd_in: float = 0.0
    rd_weights: float = 0.0
    rd_bias: float = 0.0
    rd_pot: float = 0.0
    wr_out: float = 0.0
    wr_pot: float = 0.0

    def __add__(self, other: "MemCounts") -> "MemCounts":
        return MemCounts(*(getattr(self, f.name) + getattr(other, f.name) for f in fields(self)))

    @property
    def potentials(self) -> float:
        return self.rd_pot + self.wr_pot

    @property
    def io(self) -> float:
        return self.rd_in + self.wr_out

    @property
    def total(self) -> float:
        return self.rd_in + self.rd_weights + self.rd_bias + self.rd_pot + self.wr_out + self.wr_pot


def conv_mem_fnn(layer: ConvLayer) -> MemCounts:
    n = layer.output_size
    taps = n * layer.c_in * layer.kernel_area
    return MemCounts(
        rd_in=taps,
        rd_weights=taps,
        rd_bias=n if layer.has_bias else 0,
        wr_out=n,
    )


def _snn_mem(layer: Layer, theta_in: float, theta_out: float, timesteps: int) -> MemCounts:
    check_theta(theta_in, theta_out)
    check_timesteps(timesteps)
    fanout = theta_in * layer.spike_fanout
    per_step = timesteps * layer.output_size
    return MemCounts(
        rd_in=theta_in,
        rd_weights=fanout,
        rd_bias=per_step if layer.has_bias else 0,
        rd_pot=fanout + per_step,
        wr_out=theta_out,
        wr_pot=fanout + per_step,
    )


def conv_mem_snn(layer: ConvLayer, theta_in: float, theta_out: float, timesteps: int) -> MemCounts:
    """Each input spike reads one weight and read-modify-writes one potential per fan-out target.

    Every timestep also reads and rewrites each potential once (bias,
    leak, threshold) and reads each biased neuron's bias.
    """
    return _snn_mem(layer, theta_in, theta_out, timesteps)


def fc_mem_fnn(layer: FcLayer) -> MemCounts:
    return MemCounts(
        rd_in=layer.n_in,
        rd_weights=layer.n_in * layer.n_out,
        rd_bias=layer.n_out if layer.has_bias else 0,
        wr_out=layer.n_out,
    )


def fc_mem_snn(layer: FcLayer, theta_in: float, theta_out: float, timesteps: int) -> MemCounts:
    return _snn_mem(layer, theta_in, theta_out, timesteps)
