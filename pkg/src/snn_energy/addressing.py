"""Index arithmetic needed to locate operands.

Dense traversal only increments running indices (ACC). Event-driven
traversal computes the first output position of every incoming spike with
two multiplications, then increments through the kernel.
"""

from __future__ import annotations

from dataclasses import dataclass

from .network import ConvLayer, FcLayer
from .ops import check_theta


@dataclass(frozen=True)
class AddrCounts:
    mac: float = 0.0
    acc: float = 0.0

    def __add__(self, other: "AddrCounts") -> "AddrCounts":
        return AddrCounts(self.mac + other.mac, self.acc + other.acc)


def conv_addr_fnn(layer: ConvLayer) -> AddrCounts:
    # the weight index runs over one filter's kernel positions, without C_in
    return AddrCounts(acc=layer.input_size + layer.output_size + layer.c_out * layer.kernel_area)


def conv_addr_snn(layer: ConvLayer, theta_in: float) -> AddrCounts:
    check_theta(theta_in)
    return AddrCounts(mac=2 * theta_in, acc=theta_in * layer.spike_fanout)


def fc_addr_fnn(layer: FcLayer) -> AddrCounts:
    return AddrCounts(acc=layer.n_in + layer.n_out)


def fc_addr_snn(layer: FcLayer, theta_in: float) -> AddrCounts:
    check_theta(theta_in)
    return AddrCounts(acc=theta_in * layer.n_out)
