"""Instrumented reference executors used as ground truth for the closed-form counts.

The dense executors run the canonical loop nest of a formal layer; the
event executors integrate input spikes one by one into membrane
potentials. Both compute real values and bump a counter at every
arithmetic operation and memory touch, following these hardware rules:

* operands live in SRAM, only the local accumulator is free;
* dense traversal advances three running indices (input, output, weights);
* an input spike costs two multiplications to locate its first target,
  then one index increment per target;
* each timestep every potential is read and rewritten once (leak, bias,
  threshold, reset folded into that update).

The event executor gives every spike the uniform fan-out
``C_out * ceil(Kh/S) * ceil(Kw/S)``: potentials carry a halo so that
targets past the border (or past the kernel for S > 1) are still touched.
``boundary_exact=True`` drops those targets instead.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from . import addressing, memory, ops
from .network import ConvLayer, FcLayer, Layer, Mode, NeuronModel

MAX_WORK = 10**6

THRESHOLD = 1.0
LEAK = 0.9


class OracleError(ValueError):
    pass


@dataclass
class InstrumentedCounters:
    mac: int = 0
    acc: int = 0
    rd_in: int = 0
    rd_weights: int = 0
    rd_bias: int = 0
    rd_pot: int = 0
    wr_out: int = 0
    wr_pot: int = 0
    addr_mac: int = 0
    addr_acc: int = 0

    def as_dict(self) -> dict[str, int]:
        return asdict(self)


CATEGORIES = tuple(InstrumentedCounters.__dataclass_fields__)


class DenseRun(NamedTuple):
    counters: InstrumentedCounters
    output: np.ndarray


class EventRun(NamedTuple):
    counters: InstrumentedCounters
    theta_out: int
    spikes_out: list
    potentials: np.ndarray


def _check_size(work: int) -> None:
    if work > MAX_WORK:
        raise OracleError(f"instance too large for the reference executor ({work} > {MAX_WORK})")


def _same_padding(size_in: int, size_out: int, kernel: int, stride: int) -> int:
    total = max((size_out - 1) * stride + kernel - size_in, 0)
    return total // 2


def _conv_params(layer: ConvLayer, weights, bias, rng):
    rng = rng if rng is not None else np.random.default_rng(0)
    if weights is None:
        weights = rng.uniform(-0.5, 1.0, size=(layer.c_out, layer.c_in, layer.h_kernel, layer.w_kernel))
    if bias is None:
        bias = rng.uniform(-0.2, 0.5, size=layer.c_out) if layer.has_bias else np.zeros(layer.c_out)
    return np.asarray(weights, dtype=float), np.asarray(bias, dtype=float)


def _fc_params(layer: FcLayer, weights, bias, rng):
    rng = rng if rng is not None else np.random.default_rng(0)
    if weights is None:
        weights = rng.uniform(-0.5, 1.0, size=(layer.n_out, layer.n_in))
    if bias is None:
        bias = rng.uniform(-0.2, 0.5, size=layer.n_out) if layer.has_bias else np.zeros(layer.n_out)
    return np.asarray(weights, dtype=float), np.asarray(bias, dtype=float)


# ---------------------------------------------------------------------------
# Dense (formal) executors
# ---------------------------------------------------------------------------


def run_dense_conv(layer: ConvLayer, counters: Optional[InstrumentedCounters] = None, x=None,
                   weights=None, bias=None, rng=None) -> DenseRun:
    """Loop nest: output position -> input channel -> kernel position, ReLU output."""
    _check_size(layer.output_size * layer.c_in * layer.kernel_area + layer.input_size)
    c = counters if counters is not None else InstrumentedCounters()
    rng = rng if rng is not None else np.random.default_rng(0)
    w, b = _conv_params(layer, weights, bias, rng)
    if x is None:
        x = rng.uniform(0.0, 1.0, size=(layer.c_in, layer.h_in, layer.w_in))
    x = np.asarray(x, dtype=float)
    S = layer.stride
    pt = _same_padding(layer.h_in, layer.h_out, layer.h_kernel, S)
    pl = _same_padding(layer.w_in, layer.w_out, layer.w_kernel, S)
    # zero-padded input buffer; padded taps are read like any other
    h_pad = max(layer.h_in + pt, (layer.h_out - 1) * S + layer.h_kernel)
    w_pad = max(layer.w_in + pl, (layer.w_out - 1) * S + layer.w_kernel)
    xp = np.zeros((layer.c_in, h_pad, w_pad))
    xp[:, pt:pt + layer.h_in, pl:pl + layer.w_in] = x

    # input index sweeps the input once as it is streamed in
    c.addr_acc += layer.input_size
    # weight index sweeps each filter's kernel positions
    c.addr_acc += layer.c_out * layer.kernel_area

    out = np.zeros((layer.c_out, layer.h_out, layer.w_out))
    for oc in range(layer.c_out):
        for oy in range(layer.h_out):
            for ox in range(layer.w_out):
                accum = 0.0
                for ic in range(layer.c_in):
                    for ky in range(layer.h_kernel):
                        for kx in range(layer.w_kernel):
                            c.rd_in += 1
                            c.rd_weights += 1
                            c.mac += 1
                            accum += xp[ic, oy * S + ky, ox * S + kx] * w[oc, ic, ky, kx]
                if layer.has_bias:
                    c.rd_bias += 1
                    c.acc += 1
                    accum += b[oc]
                c.addr_acc += 1
                c.wr_out += 1
                out[oc, oy, ox] = max(accum, 0.0)
    return DenseRun(c, out)


def run_dense_fc(layer: FcLayer, counters: Optional[InstrumentedCounters] = None, x=None,
                 weights=None, bias=None, rng=None) -> DenseRun:
    """Input-major traversal: each input is read once and broadcast to every output accumulator."""
    _check_size(layer.n_in * layer.n_out)
    c = counters if counters is not None else InstrumentedCounters()
    rng = rng if rng is not None else np.random.default_rng(0)
    w, b = _fc_params(layer, weights, bias, rng)
    if x is None:
        x = rng.uniform(0.0, 1.0, size=layer.n_in)
    x = np.asarray(x, dtype=float).reshape(-1)
    accum = np.zeros(layer.n_out)
    for i in range(layer.n_in):
        c.addr_acc += 1
        c.rd_in += 1
        xi = x[i]
        for j in range(layer.n_out):
            c.rd_weights += 1
            c.mac += 1
            accum[j] += xi * w[j, i]
    for j in range(layer.n_out):
        if layer.has_bias:
            c.rd_bias += 1
            c.acc += 1
            accum[j] += b[j]
        c.addr_acc += 1
        c.wr_out += 1
    return DenseRun(c, np.maximum(accum, 0.0))


# ---------------------------------------------------------------------------
# Event-driven (spiking) executors
# ---------------------------------------------------------------------------


def _housekeeping(c: InstrumentedCounters, v: np.ndarray, b: np.ndarray, has_bias: bool,
                  neuron: NeuronModel, threshold: float, leak: float, t: int, emitted: list) -> None:
    """One timestep of per-neuron update for real (non-halo) potentials ``v`` (channel-first)."""
    for idx in np.ndindex(v.shape):
        c.rd_pot += 1
        val = v[idx]
        if neuron.leaky:
            c.mac += 1
            val *= leak
        if has_bias:
            c.rd_bias += 1
            c.acc += 1
            val += b[idx[0]]
        if val >= threshold:
            c.acc += 1  # reset
            val = 0.0
            c.wr_out += 1
            emitted.append((t,) + tuple(int(i) for i in idx))
        v[idx] = val
        c.wr_pot += 1


def _spikes_by_step(spikes: Sequence[tuple], timesteps: int, bounds: tuple[int, ...]) -> list[list[tuple]]:
    per_step: list[list[tuple]] = [[] for _ in range(timesteps)]
    for spike in spikes:
        if len(spike) != len(bounds) + 1:
            raise OracleError(f"invalid spike {spike!r}: expected {len(bounds) + 1} coordinates")
        t, *pos = spike
        if not 0 <= t < timesteps:
            raise OracleError(f"invalid spike {spike!r}: timestep outside [0, {timesteps})")
        for p, bound in zip(pos, bounds):
            if not 0 <= p < bound:
                raise OracleError(f"invalid spike {spike!r}: coordinate outside layer input bounds")
        per_step[t].append(tuple(pos))
    return per_step


def run_event_conv(layer: ConvLayer, spikes: Sequence[tuple], timesteps: int,
                   neuron: NeuronModel = NeuronModel.IF, counters: Optional[InstrumentedCounters] = None,
                   weights=None, bias=None, threshold: float = THRESHOLD, leak: float = LEAK,
                   boundary_exact: bool = False, rng=None) -> EventRun:
    """Integrate ``(t, channel, y, x)`` input spikes; returns counters and emitted spike count."""
    neuron = NeuronModel(neuron)
    if not neuron.spiking:
        raise OracleError("event executor needs an IF or LIF neuron")
    if timesteps < 1:
        raise OracleError("timesteps must be >= 1")
    _check_size(len(spikes) * layer.spike_fanout + timesteps * layer.output_size)
    per_step = _spikes_by_step(spikes, timesteps, (layer.c_in, layer.h_in, layer.w_in))
    c = counters if counters is not None else InstrumentedCounters()
    w, b = _conv_params(layer, weights, bias, rng)
    S = layer.stride
    pt = _same_padding(layer.h_in, layer.h_out, layer.h_kernel, S)
    pl = _same_padding(layer.w_in, layer.w_out, layer.w_kernel, S)
    nky = math.ceil(layer.h_kernel / S)
    nkx = math.ceil(layer.w_kernel / S)
    # halo of nky / nkx on each side absorbs targets past the border
    v_all = np.zeros((layer.c_out, layer.h_out + 2 * nky, layer.w_out + 2 * nkx))
    v = v_all[:, nky:nky + layer.h_out, nkx:nkx + layer.w_out]
    emitted: list = []

    for t in range(timesteps):
        for ic, y, x in per_step[t]:
            c.rd_in += 1
            # first target (bottom-right-most output covering the spike)
            c.addr_mac += 2
            oy_hi = (y + pt) // S
            ox_hi = (x + pl) // S
            for oc in range(layer.c_out):
                for dy in range(nky):
                    oy = oy_hi - dy
                    ky = y + pt - oy * S
                    for dx in range(nkx):
                        ox = ox_hi - dx
                        kx = x + pl - ox * S
                        inside_kernel = ky < layer.h_kernel and kx < layer.w_kernel
                        if boundary_exact and not (inside_kernel and 0 <= oy < layer.h_out and 0 <= ox < layer.w_out):
                            continue
                        c.addr_acc += 1
                        c.rd_weights += 1
                        c.rd_pot += 1
                        weight = w[oc, ic, ky, kx] if inside_kernel else 0.0
                        c.acc += 1
                        v_all[oc, oy + nky, ox + nkx] += weight
                        c.wr_pot += 1
        _housekeeping(c, v, b, layer.has_bias, neuron, threshold, leak, t, emitted)
    return EventRun(c, len(emitted), emitted, v.copy())


def run_event_fc(layer: FcLayer, spikes: Sequence[tuple], timesteps: int,
                 neuron: NeuronModel = NeuronModel.IF, counters: Optional[InstrumentedCounters] = None,
                 weights=None, bias=None, threshold: float = THRESHOLD, leak: float = LEAK,
                 rng=None) -> EventRun:
    """Integrate ``(t, index)`` input spikes into N_out potentials."""
    neuron = NeuronModel(neuron)
    if not neuron.spiking:
        raise OracleError("event executor needs an IF or LIF neuron")
    if timesteps < 1:
        raise OracleError("timesteps must be >= 1")
    _check_size(len(spikes) * layer.n_out + timesteps * layer.n_out)
    per_step = _spikes_by_step(spikes, timesteps, (layer.n_in,))
    c = counters if counters is not None else InstrumentedCounters()
    w, b = _fc_params(layer, weights, bias, rng)
    v = np.zeros(layer.n_out)
    emitted: list = []
    for t in range(timesteps):
        for (i,) in per_step[t]:
            c.rd_in += 1
            for j in range(layer.n_out):
                c.addr_acc += 1
                c.rd_weights += 1
                c.rd_pot += 1
                c.acc += 1
                v[j] += w[j, i]
                c.wr_pot += 1
        _housekeeping(c, v, b, layer.has_bias, neuron, threshold, leak, t, emitted)
    return EventRun(c, len(emitted), emitted, v.copy())


# ---------------------------------------------------------------------------
# Comparison against the closed forms
# ---------------------------------------------------------------------------


class Verdict(NamedTuple):
    category: str
    analytical: float
    measured: int
    equal: bool


def analytical_counters(layer: Layer, mode: Mode, theta_in: float = 0, theta_out: float = 0,
                        timesteps: int = 1, neuron: NeuronModel = NeuronModel.IF,
                        strict_paper: bool = False) -> dict[str, float]:
    mode = Mode(mode)
    conv = isinstance(layer, ConvLayer)
    if mode is Mode.FNN:
        if conv:
            o, m, a = ops.conv_ops_fnn(layer), memory.conv_mem_fnn(layer), addressing.conv_addr_fnn(layer)
        else:
            o, m, a = ops.fc_ops_fnn(layer), memory.fc_mem_fnn(layer), addressing.fc_addr_fnn(layer)
    elif conv:
        o = ops.conv_ops_snn(layer, theta_in, theta_out, timesteps, neuron)
        m = memory.conv_mem_snn(layer, theta_in, theta_out, timesteps)
        a = addressing.conv_addr_snn(layer, theta_in)
    else:
        o = ops.fc_ops_snn(layer, theta_in, theta_out, timesteps, neuron, strict_paper)
        m = memory.fc_mem_snn(layer, theta_in, theta_out, timesteps)
        a = addressing.fc_addr_snn(layer, theta_in)
    return {
        "mac": o.mac, "acc": o.acc,
        "rd_in": m.rd_in, "rd_weights": m.rd_weights, "rd_bias": m.rd_bias,
        "rd_pot": m.rd_pot, "wr_out": m.wr_out, "wr_pot": m.wr_pot,
        "addr_mac": a.mac, "addr_acc": a.acc,
    }


def verify_layer(layer: Layer, mode: Mode | str, spikes: Sequence[tuple] = (), timesteps: int = 1,
                 neuron: NeuronModel | str = NeuronModel.IF, strict_paper: bool = False,
                 rng=None) -> list[Verdict]:
    """Run the matching executor and compare every counter with the closed forms.

    Mismatches are returned as data. SNN closed forms are fed the spike
    count of ``spikes`` and the executor's own emitted spike count.
    """
    mode = Mode(mode)
    neuron = NeuronModel(neuron)
    conv = isinstance(layer, ConvLayer)
    if mode is Mode.FNN:
        run = run_dense_conv(layer, rng=rng) if conv else run_dense_fc(layer, rng=rng)
        expected = analytical_counters(layer, mode)
    else:
        if conv:
            run = run_event_conv(layer, spikes, timesteps, neuron, rng=rng)
        else:
            run = run_event_fc(layer, spikes, timesteps, neuron, rng=rng)
        expected = analytical_counters(layer, mode, len(spikes), run.theta_out, timesteps, neuron, strict_paper)
    measured = run.counters.as_dict()
    return [Verdict(cat, expected[cat], measured[cat], expected[cat] == measured[cat]) for cat in CATEGORIES]


# ---------------------------------------------------------------------------
# Randomized validation
# ---------------------------------------------------------------------------

DENSITIES = (0.0, 0.1, 0.5, 1.0)


@dataclass(frozen=True)
class Instance:
    layer: Layer
    mode: Mode
    timesteps: int
    neuron: NeuronModel
    spikes: tuple
    density: float

    def describe(self) -> str:
        layer = self.layer
        if isinstance(layer, ConvLayer):
            shape = (f"conv {layer.c_in}x{layer.h_in}x{layer.w_in}->{layer.c_out}x{layer.h_out}x{layer.w_out} "
                     f"k{layer.h_kernel}x{layer.w_kernel} s{layer.stride}")
        else:
            shape = f"fc {layer.n_in}->{layer.n_out}"
        bias = "bias" if layer.has_bias else "nobias"
        if self.mode is Mode.FNN:
            return f"{shape} {bias} fnn"
        return f"{shape} {bias} snn T={self.timesteps} {self.neuron.value} density={self.density} spikes={len(self.spikes)}"


def _random_spikes(rng: np.random.Generator, timesteps: int, shape: tuple[int, ...], density: float) -> tuple:
    mask = rng.random((timesteps,) + shape) < density
    return tuple(tuple(int(i) for i in idx) for idx in np.argwhere(mask))


def random_instance(rng: np.random.Generator, kind: str, mode: Mode, density: float) -> Instance:
    """Small instance: channels <= 4, spatial <= 8, T <= 3."""
    has_bias = bool(rng.integers(0, 2))
    if kind == "conv":
        c_in, c_out = (int(v) for v in rng.integers(1, 5, size=2))
        h_in, w_in = (int(v) for v in rng.integers(1, 9, size=2))
        kh, kw = (int(v) for v in rng.integers(1, 4, size=2))
        stride = int(rng.integers(1, 3))
        layer = ConvLayer(c_out=c_out, h_kernel=kh, w_kernel=kw, stride=stride, c_in=c_in,
                          h_in=h_in, w_in=w_in, h_out=math.ceil(h_in / stride),
                          w_out=math.ceil(w_in / stride), has_bias=has_bias)
        in_shape: tuple[int, ...] = (c_in, h_in, w_in)
    else:
        n_in = int(rng.integers(1, 4 * 8 + 1))
        n_out = int(rng.integers(1, 4 * 4 + 1))
        layer = FcLayer(n_out=n_out, n_in=n_in, has_bias=has_bias)
        in_shape = (n_in,)
    if mode is Mode.FNN:
        return Instance(layer, mode, 1, NeuronModel.RELU, (), 0.0)
    timesteps = int(rng.integers(1, 4))
    neuron = NeuronModel.LIF if rng.integers(0, 2) else NeuronModel.IF
    return Instance(layer, mode, timesteps, neuron, _random_spikes(rng, timesteps, in_shape, density), density)


@dataclass(frozen=True)
class Mismatch:
    case: int
    instance: Instance
    verdict: Verdict


@dataclass(frozen=True)
class ValidationSummary:
    cases: int
    checks: int
    mismatches: tuple[Mismatch, ...]

    @property
    def ok(self) -> bool:
        return not self.mismatches


def validate(seed: int = 0, cases: int = 200, strict_paper: bool = False) -> ValidationSummary:
    """Compare executors and closed forms over ``cases`` seeded random instances.

    Cases cycle through (conv, fc) x (fnn, snn) and the spike densities so
    that every combination is covered.
    """
    if cases < 1:
        raise OracleError("cases must be >= 1")
    rng = np.random.default_rng(seed)
    mismatches = []
    checks = 0
    for case in range(cases):
        kind = ("conv", "fc")[case % 2]
        mode = (Mode.FNN, Mode.SNN)[(case // 2) % 2]
        density = DENSITIES[(case // 4) % len(DENSITIES)]
        inst = random_instance(rng, kind, mode, density)
        verdicts = verify_layer(inst.layer, inst.mode, inst.spikes, inst.timesteps, inst.neuron,
                                strict_paper=strict_paper, rng=rng)
        checks += len(verdicts)
        mismatches.extend(Mismatch(case, inst, v) for v in verdicts if not v.equal)
    return ValidationSummary(cases, checks, tuple(mismatches))
