"""Property-based checks of the structural invariants."""

import math
from dataclasses import replace

import numpy as np
from hypothesis import HealthCheck, assume, given, settings
from hypothesis import strategies as st

from snn_energy.activity import ActivityTrace, synthesize_uniform
from snn_energy.addressing import conv_addr_fnn, conv_addr_snn, fc_addr_snn
from snn_energy.energy import CATEGORIES, Policy, TechProfile, network_energy, sram_access_energy
from snn_energy.memory import conv_mem_snn, fc_mem_snn
from snn_energy.network import (
    ConvLayer, EncodingScheme, FcLayer, Mode, NetworkSpec, NeuronModel, dumps, infer_shapes, parse_network,
)
from snn_energy.ops import conv_ops_snn, fc_ops_snn
from snn_energy.oracle import DENSITIES, random_instance, run_event_conv, verify_layer
from snn_energy.study import sweep

from conftest import conv

PROFILE = TechProfile()
theta = st.integers(min_value=0, max_value=10_000)
spiking = st.sampled_from([NeuronModel.IF, NeuronModel.LIF])


@st.composite
def conv_layers(draw):
    c_in, c_out = draw(st.integers(1, 16)), draw(st.integers(1, 16))
    h, w = draw(st.integers(1, 32)), draw(st.integers(1, 32))
    k, kw = draw(st.integers(1, 5)), draw(st.integers(1, 5))
    s = draw(st.integers(1, 3))
    return conv(c_in, c_out, h, w, k=k, kw=kw, stride=s, bias=draw(st.booleans()))


@st.composite
def networks(draw, mode=None):
    n_conv = draw(st.integers(0, 4))
    n_fc = draw(st.integers(0 if n_conv else 1, 3))
    layers = [ConvLayer(c_out=draw(st.integers(1, 8)), h_kernel=draw(st.integers(1, 3)),
                        w_kernel=draw(st.integers(1, 3)), stride=draw(st.integers(1, 2)),
                        has_bias=draw(st.booleans())) for _ in range(n_conv)]
    layers += [FcLayer(n_out=draw(st.integers(1, 20)), has_bias=draw(st.booleans())) for _ in range(n_fc)]
    mode = mode or draw(st.sampled_from(list(Mode)))
    neuron = NeuronModel.RELU if mode is Mode.FNN else draw(spiking)
    encoding = draw(st.sampled_from([EncodingScheme.STATIC_REPEAT, EncodingScheme.DYNAMIC_CHUNK,
                                     EncodingScheme.EVENT_VOXEL]))
    shape = (draw(st.integers(1, 4)), draw(st.integers(1, 12)), draw(st.integers(1, 12)))
    events = draw(st.floats(0, 1000)) if encoding is EncodingScheme.EVENT_VOXEL else None
    return infer_shapes(NetworkSpec("prop", tuple(layers), shape, timesteps=draw(st.integers(1, 6)),
                                    neuron=neuron, encoding=encoding, mode=mode, input_events=events))


# -- net-model ---------------------------------------------------------------

@given(networks())
def test_round_trip(spec):
    assert parse_network(dumps(spec)) == spec


@given(networks())
def test_shapes_never_grow(spec):
    for layer in spec.layers:
        if isinstance(layer, ConvLayer):
            assert layer.h_out <= layer.h_in and layer.w_out <= layer.w_in


# -- activity-model ----------------------------------------------------------

@given(networks(Mode.SNN), st.floats(0, 5))
def test_synthesis_linear_and_recovers_rate(spec, rate):
    one, two = synthesize_uniform(spec, rate), synthesize_uniform(spec, 2 * rate)
    assert two.theta == tuple(2 * t for t in one.theta)
    view = spec.timestep_view()
    assert math.isclose(one.total_spikes / view.total_neurons, rate, rel_tol=1e-12, abs_tol=1e-300)


# -- counts ------------------------------------------------------------------

@given(conv_layers(), theta, theta, st.integers(1, 8), spiking)
def test_conv_snn_affine_in_activity(layer, th_in, th_out, T, neuron):
    ops = conv_ops_snn(layer, th_in, th_out, T, neuron)
    intercept = T * layer.output_size * layer.has_bias
    assert ops.acc == th_in * layer.spike_fanout + th_out + intercept
    assert ops.mac == (T * layer.output_size if neuron is NeuronModel.LIF else 0)


@given(conv_layers(), theta, theta, st.integers(1, 8))
def test_potential_symmetry(layer, th_in, th_out, T):
    m = conv_mem_snn(layer, th_in, th_out, T)
    assert m.rd_pot == m.wr_pot
    f = fc_mem_snn(FcLayer(n_out=layer.c_out, n_in=layer.output_size), th_in, th_out, T)
    assert f.rd_pot == f.wr_pot


@given(conv_layers(), theta, st.integers(1, 20))
def test_snn_addressing_linear_zero_intercept(layer, th, k):
    assert conv_addr_snn(layer, 0).acc == conv_addr_snn(layer, 0).mac == 0
    assert conv_addr_snn(layer, k * th).acc == k * conv_addr_snn(layer, th).acc
    assert fc_addr_snn(FcLayer(n_out=layer.c_out, n_in=3), k * th).acc == k * th * layer.c_out


@given(networks(Mode.SNN), st.floats(0, 3))
def test_if_networks_never_multiply(spec, rate):
    spec = replace(spec, neuron=NeuronModel.IF)
    report = network_energy(spec, synthesize_uniform(spec, rate), PROFILE)
    assert all(le.ops.mac == 0 for le in report.layers)


# -- energy-model ------------------------------------------------------------

@given(networks(Mode.FNN), st.integers(1, 10), st.floats(0, 3))
def test_fnn_invariant_to_trace_and_timesteps(spec, T, rate):
    base = network_energy(spec, None, PROFILE)
    other_spec = replace(spec, timesteps=T)
    trace = synthesize_uniform(other_spec, rate)
    assert network_energy(other_spec, trace, PROFILE) == replace(base, timesteps=1)
    assert network_energy(other_spec, trace, PROFILE).layers == base.layers


@given(networks(Mode.SNN), st.floats(0, 3))
def test_category_sum(spec, rate):
    report = network_energy(spec, synthesize_uniform(spec, rate), PROFILE)
    for part in [le.energy for le in report.layers] + [report.aggregate]:
        assert part.total == math.fsum(getattr(part, c) for c in CATEGORIES)
        assert all(getattr(part, c) >= 0 for c in CATEGORIES)
    assert math.isclose(report.total, math.fsum(le.energy.total for le in report.layers), rel_tol=1e-12)


@given(networks(Mode.SNN), st.floats(0, 3), st.data())
def test_monotone_in_each_theta(spec, rate, data):
    trace = synthesize_uniform(spec, rate)
    idx = data.draw(st.integers(0, len(trace.theta) - 1))
    bump = data.draw(st.floats(0, 100))
    bumped = list(trace.theta)
    bumped[idx] += bump
    e0 = network_energy(spec, trace, PROFILE).total
    e1 = network_energy(spec, replace(trace, theta=tuple(bumped)), PROFILE).total
    assert e1 >= e0 * (1 - 1e-12)


@given(networks(Mode.SNN), st.floats(0, 3), st.floats(0, 8))
def test_scale_consistency(spec, rate, k):
    trace = synthesize_uniform(spec, rate)
    zero = network_energy(spec, trace.scaled(0), PROFILE)
    base = network_energy(spec, trace, PROFILE)
    scaled = network_energy(spec, trace.scaled(k), PROFILE)
    for c in CATEGORIES:
        z, b, s = (getattr(r.aggregate, c) for r in (zero, base, scaled))
        assert math.isclose(s - z, k * (b - z), rel_tol=1e-9, abs_tol=1e-9 * max(1.0, s, z))


sizes = st.floats(min_value=1.0, max_value=64 * 1024 * 1024)


@given(sizes, sizes, st.sampled_from(list(Policy)))
def test_sram_monotone(a, b, policy):
    prof = TechProfile(policy=policy)
    lo, hi = sorted((a, b))
    assert sram_access_energy(prof, lo) <= sram_access_energy(prof, hi)


@given(sizes, st.floats(1e-6, 16.0), st.sampled_from(list(Policy)))
def test_sram_continuous(size, delta, policy):
    prof = TechProfile(policy=policy)
    pts = prof.sram_points
    max_slope = max((e1 - e0) / (s1 - s0) for (s0, e0), (s1, e1) in zip(pts, pts[1:]))
    gap = sram_access_energy(prof, size + delta) - sram_access_energy(prof, size)
    assert 0 <= gap <= max_slope * delta * (1 + 1e-9) + 1e-12


@settings(max_examples=25, deadline=None)
@given(st.sampled_from(["cifar_vgg16", "gsc_cnn", "ncars_tinyvgg11"]),
       st.lists(st.floats(0, 3), min_size=2, max_size=6))
def test_sweep_monotone_in_rate(name, rates):
    from snn_energy.study import load_case
    result = sweep(load_case(name), PROFILE, "spike_rate", sorted(rates))
    e = [p.e_snn for p in result.points]
    assert all(b >= a * (1 - 1e-12) for a, b in zip(e, e[1:]))


# -- counting-oracle ---------------------------------------------------------

@settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(st.integers(0, 2**32 - 1), st.sampled_from(["conv", "fc"]), st.sampled_from(list(Mode)),
       st.sampled_from(DENSITIES))
def test_oracle_equivalence(seed, kind, mode, density):
    inst = random_instance(np.random.default_rng(seed), kind, mode, density)
    verdicts = verify_layer(inst.layer, inst.mode, inst.spikes, inst.timesteps, inst.neuron)
    assert all(v.equal for v in verdicts), [v for v in verdicts if not v.equal]
    again = verify_layer(inst.layer, inst.mode, inst.spikes, inst.timesteps, inst.neuron)
    assert again == verdicts


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32 - 1), st.randoms(use_true_random=False))
def test_spike_order_invariance(seed, rnd):
    inst = random_instance(np.random.default_rng(seed), "conv", Mode.SNN, 0.5)
    assume(inst.spikes)
    shuffled = list(inst.spikes)
    rnd.shuffle(shuffled)
    a = run_event_conv(inst.layer, inst.spikes, inst.timesteps, inst.neuron)
    b = run_event_conv(inst.layer, shuffled, inst.timesteps, inst.neuron)
    assert a.counters == b.counters and a.theta_out == b.theta_out
