import math

import numpy as np
import pytest

from snn_energy.network import Mode, NeuronModel
from snn_energy.ops import conv_ops_fnn
from snn_energy.oracle import (
    OracleError, run_dense_conv, run_dense_fc, run_event_conv, run_event_fc, validate, verify_layer,
)
from snn_energy.study import load_case

from conftest import conv, fc

IF, LIF = NeuronModel.IF, NeuronModel.LIF


def test_dense_conv_matches_closed_forms():
    verdicts = verify_layer(conv(3, 2, 4), Mode.FNN)
    assert all(v.equal for v in verdicts)


def test_dense_unit_and_no_bias():
    c = run_dense_conv(conv(1, 1, 1, k=1)).counters
    assert (c.mac, c.acc, c.rd_in, c.wr_out) == (1, 1, 1, 1)
    c = run_dense_conv(conv(3, 2, 4, bias=False)).counters
    assert c.rd_bias == 0 and c.acc == 0


def test_dense_fc():
    c = run_dense_fc(fc(8, 4)).counters
    assert (c.mac, c.acc, c.rd_weights) == (32, 4, 32)


def test_dense_conv_computes_a_convolution():
    layer = conv(1, 1, 3, k=3, bias=False)
    x = np.arange(9, dtype=float).reshape(1, 3, 3)
    w = np.ones((1, 1, 3, 3))
    out = run_dense_conv(layer, x=x, weights=w).output
    # centre sees all nine inputs; corner sees a 2x2 block
    assert out[0, 1, 1] == 36 and out[0, 0, 0] == 0 + 1 + 3 + 4


@pytest.mark.parametrize("layer", [conv(2, 3, 6), conv(1, 2, 5, stride=2), conv(2, 2, 7, 4, k=3, kw=2, stride=2)])
def test_vgg_layers_sampled(layer):
    assert all(v.equal for v in verify_layer(layer, Mode.FNN))


def test_vgg_first_layer_mac_against_executor():
    first = load_case("cifar_vgg16").layers[0]
    small = conv(first.c_in, 4, 8)  # same loop nest, fewer filters and pixels
    assert run_dense_conv(small).counters.mac == conv_ops_fnn(small).mac
    assert conv_ops_fnn(first).mac == 64 * 32 * 32 * 3 * 9


def test_event_zero_spikes_housekeeping():
    run = run_event_conv(conv(1, 1, 2), [], 2, LIF, threshold=math.inf)
    assert run.theta_out == 0
    assert (run.counters.acc, run.counters.mac, run.counters.wr_out) == (8, 8, 0)


def test_event_single_spike_fires_and_resets():
    run = run_event_conv(conv(1, 1, 1, k=1, bias=False), [(0, 0, 0, 0)], 1, IF,
                         weights=np.ones((1, 1, 1, 1)), threshold=0.5)
    assert run.theta_out == 1 and run.counters.acc == 2


def test_event_all_positions_linear():
    layer = conv(2, 3, 4, bias=False)
    spikes = [(0, c, y, x) for c in range(2) for y in range(4) for x in range(4)]
    run = run_event_conv(layer, spikes, 1, IF, threshold=math.inf)
    fanout = layer.spike_fanout
    assert run.counters.rd_weights == len(spikes) * fanout
    assert run.counters.addr_acc == len(spikes) * fanout
    assert run.counters.addr_mac == 2 * len(spikes)


def test_event_fc():
    run = run_event_fc(fc(1, 1), [(0, 0)], 1, IF)
    assert run.counters.rd_pot == 2 and run.counters.wr_pot == 2
    quiet = run_event_fc(fc(5, 3), [], 2, LIF, threshold=math.inf).counters
    assert (quiet.rd_in, quiet.rd_weights, quiet.wr_out) == (0, 0, 0)
    assert quiet.mac == 6 and quiet.acc == 6


def test_strict_fc_reports_acc_mismatch():
    spikes = [(0, i) for i in range(6)]
    verdicts = {v.category: v for v in verify_layer(fc(6, 4), Mode.SNN, spikes, 1, IF, strict_paper=True)}
    assert not verdicts["acc"].equal
    assert all(v.equal for k, v in verdicts.items() if k != "acc")


def test_zero_activity_equal():
    verdicts = verify_layer(conv(2, 2, 3, bias=False), Mode.SNN, [], 2, IF)
    assert all(v.equal for v in verdicts)
    measured = {v.category: v.measured for v in verdicts}
    for cat in ("mac", "acc", "rd_in", "rd_weights", "rd_bias", "wr_out", "addr_mac", "addr_acc"):
        assert measured[cat] == 0, cat
    assert measured["rd_pot"] == measured["wr_pot"] == 2 * 2 * 3 * 3


@pytest.mark.parametrize("layer", [conv(2, 3, 6), conv(1, 2, 5, stride=2), conv(2, 2, 7, 4, k=3, kw=2, stride=2)])
@pytest.mark.parametrize("exact", [False, True])
def test_event_potentials_equal_dense_convolution(layer, exact):
    rng = np.random.default_rng(1)
    x = (rng.random((layer.c_in, layer.h_in, layer.w_in)) < 0.5).astype(float)
    w = rng.uniform(0.1, 1.0, size=(layer.c_out, layer.c_in, layer.h_kernel, layer.w_kernel))
    b = np.zeros(layer.c_out)
    spikes = [(0,) + tuple(int(i) for i in idx) for idx in np.argwhere(x > 0)]
    dense = run_dense_conv(layer, x=x, weights=w, bias=b).output
    event = run_event_conv(layer, spikes, 1, IF, weights=w, bias=b, threshold=math.inf, boundary_exact=exact)
    np.testing.assert_allclose(event.potentials, dense, rtol=1e-12, atol=1e-12)
    uniform = run_event_conv(layer, spikes, 1, IF, weights=w, bias=b, threshold=math.inf)
    assert event.counters.rd_weights <= uniform.counters.rd_weights


def test_spike_order_invariance():
    layer = conv(2, 3, 5, stride=2)
    rng = np.random.default_rng(3)
    spikes = [(int(t), int(c), int(y), int(x)) for t, c, y, x in
              zip(rng.integers(0, 2, 30), rng.integers(0, 2, 30), rng.integers(0, 5, 30), rng.integers(0, 5, 30))]
    a = run_event_conv(layer, spikes, 2, LIF)
    b = run_event_conv(layer, list(reversed(spikes)), 2, LIF)
    assert a.counters == b.counters and a.theta_out == b.theta_out


def test_invalid_placements():
    with pytest.raises(OracleError):
        run_event_conv(conv(1, 1, 2), [(0, 0, 5, 0)], 1, IF)
    with pytest.raises(OracleError):
        run_event_conv(conv(1, 1, 2), [(3, 0, 0, 0)], 2, IF)
    with pytest.raises(OracleError):
        run_event_fc(fc(2, 2), [(0, 0, 0)], 1, IF)
    with pytest.raises(OracleError):
        run_dense_conv(conv(512, 512, 32))


def test_validate_deterministic_and_green():
    a, b = validate(seed=7, cases=40), validate(seed=7, cases=40)
    assert a == b and a.ok and a.checks == 400
    with pytest.raises(OracleError):
        validate(cases=0)


def test_validate_strict_flags_only_fc_acc():
    summary = validate(seed=0, cases=80, strict_paper=True)
    assert not summary.ok
    assert {m.verdict.category for m in summary.mismatches} == {"acc"}
    assert all(m.instance.describe().startswith("fc") for m in summary.mismatches)
