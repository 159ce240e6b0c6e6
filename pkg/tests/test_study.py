import pytest

from snn_energy.energy import TechProfile
from snn_energy.errors import EstimatorError
from snn_energy.study import CASES, case_ratio, estimate_pair, load_case, sweep, sweep_values


def test_sweep_values():
    assert sweep_values(0, 0, 5) == [0.0]
    assert sweep_values(0, 2, 5) == [0.0, 0.5, 1.0, 1.5, 2.0]
    with pytest.raises(EstimatorError, match="empty range"):
        sweep_values(2, 0, 5)
    with pytest.raises(EstimatorError):
        sweep_values(0, 1, 0)


def test_rate_sweep_monotone_and_crossover(profile):
    spec = load_case("gsc_cnn")
    result = sweep(spec, profile, "spike_rate", sweep_values(0, 2, 9))
    e_snn = [p.e_snn for p in result.points]
    assert e_snn == sorted(e_snn)
    assert len({p.e_fnn for p in result.points}) == 1
    r = result.crossover
    assert r is not None and 0 < r < 2
    fnn, snn = estimate_pair(spec, profile, rate=r)
    assert snn.total == pytest.approx(fnn.total, rel=1e-5)


def test_no_crossover_when_fnn_cheaper(profile):
    result = sweep(load_case("gsc_cnn"), profile, "spike_rate", sweep_values(5, 10, 3))
    assert result.crossover is None
    assert all(p.ratio < 1 for p in result.points)


def test_single_point_sweep(profile):
    result = sweep(load_case("gsc_cnn"), profile, "spike_rate", [0.0])
    assert len(result.points) == 1 and result.crossover is None


def test_integer_sweeps(profile):
    spec = load_case("ncars_tinyvgg11")
    t = sweep(spec, profile, "timesteps", [1, 2, 3.4, 3], rate=0.08)
    assert [p.value for p in t.points] == [1, 2, 3]
    f = sweep(spec, profile, "fifo_depth", [10, 1000, 100000], rate=0.08)
    assert [p.e_snn for p in f.points] == sorted(p.e_snn for p in f.points)
    with pytest.raises(EstimatorError):
        sweep(spec, profile, "timesteps", [0, 1], rate=0.08)
    with pytest.raises(EstimatorError):
        sweep(spec, profile, "voltage", [1.0], rate=0.08)


def test_integer_crossover_is_first_flip(profile):
    spec = load_case("ncars_tinyvgg11")
    # per-timestep housekeeping grows with T while the event count stays fixed
    result = sweep(spec, profile, "timesteps", [1, 400], rate=0.5)
    k = int(result.crossover)
    before, at = sweep(spec, profile, "timesteps", [k - 1, k], rate=0.5).points
    assert before.e_snn < before.e_fnn and at.e_snn >= at.e_fnn


def test_case_ratio_and_unknown_case(profile):
    assert case_ratio("gsc_cnn", profile) > 1
    with pytest.raises(EstimatorError):
        load_case("mnist")
    assert set(CASES) == {"cifar_vgg16", "gsc_cnn", "ncars_tinyvgg11"}
