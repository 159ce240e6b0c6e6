"""Paired FNN/SNN estimates, parameter sweeps and crossover search."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from importlib import resources
from typing import Callable, Optional, Sequence

from .activity import ActivityTrace, synthesize_uniform
from .energy import EnergyReport, EstimateOptions, TechProfile, compare, network_energy
from .errors import EstimatorError
from .network import Mode, NetworkSpec, parse_network

# Bundled reconstructions of the three case studies and their measured
# average spike rates (spikes per neuron per inference).
CASES = {
    "cifar_vgg16": 0.10,
    "gsc_cnn": 0.14,
    "ncars_tinyvgg11": 0.08,
}


def load_case(name: str) -> NetworkSpec:
    if name not in CASES:
        raise EstimatorError(f"unknown case {name!r}; available: {', '.join(CASES)}")
    text = resources.files("snn_energy").joinpath(f"data/networks/{name}.json").read_text()
    return parse_network(text)


def snn_activity(spec: NetworkSpec, rate: Optional[float] = None,
                 trace: Optional[ActivityTrace] = None) -> ActivityTrace:
    if trace is not None:
        return trace
    if rate is None:
        raise EstimatorError("an SNN estimate needs an activity trace or a spike rate")
    return synthesize_uniform(spec, rate)


def estimate_pair(spec: NetworkSpec, profile: TechProfile, rate: Optional[float] = None,
                  trace: Optional[ActivityTrace] = None,
                  options: Optional[EstimateOptions] = None) -> tuple[EnergyReport, EnergyReport]:
    """FNN and SNN reports for one architecture."""
    snn_spec = spec.as_mode(Mode.SNN)
    fnn = network_energy(spec.as_mode(Mode.FNN), None, profile, options)
    snn = network_energy(snn_spec, snn_activity(snn_spec, rate, trace), profile, options)
    return fnn, snn


SWEEP_PARAMETERS = ("spike_rate", "timesteps", "fifo_depth")


@dataclass(frozen=True)
class SweepPoint:
    value: float
    e_snn: float
    e_fnn: float

    @property
    def ratio(self) -> float:
        return self.e_fnn / self.e_snn if self.e_snn > 0 else math.inf


@dataclass(frozen=True)
class SweepResult:
    parameter: str
    points: tuple[SweepPoint, ...]
    crossover: Optional[float]


def sweep_values(start: float, stop: float, num: int) -> list[float]:
    if num < 1 or stop < start:
        raise EstimatorError(f"empty range {start}:{stop}:{num}")
    if start == stop or num == 1:
        return [float(start)]
    step = (stop - start) / (num - 1)
    return [start + i * step for i in range(num - 1)] + [float(stop)]


def _totals_at(spec: NetworkSpec, profile: TechProfile, parameter: str, value: float,
               rate: Optional[float], trace: Optional[ActivityTrace],
               options: Optional[EstimateOptions]) -> tuple[float, float]:
    if parameter == "spike_rate":
        fnn, snn = estimate_pair(spec, profile, rate=value, options=options)
    elif parameter == "timesteps":
        fnn, snn = estimate_pair(replace(spec, timesteps=int(value)), profile, rate, trace, options)
    elif parameter == "fifo_depth":
        fnn, snn = estimate_pair(spec, replace(profile, fifo_depth=int(round(value))), rate, trace, options)
    else:
        raise EstimatorError(f"unknown sweep parameter {parameter!r}")
    return snn.total, fnn.total


def _bisect(f: Callable[[float], float], lo: float, hi: float, integer: bool, rtol: float = 1e-6) -> float:
    """Root of ``f`` between ``lo`` (f <= 0 side) and ``hi``; integers return the first flipped value."""
    f_lo = f(lo)
    while True:
        if integer:
            if hi - lo <= 1:
                return hi
            mid = float((int(lo) + int(hi)) // 2)
        else:
            if hi - lo <= rtol * max(abs(lo), abs(hi), 1e-300):
                return 0.5 * (lo + hi)
            mid = 0.5 * (lo + hi)
        f_mid = f(mid)
        if f_mid == 0 and not integer:
            return mid
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid


def sweep(spec: NetworkSpec, profile: TechProfile, parameter: str, values: Sequence[float],
          rate: Optional[float] = None, trace: Optional[ActivityTrace] = None,
          options: Optional[EstimateOptions] = None) -> SweepResult:
    """Evaluate both modes at every value; locate ``E_SNN == E_FNN`` if bracketed.

    Continuous parameters are bisected to 1e-6 relative. ``timesteps`` and
    ``fifo_depth`` are integers: their crossover is the first integer at
    which the sign of ``E_SNN - E_FNN`` flips.
    """
    if parameter not in SWEEP_PARAMETERS:
        raise EstimatorError(f"unknown sweep parameter {parameter!r}")
    if not values:
        raise EstimatorError("empty range")
    integer = parameter in ("timesteps", "fifo_depth")
    if integer:
        values = sorted({int(round(v)) for v in values})
        if values[0] < 1:
            raise EstimatorError(f"{parameter} must be >= 1")

    def evaluate(v: float) -> tuple[float, float]:
        return _totals_at(spec, profile, parameter, v, rate, trace, options)

    points = tuple(SweepPoint(float(v), *evaluate(v)) for v in values)

    crossover = None
    for a, b in zip(points, points[1:]):
        da, db = a.e_snn - a.e_fnn, b.e_snn - b.e_fnn
        if da == 0:
            crossover = a.value
            break
        if (da < 0) != (db < 0) or db == 0:
            def diff(v: float) -> float:
                s, f = evaluate(v)
                return s - f
            crossover = _bisect(diff, a.value, b.value, integer)
            break
    else:
        if points and points[-1].e_snn == points[-1].e_fnn:
            crossover = points[-1].value
    return SweepResult(parameter, points, crossover)


def case_ratio(name: str, profile: TechProfile, options: Optional[EstimateOptions] = None) -> float:
    spec = load_case(name)
    fnn, snn = estimate_pair(spec, profile, rate=CASES[name], options=options)
    return compare(fnn, snn)
