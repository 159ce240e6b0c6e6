"""Per-layer spiking activity for one inference.

``theta[l]`` is the (dataset-averaged, hence real-valued) number of spikes
emitted by layer ``l`` over all timesteps of one inference. ``theta_in`` is
the input-side count fed to the first layer.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Mapping, Optional, Union

from .errors import TraceError
from .network import EncodingScheme, Mode, NetworkSpec, neuron_count


def _check_count(value: Any, what: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise TraceError(f"{what} must be a number, got {value!r}")
    value = float(value)
    if not math.isfinite(value):
        raise TraceError(f"{what} must be finite")
    if value < 0:
        raise TraceError(f"negative entry: {what} = {value}")
    return value


@dataclass(frozen=True)
class ActivityTrace:
    theta: tuple[float, ...]
    theta_in: float
    network_name: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "theta", tuple(_check_count(v, f"theta[{i}]") for i, v in enumerate(self.theta)))
        object.__setattr__(self, "theta_in", _check_count(self.theta_in, "theta_in"))

    def __len__(self) -> int:
        return len(self.theta)

    @property
    def total_spikes(self) -> float:
        return math.fsum(self.theta)

    def layer_inputs(self) -> tuple[float, ...]:
        """Spike count arriving at each layer (theta_{l-1})."""
        return (self.theta_in,) + self.theta[:-1]

    def scaled(self, factor: float) -> "ActivityTrace":
        return ActivityTrace(tuple(v * factor for v in self.theta), self.theta_in * factor, self.network_name)

    def to_document(self) -> dict[str, Any]:
        return {"network": self.network_name, "theta_in": self.theta_in, "theta": list(self.theta)}


def check_against(trace: ActivityTrace, spec: NetworkSpec) -> None:
    if len(trace.theta) != len(spec.layers):
        raise TraceError(
            f"length mismatch: trace has {len(trace.theta)} entries, network {spec.name!r} has {len(spec.layers)} layers"
        )


def load_trace(document: Union[str, bytes, Mapping[str, Any]], spec: Optional[NetworkSpec] = None) -> ActivityTrace:
    """Parse a trace document ``{network, theta_in, theta: [...]}``.

    When ``spec`` is given the trace length must equal its layer count.
    """
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise TraceError(f"malformed trace: {exc}") from None
    if not isinstance(document, Mapping):
        raise TraceError("malformed trace: top level must be an object")
    if "theta" not in document or not isinstance(document["theta"], list):
        raise TraceError("malformed trace: 'theta' must be a list")
    if "theta_in" not in document:
        raise TraceError("malformed trace: missing 'theta_in'")
    trace = ActivityTrace(
        theta=tuple(document["theta"]),
        theta_in=document["theta_in"],
        network_name=str(document.get("network", "")),
    )
    if spec is not None:
        check_against(trace, spec)
    return trace


def load_trace_file(path: Union[str, Path], spec: Optional[NetworkSpec] = None) -> ActivityTrace:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise TraceError(f"cannot read trace file {path}: {exc.strerror}") from None
    return load_trace(text, spec)


def input_presentations(spec: NetworkSpec, measured: Optional[float] = None) -> float:
    """Input-side count theta_0 for one inference.

    Static encoding repeats the whole sample every timestep; dynamic encoding
    presents the sample exactly once, one chunk per timestep; event data
    needs a measured event count (``measured`` or ``spec.input_events``).
    """
    if spec.encoding is EncodingScheme.EVENT_VOXEL:
        count = measured if measured is not None else spec.input_events
        if count is None:
            raise TraceError(f"event-encoded network {spec.name!r} needs a measured input event count")
        return _check_count(count, "input event count")
    if spec.encoding is EncodingScheme.STATIC_REPEAT:
        return float(spec.input_size * spec.timesteps)
    return float(spec.input_size)


def validate_rate(rate: float) -> float:
    return _check_count(rate, "spike rate")


def synthesize_uniform(spec: NetworkSpec, rate: float, input_events: Optional[float] = None) -> ActivityTrace:
    """Every layer fires ``rate`` spikes per neuron per inference.

    Neuron counts come from the per-timestep view of the network, i.e. the
    neurons that physically exist in the spiking implementation.
    """
    rate = validate_rate(rate)
    view = spec.timestep_view() if spec.mode is Mode.SNN else spec
    theta = tuple(rate * neuron_count(layer) for layer in view.layers)
    return ActivityTrace(theta, input_presentations(spec, input_events), spec.name)
