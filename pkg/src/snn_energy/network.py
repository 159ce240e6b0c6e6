"""Network descriptions: layer types, shape inference and the JSON schema.

A network document looks like::

    {"name": "gsc", "mode": "snn", "timesteps": 2, "neuron": "lif",
     "encoding": "dynamic", "input": {"c": 10, "h": 48, "w": 1},
     "layers": [{"kind": "conv", "c_out": 48, "kh": 3, "kw": 1, "stride": 1, "bias": true},
                {"kind": "fc", "n_out": 35, "bias": true}]}

Interior input extents are always inferred. Convolutions use "same" padding,
so ``h_out = ceil(h_in / stride)``. 1-D convolutions use ``w = 1``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path
from typing import Any, Mapping, Optional, Union

from .errors import NetworkError


class Mode(str, Enum):
    FNN = "fnn"
    SNN = "snn"


class NeuronModel(str, Enum):
    RELU = "relu"
    IF = "if"
    LIF = "lif"

    @property
    def spiking(self) -> bool:
        return self is not NeuronModel.RELU

    @property
    def leaky(self) -> bool:
        return self is NeuronModel.LIF


class EncodingScheme(str, Enum):
    STATIC_REPEAT = "static"
    DYNAMIC_CHUNK = "dynamic"
    EVENT_VOXEL = "event"


_ENCODING_ALIASES = {
    "static": EncodingScheme.STATIC_REPEAT,
    "static_repeat": EncodingScheme.STATIC_REPEAT,
    "dynamic": EncodingScheme.DYNAMIC_CHUNK,
    "dynamic_chunk": EncodingScheme.DYNAMIC_CHUNK,
    "event": EncodingScheme.EVENT_VOXEL,
    "event_voxel": EncodingScheme.EVENT_VOXEL,
}


def _check_positive(owner: str, **values: Optional[int]) -> None:
    for key, value in values.items():
        if value is None:
            continue
        if isinstance(value, bool) or not isinstance(value, int):
            raise NetworkError(f"{owner}: {key} must be an integer, got {value!r}")
        if value < 1:
            raise NetworkError(f"{owner}: non-positive dimension {key}={value}")


@dataclass(frozen=True)
class ConvLayer:
    """2-D convolution with "same" padding. Unset extents are filled by :func:`infer_shapes`."""

    c_out: int
    h_kernel: int
    w_kernel: int
    stride: int = 1
    c_in: Optional[int] = None
    h_in: Optional[int] = None
    w_in: Optional[int] = None
    h_out: Optional[int] = None
    w_out: Optional[int] = None
    has_bias: bool = True
    # Output head that sums the layer's outputs over space (and time for SNNs).
    readout: bool = False

    kind = "conv"

    def __post_init__(self) -> None:
        _check_positive(
            "conv layer", c_out=self.c_out, h_kernel=self.h_kernel, w_kernel=self.w_kernel,
            stride=self.stride, c_in=self.c_in, h_in=self.h_in, w_in=self.w_in,
            h_out=self.h_out, w_out=self.w_out,
        )

    @property
    def resolved(self) -> bool:
        return None not in (self.c_in, self.h_in, self.w_in, self.h_out, self.w_out)

    @property
    def input_size(self) -> int:
        return self.c_in * self.h_in * self.w_in

    @property
    def output_size(self) -> int:
        return self.c_out * self.h_out * self.w_out

    @property
    def kernel_area(self) -> int:
        return self.h_kernel * self.w_kernel

    @property
    def spike_fanout(self) -> int:
        """Output potentials touched by one input spike: C_out * ceil(Kh/S) * ceil(Kw/S)."""
        return (self.c_out * math.ceil(self.h_kernel / self.stride)
                * math.ceil(self.w_kernel / self.stride))

    @property
    def weight_count(self) -> int:
        return self.c_in * self.c_out * self.kernel_area

    @property
    def bias_count(self) -> int:
        return self.c_out if self.has_bias else 0


@dataclass(frozen=True)
class FcLayer:
    n_out: int
    n_in: Optional[int] = None
    has_bias: bool = True

    kind = "fc"
    readout = False

    def __post_init__(self) -> None:
        _check_positive("fc layer", n_out=self.n_out, n_in=self.n_in)

    @property
    def resolved(self) -> bool:
        return self.n_in is not None

    @property
    def input_size(self) -> int:
        return self.n_in

    @property
    def output_size(self) -> int:
        return self.n_out

    @property
    def spike_fanout(self) -> int:
        return self.n_out

    @property
    def weight_count(self) -> int:
        return self.n_in * self.n_out

    @property
    def bias_count(self) -> int:
        return self.n_out if self.has_bias else 0


Layer = Union[ConvLayer, FcLayer]


def neuron_count(layer: Layer) -> int:
    """C_out * H_out * W_out for a convolution, N_out for a dense layer."""
    return layer.output_size


def param_count(layer: Layer) -> int:
    return layer.weight_count + layer.bias_count


@dataclass(frozen=True)
class NetworkSpec:
    name: str
    layers: tuple[Layer, ...]
    input_shape: tuple[int, int, int]
    timesteps: int = 1
    neuron: NeuronModel = NeuronModel.RELU
    encoding: EncodingScheme = EncodingScheme.STATIC_REPEAT
    mode: Mode = Mode.FNN
    # Mean measured input events per sample; only meaningful for event encoding.
    input_events: Optional[float] = None

    def __post_init__(self) -> None:
        if not self.layers:
            raise NetworkError(f"network {self.name!r} has no layers")
        if isinstance(self.timesteps, bool) or not isinstance(self.timesteps, int) or self.timesteps < 1:
            raise NetworkError(f"timesteps must be a positive integer, got {self.timesteps!r}")
        if len(self.input_shape) != 3:
            raise NetworkError("input shape must be (c, h, w)")
        c, h, w = self.input_shape
        _check_positive("input", c=c, h=h, w=w)
        if self.mode is Mode.FNN and self.neuron.spiking:
            raise NetworkError(f"neuron {self.neuron.value!r} is not valid in fnn mode")
        if self.mode is Mode.SNN and not self.neuron.spiking:
            raise NetworkError("relu neurons are not valid in snn mode")
        if self.input_events is not None and self.input_events < 0:
            raise NetworkError("input_events must be non-negative")
        for layer in self.layers[:-1]:
            if layer.readout:
                raise NetworkError("a readout layer must be the last layer")

    @property
    def input_size(self) -> int:
        c, h, w = self.input_shape
        return c * h * w

    @property
    def total_neurons(self) -> int:
        return sum(neuron_count(layer) for layer in self.layers)

    @property
    def total_params(self) -> int:
        return sum(param_count(layer) for layer in self.layers)

    @property
    def effective_timesteps(self) -> int:
        return self.timesteps if self.mode is Mode.SNN else 1

    def as_mode(self, mode: Mode | str, neuron: NeuronModel | str | None = None) -> "NetworkSpec":
        """Same architecture executed in another mode. FNN always runs ReLU neurons."""
        mode = Mode(mode)
        if mode is Mode.FNN:
            return replace(self, mode=mode, neuron=NeuronModel.RELU)
        neuron = NeuronModel(neuron) if neuron is not None else self.neuron
        if not neuron.spiking:
            raise NetworkError(f"network {self.name!r} has no spiking neuron model for snn mode")
        return replace(self, mode=mode, neuron=neuron)

    def timestep_view(self) -> "NetworkSpec":
        """Shapes seen by the hardware during one timestep.

        Dynamic encoding feeds one temporal chunk per timestep, so the network
        input (and every layer after it) is ``ceil(h / T)`` long along the
        temporal axis ``h``. Every other case returns ``self``.
        """
        if self.mode is not Mode.SNN or self.encoding is not EncodingScheme.DYNAMIC_CHUNK:
            return self
        c, h, w = self.input_shape
        chunk = (c, math.ceil(h / self.timesteps), w)
        return infer_shapes(replace(self, input_shape=chunk, layers=_strip_shapes(self.layers)))


def _strip_shapes(layers) -> tuple[Layer, ...]:
    stripped = []
    for layer in layers:
        if isinstance(layer, ConvLayer):
            stripped.append(replace(layer, c_in=None, h_in=None, w_in=None, h_out=None, w_out=None))
        else:
            stripped.append(replace(layer, n_in=None))
    return tuple(stripped)


def infer_shapes(spec: NetworkSpec) -> NetworkSpec:
    """Propagate extents from the network input through every layer.

    Declared extents are kept only if they agree with the computed chain.
    """
    c, h, w = spec.input_shape
    resolved: list[Layer] = []
    for idx, layer in enumerate(spec.layers):
        where = f"layer {idx}"
        if isinstance(layer, ConvLayer):
            for key, want in (("c_in", c), ("h_in", h), ("w_in", w)):
                got = getattr(layer, key)
                if got is not None and got != want:
                    raise NetworkError(f"{where}: shape mismatch, declared {key}={got} but previous output gives {want}")
            h_out = math.ceil(h / layer.stride)
            w_out = math.ceil(w / layer.stride)
            for key, want in (("h_out", h_out), ("w_out", w_out)):
                got = getattr(layer, key)
                if got is not None and got != want:
                    raise NetworkError(f"{where}: shape mismatch, declared {key}={got} but same padding gives {want}")
            layer = replace(layer, c_in=c, h_in=h, w_in=w, h_out=h_out, w_out=w_out)
            c, h, w = layer.c_out, h_out, w_out
        else:
            n_in = c * h * w
            if layer.n_in is not None and layer.n_in != n_in:
                raise NetworkError(f"{where}: shape mismatch, declared n_in={layer.n_in} but previous output gives {n_in}")
            layer = replace(layer, n_in=n_in)
            c, h, w = layer.n_out, 1, 1
        resolved.append(layer)
    return replace(spec, layers=tuple(resolved))


# ---------------------------------------------------------------------------
# JSON schema
# ---------------------------------------------------------------------------

_CONV_KEYS = {"kind", "c_out", "kh", "kw", "stride", "bias", "readout"}
_FC_KEYS = {"kind", "n_out", "bias"}
_TOP_KEYS = {"name", "mode", "timesteps", "neuron", "encoding", "input", "layers", "input_events", "note"}


def _require(doc: Mapping[str, Any], key: str, where: str) -> Any:
    if key not in doc:
        raise NetworkError(f"malformed document: {where} is missing {key!r}")
    return doc[key]


def _parse_enum(enum_cls, value: Any, what: str):
    try:
        return enum_cls(str(value).lower())
    except ValueError:
        allowed = ", ".join(m.value for m in enum_cls)
        raise NetworkError(f"unknown {what} {value!r} (expected one of: {allowed})") from None


def _parse_layer(doc: Any, idx: int) -> Layer:
    where = f"layer {idx}"
    if not isinstance(doc, Mapping):
        raise NetworkError(f"malformed document: {where} is not an object")
    kind = _require(doc, "kind", where)
    if kind in ("pool", "maxpool", "avgpool"):
        raise NetworkError(f"{where}: pooling layers are not supported, use a stride-2 convolution")
    if kind == "conv":
        extra = set(doc) - _CONV_KEYS
        if extra:
            raise NetworkError(f"malformed document: {where} has unknown keys {sorted(extra)}")
        readout = doc.get("readout")
        if readout not in (None, False, "sum"):
            raise NetworkError(f"{where}: unknown readout {readout!r} (only 'sum')")
        return ConvLayer(
            c_out=_require(doc, "c_out", where),
            h_kernel=_require(doc, "kh", where),
            w_kernel=doc.get("kw", 1),
            stride=doc.get("stride", 1),
            has_bias=bool(doc.get("bias", True)),
            readout=readout == "sum",
        )
    if kind == "fc":
        extra = set(doc) - _FC_KEYS
        if extra:
            raise NetworkError(f"malformed document: {where} has unknown keys {sorted(extra)}")
        return FcLayer(n_out=_require(doc, "n_out", where), has_bias=bool(doc.get("bias", True)))
    raise NetworkError(f"{where}: unknown layer kind {kind!r}")


def parse_network(document: Union[str, bytes, Mapping[str, Any]]) -> NetworkSpec:
    """Parse and shape-infer a network document (JSON text or an already-decoded mapping)."""
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise NetworkError(f"malformed document: {exc}") from None
    if not isinstance(document, Mapping):
        raise NetworkError("malformed document: top level must be an object")
    extra = set(document) - _TOP_KEYS
    if extra:
        raise NetworkError(f"malformed document: unknown keys {sorted(extra)}")

    inp = _require(document, "input", "network")
    if not isinstance(inp, Mapping):
        raise NetworkError("malformed document: input must be an object {c, h, w}")
    input_shape = (_require(inp, "c", "input"), _require(inp, "h", "input"), inp.get("w", 1))
    layers_doc = _require(document, "layers", "network")
    if not isinstance(layers_doc, list):
        raise NetworkError("malformed document: layers must be a list")
    layers = tuple(_parse_layer(layer, i) for i, layer in enumerate(layers_doc))

    mode = _parse_enum(Mode, document.get("mode", "fnn"), "mode")
    default_neuron = "relu" if mode is Mode.FNN else "if"
    neuron = _parse_enum(NeuronModel, document.get("neuron", default_neuron), "neuron")
    enc_raw = str(document.get("encoding", "static")).lower()
    if enc_raw not in _ENCODING_ALIASES:
        raise NetworkError(f"unknown encoding {enc_raw!r} (expected static, dynamic or event)")
    input_events = document.get("input_events")

    spec = NetworkSpec(
        name=str(document.get("name", "network")),
        layers=layers,
        input_shape=input_shape,
        timesteps=document.get("timesteps", 1),
        neuron=neuron,
        encoding=_ENCODING_ALIASES[enc_raw],
        mode=mode,
        input_events=float(input_events) if input_events is not None else None,
    )
    return infer_shapes(spec)


def load_network(path: Union[str, Path]) -> NetworkSpec:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise NetworkError(f"cannot read network file {path}: {exc.strerror}") from None
    return parse_network(text)


def to_document(spec: NetworkSpec) -> dict[str, Any]:
    """Inverse of :func:`parse_network`; inferred extents are omitted."""
    layers = []
    for layer in spec.layers:
        if isinstance(layer, ConvLayer):
            entry: dict[str, Any] = {
                "kind": "conv", "c_out": layer.c_out, "kh": layer.h_kernel,
                "kw": layer.w_kernel, "stride": layer.stride, "bias": layer.has_bias,
            }
            if layer.readout:
                entry["readout"] = "sum"
        else:
            entry = {"kind": "fc", "n_out": layer.n_out, "bias": layer.has_bias}
        layers.append(entry)
    c, h, w = spec.input_shape
    doc: dict[str, Any] = {
        "name": spec.name,
        "mode": spec.mode.value,
        "timesteps": spec.timesteps,
        "neuron": spec.neuron.value,
        "encoding": spec.encoding.value,
        "input": {"c": c, "h": h, "w": w},
        "layers": layers,
    }
    if spec.input_events is not None:
        doc["input_events"] = spec.input_events
    return doc


def dumps(spec: NetworkSpec) -> str:
    return json.dumps(to_document(spec), indent=2)
