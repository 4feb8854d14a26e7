"""Feedforward softmax policy networks: MLP1 weight files and inference.

MLP1 layout (little-endian)::

    b"MLP1"  uint32 n_layers
    per layer: uint32 rows, uint32 cols, uint8 activation (0 identity, 1 relu),
               rows*cols float64 weights (row-major, out x in), rows float64 biases

The last layer's outputs are logits; a softmax turns them into action scores.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

MAGIC = b"MLP1"
ACTIVATIONS = {0: "identity", 1: "relu"}
_TAGS = {v: k for k, v in ACTIVATIONS.items()}
CANONICAL_15PUZZLE = (256, 160, 80, 16, 4)


class ModelFormatError(ValueError):
    pass


@dataclass
class Layer:
    weights: np.ndarray
    bias: np.ndarray
    activation: str = "relu"


@dataclass
class MlpModel:
    layers: list

    def __post_init__(self):
        if not self.layers:
            raise ModelFormatError("model has no layers")
        for i, layer in enumerate(self.layers):
            if layer.activation not in _TAGS:
                raise ModelFormatError(f"layer {i}: unknown activation {layer.activation!r}")
            if layer.weights.ndim != 2 or layer.bias.shape != (layer.weights.shape[0],):
                raise ModelFormatError(f"layer {i}: bias length does not match weight rows")
            if i and layer.weights.shape[1] != self.layers[i - 1].weights.shape[0]:
                raise ModelFormatError(
                    f"layer {i} expects {layer.weights.shape[1]} inputs but layer {i - 1} "
                    f"produces {self.layers[i - 1].weights.shape[0]}")
            if not (np.isfinite(layer.weights).all() and np.isfinite(layer.bias).all()):
                raise ModelFormatError(f"layer {i}: non-finite parameters")

    @property
    def input_dim(self) -> int:
        return self.layers[0].weights.shape[1]

    @property
    def output_dim(self) -> int:
        return self.layers[-1].weights.shape[0]

    @property
    def shape(self) -> tuple:
        return (self.input_dim,) + tuple(layer.weights.shape[0] for layer in self.layers)

    def parameter_count(self) -> int:
        return sum(layer.weights.size + layer.bias.size for layer in self.layers)

    def to_bytes(self) -> bytes:
        parts = [MAGIC, struct.pack("<I", len(self.layers))]
        for layer in self.layers:
            rows, cols = layer.weights.shape
            parts.append(struct.pack("<IIB", rows, cols, _TAGS[layer.activation]))
            parts.append(np.ascontiguousarray(layer.weights, dtype="<f8").tobytes())
            parts.append(np.ascontiguousarray(layer.bias, dtype="<f8").tobytes())
        return b"".join(parts)

    def save(self, path):
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())


def model_from_bytes(data: bytes) -> MlpModel:
    if len(data) < 8:
        raise ModelFormatError(f"truncated header: {len(data)} bytes, need 8 at offset 0")
    if data[:4] != MAGIC:
        raise ModelFormatError(f"bad magic {data[:4]!r} at offset 0")
    (count,) = struct.unpack_from("<I", data, 4)
    off = 8
    layers = []
    for i in range(count):
        if len(data) - off < 9:
            raise ModelFormatError(f"truncated layer {i} header at offset {off}")
        rows, cols, tag = struct.unpack_from("<IIB", data, off)
        off += 9
        if tag not in ACTIVATIONS:
            raise ModelFormatError(f"layer {i}: unknown activation tag {tag} at offset {off - 1}")
        need = 8 * (rows * cols + rows)
        if len(data) - off < need:
            raise ModelFormatError(f"truncated layer {i} parameters at offset {off}: need {need} bytes, "
                                   f"have {len(data) - off}")
        w = np.frombuffer(data, dtype="<f8", count=rows * cols, offset=off).reshape(rows, cols).astype(np.float64)
        off += 8 * rows * cols
        b = np.frombuffer(data, dtype="<f8", count=rows, offset=off).astype(np.float64)
        off += 8 * rows
        layers.append(Layer(w, b, ACTIVATIONS[tag]))
    if off != len(data):
        raise ModelFormatError(f"{len(data) - off} trailing bytes at offset {off}")
    return MlpModel(layers)


def load_model(path) -> MlpModel:
    with open(path, "rb") as fh:
        return model_from_bytes(fh.read())


def model_from_text(text: str) -> MlpModel:
    """Parse a plain-text layer dump.

    Each layer is a header line ``layer <rows> <cols> <relu|identity>``
    followed by ``rows`` lines of ``cols`` weights and one line of ``rows``
    biases. Blank lines and ``#`` comments are ignored.
    """
    lines = [ln.split("#", 1)[0].strip() for ln in text.splitlines()]
    lines = [(i + 1, ln) for i, ln in enumerate(lines) if ln]
    layers = []
    pos = 0
    while pos < len(lines):
        lineno, head = lines[pos]
        toks = head.split()
        if len(toks) != 4 or toks[0] != "layer":
            raise ModelFormatError(f"line {lineno}: expected 'layer <rows> <cols> <activation>'")
        rows, cols, act = int(toks[1]), int(toks[2]), toks[3]
        body = lines[pos + 1: pos + 2 + rows]
        if len(body) != rows + 1:
            raise ModelFormatError(f"line {lineno}: layer needs {rows} weight rows and a bias row")
        w = []
        for ln, row in body[:rows]:
            vals = [float(v) for v in row.split()]
            if len(vals) != cols:
                raise ModelFormatError(f"line {ln}: expected {cols} weights, got {len(vals)}")
            w.append(vals)
        ln, brow = body[rows]
        b = [float(v) for v in brow.split()]
        if len(b) != rows:
            raise ModelFormatError(f"line {ln}: expected {rows} biases, got {len(b)}")
        layers.append(Layer(np.array(w, dtype=np.float64).reshape(rows, cols), np.array(b), act))
        pos += 2 + rows
    return MlpModel(layers)


def random_model(shape=CANONICAL_15PUZZLE, seed: int = 0, scale: float = 0.1) -> MlpModel:
    """Random ReLU network with an identity output layer (for tests and demos)."""
    rng = np.random.default_rng(seed)
    layers = []
    for i, (fan_in, fan_out) in enumerate(zip(shape[:-1], shape[1:])):
        act = "identity" if i == len(shape) - 2 else "relu"
        layers.append(Layer(rng.normal(0.0, scale, (fan_out, fan_in)), rng.normal(0.0, scale, fan_out), act))
    return MlpModel(layers)


def softmax(logits) -> np.ndarray:
    z = np.asarray(logits, dtype=np.float64)
    z = z - z.max()
    e = np.exp(z)
    return e / e.sum()


def infer_scores(model: MlpModel, x) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (model.input_dim,):
        raise ValueError(f"input has shape {x.shape}, model expects ({model.input_dim},)")
    for layer in model.layers:
        x = layer.weights @ x + layer.bias
        if layer.activation == "relu":
            x = np.maximum(x, 0.0)
    if not np.isfinite(x).all():
        raise ModelFormatError("non-finite logits; weights are corrupt")
    return softmax(x)


def encode_tile_state(state) -> np.ndarray:
    """One-hot 15-puzzle encoding: tile ``t`` in cell ``c`` sets component ``16*c + t``."""
    if len(state) != 16:
        raise ValueError("the one-hot encoding is defined for the 4x4 puzzle")
    x = np.zeros(256, dtype=np.float64)
    x[16 * np.arange(16) + np.asarray(state)] = 1.0
    return x


def decode_tile_state(x) -> tuple:
    blocks = np.asarray(x).reshape(16, 16)
    return tuple(int(t) for t in blocks.argmax(axis=1))


class MlpPolicy:
    """Stochastic policy over tile states backed by an MLP.

    Output ``i`` scores action ``i`` (Up, Down, Left, Right of the blank).
    """

    def __init__(self, model: MlpModel, encode=encode_tile_state):
        self.model = model
        self.encode = encode
        self.action_count = model.output_dim

    def scores(self, state) -> np.ndarray:
        return infer_scores(self.model, self.encode(state))
