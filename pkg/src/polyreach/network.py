"""Feedforward ReLU networks: loading, evaluation, bias augmentation, composition.

Hidden activations are componentwise max(0, .); the output layer is affine.
Networks are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import json

import numpy as np

from .pattern import ActivationPattern


class NetworkFormatError(ValueError):
    """File content could not be parsed; message carries line/field context."""


class NetworkStructureError(ValueError):
    """Layer dimensions do not chain; message names the offending layer."""


class ReluNetwork:
    """Weight/bias stack (W_i, b_i); all layers but the last feed a ReLU."""

    def __init__(self, layers):
        mats = []
        for i, (W, b) in enumerate(layers):
            W = np.array(W, dtype=float)
            b = np.array(b, dtype=float).reshape(-1)
            if W.ndim != 2 or W.shape[0] != b.size:
                raise NetworkStructureError(
                    f"layer {i}: weight shape {W.shape} does not match bias length {b.size}"
                )
            W.setflags(write=False)
            b.setflags(write=False)
            mats.append((W, b))
        if len(mats) < 2:
            raise NetworkStructureError("a ReLU network needs at least one hidden layer")
        for i in range(1, len(mats)):
            if mats[i][0].shape[1] != mats[i - 1][0].shape[0]:
                raise NetworkStructureError(
                    f"layer {i}: expects {mats[i][0].shape[1]} inputs but layer "
                    f"{i - 1} produces {mats[i - 1][0].shape[0]}"
                )
        self.layers = tuple(mats)

    @property
    def input_dim(self) -> int:
        return self.layers[0][0].shape[1]

    @property
    def output_dim(self) -> int:
        return self.layers[-1][0].shape[0]

    @property
    def hidden_widths(self) -> tuple[int, ...]:
        return tuple(W.shape[0] for W, _ in self.layers[:-1])

    @property
    def hidden_neuron_count(self) -> int:
        return sum(self.hidden_widths)

    def evaluate(self, x):
        """Forward pass; x may be a point (k0,) or a batch (m, k0)."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.input_dim:
            raise ValueError(f"expected input dim {self.input_dim}, got {x.shape[-1]}")
        z = x
        for W, b in self.layers[:-1]:
            z = np.maximum(z @ W.T + b, 0.0)
        W, b = self.layers[-1]
        return z @ W.T + b

    def preactivations(self, x) -> list[np.ndarray]:
        """Hidden preactivation vectors at a single point, in layer order."""
        z = np.asarray(x, dtype=float)
        pres = []
        for W, b in self.layers[:-1]:
            pre = z @ W.T + b
            pres.append(pre)
            z = np.maximum(pre, 0.0)
        return pres

    def activation_bits(self, x) -> np.ndarray:
        """uint8 bits over hidden neurons, layer-major; batched like evaluate.

        A bit is 1 iff the preactivation is strictly positive (exact zeros map to 0).
        """
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.input_dim:
            raise ValueError(f"expected input dim {self.input_dim}, got {x.shape[-1]}")
        z = x
        bits = []
        for W, b in self.layers[:-1]:
            pre = z @ W.T + b
            bits.append((pre > 0.0).astype(np.uint8))
            z = np.maximum(pre, 0.0)
        return np.concatenate(bits, axis=-1)

    def activation_pattern(self, x) -> ActivationPattern:
        return ActivationPattern(self.activation_bits(np.asarray(x, dtype=float)))


class AugmentedNetwork:
    """Bias-free form: weights absorb biases through a homogeneous coordinate.

    Hidden matrices gain a bottom row [0 ... 0 1]; the output matrix is [W b].
    Evaluating on [x; 1] reproduces the source network exactly.
    """

    def __init__(self, source: ReluNetwork):
        self.source = source
        mats = []
        for W, b in source.layers[:-1]:
            top = np.hstack([W, b[:, None]])
            bottom = np.zeros((1, W.shape[1] + 1))
            bottom[0, -1] = 1.0
            M = np.vstack([top, bottom])
            M.setflags(write=False)
            mats.append(M)
        W, b = source.layers[-1]
        out = np.hstack([W, b[:, None]])
        out.setflags(write=False)
        self.hidden = tuple(mats)
        self.output = out

    @property
    def input_dim(self) -> int:
        return self.source.input_dim

    @property
    def output_dim(self) -> int:
        return self.source.output_dim

    @property
    def hidden_widths(self) -> tuple[int, ...]:
        return self.source.hidden_widths

    @property
    def hidden_neuron_count(self) -> int:
        return self.source.hidden_neuron_count

    def evaluate(self, x):
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        X = np.atleast_2d(x)
        z = np.hstack([X, np.ones((X.shape[0], 1))])
        for M in self.hidden:
            z = np.maximum(z @ M.T, 0.0)
        y = z @ self.output.T
        return y[0] if single else y

    def activation_bits(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        single = x.ndim == 1
        X = np.atleast_2d(x)
        z = np.hstack([X, np.ones((X.shape[0], 1))])
        bits = []
        for M in self.hidden:
            pre = z @ M.T
            bits.append((pre[:, :-1] > 0.0).astype(np.uint8))
            z = np.maximum(pre, 0.0)
        out = np.concatenate(bits, axis=1)
        return out[0] if single else out

    def activation_pattern(self, x) -> ActivationPattern:
        x = np.asarray(x, dtype=float)
        if x.ndim != 1:
            raise ValueError("activation_pattern takes a single point")
        return ActivationPattern(self.activation_bits(x))


def augment(net: ReluNetwork) -> AugmentedNetwork:
    return AugmentedNetwork(net)


def compose(net: ReluNetwork, steps: int) -> ReluNetwork:
    """Concatenate `steps` copies end to end (state-to-state maps only).

    The output layer of one copy folds into the first hidden layer of the next,
    so the result has steps * N hidden neurons and evaluates the iterated map.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    if net.input_dim != net.output_dim:
        raise NetworkStructureError(
            f"compose needs a state-to-state map; got {net.input_dim} -> {net.output_dim}"
        )
    layers = [(W, b) for W, b in net.layers]
    for _ in range(steps - 1):
        Wn, bn = layers.pop()
        W1, b1 = net.layers[0]
        layers.append((W1 @ Wn, W1 @ bn + b1))
        layers.extend(net.layers[1:])
    return ReluNetwork(layers)


def _float_tokens(line: str):
    return [tok for tok in (t.strip() for t in line.split(",")) if tok]


def _parse_nnet(text: str):
    """Parse the plain-text NNet exchange format.

    Header: comment lines ("//"), then layer count line, layer sizes, a legacy
    flag line, input mins/maxes, normalization means/ranges; weight rows and
    per-neuron bias lines follow for each layer, comma separated.
    """
    numbered = [
        (i + 1, ln.strip())
        for i, ln in enumerate(text.splitlines())
        if ln.strip() and not ln.strip().startswith("//")
    ]
    if len(numbered) < 7:
        raise NetworkFormatError("NNet file truncated before the header ends")

    def ints(pos, expect=None, what=""):
        ln, line = numbered[pos]
        try:
            vals = [int(float(t)) for t in _float_tokens(line)]
        except ValueError as exc:
            raise NetworkFormatError(f"line {ln}: bad integer field in {what}: {exc}") from None
        if expect is not None and len(vals) < expect:
            raise NetworkFormatError(
                f"line {ln}: expected {expect} values for {what}, found {len(vals)}"
            )
        return vals

    def floats(pos, expect, what):
        ln, line = numbered[pos]
        try:
            vals = [float(t) for t in _float_tokens(line)]
        except ValueError as exc:
            raise NetworkFormatError(f"line {ln}: bad numeric field in {what}: {exc}") from None
        if len(vals) != expect:
            raise NetworkFormatError(
                f"line {ln}: expected {expect} values for {what}, found {len(vals)}"
            )
        return vals

    num_layers, input_size, output_size, _max_width = ints(0, 4, "layer counts")[:4]
    layer_sizes = ints(1, num_layers + 1, "layer sizes")
    if layer_sizes[0] != input_size or layer_sizes[-1] != output_size:
        raise NetworkFormatError(
            f"line {numbered[1][0]}: layer sizes disagree with declared input/output dims"
        )
    # numbered[2] is a legacy flag line
    mins = floats(3, input_size, "input minimums")
    maxes = floats(4, input_size, "input maximums")
    means = floats(5, input_size + 1, "normalization means")
    ranges = floats(6, input_size + 1, "normalization ranges")

    pos = 7
    layers = []
    for layer in range(num_layers):
        k_out, k_in = layer_sizes[layer + 1], layer_sizes[layer]
        rows = []
        for r in range(k_out):
            if pos >= len(numbered):
                raise NetworkFormatError(
                    f"layer {layer}: file ends inside the weight block (row {r})"
                )
            rows.append(floats(pos, k_in, f"layer {layer} weight row {r}"))
            pos += 1
        bias = []
        for r in range(k_out):
            if pos >= len(numbered):
                raise NetworkFormatError(
                    f"layer {layer}: file ends inside the bias block (row {r})"
                )
            bias.append(floats(pos, 1, f"layer {layer} bias {r}")[0])
            pos += 1
        layers.append((np.array(rows), np.array(bias)))
    meta = {
        "layer_sizes": layer_sizes,
        "mins": np.array(mins),
        "maxes": np.array(maxes),
        "means": np.array(means),
        "ranges": np.array(ranges),
    }
    return layers, meta


def _apply_nnet_normalization(layers, meta):
    """Fold input/output normalization from the header into the weights."""
    if len(layers) < 2:
        raise NetworkStructureError("NNet normalization needs at least two layers")
    mu_in = meta["means"][:-1]
    r_in = meta["ranges"][:-1]
    mu_out = meta["means"][-1]
    r_out = meta["ranges"][-1]
    W1, b1 = layers[0]
    W1s = W1 / r_in[None, :]
    b1s = b1 - W1s @ mu_in
    Wn, bn = layers[-1]
    return [(W1s, b1s)] + list(layers[1:-1]) + [(r_out * Wn, r_out * bn + mu_out)]


def load_network(text: str, fmt: str, nnet_normalize: bool = False) -> ReluNetwork:
    """Build a network from file content; weights are taken verbatim.

    fmt "nnet" reads the plain-text exchange format (normalization constants in
    the header are folded in only when nnet_normalize is set); fmt "json" reads
    {"layers": [{"W": [[...]], "b": [...]}, ...]}.
    """
    if fmt == "nnet":
        layers, meta = _parse_nnet(text)
        if nnet_normalize:
            layers = _apply_nnet_normalization(layers, meta)
        return ReluNetwork(layers)
    if fmt == "json":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise NetworkFormatError(f"bad JSON at line {exc.lineno}: {exc.msg}") from None
        if not isinstance(data, dict) or "layers" not in data:
            raise NetworkFormatError('JSON network needs a top-level "layers" list')
        layers = []
        for i, entry in enumerate(data["layers"]):
            if "W" not in entry or "b" not in entry:
                raise NetworkFormatError(f'layer {i}: missing "W" or "b"')
            layers.append((np.array(entry["W"], dtype=float), np.array(entry["b"], dtype=float)))
        return ReluNetwork(layers)
    raise ValueError(f"unknown network format {fmt!r}")


def load_network_file(path, fmt: str | None = None, nnet_normalize: bool = False) -> ReluNetwork:
    path = str(path)
    if fmt is None:
        fmt = "nnet" if path.endswith(".nnet") else "json"
    with open(path) as fh:
        return load_network(fh.read(), fmt, nnet_normalize=nnet_normalize)


def dump_network_json(net: ReluNetwork) -> str:
    layers = [{"W": W.tolist(), "b": b.tolist()} for W, b in net.layers]
    return json.dumps({"layers": layers})


def dump_nnet(net: ReluNetwork, mins=None, maxes=None, means=None, ranges=None) -> str:
    """Write the NNet text format (identity normalization by default)."""
    k0 = net.input_dim
    sizes = [k0] + [W.shape[0] for W, _ in net.layers]
    mins = np.full(k0, -1e6) if mins is None else np.asarray(mins, dtype=float)
    maxes = np.full(k0, 1e6) if maxes is None else np.asarray(maxes, dtype=float)
    means = np.zeros(k0 + 1) if means is None else np.asarray(means, dtype=float)
    ranges = np.ones(k0 + 1) if ranges is None else np.asarray(ranges, dtype=float)
    lines = ["// generated by polyreach"]
    lines.append(f"{len(net.layers)},{k0},{net.output_dim},{max(sizes)},")
    lines.append(",".join(str(s) for s in sizes) + ",")
    lines.append("0,")
    for vec in (mins, maxes, means, ranges):
        lines.append(",".join(repr(float(v)) for v in vec) + ",")
    for W, b in net.layers:
        for row in W:
            lines.append(",".join(repr(float(v)) for v in row) + ",")
        for v in b:
            lines.append(repr(float(v)) + ",")
    return "\n".join(lines) + "\n"
