"""Miniature fully-connected classifiers with exact backpropagation.

Architectures are chains of ReLU layers with optional additive skip
connections. A skip (src, dst) feeds the post-activation output of layer
``src`` (0 means the raw input), scaled by a learnable scalar, into the
pre-activation of hidden layer ``dst``; source and destination widths must
match. Keeping every hidden output a ReLU image is what lets an identity
layer be inserted anywhere without changing the function.

All parameters live in one flat float64 vector with a fixed layout:
per hidden layer W then b, then the output layer, then one scale per skip.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    BadLabel,
    BadParams,
    DimensionMismatch,
    MissingFile,
    ShapeMismatch,
)


@dataclass(frozen=True)
class NetSpec:
    """Architecture description: widths of the hidden chain plus skips.

    Activation index 0 is the input; index i (1-based) is the output of
    hidden layer i. Skips are (src, dst) pairs with src < dst, dst >= 1.
    """

    input_dim: int
    output_dim: int
    hidden: tuple[int, ...]
    skips: tuple[tuple[int, int], ...] = ()

    def __post_init__(self) -> None:
        if self.input_dim < 1 or self.output_dim < 2:
            raise ValueError(
                f"need input_dim >= 1 and output_dim >= 2, got "
                f"{self.input_dim}/{self.output_dim}"
            )
        if len(self.hidden) < 1 or any(w < 1 for w in self.hidden):
            raise ValueError(f"hidden widths must be positive, got {self.hidden}")
        object.__setattr__(self, "hidden", tuple(int(w) for w in self.hidden))
        object.__setattr__(
            self, "skips", tuple((int(s), int(d)) for s, d in self.skips)
        )
        widths = self.widths()
        seen = set()
        for s, d in self.skips:
            if not (0 <= s < d <= len(self.hidden)) or d < 1:
                raise ValueError(f"skip ({s},{d}) out of range")
            if (s, d) in seen:
                raise ValueError(f"duplicate skip ({s},{d})")
            seen.add((s, d))
            if widths[s] != widths[d]:
                raise DimensionMismatch(
                    f"skip ({s},{d}) joins widths {widths[s]} and {widths[d]}"
                )

    def widths(self) -> list[int]:
        """Activation widths indexed 0 (input) through len(hidden)."""
        return [self.input_dim, *self.hidden]

    def incoming(self, dst: int) -> int:
        """Number of skips targeting hidden layer dst."""
        return sum(1 for _, d in self.skips if d == dst)


def param_count(spec: NetSpec) -> int:
    widths = spec.widths()
    n = 0
    for i in range(1, len(widths)):
        n += widths[i] * widths[i - 1] + widths[i]
    n += spec.output_dim * widths[-1] + spec.output_dim
    n += len(spec.skips)
    return n


@dataclass
class NetParts:
    """Structured view of the flat parameter vector."""

    weights: list[np.ndarray]   # per hidden layer, shape (h_i, h_{i-1})
    biases: list[np.ndarray]    # per hidden layer, shape (h_i,)
    w_out: np.ndarray           # (output_dim, h_L)
    b_out: np.ndarray           # (output_dim,)
    scales: np.ndarray          # one scalar per skip, spec order


def unflatten(spec: NetSpec, flat: np.ndarray) -> NetParts:
    flat = np.asarray(flat, dtype=float)
    if flat.ndim != 1 or flat.size != param_count(spec):
        raise BadParams(
            f"expected {param_count(spec)} parameters, got shape {flat.shape}"
        )
    widths = spec.widths()
    weights, biases = [], []
    k = 0
    for i in range(1, len(widths)):
        h, p = widths[i], widths[i - 1]
        weights.append(flat[k:k + h * p].reshape(h, p))
        k += h * p
        biases.append(flat[k:k + h])
        k += h
    out, h_last = spec.output_dim, widths[-1]
    w_out = flat[k:k + out * h_last].reshape(out, h_last)
    k += out * h_last
    b_out = flat[k:k + out]
    k += out
    scales = flat[k:k + len(spec.skips)]
    return NetParts(weights, biases, w_out, b_out, scales)


def flatten(spec: NetSpec, parts: NetParts) -> np.ndarray:
    pieces = []
    for w, b in zip(parts.weights, parts.biases):
        pieces.append(np.asarray(w, dtype=float).ravel())
        pieces.append(np.asarray(b, dtype=float).ravel())
    pieces.append(np.asarray(parts.w_out, dtype=float).ravel())
    pieces.append(np.asarray(parts.b_out, dtype=float).ravel())
    pieces.append(np.asarray(parts.scales, dtype=float).ravel())
    flat = np.concatenate(pieces) if pieces else np.empty(0)
    if flat.size != param_count(spec):
        raise BadParams(
            f"parts hold {flat.size} parameters, spec wants {param_count(spec)}"
        )
    return flat


def init_params(spec: NetSpec, rng: np.random.Generator) -> np.ndarray:
    """He-scaled weights (std sqrt(2/fan_in)), zero biases and skip scales."""
    widths = spec.widths()
    weights, biases = [], []
    for i in range(1, len(widths)):
        h, p = widths[i], widths[i - 1]
        weights.append(rng.normal(0.0, np.sqrt(2.0 / p), size=(h, p)))
        biases.append(np.zeros(h))
    w_out = rng.normal(0.0, np.sqrt(2.0 / widths[-1]), size=(spec.output_dim, widths[-1]))
    b_out = np.zeros(spec.output_dim)
    scales = np.zeros(len(spec.skips))
    return flatten(spec, NetParts(weights, biases, w_out, b_out, scales))


def _check_inputs(spec: NetSpec, inputs: np.ndarray) -> np.ndarray:
    inputs = np.asarray(inputs, dtype=float)
    if inputs.ndim != 2 or inputs.shape[1] != spec.input_dim:
        raise ShapeMismatch(
            f"inputs shape {inputs.shape}, expected (batch, {spec.input_dim})"
        )
    return inputs


def _activations(
    spec: NetSpec, parts: NetParts, inputs: np.ndarray
) -> tuple[list[np.ndarray], list[np.ndarray], np.ndarray]:
    """Returns (post-activations a_0..a_L, pre-activations z_1..z_L, logits)."""
    acts = [inputs]
    pres = []
    for i, (w, b) in enumerate(zip(parts.weights, parts.biases), start=1):
        z = acts[i - 1] @ w.T + b
        for k, (s, d) in enumerate(spec.skips):
            if d == i:
                z = z + parts.scales[k] * acts[s]
        pres.append(z)
        acts.append(np.maximum(z, 0.0))
    logits = acts[-1] @ parts.w_out.T + parts.b_out
    return acts, pres, logits


def logits(spec: NetSpec, params: np.ndarray, inputs: np.ndarray) -> np.ndarray:
    inputs = _check_inputs(spec, inputs)
    parts = unflatten(spec, params)
    return _activations(spec, parts, inputs)[2]


def forward(spec: NetSpec, params: np.ndarray, inputs: np.ndarray) -> np.ndarray:
    """Class probabilities, rows summing to 1."""
    return softmax(logits(spec, params, inputs))


def softmax(z: np.ndarray) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    shifted = z - z.max(axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / e.sum(axis=-1, keepdims=True)


def _check_labels(spec: NetSpec, inputs: np.ndarray, labels: np.ndarray) -> np.ndarray:
    labels = np.asarray(labels)
    if labels.ndim != 1 or labels.shape[0] != inputs.shape[0]:
        raise ShapeMismatch(
            f"labels shape {labels.shape} does not match batch {inputs.shape[0]}"
        )
    if not np.issubdtype(labels.dtype, np.integer):
        if not np.all(labels == labels.astype(int)):
            raise BadLabel("labels must be integers")
        labels = labels.astype(int)
    if labels.size and (labels.min() < 0 or labels.max() >= spec.output_dim):
        raise BadLabel(
            f"labels must lie in [0, {spec.output_dim}), got "
            f"[{labels.min()}, {labels.max()}]"
        )
    return labels


def loss_only(
    spec: NetSpec,
    params: np.ndarray,
    inputs: np.ndarray,
    labels: np.ndarray,
) -> float:
    """Mean cross-entropy without the gradient."""
    inputs = _check_inputs(spec, inputs)
    labels = _check_labels(spec, inputs, labels)
    z = logits(spec, params, inputs)
    lse = _logsumexp(z)
    return float(np.mean(lse - z[np.arange(z.shape[0]), labels]))


def _logsumexp(z: np.ndarray) -> np.ndarray:
    m = z.max(axis=1)
    return m + np.log(np.exp(z - m[:, None]).sum(axis=1))


def loss_and_grad(
    spec: NetSpec,
    params: np.ndarray,
    inputs: np.ndarray,
    labels: np.ndarray,
) -> tuple[float, np.ndarray]:
    """Mean cross-entropy and its gradient in the flat parameter vector."""
    inputs = _check_inputs(spec, inputs)
    labels = _check_labels(spec, inputs, labels)
    parts = unflatten(spec, params)
    acts, pres, z = _activations(spec, parts, inputs)
    batch = inputs.shape[0]

    lse = _logsumexp(z)
    loss = float(np.mean(lse - z[np.arange(batch), labels]))

    dlogits = softmax(z)
    dlogits[np.arange(batch), labels] -= 1.0
    dlogits /= batch

    d_w_out = dlogits.T @ acts[-1]
    d_b_out = dlogits.sum(axis=0)

    n_hidden = len(spec.hidden)
    d_acts = [np.zeros_like(a) for a in acts]
    d_acts[n_hidden] = dlogits @ parts.w_out

    d_weights = [None] * n_hidden
    d_biases = [None] * n_hidden
    d_scales = np.zeros(len(spec.skips))
    for i in range(n_hidden, 0, -1):
        dz = d_acts[i] * (pres[i - 1] > 0.0)
        d_weights[i - 1] = dz.T @ acts[i - 1]
        d_biases[i - 1] = dz.sum(axis=0)
        d_acts[i - 1] += dz @ parts.weights[i - 1]
        for k, (s, d) in enumerate(spec.skips):
            if d == i:
                d_scales[k] += float(np.sum(dz * acts[s]))
                d_acts[s] += parts.scales[k] * dz

    grad = flatten(
        spec, NetParts(d_weights, d_biases, d_w_out, d_b_out, d_scales)
    )
    return loss, grad


def predict(spec: NetSpec, params: np.ndarray, inputs: np.ndarray) -> np.ndarray:
    return np.argmax(logits(spec, params, inputs), axis=1)


def evaluate(
    spec: NetSpec,
    params: np.ndarray,
    inputs: np.ndarray,
    labels: np.ndarray,
) -> tuple[float, float]:
    """(mean cross-entropy, accuracy) on the given arrays."""
    loss = loss_only(spec, params, inputs, labels)
    acc = float(np.mean(predict(spec, params, inputs) == np.asarray(labels)))
    return loss, acc


# -- serialization --------------------------------------------------------

def spec_to_descriptors(spec: NetSpec) -> list:
    out: list = [{"op": "input", "dim": spec.input_dim}]
    for w in spec.hidden:
        out.append({"op": "dense", "width": w})
        out.append({"op": "relu"})
    out.append({"op": "output", "width": spec.output_dim})
    for s, d in spec.skips:
        out.append({"op": "skip", "src": s, "dst": d})
    return out


def spec_from_descriptors(items: Sequence) -> NetSpec:
    try:
        if not items or items[0].get("op") != "input":
            raise BadParams("descriptor list must start with an input entry")
        input_dim = int(items[0]["dim"])
        hidden: list[int] = []
        skips: list[tuple[int, int]] = []
        output_dim = None
        i = 1
        while i < len(items) and items[i].get("op") == "dense":
            if i + 1 >= len(items) or items[i + 1].get("op") != "relu":
                raise BadParams("dense entry not followed by relu")
            hidden.append(int(items[i]["width"]))
            i += 2
        if i >= len(items) or items[i].get("op") != "output":
            raise BadParams("missing output entry")
        output_dim = int(items[i]["width"])
        i += 1
        for item in items[i:]:
            if item.get("op") != "skip":
                raise BadParams(f"unexpected trailing entry {item!r}")
            skips.append((int(item["src"]), int(item["dst"])))
    except (AttributeError, KeyError, TypeError) as exc:
        raise BadParams(f"malformed architecture descriptors: {exc}") from exc
    return NetSpec(input_dim, output_dim, tuple(hidden), tuple(skips))


def spec_digest(spec: NetSpec) -> str:
    """Short stable hash of the architecture (not the parameters)."""
    blob = json.dumps(spec_to_descriptors(spec), separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def save_checkpoint(path: str, spec: NetSpec, params: np.ndarray) -> None:
    """Write {"spec": [...], "flat": [...]} with exact float round-trip.

    Floats are printed with 17 significant digits, enough to reproduce the
    binary values bit for bit on load.
    """
    params = np.asarray(params, dtype=float)
    if params.size != param_count(spec):
        raise BadParams(
            f"params have {params.size} entries, spec wants {param_count(spec)}"
        )
    if not np.all(np.isfinite(params)):
        raise BadParams("refusing to save non-finite parameters")
    flat = ", ".join(format(v, ".17g") for v in params)
    blob = '{"spec": %s, "flat": [%s]}' % (
        json.dumps(spec_to_descriptors(spec)),
        flat,
    )
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(blob + "\n")


def load_checkpoint(path: str) -> tuple[NetSpec, np.ndarray]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except FileNotFoundError as exc:
        raise MissingFile(str(exc)) from exc
    except json.JSONDecodeError as exc:
        raise BadParams(f"checkpoint is not valid JSON: {exc}") from exc
    if not isinstance(payload, dict) or "spec" not in payload or "flat" not in payload:
        raise BadParams("checkpoint must hold 'spec' and 'flat'")
    spec = spec_from_descriptors(payload["spec"])
    flat = np.asarray(payload["flat"], dtype=float)
    if flat.size != param_count(spec):
        raise BadParams(
            f"checkpoint has {flat.size} parameters, spec wants {param_count(spec)}"
        )
    return spec, flat
