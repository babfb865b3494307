"""Quantized fully-connected inference through the simulated crossbar.

Layers carry signed real weights split into unsigned 4-bit positive/negative
matrices with one scale per layer. Three fidelity modes exist:

* ``IDEAL``: exact quantized arithmetic (the reference).
* ``CROSSBAR``: inputs encoded to the linear voltage window, each 16-row tile
  evaluated as Config-A column currents against an ideal-opamp clamp,
  ADC-quantized per tile and digitally accumulated; positive and negative
  tiles subtract digitally.
* ``CROSSBAR_VARIATION``: additionally injects Gaussian surrogate noise per
  tile conversion, with one counter-based stream per (sample, layer, tile,
  sign).

The clamp pins every RBL, so a tile's group current factorizes exactly into
(unit cell current at each row's voltage) x (integer weight level); the
evaluator exploits that to reduce a tile to two matrix products (ON and OFF
cells) without approximation. ``train_reference`` is a plain SGD backprop
trainer (saturating-linear hidden activation, no biases) for the bundled
desk-scale digit set.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .crossbar import WEIGHT_LEVELS
from .device import DEFAULT_VDD, DeviceParams, _params_tuple, stack_current_arrays
from .errors import InvalidInputError
from .variation import StdVsCurrentFit

MAX_LEVEL = WEIGHT_LEVELS - 1


@dataclass(frozen=True)
class ActivationSpec:
    """Saturating-linear activation: clamp(gain * x, 0, 1).

    The gain acts before the clamp so that scaling all layer weights by c and
    the gain by 1/c leaves the network function unchanged.
    """

    gain: float = 1.0

    def __call__(self, x):
        return np.clip(self.gain * np.asarray(x, dtype=float), 0.0, 1.0)


@dataclass(frozen=True)
class InputEncoding:
    """Affine map of activations in [0, 1] onto the linear voltage window."""

    v_low: float = 0.10
    v_high: float = 0.22

    def __post_init__(self):
        if not self.v_high > self.v_low:
            raise InvalidInputError("encoding window must be increasing")

    def encode(self, x) -> np.ndarray:
        x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
        return self.v_low + x * (self.v_high - self.v_low)


def encode_inputs(activations, encoding: InputEncoding | None = None) -> np.ndarray:
    """Map activations in [0, 1] onto the linear voltage window."""
    return (encoding if encoding is not None else InputEncoding()).encode(
        activations
    )


def _unit_currents(profile: DeviceParams, v, v_clamp: float, v_dd: float,
                   data_bit: int) -> np.ndarray:
    """Current of a width-1 cell at SL voltage ``v`` against the clamp."""
    params = _params_tuple(profile)
    g1 = v_dd if data_bit else 0.0
    i, _, _ = stack_current_arrays(params, params, g1, v_dd,
                                   np.asarray(v, dtype=float), v_clamp)
    return i


@dataclass(frozen=True)
class NormalizationSpec:
    """Current normalization: i_max = v_max * g_max per unit weight row.

    ``calibrate`` measures the weight-15 word current. The "center" anchor
    fits the effective conductance at the window midpoint (halving the
    worst-case integral nonlinearity of the concave cell transfer); "top"
    anchors at the highest input and weight level instead.
    """

    i_max: float
    g_max: float
    v_max: float

    @classmethod
    def calibrate(cls, profile: DeviceParams, encoding: InputEncoding,
                  v_clamp: float = 0.1, v_dd: float = DEFAULT_VDD,
                  anchor: str = "center") -> "NormalizationSpec":
        if anchor == "center":
            x0 = 0.5
        elif anchor == "top":
            x0 = 1.0
        else:
            raise InvalidInputError(f"unknown normalization anchor {anchor!r}")
        i_word = MAX_LEVEL * float(
            _unit_currents(profile, encoding.encode(x0), v_clamp, v_dd, 1)
        )
        i_max = i_word / x0
        v_max = encoding.v_high - v_clamp
        return cls(i_max=i_max, g_max=i_max / v_max, v_max=v_max)


def quantize_weights(w, bits: int = 4):
    """Split a real matrix into (pos, neg, scale) unsigned levels.

    scale = max|w| / (2^bits - 1); pos/neg hold round(|w|/scale) on the
    matching sign, at most one nonzero per element. An all-zero matrix
    returns a zero scale sentinel.
    """
    w = np.asarray(w, dtype=float)
    if not np.all(np.isfinite(w)):
        raise InvalidInputError("weights must be finite")
    top = (1 << bits) - 1
    scale = float(np.max(np.abs(w))) / top
    if scale == 0.0:
        z = np.zeros_like(w, dtype=np.int64)
        return z, z.copy(), 0.0
    levels = np.round(np.abs(w) / scale).astype(np.int64)
    pos = np.where(w > 0, levels, 0)
    neg = np.where(w < 0, levels, 0)
    return pos, neg, scale


@dataclass
class QuantizedLayer:
    weights: np.ndarray          # real (in_dim x out_dim)
    pos: np.ndarray
    neg: np.ndarray
    scale: float

    @classmethod
    def from_real(cls, w) -> "QuantizedLayer":
        pos, neg, scale = quantize_weights(w)
        return cls(weights=np.asarray(w, dtype=float), pos=pos, neg=neg,
                   scale=scale)

    @property
    def in_dim(self) -> int:
        return self.weights.shape[0]

    @property
    def out_dim(self) -> int:
        return self.weights.shape[1]

    def dequantized(self) -> np.ndarray:
        return (self.pos - self.neg) * self.scale


@dataclass
class QuantizedNetwork:
    layers: list[QuantizedLayer]
    activation: ActivationSpec = field(default_factory=ActivationSpec)

    @classmethod
    def from_real_weights(cls, weight_list,
                          activation: ActivationSpec | None = None):
        layers = [QuantizedLayer.from_real(w) for w in weight_list]
        for a, b in zip(layers, layers[1:]):
            if a.out_dim != b.in_dim:
                raise InvalidInputError("layer dimensions do not chain")
        return cls(layers=layers,
                   activation=activation if activation else ActivationSpec())

    @property
    def topology(self) -> tuple[int, ...]:
        return (self.layers[0].in_dim,) + tuple(l.out_dim for l in self.layers)


class EvalMode(enum.Enum):
    IDEAL = "ideal"
    CROSSBAR = "crossbar"
    CROSSBAR_VARIATION = "crossbar_variation"


@dataclass
class CrossbarContext:
    """Analog evaluation setup shared by all layers of one inference run."""

    profile: DeviceParams = field(default_factory=DeviceParams)
    encoding: InputEncoding = field(default_factory=InputEncoding)
    normalization: NormalizationSpec | None = None
    v_dd: float = DEFAULT_VDD
    v_clamp: float = 0.1
    adc_bits: int = 8
    tile_rows: int = 16
    variation_fit: StdVsCurrentFit | None = None
    variation_seed: int = 0

    def __post_init__(self):
        if self.normalization is None:
            self.normalization = NormalizationSpec.calibrate(
                self.profile, self.encoding, self.v_clamp, self.v_dd
            )

    def adc_quantize(self, currents: np.ndarray,
                     rows_in_tile: int | None = None) -> np.ndarray:
        """Uniform quantizer over [0, tile I_max], one code per conversion."""
        rows = self.tile_rows if rows_in_tile is None else rows_in_tile
        full = rows * self.normalization.i_max
        codes = (1 << self.adc_bits) - 1
        step = full / codes
        return np.clip(np.round(currents / step), 0, codes) * step


def _tile_slices(n_rows: int, tile_rows: int):
    return [slice(s, min(s + tile_rows, n_rows))
            for s in range(0, n_rows, tile_rows)]


def evaluate_layer(x, layer: QuantizedLayer, mode: EvalMode,
                   ctx: CrossbarContext | None = None, *,
                   tile_rows: int | None = None,
                   layer_index: int = 0,
                   sample_offset: int = 0) -> np.ndarray:
    """Pre-activations of one layer for a batch of inputs in [0, 1].

    Returns real units (dequantized), shape (batch, out_dim). Only rows are
    tiled: the clamp makes word groups independent, so layers wider than a
    physical array are implicitly split across column tiles with no effect
    on the result.
    """
    x = np.atleast_2d(np.asarray(x, dtype=float))
    if x.shape[1] != layer.in_dim:
        raise InvalidInputError(
            f"input width {x.shape[1]} != layer fan-in {layer.in_dim}"
        )
    if mode is EvalMode.IDEAL:
        return (x @ (layer.pos - layer.neg).astype(float)) * layer.scale

    ctx = ctx if ctx is not None else CrossbarContext()
    rows_per_tile = ctx.tile_rows if tile_rows is None else tile_rows
    v = ctx.encoding.encode(x)
    u_on = _unit_currents(ctx.profile, v, ctx.v_clamp, ctx.v_dd, 1)
    u_off = _unit_currents(ctx.profile, v, ctx.v_clamp, ctx.v_dd, 0)

    noisy = mode is EvalMode.CROSSBAR_VARIATION
    if noisy and ctx.variation_fit is None:
        raise InvalidInputError("variation mode needs a std-vs-current fit")

    acc = np.zeros((x.shape[0], layer.out_dim))
    tiles = _tile_slices(layer.in_dim, rows_per_tile)
    for t_idx, rows in enumerate(tiles):
        for sign, mat in ((+1.0, layer.pos), (-1.0, layer.neg)):
            lv = mat[rows].astype(float)
            i_tile = u_on[:, rows] @ lv + u_off[:, rows] @ (MAX_LEVEL - lv)
            if noisy:
                i_tile = _add_tile_noise(
                    i_tile, ctx, layer_index, t_idx, sign, sample_offset
                )
            acc += sign * ctx.adc_quantize(i_tile, rows.stop - rows.start)
    y_norm = acc / ctx.normalization.i_max
    return y_norm * MAX_LEVEL * layer.scale


def _add_tile_noise(i_tile: np.ndarray, ctx: CrossbarContext,
                    layer_index: int, tile_index: int, sign: float,
                    sample_offset: int) -> np.ndarray:
    sig = ctx.variation_fit(i_tile)
    out = np.empty_like(i_tile)
    sign_id = 0 if sign > 0 else 1
    for k in range(i_tile.shape[0]):
        seq = np.random.SeedSequence(
            (ctx.variation_seed, sample_offset + k, layer_index,
             tile_index, sign_id)
        )
        rng = np.random.Generator(np.random.Philox(seed=seq))
        out[k] = i_tile[k] + rng.standard_normal(i_tile.shape[1]) * sig[k]
    return np.maximum(out, 0.0)


def forward(x, network: QuantizedNetwork, mode: EvalMode,
            ctx: CrossbarContext | None = None,
            sample_offset: int = 0) -> np.ndarray:
    """Network output pre-activations (before the final argmax)."""
    h = np.atleast_2d(np.asarray(x, dtype=float))
    last = len(network.layers) - 1
    for li, layer in enumerate(network.layers):
        z = evaluate_layer(h, layer, mode, ctx, layer_index=li,
                           sample_offset=sample_offset)
        h = network.activation(z) if li < last else z
    return h


def infer(features, labels, network: QuantizedNetwork, mode: EvalMode,
          ctx: CrossbarContext | None = None,
          chunk: int = 256) -> float:
    """Classification accuracy of argmax over the network outputs."""
    features = np.atleast_2d(np.asarray(features, dtype=float))
    labels = np.asarray(labels)
    if features.shape[0] != labels.shape[0]:
        raise InvalidInputError("features and labels must pair up")
    if features.shape[1] != network.topology[0]:
        raise InvalidInputError("feature width does not match the network")
    hits = 0
    for start in range(0, features.shape[0], chunk):
        batch = features[start:start + chunk]
        out = forward(batch, network, mode, ctx, sample_offset=start)
        hits += int(np.sum(np.argmax(out, axis=1) == labels[start:start + chunk]))
    return hits / features.shape[0]


# ---------------------------------------------------------------------------
# Reference trainer (plain SGD backprop, satlin hidden activation, no biases).


def _one_hot(y, n_classes):
    out = np.zeros((len(y), n_classes))
    out[np.arange(len(y)), y] = 1.0
    return out


def loss_and_grads(weights, x, y_onehot):
    """Mean squared error over the batch and its weight gradients."""
    w1, w2 = weights
    z1 = x @ w1
    h = np.clip(z1, 0.0, 1.0)
    z2 = h @ w2
    err = z2 - y_onehot
    loss = 0.5 * float(np.mean(np.sum(err * err, axis=1)))
    d2 = err / x.shape[0]
    gw2 = h.T @ d2
    dh = d2 @ w2.T
    d1 = dh * ((z1 > 0.0) & (z1 < 1.0))
    gw1 = x.T @ d1
    return loss, [gw1, gw2]


def train_reference(train_x, train_y, topology=(64, 32, 10), *,
                    epochs: int = 150, lr: float = 0.5, batch_size: int = 32,
                    seed: int = 0):
    """Train real weight matrices; deterministic per seed.

    Returns (weights, epoch_losses). Non-convergence is not an error: the
    final loss history tells the story.
    """
    m, hidden, p = topology
    train_x = np.asarray(train_x, dtype=float)
    y_onehot = _one_hot(np.asarray(train_y), p)
    if train_x.shape[1] != m:
        raise InvalidInputError("training features do not match topology")
    rng = np.random.default_rng(np.random.SeedSequence((seed, 4242)))
    w1 = rng.normal(0.0, 1.0 / np.sqrt(m), (m, hidden))
    w2 = rng.normal(0.0, 1.0 / np.sqrt(hidden), (hidden, p))
    weights = [w1, w2]
    losses = []
    n = train_x.shape[0]
    for _ in range(epochs):
        order = rng.permutation(n)
        epoch_loss = 0.0
        for start in range(0, n, batch_size):
            idx = order[start:start + batch_size]
            loss, grads = loss_and_grads(weights, train_x[idx], y_onehot[idx])
            epoch_loss += loss * len(idx)
            for w, g in zip(weights, grads):
                w -= lr * g
        losses.append(epoch_loss / n)
    return weights, losses
