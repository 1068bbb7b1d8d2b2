"""Masked-dense auto-regressive network over occupation bitstrings.

The network maps an M-bit configuration to M pairs of log-conditionals
log P_q(n_q | n_0..n_{q-1}); masking guarantees the auto-regressive
property, so probabilities are exactly normalized by construction.
Parameters live in one flat float64 vector with a per-layer layout table,
which keeps the optimizer and the finite-difference harness independent
of the architecture.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, asdict

import numpy as np

from .determinant import Configuration

CHECKPOINT_MAGIC = b"ARNN"
CHECKPOINT_VERSION = 1

_SELU_SCALE = 1.0507009873554804934193349852946
_SELU_ALPHA = 1.6732632423543772848170429916717
_SOFTPLUS_SCALE = 2.0
_LN2 = 0.6931471805599453


def _selu(z):
    return _SELU_SCALE * np.where(z > 0, z, _SELU_ALPHA * np.expm1(z))


def _selu_grad(z):
    return _SELU_SCALE * np.where(z > 0, 1.0, _SELU_ALPHA * np.exp(z))


def _softplus(z):
    # scaled, shifted softplus: exponential-linear in shape like the scaled
    # exponential-linear unit, but analytic everywhere (selu's derivative
    # jump at 0 sits exactly on the zero-bias initialization and would spoil
    # finite-difference checks)
    return _SOFTPLUS_SCALE * (np.log1p(np.exp(-np.abs(z))) + np.maximum(z, 0.0) - _LN2)


def _softplus_grad(z):
    return _SOFTPLUS_SCALE * 0.5 * (1.0 + np.tanh(0.5 * z))


ACTIVATIONS = {
    "softplus": (_softplus, _softplus_grad),
    "selu": (_selu, _selu_grad),
    "tanh": (np.tanh, lambda z: 1.0 - np.tanh(z) ** 2),
}


@dataclass(frozen=True)
class ArnnConfig:
    n_bits: int
    n_layers: int = 2
    features_per_bit: int = 4
    dropout_rate: float = 0.0
    activation: str = "softplus"
    seed: int = 0
    init_scale: float = 1.0

    def __post_init__(self) -> None:
        if self.n_layers < 1:
            raise ValueError("need at least one masked-dense layer")
        if self.n_bits < 1 or self.features_per_bit < 1:
            raise ValueError("invalid widths")
        if not 0.0 <= self.dropout_rate < 1.0:
            raise ValueError("dropout rate must lie in [0, 1)")
        if self.activation not in ACTIVATIONS:
            raise ValueError(f"unknown activation {self.activation!r}")

    def layer_widths(self) -> list[tuple[int, int]]:
        """(fan_in, fan_out) per masked-dense layer; final layer has 2
        features per bit (the local Hilbert-space dimension)."""
        m, f = self.n_bits, self.features_per_bit
        sizes = [m] + [m * f] * (self.n_layers - 1) + [2 * m]
        return list(zip(sizes[:-1], sizes[1:]))


class ArnnModel:
    """Parameter vector plus masks; immutable during evaluation."""

    def __init__(self, config: ArnnConfig, params: np.ndarray):
        self.config = config
        self.params = np.asarray(params, dtype=np.float64)
        self.layout = _layout(config)
        self.masks = _masks(config)
        n_expected = self.layout[-1][1].stop
        if self.params.shape != (n_expected,):
            raise ValueError(f"expected {n_expected} parameters, got {self.params.shape}")

    @property
    def n_bits(self) -> int:
        return self.config.n_bits

    @property
    def n_params(self) -> int:
        return self.params.size

    def weights(self, layer: int) -> np.ndarray:
        w_slice, _, shape = self.layout[layer]
        return self.params[w_slice].reshape(shape)

    def biases(self, layer: int) -> np.ndarray:
        _, b_slice, shape = self.layout[layer]
        return self.params[b_slice]

    def copy(self) -> "ArnnModel":
        return ArnnModel(self.config, self.params.copy())


def _layout(cfg: ArnnConfig):
    layout = []
    offset = 0
    for fan_in, fan_out in cfg.layer_widths():
        w = slice(offset, offset + fan_out * fan_in)
        offset = w.stop
        b = slice(offset, offset + fan_out)
        offset = b.stop
        layout.append((w, b, (fan_out, fan_in)))
    return layout


def _masks(cfg: ArnnConfig) -> list[np.ndarray]:
    """Bit-block connectivity: strict (q' < q) out of the input layer,
    lower-triangular with diagonal (q' <= q) between feature layers."""
    m = cfg.n_bits
    widths = cfg.layer_widths()
    masks = []
    for ell, (fan_in, fan_out) in enumerate(widths):
        in_block = np.repeat(np.arange(m), fan_in // m)
        out_block = np.repeat(np.arange(m), fan_out // m)
        if ell == 0:
            mask = out_block[:, None] > in_block[None, :]
        else:
            mask = out_block[:, None] >= in_block[None, :]
        masks.append(mask.astype(np.float64))
    return masks


def init_model(cfg: ArnnConfig) -> ArnnModel:
    """Fan-in-scaled uniform weights, zero biases, reproducible from seed."""
    rng = np.random.default_rng(cfg.seed)
    chunks = []
    for fan_in, fan_out in cfg.layer_widths():
        limit = cfg.init_scale * np.sqrt(3.0 / fan_in)
        chunks.append(rng.uniform(-limit, limit, size=fan_out * fan_in))
        chunks.append(np.zeros(fan_out))
    return ArnnModel(cfg, np.concatenate(chunks))


def config_batch(configs, m: int) -> np.ndarray:
    """(B, M) float64 occupation matrix from configurations or raw ints."""
    out = np.empty((len(configs), m))
    for row, c in enumerate(configs):
        bits = c.bits if isinstance(c, Configuration) else int(c)
        out[row] = [(bits >> q) & 1 for q in range(m)]
    return out


def _forward(model: ArnnModel, x: np.ndarray, train_mode: bool, rng, keep_caches: bool):
    cfg = model.config
    act, _ = ACTIVATIONS[cfg.activation]
    n_layers = len(model.layout)
    h = x
    caches = []
    for ell in range(n_layers):
        w = model.weights(ell) * model.masks[ell]
        # einsum without BLAS dispatch: identical rounding for any batch size
        z = np.einsum("bi,oi->bo", h, w, optimize=False) + model.biases(ell)
        if ell == n_layers - 1:
            if keep_caches:
                caches.append((h, z, None))
            h = z
            break
        a = act(z)
        drop = None
        if train_mode and cfg.dropout_rate > 0.0:
            keep = 1.0 - cfg.dropout_rate
            drop = (rng.random(a.shape) < keep) / keep
            a = a * drop
        if keep_caches:
            caches.append((h, z, drop))
        h = a
    b = x.shape[0]
    logits = h.reshape(b, cfg.n_bits, 2)
    peak = logits.max(axis=2, keepdims=True)
    lse = peak + np.log(np.exp(logits - peak).sum(axis=2, keepdims=True))
    return logits - lse, logits, caches


def conditional_log_probs_batch(model: ArnnModel, x: np.ndarray,
                                train_mode: bool = False, rng=None) -> np.ndarray:
    """(B, M, 2) log-conditionals; each (b, q) row normalizes to 1."""
    if x.ndim != 2 or x.shape[1] != model.n_bits:
        raise ValueError("input batch has the wrong number of bits")
    if train_mode and model.config.dropout_rate > 0.0 and rng is None:
        raise ValueError("training-mode evaluation with dropout needs an rng")
    logp, _, _ = _forward(model, np.asarray(x, dtype=np.float64), train_mode, rng, False)
    return logp


def conditional_log_probs(model: ArnnModel, c: Configuration,
                          train_mode: bool = False, rng=None) -> np.ndarray:
    """(M, 2) array of log P_q(v | n_0..n_{q-1}) for one configuration."""
    if c.m != model.n_bits:
        raise ValueError("configuration width disagrees with the model")
    return conditional_log_probs_batch(
        model, config_batch([c], model.n_bits), train_mode, rng
    )[0]


def log_prob_batch(model: ArnnModel, x: np.ndarray) -> np.ndarray:
    """log P(n) per row, evaluation mode."""
    logp = conditional_log_probs_batch(model, x)
    rows = np.arange(x.shape[0])[:, None]
    cols = np.arange(model.n_bits)[None, :]
    sel = x.astype(np.int64)
    return logp[rows, cols, sel].sum(axis=1)


def log_prob(model: ArnnModel, c: Configuration) -> float:
    if c.m != model.n_bits:
        raise ValueError("configuration width disagrees with the model")
    return float(log_prob_batch(model, config_batch([c], model.n_bits))[0])


def log_prob_grad(model: ArnnModel, batch, train_mode: bool = False,
                  rng=None) -> np.ndarray:
    """Gradient of sum_i w_i log P(n_i) over the flat parameter vector.

    ``batch`` is a list of (configuration, weight) with weights >= 0.
    Reverse-mode accumulation; deterministic for a fixed dropout rng state.
    """
    if not batch:
        raise ValueError("empty batch")
    weights = np.array([w for _, w in batch], dtype=np.float64)
    if np.any(weights < 0):
        raise ValueError("weights must be non-negative")
    x = config_batch([c for c, _ in batch], model.n_bits)
    grad, _ = log_prob_grad_arrays(model, x, weights, train_mode, rng)
    return grad


def log_prob_grad_arrays(model: ArnnModel, x: np.ndarray, weights: np.ndarray,
                         train_mode: bool = False, rng=None):
    """(gradient, sum_i w_i log P(n_i)) from a prebuilt occupation matrix."""
    if x.shape[0] == 0:
        raise ValueError("empty batch")
    cfg = model.config
    _, act_grad = ACTIVATIONS[cfg.activation]
    logp, _, caches = _forward(model, x, train_mode, rng, True)

    b = x.shape[0]
    m = cfg.n_bits
    sel = x.astype(np.int64)
    rows = np.arange(b)[:, None]
    cols = np.arange(m)[None, :]
    weighted_loglike = float(weights @ logp[rows, cols, sel].sum(axis=1))
    onehot = np.zeros((b, m, 2))
    onehot[rows, cols, sel] = 1.0
    delta = (onehot - np.exp(logp)) * weights[:, None, None]
    delta = delta.reshape(b, 2 * m)

    grad = np.zeros_like(model.params)
    for ell in reversed(range(len(model.layout))):
        h_prev, _, _ = caches[ell]
        w_slice, b_slice, _ = model.layout[ell]
        masked_w = model.weights(ell) * model.masks[ell]
        grad[w_slice] += ((delta.T @ h_prev) * model.masks[ell]).ravel()
        grad[b_slice] += delta.sum(axis=0)
        if ell == 0:
            break
        dh = delta @ masked_w
        _, z_prev, drop_prev = caches[ell - 1]
        if drop_prev is not None:
            dh = dh * drop_prev
        delta = dh * act_grad(z_prev)
    return grad, weighted_loglike


def save_model(model: ArnnModel, path) -> None:
    blob = json.dumps(asdict(model.config)).encode()
    with open(path, "wb") as fh:
        fh.write(CHECKPOINT_MAGIC)
        fh.write(struct.pack("<I", CHECKPOINT_VERSION))
        fh.write(struct.pack("<Q", len(blob)))
        fh.write(blob)
        fh.write(struct.pack("<Q", model.n_params))
        fh.write(model.params.astype("<f8").tobytes())


def load_model(path) -> ArnnModel:
    with open(path, "rb") as fh:
        if fh.read(4) != CHECKPOINT_MAGIC:
            raise ValueError("not a model checkpoint")
        (version,) = struct.unpack("<I", fh.read(4))
        if version != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {version}")
        (blob_len,) = struct.unpack("<Q", fh.read(8))
        cfg = ArnnConfig(**json.loads(fh.read(blob_len).decode()))
        (n_params,) = struct.unpack("<Q", fh.read(8))
        params = np.frombuffer(fh.read(8 * n_params), dtype="<f8").astype(np.float64)
    return ArnnModel(cfg, params)
