"""Ultralight convolutional network, written directly on numpy.

The network is a stack of 3x3 convolutions with ReLU between them and no
activation on the output. Hidden width is fixed at 27 channels, so the
whole model stays under two thousand parameters. Forward and backward
passes are expressed as matrix products against im2col matrices, which
keeps the hot loop inside BLAS.

All passes operate on batches shaped (B, C, H, W). Borders are handled by
reflect padding that mirrors about the edge sample without repeating it,
matching the blur used elsewhere in the package, and the backward pass
folds pad gradients back onto their interior sources so gradients are
exact.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ContractError, DimensionError, FormatError, ParameterError
from .image import Image

HIDDEN_CHANNELS = 27
ALLOWED_DEPTHS = (2, 3, 5)

_CKPT_MAGIC = b"CFCNET"
_CKPT_VERSION = 1
_CKPT_HEADER = struct.Struct("<6sBBII")  # magic, version, depth, channels, hidden


@dataclass(frozen=True)
class NetworkParams:
    """Weights and biases for every layer, in application order.

    weights[k] has shape (C_out, C_in, 3, 3) and biases[k] shape (C_out,).
    Arrays are copied and frozen on construction; updates produce a new
    instance.
    """

    weights: tuple[np.ndarray, ...]
    biases: tuple[np.ndarray, ...]

    def __post_init__(self):
        ws = tuple(np.array(w, dtype=np.float64) for w in self.weights)
        bs = tuple(np.array(b, dtype=np.float64) for b in self.biases)
        if len(ws) != len(bs) or len(ws) < 2:
            raise DimensionError("parameter lists must pair up and hold at least two layers")
        channels = ws[0].shape[1]
        expected_in = channels
        for k, (w, b) in enumerate(zip(ws, bs)):
            if w.ndim != 4 or w.shape[2:] != (3, 3):
                raise DimensionError(f"layer {k}: weights must be (C_out, C_in, 3, 3), got {w.shape}")
            if w.shape[1] != expected_in:
                raise DimensionError(f"layer {k}: expected {expected_in} input channels, got {w.shape[1]}")
            want_out = channels if k == len(ws) - 1 else HIDDEN_CHANNELS
            if w.shape[0] != want_out:
                raise DimensionError(f"layer {k}: expected {want_out} output channels, got {w.shape[0]}")
            if b.shape != (w.shape[0],):
                raise DimensionError(f"layer {k}: bias shape {b.shape} does not match {w.shape[0]} outputs")
            expected_in = w.shape[0]
        for arr in ws + bs:
            arr.setflags(write=False)
        object.__setattr__(self, "weights", ws)
        object.__setattr__(self, "biases", bs)

    @property
    def depth(self) -> int:
        return len(self.weights)

    @property
    def channels(self) -> int:
        return self.weights[0].shape[1]

    @property
    def param_count(self) -> int:
        return sum(w.size for w in self.weights) + sum(b.size for b in self.biases)

    # Convenience accessors for the two-layer default.
    @property
    def w1(self) -> np.ndarray:
        return self.weights[0]

    @property
    def b1(self) -> np.ndarray:
        return self.biases[0]

    @property
    def w2(self) -> np.ndarray:
        return self.weights[-1]

    @property
    def b2(self) -> np.ndarray:
        return self.biases[-1]


@dataclass
class GradientSet:
    """Per-parameter gradients, mirroring the NetworkParams layout."""

    weights: list[np.ndarray]
    biases: list[np.ndarray]


def init_params(channels: int, seed: int = 0, depth: int = 2) -> NetworkParams:
    """Fresh parameters: uniform weights scaled by fan-in, zero biases.

    Weights are drawn from U(-b, b) with b = sqrt(6 / fan_in), where
    fan_in counts the 3x3 window times input channels.
    """
    if channels not in (1, 3):
        raise ParameterError(f"channel count must be 1 or 3, got {channels}")
    if depth not in ALLOWED_DEPTHS:
        raise ParameterError(f"depth must be one of {ALLOWED_DEPTHS}, got {depth}")
    rng = np.random.default_rng(seed)
    sizes = [channels] + [HIDDEN_CHANNELS] * (depth - 1) + [channels]
    weights, biases = [], []
    for c_in, c_out in zip(sizes[:-1], sizes[1:]):
        bound = np.sqrt(6.0 / (c_in * 9))
        weights.append(rng.uniform(-bound, bound, size=(c_out, c_in, 3, 3)))
        biases.append(np.zeros(c_out))
    return NetworkParams(weights=tuple(weights), biases=tuple(biases))


def _pad_reflect(x: np.ndarray) -> np.ndarray:
    return np.pad(x, ((0, 0), (0, 0), (1, 1), (1, 1)), mode="reflect")


def _im2col(x: np.ndarray) -> np.ndarray:
    """Unfold (B, C, H, W) into a (C*9, B*H*W) patch matrix."""
    b, c, h, w = x.shape
    windows = sliding_window_view(_pad_reflect(x), (3, 3), axis=(2, 3))
    return windows.transpose(1, 4, 5, 0, 2, 3).reshape(c * 9, b * h * w)


def _fold_pad_ring(dxp: np.ndarray) -> np.ndarray:
    """Adjoint of the reflect padding: fold the 1-pixel gradient ring.

    Pad positions mirror interior pixels, so their gradients are added
    onto those pixels, one axis at a time; the result is the exact
    transpose of the padding step.
    """
    h = dxp.shape[-2] - 2
    w = dxp.shape[-1] - 2
    folded = dxp[..., 1:w + 1].copy()
    folded[..., 1] += dxp[..., 0]
    folded[..., w - 2] += dxp[..., w + 1]
    dx = folded[..., 1:h + 1, :].copy()
    dx[..., 1, :] += folded[..., 0, :]
    dx[..., h - 2, :] += folded[..., h + 1, :]
    return dx


def _conv_input_grad(wt: np.ndarray, dz2d: np.ndarray, shape: tuple[int, int, int, int]) -> np.ndarray:
    """Input gradient of one conv layer: a transposed convolution.

    Equivalent to correlating the zero-extended output gradient with the
    flipped kernel and folding the padding ring, which is the exact
    adjoint of pad-then-correlate at a fraction of the scatter cost.
    Returns the gradient as (C_in, B*H*W).
    """
    c_out, c_in = wt.shape[0], wt.shape[1]
    b, _, h, w = shape
    dyz = np.zeros((c_out, b, h + 4, w + 4))
    dyz[:, :, 2:-2, 2:-2] = dz2d.reshape(c_out, b, h, w)
    windows = sliding_window_view(dyz, (3, 3), axis=(2, 3))
    cols = windows.transpose(0, 4, 5, 1, 2, 3).reshape(c_out * 9, b * (h + 2) * (w + 2))
    flipped = wt[:, :, ::-1, ::-1].transpose(1, 0, 2, 3).reshape(c_in, c_out * 9)
    dxp = (flipped @ cols).reshape(c_in, b, h + 2, w + 2)
    return _fold_pad_ring(dxp).reshape(c_in, b * h * w)


@dataclass
class InputCache:
    """Patch matrix of a fixed input batch, reusable across iterations."""

    source: np.ndarray
    cols: np.ndarray


def prepare_input_cache(x: np.ndarray) -> InputCache:
    """Precompute the first-layer patch matrix for a constant input batch."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 4:
        raise DimensionError(f"expected a (B, C, H, W) batch, got shape {x.shape}")
    return InputCache(source=x, cols=_im2col(x))


@dataclass
class ForwardTrail:
    """Intermediates kept by forward_raw for the matching backward_raw."""

    input_shape: tuple[int, int, int, int]
    cols: list[np.ndarray]
    masks: list[np.ndarray]


def forward_raw(
    params: NetworkParams,
    x: np.ndarray,
    cache: InputCache | None = None,
) -> tuple[np.ndarray, ForwardTrail]:
    """Run the network on a (B, C, H, W) batch.

    When a cache is supplied it must have been built from this exact
    array; anything else means the caller is replaying a stale cache.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 4:
        raise DimensionError(f"expected a (B, C, H, W) batch, got shape {x.shape}")
    b, c, h, w = x.shape
    if c != params.channels:
        raise DimensionError(f"network expects {params.channels} channels, batch has {c}")
    if h < 3 or w < 3:
        raise DimensionError(f"spatial size must be at least 3x3, got {h}x{w}")
    if cache is not None:
        if cache.source is not x:
            raise ContractError("input cache was built from a different array")
        cols = cache.cols
    else:
        cols = _im2col(x)

    n = b * h * w
    cols_list = [cols]
    masks: list[np.ndarray] = []
    z = None
    for layer, (wt, bias) in enumerate(zip(params.weights, params.biases)):
        c_out = wt.shape[0]
        z = wt.reshape(c_out, -1) @ cols + bias[:, np.newaxis]
        if layer < params.depth - 1:
            mask = z > 0.0
            masks.append(mask)
            hidden = (z * mask).reshape(c_out, b, h, w).transpose(1, 0, 2, 3)
            cols = _im2col(hidden)
            cols_list.append(cols)
    out = z.reshape(-1, b, h, w).transpose(1, 0, 2, 3)
    return out, ForwardTrail(input_shape=(b, c, h, w), cols=cols_list, masks=masks)


def backward_raw(params: NetworkParams, trail: ForwardTrail, dout: np.ndarray) -> GradientSet:
    """Parameter gradients for a batch, given dLoss/dOutput.

    The input batch is treated as constant, so no gradient is propagated
    past the first layer.
    """
    b, c, h, w = trail.input_shape
    n = b * h * w
    if dout.shape != (b, params.channels, h, w):
        raise DimensionError(f"upstream gradient shape {dout.shape} does not match output")
    dz = dout.transpose(1, 0, 2, 3).reshape(params.channels, n)
    dweights: list[np.ndarray] = [np.empty(0)] * params.depth
    dbiases: list[np.ndarray] = [np.empty(0)] * params.depth
    for layer in reversed(range(params.depth)):
        wt = params.weights[layer]
        cols = trail.cols[layer]
        dweights[layer] = (dz @ cols.T).reshape(wt.shape)
        dbiases[layer] = dz.sum(axis=1)
        if layer == 0:
            break
        dx = _conv_input_grad(wt, dz, (b, wt.shape[1], h, w))
        dz = dx * trail.masks[layer - 1]
    return GradientSet(weights=dweights, biases=dbiases)


def forward(params: NetworkParams, img: Image) -> Image:
    """Apply the network to one image."""
    out, _ = forward_raw(params, img.planes[np.newaxis])
    return Image(out[0])


def backward(params: NetworkParams, img: Image, upstream: Image) -> GradientSet:
    """Parameter gradients of a scalar loss, given its image-space gradient.

    Runs the forward pass internally; for repeated use inside a training
    loop prefer forward_raw/backward_raw with a prepared cache.
    """
    _, trail = forward_raw(params, img.planes[np.newaxis])
    return backward_raw(params, trail, upstream.planes[np.newaxis])


@dataclass
class OptimizerState:
    """Adam moment estimates plus the number of steps taken."""

    step: int
    m: GradientSet
    v: GradientSet


def init_optimizer(params: NetworkParams) -> OptimizerState:
    """Zeroed moments matching the parameter layout."""
    zeros = lambda arrs: [np.zeros_like(a) for a in arrs]
    return OptimizerState(
        step=0,
        m=GradientSet(weights=zeros(params.weights), biases=zeros(params.biases)),
        v=GradientSet(weights=zeros(params.weights), biases=zeros(params.biases)),
    )


def adam_step(
    params: NetworkParams,
    grads: GradientSet,
    state: OptimizerState,
    lr: float = 1e-3,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
) -> tuple[NetworkParams, OptimizerState]:
    """One bias-corrected Adam update. Returns new params and state."""
    if lr <= 0.0:
        raise ParameterError(f"learning rate must be positive, got {lr}")
    if not (0.0 <= beta1 < 1.0 and 0.0 <= beta2 < 1.0):
        raise ParameterError(f"decay rates must lie in [0, 1), got {beta1}, {beta2}")
    if eps <= 0.0:
        raise ParameterError(f"epsilon must be positive, got {eps}")
    t = state.step + 1
    bc1 = 1.0 - beta1 ** t
    bc2 = 1.0 - beta2 ** t

    def update(p, g, m, v):
        m_new = beta1 * m + (1.0 - beta1) * g
        v_new = beta2 * v + (1.0 - beta2) * g * g
        p_new = p - lr * (m_new / bc1) / (np.sqrt(v_new / bc2) + eps)
        return p_new, m_new, v_new

    new_w, new_b = [], []
    m_w, m_b, v_w, v_b = [], [], [], []
    for p, g, m, v in zip(params.weights, grads.weights, state.m.weights, state.v.weights):
        pn, mn, vn = update(p, g, m, v)
        new_w.append(pn), m_w.append(mn), v_w.append(vn)
    for p, g, m, v in zip(params.biases, grads.biases, state.m.biases, state.v.biases):
        pn, mn, vn = update(p, g, m, v)
        new_b.append(pn), m_b.append(mn), v_b.append(vn)
    return (
        NetworkParams(weights=tuple(new_w), biases=tuple(new_b)),
        OptimizerState(step=t, m=GradientSet(m_w, m_b), v=GradientSet(v_w, v_b)),
    )


def _flat_arrays(params: NetworkParams):
    for w, b in zip(params.weights, params.biases):
        yield w
        yield b


def save_checkpoint(params: NetworkParams, path) -> None:
    """Serialize parameters: fixed 16-byte header, then raw float64 data.

    Layout is little-endian throughout; arrays follow in layer order,
    weights before bias.
    """
    header = _CKPT_HEADER.pack(
        _CKPT_MAGIC, _CKPT_VERSION, params.depth, params.channels, HIDDEN_CHANNELS
    )
    body = b"".join(np.ascontiguousarray(a, dtype="<f8").tobytes() for a in _flat_arrays(params))
    Path(path).write_bytes(header + body)


def load_checkpoint(path) -> NetworkParams:
    """Load parameters written by save_checkpoint."""
    blob = Path(path).read_bytes()
    if len(blob) < _CKPT_HEADER.size:
        raise FormatError(f"{path}: truncated checkpoint header")
    magic, version, depth, channels, hidden = _CKPT_HEADER.unpack_from(blob)
    if magic != _CKPT_MAGIC:
        raise FormatError(f"{path}: not a checkpoint file")
    if version != _CKPT_VERSION:
        raise FormatError(f"{path}: unsupported checkpoint version {version}")
    if depth not in ALLOWED_DEPTHS or channels not in (1, 3) or hidden != HIDDEN_CHANNELS:
        raise FormatError(f"{path}: invalid geometry (depth={depth}, channels={channels}, hidden={hidden})")
    sizes = [channels] + [HIDDEN_CHANNELS] * (depth - 1) + [channels]
    offset = _CKPT_HEADER.size
    weights, biases = [], []
    for c_in, c_out in zip(sizes[:-1], sizes[1:]):
        for shape in ((c_out, c_in, 3, 3), (c_out,)):
            count = int(np.prod(shape))
            end = offset + count * 8
            if end > len(blob):
                raise FormatError(f"{path}: checkpoint data is truncated")
            arr = np.frombuffer(blob[offset:end], dtype="<f8").reshape(shape)
            (weights if len(shape) == 4 else biases).append(arr.astype(np.float64))
            offset = end
    if offset != len(blob):
        raise FormatError(f"{path}: {len(blob) - offset} trailing bytes after checkpoint data")
    return NetworkParams(weights=tuple(weights), biases=tuple(biases))
