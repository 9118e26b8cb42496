"""Training objective: two cross-frequency consistency terms plus TV.

Every term returns both its value and its exact gradient with respect to
the network outputs, normalized per pixel so the default weights behave
the same at any resolution. Subgradients of the absolute value are fixed
to 0 at ties, which keeps repeated runs bitwise identical.

Public functions speak Image; the _raw variants work on bare (C, H, W)
arrays and are what the training loop calls.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, ParameterError
from .image import Image

DEFAULT_WEIGHTS = (0.5, 2.0, 0.5)


@dataclass(frozen=True)
class LossWeights:
    """Multipliers for the consistency terms and the regularizer."""

    w1: float = DEFAULT_WEIGHTS[0]
    w2: float = DEFAULT_WEIGHTS[1]
    w3: float = DEFAULT_WEIGHTS[2]

    def __post_init__(self):
        for name in ("w1", "w2", "w3"):
            v = float(getattr(self, name))
            if not np.isfinite(v) or v < 0.0:
                raise ParameterError(f"{name} must be finite and nonnegative, got {v}")
            object.__setattr__(self, name, v)


@dataclass(frozen=True)
class LossBreakdown:
    """Unweighted component values plus the weighted total for one step."""

    cons1: float
    cons2: float
    reg: float
    total: float

    def __post_init__(self):
        for name in ("cons1", "cons2", "reg", "total"):
            v = float(getattr(self, name))
            if not np.isfinite(v):
                raise ParameterError(f"{name} is not finite: {v}")
            object.__setattr__(self, name, v)


def _check_same_shape(*arrays: np.ndarray) -> None:
    first = arrays[0].shape
    for a in arrays[1:]:
        if a.shape != first:
            raise DimensionError(f"shape mismatch: {first} vs {a.shape}")


def _cons1_raw(lfs1, lfs3, g1, g2):
    """Smooth-path consistency: the two mid-band reconstructions must agree.

    value = mean |(lfs1 + g1) - (lfs3 - g2)|; both gradients are
    sign(residual)/N.
    """
    _check_same_shape(lfs1, lfs3, g1, g2)
    residual = (lfs1 + g1) - (lfs3 - g2)
    n = residual.size
    value = float(np.abs(residual).sum() / n)
    grad = np.sign(residual) / n
    return value, grad, grad


def _cons2_raw(ref, g1, g2, g3):
    """Texture-anchor consistency: each extracted band tracks the reference.

    value = sum_i mean((ref - g_i)^2); gradient for g_i is 2(g_i - ref)/N.
    """
    _check_same_shape(ref, g1, g2, g3)
    n = ref.size
    value = 0.0
    grads = []
    for g in (g1, g2, g3):
        diff = g - ref
        value += float((diff * diff).sum() / n)
        grads.append(2.0 * diff / n)
    return value, grads[0], grads[1], grads[2]


def _tv_raw(img):
    """Anisotropic total variation, averaged over pixels and channels.

    value = (sum |vertical diffs| + sum |horizontal diffs|) / (H * W),
    then averaged across channels; gradient scatters the difference signs
    back onto both endpoints.
    """
    c, h, w = img.shape
    if h < 2 or w < 2:
        raise DimensionError(f"total variation needs at least 2x2 pixels, got {h}x{w}")
    dv = img[:, :-1, :] - img[:, 1:, :]
    dh = img[:, :, :-1] - img[:, :, 1:]
    scale = 1.0 / (h * w * c)
    value = (np.abs(dv).sum() + np.abs(dh).sum()) * scale
    grad = np.zeros_like(img)
    sv = np.sign(dv)
    sh = np.sign(dh)
    grad[:, :-1, :] += sv
    grad[:, 1:, :] -= sv
    grad[:, :, :-1] += sh
    grad[:, :, 1:] -= sh
    grad *= scale
    return float(value), grad


def cons1_loss(lfs1: Image, lfs3: Image, g1: Image, g2: Image):
    """See _cons1_raw; Image-typed wrapper."""
    value, d1, d2 = _cons1_raw(lfs1.planes, lfs3.planes, g1.planes, g2.planes)
    return value, Image(d1), Image(d2)


def cons2_loss(ref: Image, g1: Image, g2: Image, g3: Image):
    """See _cons2_raw; Image-typed wrapper."""
    value, d1, d2, d3 = _cons2_raw(ref.planes, g1.planes, g2.planes, g3.planes)
    return value, Image(d1), Image(d2), Image(d3)


def tv_loss(img: Image):
    """See _tv_raw; Image-typed wrapper."""
    value, grad = _tv_raw(img.planes)
    return value, Image(grad)


def total_loss(cons1: float, cons2: float, reg: float, weights: LossWeights) -> LossBreakdown:
    """Weighted sum of the three components."""
    total = weights.w1 * cons1 + weights.w2 * cons2 + weights.w3 * reg
    return LossBreakdown(cons1=cons1, cons2=cons2, reg=reg, total=total)
