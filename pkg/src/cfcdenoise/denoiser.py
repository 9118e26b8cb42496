"""Zero-shot denoising loop: train the texture extractor on one image.

The noisy image is split into a smooth base plus three high-frequency
shells. A single shared-weight network is applied to all three shells,
and its outputs are pulled toward cross-frequency agreement by the
objective. The denoised estimate is the base plus the three extracted
textures; no clean data, no external training set.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import DimensionError, DivergenceError, ParameterError
from .freq import band_pass_ref, decompose
from .image import Image
from .losses import LossBreakdown, LossWeights, _cons1_raw, _cons2_raw, _tv_raw, total_loss
from .micronet import (
    ALLOWED_DEPTHS,
    NetworkParams,
    adam_step,
    backward_raw,
    forward_raw,
    init_optimizer,
    init_params,
    prepare_input_cache,
)

MIN_TRAIN_SIDE = 32


@dataclass(frozen=True)
class TrainConfig:
    """Everything a denoising run depends on, echoed into its result.

    The three decomposition cutoffs must increase strictly; the two
    reference-band cutoffs bracket the texture band used by the second
    consistency term.
    """

    f_c1: float = 0.05
    f_c2: float = 0.07
    f_c3: float = 0.1
    f_ref1: float = 0.03
    f_ref2: float = 0.12
    weights: LossWeights = field(default_factory=LossWeights)
    iterations: int = 1000
    lr: float = 1e-3
    seed: int = 0
    depth: int = 2

    def __post_init__(self):
        for name in ("f_c1", "f_c2", "f_c3", "f_ref1", "f_ref2"):
            v = float(getattr(self, name))
            if not (0.0 < v < 0.5):
                raise ParameterError(f"{name} must lie in (0, 0.5), got {v}")
        if not (self.f_c1 < self.f_c2 < self.f_c3):
            raise ParameterError("decomposition cutoffs must satisfy f_c1 < f_c2 < f_c3")
        if not (self.f_ref1 < self.f_ref2):
            raise ParameterError("reference band cutoffs must satisfy f_ref1 < f_ref2")
        if self.iterations < 1:
            raise ParameterError(f"iterations must be at least 1, got {self.iterations}")
        if self.lr <= 0.0:
            raise ParameterError(f"learning rate must be positive, got {self.lr}")
        if self.depth not in ALLOWED_DEPTHS:
            raise ParameterError(f"depth must be one of {ALLOWED_DEPTHS}, got {self.depth}")


@dataclass(frozen=True)
class DenoiseResult:
    """Denoised image plus the full training record."""

    denoised: Image
    loss_trace: tuple[LossBreakdown, ...]
    elapsed: float
    config: TrainConfig
    params: NetworkParams  # trained weights, ready for save_checkpoint


def denoise(noisy: Image, cfg: TrainConfig = TrainConfig()) -> DenoiseResult:
    """Train on the given image and return the denoised estimate.

    The output is NOT clamped to [0, 1]; clamping happens only when a PNG
    is written. Same image and config give a bitwise-identical result.

    Raises DimensionError for images below 32x32 (the coarsest blur
    kernel would dominate them) and DivergenceError if the loss leaves
    the finite range, reporting the zero-based iteration.
    """
    return _run(noisy, cfg, cfg.weights)


def ablate(noisy: Image, cfg: TrainConfig, drop: str) -> DenoiseResult:
    """Denoise with one loss term disabled: drop is cons1, cons2, or reg.

    The dropped component is still evaluated and reported in the trace;
    only its weight in the total (and in the gradients) becomes zero.
    """
    fields = {"cons1": "w1", "cons2": "w2", "reg": "w3"}
    if drop not in fields:
        raise ParameterError(f"drop must be one of {sorted(fields)}, got {drop!r}")
    weights = replace(cfg.weights, **{fields[drop]: 0.0})
    return _run(noisy, replace(cfg, weights=weights), weights)


def _run(noisy: Image, cfg: TrainConfig, weights: LossWeights) -> DenoiseResult:
    start = time.perf_counter()
    if noisy.height < MIN_TRAIN_SIDE or noisy.width < MIN_TRAIN_SIDE:
        raise DimensionError(
            f"denoising needs at least {MIN_TRAIN_SIDE}x{MIN_TRAIN_SIDE} pixels, "
            f"got {noisy.height}x{noisy.width}"
        )

    dec = decompose(noisy, (cfg.f_c1, cfg.f_c2, cfg.f_c3))
    ref = band_pass_ref(noisy, cfg.f_ref1, cfg.f_ref2).planes
    lfs1 = dec.lfs1.planes
    lfs3 = dec.lfs3.planes

    # The three shells form a fixed batch; the first-layer patch matrix
    # never changes, so it is built once.
    bands = np.stack([dec.hfs1.planes, dec.hfs2.planes, dec.hfs3.planes])
    cache = prepare_input_cache(bands)

    params = init_params(noisy.channels, seed=cfg.seed, depth=cfg.depth)
    state = init_optimizer(params)
    w1, w2, w3 = weights.w1, weights.w2, weights.w3

    trace: list[LossBreakdown] = []
    # Overflow and invalid-value signals are the divergence modes the
    # finite check below reports; keep numpy from also warning about them.
    with np.errstate(over="ignore", invalid="ignore"):
        for it in range(cfg.iterations):
            out, trail = forward_raw(params, bands, cache)
            g1, g2, g3 = out[0], out[1], out[2]

            c1, c1_d1, c1_d2 = _cons1_raw(lfs1, lfs3, g1, g2)
            c2, c2_d1, c2_d2, c2_d3 = _cons2_raw(ref, g1, g2, g3)
            assembled = lfs1 + g1 + g2 + g3
            reg, reg_d = _tv_raw(assembled)

            total = w1 * c1 + w2 * c2 + w3 * reg
            if not (np.isfinite(c1) and np.isfinite(c2) and np.isfinite(reg) and np.isfinite(total)):
                raise DivergenceError(it)
            trace.append(LossBreakdown(cons1=c1, cons2=c2, reg=reg, total=total))

            # Each output feeds the regularizer through the assembled sum, so
            # its TV gradient lands on every branch.
            dout = np.stack([
                w1 * c1_d1 + w2 * c2_d1 + w3 * reg_d,
                w1 * c1_d2 + w2 * c2_d2 + w3 * reg_d,
                w2 * c2_d3 + w3 * reg_d,
            ])
            grads = backward_raw(params, trail, dout)
            params, state = adam_step(params, grads, state, lr=cfg.lr)

    out, _ = forward_raw(params, bands, cache)
    denoised = Image(lfs1 + out[0] + out[1] + out[2])
    elapsed = time.perf_counter() - start
    return DenoiseResult(
        denoised=denoised,
        loss_trace=tuple(trace),
        elapsed=elapsed,
        config=cfg,
        params=params,
    )
