"""Fidelity metrics: PSNR and SSIM on 64-bit images.

Both metrics follow their standard formulations; SSIM uses the usual
11x11 Gaussian window with sigma 1.5 and stability constants K1=0.01,
K2=0.03 on a unit dynamic range.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate1d

from .errors import DimensionError, ParameterError
from .image import Image

PSNR_CAP = 99.0

_SSIM_WINDOW = 11
_SSIM_SIGMA = 1.5
_SSIM_K1 = 0.01
_SSIM_K2 = 0.03


@dataclass(frozen=True)
class QualityScore:
    """PSNR (dB, capped at 99) and SSIM for one image pair."""

    psnr: float
    ssim: float


def psnr(a: Image, b: Image, peak: float = 1.0) -> float:
    """Peak signal-to-noise ratio in dB, pooled over channels.

    Identical inputs (zero MSE) return the 99 dB sentinel, which also
    caps the value for vanishingly small errors.
    """
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch: {a.shape} vs {b.shape}")
    if peak <= 0.0:
        raise ParameterError(f"peak must be positive, got {peak}")
    diff = a.planes - b.planes
    mse = float((diff * diff).mean())
    if mse == 0.0:
        return PSNR_CAP
    return min(PSNR_CAP, float(10.0 * np.log10(peak * peak / mse)))


def _ssim_window() -> np.ndarray:
    offsets = np.arange(_SSIM_WINDOW, dtype=np.float64) - _SSIM_WINDOW // 2
    taps = np.exp(-0.5 * (offsets / _SSIM_SIGMA) ** 2)
    return taps / taps.sum()


def _local_mean(plane: np.ndarray, taps: np.ndarray) -> np.ndarray:
    # Filter then crop the window radius, leaving exactly the windows
    # that fit entirely inside the image.
    r = len(taps) // 2
    out = correlate1d(plane, taps, axis=0, mode="nearest")
    out = correlate1d(out, taps, axis=1, mode="nearest")
    return out[r:-r, r:-r]


def ssim(a: Image, b: Image) -> float:
    """Mean structural similarity, averaged over channels.

    Local statistics come from an 11x11 Gaussian window evaluated only
    where the window fits entirely inside the image.
    """
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch: {a.shape} vs {b.shape}")
    if min(a.height, a.width) < _SSIM_WINDOW:
        raise DimensionError(
            f"ssim needs at least {_SSIM_WINDOW}x{_SSIM_WINDOW} pixels, got {a.height}x{a.width}"
        )
    taps = _ssim_window()
    c1 = (_SSIM_K1 * 1.0) ** 2
    c2 = (_SSIM_K2 * 1.0) ** 2
    scores = []
    for pa, pb in zip(a.planes, b.planes):
        mu_a = _local_mean(pa, taps)
        mu_b = _local_mean(pb, taps)
        e_aa = _local_mean(pa * pa, taps)
        e_bb = _local_mean(pb * pb, taps)
        e_ab = _local_mean(pa * pb, taps)
        var_a = e_aa - mu_a * mu_a
        var_b = e_bb - mu_b * mu_b
        cov = e_ab - mu_a * mu_b
        num = (2.0 * mu_a * mu_b + c1) * (2.0 * cov + c2)
        den = (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
        scores.append(float((num / den).mean()))
    return float(np.mean(scores))


def score(a: Image, b: Image, peak: float = 1.0) -> QualityScore:
    """Both metrics in one call."""
    return QualityScore(psnr=psnr(a, b, peak), ssim=ssim(a, b))
