"""Multi-frequency image decomposition with Gaussian low-pass filters.

A cutoff frequency f_c (cycles per pixel) maps to a Gaussian blur of
standard deviation 1 / (2 * pi * f_c). Iterating three such blurs splits an
image into one smooth base plus three high-frequency shells whose sum
reconstructs the input exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate1d

from .errors import ParameterError
from .image import Image

DEFAULT_CUTOFFS = (0.05, 0.07, 0.1)
DEFAULT_REFERENCE_CUTOFFS = (0.03, 0.12)


def gaussian_sigma(f_c: float) -> float:
    """Blur width (pixels) for a cutoff in cycles per pixel."""
    if not (0.0 < f_c < 0.5):
        raise ParameterError(f"cutoff must lie in (0, 0.5), got {f_c}")
    return 1.0 / (2.0 * np.pi * f_c)


@dataclass(frozen=True)
class GaussianKernel:
    """Normalized 1-D Gaussian taps plus the scalars that produced them."""

    cutoff: float
    sigma: float
    taps: np.ndarray  # odd length, symmetric, sums to 1

    @property
    def size(self) -> int:
        return self.taps.shape[0]

    @property
    def radius(self) -> int:
        return self.taps.shape[0] // 2


def build_kernel(f_c: float) -> GaussianKernel:
    """Sampled Gaussian for the given cutoff.

    The support is the smallest odd integer covering six standard
    deviations, never below 3 taps, and the taps are renormalized so they
    sum to exactly 1.
    """
    sigma = gaussian_sigma(f_c)
    size = int(np.ceil(6.0 * sigma))
    if size % 2 == 0:
        size += 1
    size = max(size, 3)
    offsets = np.arange(size, dtype=np.float64) - size // 2
    taps = np.exp(-0.5 * (offsets / sigma) ** 2)
    taps /= taps.sum()
    taps.setflags(write=False)
    return GaussianKernel(cutoff=f_c, sigma=sigma, taps=taps)


def blur(img: Image, f_c: float) -> Image:
    """Separable Gaussian low-pass at the given cutoff.

    Rows and columns are filtered independently with the same taps;
    borders reflect about the edge pixel (the edge sample itself is not
    duplicated).
    """
    kernel = build_kernel(f_c)
    out = correlate1d(img.planes, kernel.taps, axis=2, mode="mirror")
    out = correlate1d(out, kernel.taps, axis=1, mode="mirror")
    return Image(out)


@dataclass(frozen=True)
class FrequencyDecomposition:
    """Three-level split of an image into nested low-pass layers and shells.

    lfs3 is the input blurred at the highest cutoff, lfs2 and lfs1 are
    successively smoother, and each hfs_k holds what the k-th blur removed:

        hfs3 = input - lfs3
        hfs2 = lfs3 - lfs2
        hfs1 = lfs2 - lfs1

    so input == lfs1 + hfs1 + hfs2 + hfs3 up to rounding.
    """

    cutoffs: tuple[float, float, float]
    lfs1: Image
    lfs2: Image
    lfs3: Image
    hfs1: Image
    hfs2: Image
    hfs3: Image

    def reconstruct(self) -> Image:
        """Sum the base layer and all three shells."""
        planes = (
            self.lfs1.planes
            + self.hfs1.planes
            + self.hfs2.planes
            + self.hfs3.planes
        )
        return Image(planes)


def decompose(img: Image, cutoffs: tuple[float, float, float] = DEFAULT_CUTOFFS) -> FrequencyDecomposition:
    """Iterative three-stage decomposition, coarsest cutoff applied first.

    Cutoffs must be strictly increasing: f_c1 < f_c2 < f_c3, all in
    (0, 0.5).
    """
    f_c1, f_c2, f_c3 = (float(c) for c in cutoffs)
    if not (f_c1 < f_c2 < f_c3):
        raise ParameterError(f"cutoffs must be strictly increasing, got {cutoffs}")
    lfs3 = blur(img, f_c3)
    hfs3 = img - lfs3
    lfs2 = blur(lfs3, f_c2)
    hfs2 = lfs3 - lfs2
    lfs1 = blur(lfs2, f_c1)
    hfs1 = lfs2 - lfs1
    return FrequencyDecomposition(
        cutoffs=(f_c1, f_c2, f_c3),
        lfs1=lfs1,
        lfs2=lfs2,
        lfs3=lfs3,
        hfs1=hfs1,
        hfs2=hfs2,
        hfs3=hfs3,
    )


def band_pass_ref(img: Image, f_lo: float, f_hi: float) -> Image:
    """Reference band-pass: blur at f_hi minus blur at f_lo.

    Used for analysis (band statistics and cross-band correlation), not by
    the denoiser itself.
    """
    if not (0.0 < f_lo < f_hi < 0.5):
        raise ParameterError(f"band edges must satisfy 0 < f_lo < f_hi < 0.5, got ({f_lo}, {f_hi})")
    return blur(img, f_hi) - blur(img, f_lo)
