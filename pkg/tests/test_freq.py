"""Gaussian kernels, separable blur, and the three-stage decomposition."""

import numpy as np
import pytest

from cfcdenoise import (
    DEFAULT_CUTOFFS,
    DEFAULT_REFERENCE_CUTOFFS,
    Image,
    ParameterError,
    band_pass_ref,
    blur,
    build_kernel,
    decompose,
    gaussian_sigma,
    make_test_chart,
)
from conftest import random_planes


def test_sigma_formula():
    assert abs(gaussian_sigma(0.1) - 1.5915494309189535) < 1e-12
    assert abs(gaussian_sigma(0.05) - 2.0 * gaussian_sigma(0.1)) < 1e-12


def test_sigma_domain():
    for bad in (0.0, -0.1, 0.5, 0.7):
        with pytest.raises(ParameterError):
            gaussian_sigma(bad)


def test_kernel_sizes():
    # smallest odd size covering six sigma, never below 3
    assert build_kernel(0.1).size == 11
    assert build_kernel(0.05).size == 21
    assert build_kernel(0.45).size == 3


def test_kernel_taps_normalized_and_symmetric():
    for f_c in (0.05, 0.1, 0.3):
        k = build_kernel(f_c)
        assert k.size % 2 == 1
        assert abs(k.taps.sum() - 1.0) < 1e-12
        assert np.allclose(k.taps, k.taps[::-1])
        assert k.taps[k.radius] == k.taps.max()
        with pytest.raises(ValueError):
            k.taps[0] = 1.0


def test_defaults_pinned():
    assert DEFAULT_CUTOFFS == (0.05, 0.07, 0.1)
    assert DEFAULT_REFERENCE_CUTOFFS == (0.03, 0.12)


def test_blur_preserves_constants():
    img = Image(np.full((3, 16, 16), 0.37))
    out = blur(img, 0.08)
    assert np.abs(out.planes - 0.37).max() < 1e-12


def test_blur_is_linear():
    a = Image(random_planes(0, (3, 16, 16)))
    b = Image(random_planes(1, (3, 16, 16)))
    lhs = blur(Image(a.planes + b.planes), 0.1).planes
    rhs = blur(a, 0.1).planes + blur(b, 0.1).planes
    assert np.abs(lhs - rhs).max() < 1e-12


def test_blur_matches_direct_2d_convolution():
    # independent oracle: dense 2D correlation with reflect-101 padding
    kernel = build_kernel(0.12)
    taps2d = np.outer(kernel.taps, kernel.taps)
    r = kernel.radius
    plane = random_planes(7, (1, 12, 12))[0]
    padded = np.pad(plane, r, mode="reflect")
    expected = np.zeros_like(plane)
    for i in range(plane.shape[0]):
        for j in range(plane.shape[1]):
            expected[i, j] = (padded[i:i + 2 * r + 1, j:j + 2 * r + 1] * taps2d).sum()
    got = blur(Image(plane), 0.12).planes[0]
    assert np.abs(got - expected).max() < 1e-12


def test_decompose_requires_increasing_cutoffs():
    img = make_test_chart(32, 32, 3)
    for bad in ((0.1, 0.07, 0.05), (0.05, 0.05, 0.1), (0.05, 0.1, 0.07)):
        with pytest.raises(ParameterError):
            decompose(img, bad)


def test_decompose_reconstructs_exactly():
    rng = np.random.default_rng(5)
    for _ in range(5):
        img = Image(rng.uniform(0.0, 1.0, size=(3, 40, 48)))
        d = decompose(img)
        total = d.lfs1.planes + d.hfs1.planes + d.hfs2.planes + d.hfs3.planes
        assert np.abs(total - img.planes).max() <= 1e-9
        assert np.abs(d.reconstruct().planes - img.planes).max() <= 1e-9


def test_decompose_stage_identities():
    img = make_test_chart(48, 48, 3)
    d = decompose(img, (0.05, 0.07, 0.1))
    lfs3 = blur(img, 0.1)
    lfs2 = blur(lfs3, 0.07)
    lfs1 = blur(lfs2, 0.05)
    assert np.abs(d.lfs3.planes - lfs3.planes).max() < 1e-12
    assert np.abs(d.lfs2.planes - lfs2.planes).max() < 1e-12
    assert np.abs(d.lfs1.planes - lfs1.planes).max() < 1e-12
    # each shell is the difference of successive low-pass layers
    assert np.abs(d.hfs3.planes - (img.planes - lfs3.planes)).max() < 1e-12
    assert np.abs(d.hfs2.planes - (lfs3.planes - lfs2.planes)).max() < 1e-12
    assert np.abs(d.hfs1.planes - (lfs2.planes - lfs1.planes)).max() < 1e-12
    assert d.cutoffs == (0.05, 0.07, 0.1)


def test_band_pass_is_blur_difference():
    img = make_test_chart(48, 48, 3)
    band = band_pass_ref(img, 0.03, 0.12)
    direct = blur(img, 0.12).planes - blur(img, 0.03).planes
    assert np.abs(band.planes - direct).max() < 1e-12


def test_band_pass_rejects_bad_bands():
    img = make_test_chart(32, 32, 3)
    for lo, hi in ((0.12, 0.03), (0.1, 0.1), (0.0, 0.1), (0.1, 0.5)):
        with pytest.raises(ParameterError):
            band_pass_ref(img, lo, hi)


def test_band_pass_removes_dc():
    img = Image(np.full((1, 32, 32), 0.7))
    band = band_pass_ref(img, 0.05, 0.2)
    assert np.abs(band.planes).max() < 1e-12
