"""Shared fixtures and finite-difference helpers for the test suite."""

from pathlib import Path

import numpy as np
import pytest

from cfcdenoise import Image, NetworkParams, TrainConfig, make_test_chart
from cfcdenoise.freq import band_pass_ref, decompose
from cfcdenoise.losses import _cons1_raw, _cons2_raw, _tv_raw
from cfcdenoise.micronet import backward_raw, forward_raw, prepare_input_cache

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def chart64():
    return make_test_chart(64, 64, 3)


@pytest.fixture(scope="session")
def chart32():
    return make_test_chart(32, 32, 3)


def random_planes(seed, shape=(3, 16, 16), scale=0.3):
    rng = np.random.default_rng(seed)
    return rng.normal(0.0, scale, size=shape)


def flatten_params(params: NetworkParams) -> np.ndarray:
    return np.concatenate([a.ravel() for a in list(params.weights) + list(params.biases)])


def rebuild_params(flat: np.ndarray, template: NetworkParams) -> NetworkParams:
    arrays, pos = [], 0
    for a in list(template.weights) + list(template.biases):
        arrays.append(flat[pos:pos + a.size].reshape(a.shape))
        pos += a.size
    n = len(template.weights)
    return NetworkParams(weights=tuple(arrays[:n]), biases=tuple(arrays[n:]))


def flatten_grads(grads) -> np.ndarray:
    return np.concatenate([a.ravel() for a in list(grads.weights) + list(grads.biases)])


class ObjectiveProbe:
    """Full training objective as a function of the network parameters.

    Precomputes the decomposition of one noisy image so repeated
    evaluations (finite differencing) only pay for the forward pass.
    """

    def __init__(self, noisy: Image, cfg: TrainConfig = TrainConfig()):
        dec = decompose(noisy, (cfg.f_c1, cfg.f_c2, cfg.f_c3))
        self.lfs1 = dec.lfs1.planes
        self.lfs3 = dec.lfs3.planes
        self.ref = band_pass_ref(noisy, cfg.f_ref1, cfg.f_ref2).planes
        self.bands = np.stack([dec.hfs1.planes, dec.hfs2.planes, dec.hfs3.planes])
        self.cache = prepare_input_cache(self.bands)
        self.w = (cfg.weights.w1, cfg.weights.w2, cfg.weights.w3)

    def value(self, params: NetworkParams) -> float:
        out, _ = forward_raw(params, self.bands, self.cache)
        c1 = _cons1_raw(self.lfs1, self.lfs3, out[0], out[1])[0]
        c2 = _cons2_raw(self.ref, out[0], out[1], out[2])[0]
        reg = _tv_raw(self.lfs1 + out[0] + out[1] + out[2])[0]
        w1, w2, w3 = self.w
        return w1 * c1 + w2 * c2 + w3 * reg

    def gradient(self, params: NetworkParams) -> np.ndarray:
        out, trail = forward_raw(params, self.bands, self.cache)
        _, c1d1, c1d2 = _cons1_raw(self.lfs1, self.lfs3, out[0], out[1])
        _, c2d1, c2d2, c2d3 = _cons2_raw(self.ref, out[0], out[1], out[2])
        _, regd = _tv_raw(self.lfs1 + out[0] + out[1] + out[2])
        w1, w2, w3 = self.w
        dout = np.stack([
            w1 * c1d1 + w2 * c2d1 + w3 * regd,
            w1 * c1d2 + w2 * c2d2 + w3 * regd,
            w2 * c2d3 + w3 * regd,
        ])
        return flatten_grads(backward_raw(params, trail, dout))

    def fd_gradient(self, params: NetworkParams, h: float) -> np.ndarray:
        base = flatten_params(params)
        fd = np.empty_like(base)
        for i in range(base.size):
            up = base.copy()
            up[i] += h
            down = base.copy()
            down[i] -= h
            fd[i] = (self.value(rebuild_params(up, params))
                     - self.value(rebuild_params(down, params))) / (2.0 * h)
        return fd


def spectral_slope(planes: np.ndarray, f_lo: float = 0.02, f_hi: float = 0.35) -> float:
    """Least-squares slope of the log-log radially binned amplitude spectrum."""
    _, height, width = planes.shape
    amp = np.abs(np.fft.fft2(planes, axes=(1, 2))).mean(axis=0)
    fy = np.fft.fftfreq(height)[:, None]
    fx = np.fft.fftfreq(width)[None, :]
    radius = np.hypot(fy, fx)
    mask = (radius >= f_lo) & (radius <= f_hi)
    return float(np.polyfit(np.log10(radius[mask]), np.log10(amp[mask]), 1)[0])
