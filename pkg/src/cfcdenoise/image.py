"""Planar float64 image container, PNG I/O, and elementwise arithmetic.

Pixel data is kept as one float64 plane per channel, shape (C, H, W), so
per-channel filtering never strides across channels. Loaded images are
normalized to [0, 1]; band images produced downstream may leave that range
but must stay finite.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import cv2
import numpy as np

from .errors import DimensionError, FormatError, ParameterError

MIN_SIDE = 8

_PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"


@dataclass(frozen=True)
class Image:
    """Immutable H x W x C raster with 64-bit real samples.

    The backing array is marked read-only after construction, so instances
    are safe to share across threads.
    """

    planes: np.ndarray  # (C, H, W), float64, read-only

    def __post_init__(self):
        p = np.asarray(self.planes, dtype=np.float64)
        if p.ndim == 2:
            p = p[np.newaxis]
        if p.ndim != 3:
            raise DimensionError(f"expected (C, H, W) or (H, W) data, got shape {p.shape}")
        c, h, w = p.shape
        if c not in (1, 3):
            raise DimensionError(f"channel count must be 1 or 3, got {c}")
        if h < MIN_SIDE or w < MIN_SIDE:
            raise DimensionError(f"images must be at least {MIN_SIDE}x{MIN_SIDE}, got {h}x{w}")
        if not np.isfinite(p).all():
            raise ParameterError("image data contains NaN or Inf")
        p = np.ascontiguousarray(p)
        p.setflags(write=False)
        object.__setattr__(self, "planes", p)

    @property
    def channels(self) -> int:
        return self.planes.shape[0]

    @property
    def height(self) -> int:
        return self.planes.shape[1]

    @property
    def width(self) -> int:
        return self.planes.shape[2]

    @property
    def shape(self) -> tuple[int, int, int]:
        return self.planes.shape

    @classmethod
    def from_interleaved(cls, arr: np.ndarray) -> "Image":
        """Build from an (H, W) or (H, W, C) array in conventional layout."""
        a = np.asarray(arr, dtype=np.float64)
        if a.ndim == 3:
            a = np.moveaxis(a, 2, 0)
        return cls(a)

    def to_interleaved(self) -> np.ndarray:
        """Return an (H, W, C) copy in conventional layout."""
        return np.moveaxis(self.planes, 0, 2).copy()

    def __add__(self, other: "Image") -> "Image":
        return image_add(self, other)

    def __sub__(self, other: "Image") -> "Image":
        return image_sub(self, other)


def _require_same_shape(a: Image, b: Image) -> None:
    if a.shape != b.shape:
        raise DimensionError(f"shape mismatch: {a.shape} vs {b.shape}")


def image_add(a: Image, b: Image) -> Image:
    """Elementwise sum. No clamping."""
    _require_same_shape(a, b)
    return Image(a.planes + b.planes)


def image_sub(a: Image, b: Image) -> Image:
    """Elementwise difference. No clamping."""
    _require_same_shape(a, b)
    return Image(a.planes - b.planes)


def load_image(path) -> Image:
    """Load an 8-bit or 16-bit PNG, normalized to [0, 1].

    Grayscale and RGB are supported; an alpha channel is dropped. Integer
    samples are divided by the full-scale value (255 or 65535).
    """
    data = Path(path).read_bytes()
    if not data.startswith(_PNG_SIGNATURE):
        raise FormatError(f"{path}: not a PNG file")
    raw = cv2.imdecode(np.frombuffer(data, np.uint8), cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise FormatError(f"{path}: PNG could not be decoded")
    if raw.dtype == np.uint8:
        scale = 255.0
    elif raw.dtype == np.uint16:
        scale = 65535.0
    else:
        raise FormatError(f"{path}: unsupported sample type {raw.dtype}")
    if raw.ndim == 3:
        if raw.shape[2] == 4:
            raw = raw[:, :, :3]
        if raw.shape[2] != 3:
            raise FormatError(f"{path}: unsupported channel count {raw.shape[2]}")
        raw = raw[:, :, ::-1]  # BGR -> RGB
    elif raw.ndim != 2:
        raise FormatError(f"{path}: unsupported PNG layout")
    return Image.from_interleaved(raw.astype(np.float64) / scale)


def save_image(img: Image, path) -> None:
    """Write an 8-bit PNG: values clamped to [0, 1], then round(v * 255).

    Rounding is half-away-from-zero so 0.5 maps to byte 128.
    """
    v = np.clip(img.to_interleaved(), 0.0, 1.0)
    bytes8 = np.floor(v * 255.0 + 0.5).astype(np.uint8)  # half-up == half-away for v >= 0
    if img.channels == 3:
        bytes8 = bytes8[:, :, ::-1]  # RGB -> BGR
    else:
        bytes8 = bytes8[:, :, 0]
    ok, encoded = cv2.imencode(".png", bytes8)
    if not ok:
        raise IOError(f"{path}: PNG encoding failed")
    Path(path).write_bytes(encoded.tobytes())


def png_has_alpha(path) -> bool:
    """Inspect a PNG header for an alpha channel (for CLI warnings)."""
    with open(path, "rb") as fh:
        head = fh.read(26)
    if not head.startswith(_PNG_SIGNATURE) or len(head) < 26:
        return False
    color_type = head[25]
    return color_type in (4, 6)


def save_raw(img: Image, path) -> None:
    """Lossless dump of the float64 planes (npy layout, little-endian)."""
    np.save(path, img.planes.astype("<f8"))


def load_raw(path) -> Image:
    """Load a dump written by save_raw."""
    return Image(np.load(path))
