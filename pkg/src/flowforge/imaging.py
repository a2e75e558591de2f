"""Frame container and the pixel primitives used by the flow estimators."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import IncompatibleFramesError, InvalidFrameError

LUMA_WEIGHTS = (0.299, 0.587, 0.114)


@dataclass(frozen=True, eq=False)
class Frame:
    """A single image with float32 pixels in [0, 1].

    ``pixels`` has shape ``(height, width, channels)``, which is row-major
    and channel-interleaved in memory.
    """

    pixels: np.ndarray

    def __post_init__(self):
        px = np.asarray(self.pixels)
        if px.ndim == 2:
            px = px[:, :, None]
        if px.ndim != 3 or px.shape[2] not in (1, 3):
            raise InvalidFrameError(f"expected (H, W, 1|3) pixels, got shape {px.shape}")
        if px.shape[0] < 1 or px.shape[1] < 1:
            raise InvalidFrameError("frame dimensions must be positive")
        px = np.ascontiguousarray(px, dtype=np.float32)
        if not np.all(np.isfinite(px)):
            raise InvalidFrameError("frame contains non-finite pixels")
        if px.min() < 0.0 or px.max() > 1.0:
            raise InvalidFrameError("pixel values must lie in [0, 1]")
        px.setflags(write=False)
        object.__setattr__(self, "pixels", px)

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def channels(self) -> int:
        return self.pixels.shape[2]

    @property
    def plane(self) -> np.ndarray:
        """The (H, W) array of a single-channel frame."""
        if self.channels != 1:
            raise InvalidFrameError("plane is only defined for single-channel frames")
        return self.pixels[:, :, 0]

    def __eq__(self, other):
        if not isinstance(other, Frame):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and np.array_equal(self.pixels, other.pixels)

    __hash__ = None


def to_grayscale(frame: Frame) -> Frame:
    if frame.channels == 1:
        return frame
    rgb = frame.pixels.astype(np.float64)
    luma = rgb[:, :, 0] * LUMA_WEIGHTS[0] + rgb[:, :, 1] * LUMA_WEIGHTS[1] + rgb[:, :, 2] * LUMA_WEIGHTS[2]
    return Frame(np.clip(luma, 0.0, 1.0).astype(np.float32))


def _source_coords(n_src: int, n_dst: int) -> np.ndarray:
    scale = n_src / n_dst
    src = (np.arange(n_dst, dtype=np.float64) + 0.5) * scale - 0.5
    return np.clip(src, 0.0, n_src - 1)


def resize_array(arr: np.ndarray, new_width: int, new_height: int) -> np.ndarray:
    """Center-aligned bilinear resize of an (H, W) or (H, W, C) array, float64 out."""
    a = np.asarray(arr, dtype=np.float64)
    h, w = a.shape[:2]
    ys = _source_coords(h, new_height)
    xs = _source_coords(w, new_width)
    y0 = np.floor(ys).astype(np.intp)
    x0 = np.floor(xs).astype(np.intp)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy = ys - y0
    fx = xs - x0
    if a.ndim == 3:
        fy = fy[:, None, None]
        fx = fx[None, :, None]
    else:
        fy = fy[:, None]
        fx = fx[None, :]
    top = a[y0][:, x0] + fx * (a[y0][:, x1] - a[y0][:, x0])
    bottom = a[y1][:, x0] + fx * (a[y1][:, x1] - a[y1][:, x0])
    return top + fy * (bottom - top)


def resize_bilinear(frame: Frame, new_width: int, new_height: int) -> Frame:
    if new_width < 1 or new_height < 1:
        raise InvalidFrameError("target dimensions must be >= 1")
    if (new_width, new_height) == (frame.width, frame.height):
        return frame
    out = resize_array(frame.pixels, new_width, new_height)
    # guard against ulp drift outside the convex hull of the input
    out = np.clip(out, frame.pixels.min(), frame.pixels.max())
    return Frame(out.astype(np.float32))


def central_differences(plane: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Central-difference gradients with replicated borders."""
    p = np.pad(np.asarray(plane, dtype=np.float64), 1, mode="edge")
    ix = (p[1:-1, 2:] - p[1:-1, :-2]) * 0.5
    iy = (p[2:, 1:-1] - p[:-2, 1:-1]) * 0.5
    return ix, iy


def gradients(frame_a: Frame, frame_b: Frame) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Spatial gradients of ``frame_a`` and the temporal difference ``b - a``."""
    if frame_a.channels != 1 or frame_b.channels != 1:
        raise IncompatibleFramesError("gradients require single-channel frames")
    if frame_a.pixels.shape != frame_b.pixels.shape:
        raise IncompatibleFramesError(
            f"frame sizes differ: {frame_a.width}x{frame_a.height} vs {frame_b.width}x{frame_b.height}"
        )
    a = frame_a.plane.astype(np.float64)
    ix, iy = central_differences(a)
    it = frame_b.plane.astype(np.float64) - a
    return ix, iy, it
