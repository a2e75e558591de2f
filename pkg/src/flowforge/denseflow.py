"""Dense pyramidal Lucas-Kanade optical flow."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import correlate1d, uniform_filter

from .errors import ConfigurationError, IncompatibleFramesError, InvalidFlowError, NonFiniteFlowError
from .imaging import Frame, central_differences, resize_array

MIN_COARSE_SIDE = 8
_BINOMIAL = np.array([1.0, 4.0, 6.0, 4.0, 1.0]) / 16.0


@dataclass(frozen=True, eq=False)
class FlowField:
    """Per-pixel displacement ``(u, v)`` in pixels, x to the right and y down.

    ``u`` and ``v`` are float32 arrays of shape ``(height, width)``; ``pair``
    is the ``(source, target)`` frame index pair the field describes.
    """

    u: np.ndarray
    v: np.ndarray
    pair: tuple[int, int] = (0, 1)

    def __post_init__(self):
        u = np.ascontiguousarray(self.u, dtype=np.float32)
        v = np.ascontiguousarray(self.v, dtype=np.float32)
        if u.ndim != 2 or u.shape != v.shape or u.size == 0:
            raise InvalidFlowError(f"u and v must be equal non-empty 2-D arrays, got {u.shape} and {v.shape}")
        bad = ~(np.isfinite(u) & np.isfinite(v))
        if bad.any():
            row, col = np.argwhere(bad)[0]
            raise NonFiniteFlowError(int(row), int(col))
        u.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "pair", (int(self.pair[0]), int(self.pair[1])))

    @property
    def width(self) -> int:
        return self.u.shape[1]

    @property
    def height(self) -> int:
        return self.u.shape[0]

    @classmethod
    def constant(cls, width, height, u, v, pair=(0, 1)):
        return cls(np.full((height, width), u, np.float32), np.full((height, width), v, np.float32), pair)

    @classmethod
    def zeros(cls, width, height, pair=(0, 1)):
        return cls.constant(width, height, 0.0, 0.0, pair)

    def __eq__(self, other):
        if not isinstance(other, FlowField):
            return NotImplemented
        return (
            self.pair == other.pair
            and self.u.shape == other.u.shape
            and np.array_equal(self.u, other.u)
            and np.array_equal(self.v, other.v)
        )

    __hash__ = None


@dataclass(frozen=True)
class LkConfig:
    window_radius: int = 7
    pyramid_levels: int = 3
    iterations_per_level: int = 3
    min_eigenvalue: float = 1e-4

    def __post_init__(self):
        if self.window_radius < 1:
            raise ConfigurationError("window_radius must be >= 1")
        if self.pyramid_levels < 1:
            raise ConfigurationError("pyramid_levels must be >= 1")
        if self.iterations_per_level < 1:
            raise ConfigurationError("iterations_per_level must be >= 1")
        if self.min_eigenvalue < 0:
            raise ConfigurationError("min_eigenvalue must be non-negative")


# Used for the 32x32 motion proxy.
PROXY_LK = LkConfig(window_radius=3, pyramid_levels=2, iterations_per_level=3)


def bilinear_sample(arr: np.ndarray, xs, ys) -> np.ndarray:
    """Sample a 2-D array at fractional (x, y), clamping locations to the grid.

    Integer locations return stored values exactly.
    """
    a = np.asarray(arr)
    h, w = a.shape
    xs = np.clip(np.asarray(xs, dtype=np.float64), 0.0, w - 1)
    ys = np.clip(np.asarray(ys, dtype=np.float64), 0.0, h - 1)
    x0 = np.floor(xs).astype(np.intp)
    y0 = np.floor(ys).astype(np.intp)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = xs - x0
    fy = ys - y0
    a = a.astype(np.float64, copy=False)
    top = a[y0, x0] + fx * (a[y0, x1] - a[y0, x0])
    bottom = a[y1, x0] + fx * (a[y1, x1] - a[y1, x0])
    return top + fy * (bottom - top)


def _downsample(plane: np.ndarray) -> np.ndarray:
    blurred = correlate1d(plane, _BINOMIAL, axis=0, mode="nearest")
    blurred = correlate1d(blurred, _BINOMIAL, axis=1, mode="nearest")
    h, w = plane.shape
    return resize_array(blurred, (w + 1) // 2, (h + 1) // 2)


def build_pyramid(plane: np.ndarray, levels: int) -> list[np.ndarray]:
    """Finest level first."""
    pyramid = [np.asarray(plane, dtype=np.float64)]
    for _ in range(levels - 1):
        pyramid.append(_downsample(pyramid[-1]))
    return pyramid


def _check_pyramid(width: int, height: int, levels: int):
    w, h = width, height
    for _ in range(levels - 1):
        w, h = (w + 1) // 2, (h + 1) // 2
    if min(w, h) < MIN_COARSE_SIDE:
        raise ConfigurationError(
            f"{levels} pyramid levels leave a {w}x{h} coarsest level for a {width}x{height} image "
            f"(minimum {MIN_COARSE_SIDE}x{MIN_COARSE_SIDE})"
        )


def _window_sum(a: np.ndarray, radius: int) -> np.ndarray:
    """Sum over the square window, truncated at the image border."""
    size = 2 * radius + 1
    return uniform_filter(a, size=size, mode="constant") * (size * size)


def _refine_level(a, b, u, v, cfg: LkConfig):
    h, w = a.shape
    ix, iy = central_differences(a)
    ixx, ixy, iyy = ix * ix, ix * iy, iy * iy
    r = cfg.window_radius
    ok = _well_conditioned(_window_sum(ixx, r), _window_sum(ixy, r), _window_sum(iyy, r), cfg.min_eigenvalue)

    gy, gx = np.mgrid[0:h, 0:w].astype(np.float64)
    for _ in range(cfg.iterations_per_level):
        xs, ys = gx + u, gy + v
        # samples that leave the frame carry no information about the match
        inside = ((xs >= 0) & (xs <= w - 1) & (ys >= 0) & (ys <= h - 1)).astype(np.float64)
        warped = bilinear_sample(b, xs, ys)
        # each window pixel is linearized about its own current flow, so the
        # solve yields the new flow directly rather than a coupled increment
        target = (ix * u + iy * v - (warped - a)) * inside
        bx = _window_sum(ix * target, r)
        by = _window_sum(iy * target, r)
        mxx = _window_sum(ixx * inside, r)
        mxy = _window_sum(ixy * inside, r)
        myy = _window_sum(iyy * inside, r)
        solvable = ok & _well_conditioned(mxx, mxy, myy, cfg.min_eigenvalue)
        det = np.where(solvable, mxx * myy - mxy * mxy, 1.0)
        u = np.where(solvable, (myy * bx - mxy * by) / det, u)
        v = np.where(solvable, (mxx * by - mxy * bx) / det, v)
    return u, v


def _well_conditioned(sxx, sxy, syy, min_eigenvalue):
    """Smaller eigenvalue of the 2x2 structure tensor clears the gate (and is positive)."""
    lam_min = 0.5 * (sxx + syy) - np.sqrt(0.25 * (sxx - syy) ** 2 + sxy * sxy)
    return (lam_min >= min_eigenvalue) & (lam_min > 0.0)


def lucas_kanade_dense(frame_a: Frame, frame_b: Frame, cfg: LkConfig | None = None) -> FlowField:
    """Coarse-to-fine dense flow from ``frame_a`` to ``frame_b``.

    Both frames must be single channel. Pixels whose structure tensor is
    ill-conditioned keep the flow propagated from the coarser level.
    """
    cfg = cfg or LkConfig()
    if frame_a.channels != 1 or frame_b.channels != 1:
        raise IncompatibleFramesError("Lucas-Kanade requires single-channel frames")
    if frame_a.pixels.shape != frame_b.pixels.shape:
        raise IncompatibleFramesError(
            f"frame sizes differ: {frame_a.width}x{frame_a.height} vs {frame_b.width}x{frame_b.height}"
        )
    _check_pyramid(frame_a.width, frame_a.height, cfg.pyramid_levels)

    pyr_a = build_pyramid(frame_a.plane, cfg.pyramid_levels)
    pyr_b = build_pyramid(frame_b.plane, cfg.pyramid_levels)

    h, w = pyr_a[-1].shape
    u = np.zeros((h, w))
    v = np.zeros((h, w))
    for level in range(cfg.pyramid_levels - 1, -1, -1):
        a, b = pyr_a[level], pyr_b[level]
        if u.shape != a.shape:
            fh, fw = a.shape
            ch, cw = u.shape
            u = resize_array(u, fw, fh) * (fw / cw)
            v = resize_array(v, fw, fh) * (fh / ch)
        u, v = _refine_level(a, b, u, v, cfg)
    return FlowField(u, v)


def motion_magnitudes(flow: FlowField) -> np.ndarray:
    """Per-pixel L2 norm of the flow, float64, shape (H, W)."""
    u = flow.u.astype(np.float64)
    v = flow.v.astype(np.float64)
    return np.sqrt(u * u + v * v)
