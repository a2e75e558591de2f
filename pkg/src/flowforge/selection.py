"""Motion-aware frame selection on cheap low-resolution flow."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .denseflow import PROXY_LK, LkConfig, lucas_kanade_dense, motion_magnitudes
from .errors import ConfigurationError, IncompatibleFramesError
from .imaging import Frame, resize_bilinear, to_grayscale


@dataclass(frozen=True)
class SelectionConfig:
    proxy_size: int = 32
    top_k_percent: float = 10.0
    # pixels at reference_width; rescaled linearly to the actual frame width
    threshold_px: float = 5.0
    reference_width: int = 256
    lk: LkConfig = field(default_factory=lambda: PROXY_LK)

    def __post_init__(self):
        if self.proxy_size < 8:
            raise ConfigurationError("proxy_size must be >= 8")
        if not 0 < self.top_k_percent <= 100:
            raise ConfigurationError("top_k_percent must lie in (0, 100]")
        if not self.threshold_px > 0:
            raise ConfigurationError("threshold_px must be > 0")
        if self.reference_width < 1:
            raise ConfigurationError("reference_width must be >= 1")


@dataclass
class MotionManifest:
    pair_proxies: list[tuple[int, float]]
    selected: list[int]
    segments: list[tuple[int, int]]


def top_k_rank(n: int, k: float) -> int:
    """1-based descending rank of the nearest-rank boundary of the top ``k`` percent."""
    # Fraction(str(k)) reads k as the decimal the caller wrote, so 10 * 30 / 100 is exactly 3
    r = math.ceil(Fraction(str(float(k))) * n / 100)
    return min(max(r, 1), n)


def top_k_value(values, k: float) -> float:
    """Value at the boundary of the top-``k``-percent tail: the ceil(k/100*n)-th largest."""
    a = np.asarray(values, dtype=np.float64).ravel()
    if a.size == 0:
        raise ValueError("cannot take a percentile of an empty array")
    r = top_k_rank(a.size, k)
    # r-th largest == (n - r)-th smallest, 0-based
    return float(np.partition(a, a.size - r)[a.size - r])


def motion_proxy(frame_a: Frame, frame_b: Frame, cfg: SelectionConfig | None = None) -> float:
    """Top-k flow magnitude of the pair at proxy resolution, in native pixels."""
    cfg = cfg or SelectionConfig()
    if frame_a.pixels.shape != frame_b.pixels.shape:
        raise IncompatibleFramesError(
            f"frame sizes differ: {frame_a.width}x{frame_a.height} vs {frame_b.width}x{frame_b.height}"
        )
    s = cfg.proxy_size
    low_a = resize_bilinear(to_grayscale(frame_a), s, s)
    low_b = resize_bilinear(to_grayscale(frame_b), s, s)
    flow = lucas_kanade_dense(low_a, low_b, cfg.lk)
    return top_k_value(motion_magnitudes(flow), cfg.top_k_percent) * (frame_a.width / s)


def segments_from_selected(selected) -> list[tuple[int, int]]:
    """Maximal runs of consecutive pair indices, as half-open frame intervals."""
    segments: list[tuple[int, int]] = []
    for t in sorted(selected):
        if segments and segments[-1][1] == t + 1:
            segments[-1] = (segments[-1][0], t + 2)
        else:
            segments.append((t, t + 2))
    return segments


def pairs_from_segments(segments) -> list[int]:
    return [t for start, end in segments for t in range(start, end - 1)]


def effective_threshold(width: int, cfg: SelectionConfig) -> float:
    return cfg.threshold_px * (width / cfg.reference_width)


def select_pairs(frames, cfg: SelectionConfig | None = None, workers: int = 1) -> MotionManifest:
    """Score every consecutive pair and keep those whose proxy exceeds the threshold."""
    cfg = cfg or SelectionConfig()
    frames = list(frames)
    if len(frames) < 2:
        raise IncompatibleFramesError(f"need at least 2 frames, got {len(frames)}")
    shape = frames[0].pixels.shape
    for i, f in enumerate(frames):
        if f.pixels.shape != shape:
            raise IncompatibleFramesError(f"frame {i} has shape {f.pixels.shape}, expected {shape}")

    def score(t):
        return motion_proxy(frames[t], frames[t + 1], cfg)

    indices = range(len(frames) - 1)
    if workers <= 1:
        proxies = [score(t) for t in indices]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            proxies = list(pool.map(score, indices))

    threshold = effective_threshold(frames[0].width, cfg)
    selected = [t for t, p in zip(indices, proxies) if p > threshold]
    return MotionManifest(
        pair_proxies=list(zip(indices, proxies)),
        selected=selected,
        segments=segments_from_selected(selected),
    )
