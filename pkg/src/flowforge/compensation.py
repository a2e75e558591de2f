"""Camera-motion compensation: raw flow in, object-relative flow out."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .denseflow import FlowField, motion_magnitudes
from .errors import BatchItemError, ConfigurationError, InsufficientSamplesError, NoValidModel
from .geometry import Correspondences, Homography, RansacConfig, _camera_flow64, ransac_homography

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


@dataclass(frozen=True)
class CompensationConfig:
    ransac: RansacConfig = field(default_factory=RansacConfig)
    stride: int = 8
    noise_threshold: float = 0.5
    thresholding_enabled: bool = True

    def __post_init__(self):
        if self.stride < 1:
            raise ConfigurationError("stride must be >= 1")
        if self.noise_threshold < 0:
            raise ConfigurationError("noise_threshold must be non-negative")


@dataclass(frozen=True)
class CompensationReport:
    valid: bool
    inlier_count: int
    homography: Homography | None = None


def splitmix64(x: int) -> int:
    x = (x + _GOLDEN) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def item_seed(seed: int, index: int) -> int:
    """Seed for batch item ``index``: ``splitmix64(seed ^ splitmix64(index))``."""
    return splitmix64((seed ^ splitmix64(index)) & _MASK64)


def sample_correspondences(flow: FlowField, stride: int) -> Correspondences:
    """Grid points at multiples of ``stride`` paired with where the flow sends them."""
    if stride < 1:
        raise ConfigurationError("stride must be >= 1")
    ys = np.arange(0, flow.height, stride)
    xs = np.arange(0, flow.width, stride)
    if len(xs) * len(ys) < 4:
        raise InsufficientSamplesError(
            f"stride {stride} yields {len(xs) * len(ys)} samples on a {flow.width}x{flow.height} field"
        )
    gy, gx = np.meshgrid(ys, xs, indexing="ij")
    p0 = np.stack([gx.ravel(), gy.ravel()], axis=1).astype(np.float64)
    du = flow.u[gy, gx].ravel().astype(np.float64)
    dv = flow.v[gy, gx].ravel().astype(np.float64)
    return Correspondences(p0, p0 + np.stack([du, dv], axis=1))


def compensate_flow(flow: FlowField, cfg: CompensationConfig | None = None) -> tuple[FlowField, CompensationReport]:
    """Remove the globally dominant homographic motion from ``flow``.

    When no homography is found the input field is returned as is.
    """
    cfg = cfg or CompensationConfig()
    if cfg.stride >= min(flow.width, flow.height):
        raise ConfigurationError(f"stride {cfg.stride} must be smaller than the field's shorter side")
    corr = sample_correspondences(flow, cfg.stride)
    try:
        result = ransac_homography(corr, cfg.ransac)
    except NoValidModel as exc:
        return flow, CompensationReport(False, exc.inlier_count)

    cam_u, cam_v = _camera_flow64(result.homography, flow.width, flow.height)
    obj = FlowField(flow.u.astype(np.float64) - cam_u, flow.v.astype(np.float64) - cam_v, flow.pair)
    if cfg.thresholding_enabled:
        # magnitudes taken on the stored float32 values so the zero/>=threshold split is exact
        keep = motion_magnitudes(obj) >= cfg.noise_threshold
        obj = FlowField(np.where(keep, obj.u, 0.0), np.where(keep, obj.v, 0.0), flow.pair)
    return obj, CompensationReport(True, result.inlier_count, result.homography)


def compensate_batch(flows, cfg: CompensationConfig | None = None, workers: int = 1, indices=None):
    """Compensate each field with a per-item seed; results follow input order.

    Item ``j`` uses ``item_seed(cfg.ransac.seed, indices[j])``; ``indices``
    defaults to the batch positions.
    """
    cfg = cfg or CompensationConfig()
    flows = list(flows)
    indices = list(range(len(flows))) if indices is None else [int(i) for i in indices]
    if len(indices) != len(flows):
        raise ValueError("indices must match the number of flows")
    if not flows:
        return []
    shape = flows[0].u.shape
    for i, f in enumerate(flows):
        if f.u.shape != shape:
            raise BatchItemError(i, f"shape {f.u.shape} differs from {shape}")

    def run(i):
        item_cfg = replace(cfg, ransac=replace(cfg.ransac, seed=item_seed(cfg.ransac.seed, indices[i])))
        try:
            return compensate_flow(flows[i], item_cfg)
        except Exception as exc:
            raise BatchItemError(i, exc) from exc

    if workers <= 1:
        return [run(i) for i in range(len(flows))]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, range(len(flows))))
