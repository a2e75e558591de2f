"""Homography estimation (normalized DLT inside a seeded RANSAC) and projection."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .denseflow import FlowField
from .errors import (
    ConfigurationError,
    DegenerateConfigurationError,
    InsufficientSamplesError,
    NormalizationError,
    NoValidModel,
    PointAtInfinityError,
)

MIN_TRIANGLE_AREA = 1e-6
MIN_DETERMINANT = 1e-12
_W_EPS = 1e-12
_RANK_TOL = 1e-10
# hypotheses scored per vectorized chunk; bounds memory at ~chunk * n_points floats
_CHUNK = 256


@dataclass(frozen=True, eq=False)
class Homography:
    """3x3 projective transform, normalized so ``m[2, 2] == 1``."""

    m: np.ndarray

    def __post_init__(self):
        m = np.array(self.m, dtype=np.float64).reshape(3, 3)
        if not np.all(np.isfinite(m)):
            raise NormalizationError("homography has non-finite entries")
        if abs(m[2, 2]) < _W_EPS * max(1.0, np.abs(m).max()):
            raise NormalizationError("bottom-right entry too close to zero")
        m = m / m[2, 2]
        if abs(np.linalg.det(m)) <= MIN_DETERMINANT:
            raise DegenerateConfigurationError("homography is singular")
        m.setflags(write=False)
        object.__setattr__(self, "m", m)

    @classmethod
    def identity(cls):
        return cls(np.eye(3))

    @classmethod
    def translation(cls, tx, ty):
        return cls([[1.0, 0.0, tx], [0.0, 1.0, ty], [0.0, 0.0, 1.0]])

    def __eq__(self, other):
        if not isinstance(other, Homography):
            return NotImplemented
        return np.array_equal(self.m, other.m)

    __hash__ = None

    def tolist(self) -> list[float]:
        return [float(x) for x in self.m.ravel()]


@dataclass(frozen=True)
class Correspondences:
    p0: np.ndarray
    p1: np.ndarray

    def __post_init__(self):
        p0 = np.asarray(self.p0, dtype=np.float64).reshape(-1, 2)
        p1 = np.asarray(self.p1, dtype=np.float64).reshape(-1, 2)
        if p0.shape != p1.shape:
            raise ValueError(f"p0 and p1 lengths differ: {len(p0)} vs {len(p1)}")
        object.__setattr__(self, "p0", p0)
        object.__setattr__(self, "p1", p1)

    def __len__(self):
        return len(self.p0)


@dataclass(frozen=True)
class RansacConfig:
    """RANSAC parameters.

    Samples are drawn from numpy's PCG64 generator seeded with ``seed``.
    """

    reproj_threshold: float = 5.0
    iterations: int = 2000
    seed: int = 0
    min_inliers: int = 8
    min_inlier_fraction: float = 0.3

    def __post_init__(self):
        if not self.reproj_threshold > 0:
            raise ConfigurationError("reproj_threshold must be > 0")
        if self.iterations < 1:
            raise ConfigurationError("iterations must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigurationError("seed must be a 64-bit unsigned integer")
        if self.min_inliers < 1:
            raise ConfigurationError("min_inliers must be >= 1")
        if not 0 < self.min_inlier_fraction <= 1:
            raise ConfigurationError("min_inlier_fraction must lie in (0, 1]")


@dataclass(frozen=True, eq=False)
class RansacResult:
    homography: Homography
    inlier_mask: np.ndarray
    # inlier count of the best minimal-sample hypothesis, before refitting
    best_support: int

    @property
    def inlier_count(self) -> int:
        return int(self.inlier_mask.sum())


def _hartley(pts: np.ndarray):
    """Similarity transforms moving each point set's centroid to the origin at mean distance sqrt(2).

    Works on (..., n, 2) arrays and returns (..., 3, 3) matrices.
    """
    centroid = pts.mean(axis=-2, keepdims=True)
    mean_dist = np.sqrt(((pts - centroid) ** 2).sum(axis=-1)).mean(axis=-1)
    scale = np.sqrt(2.0) / np.where(mean_dist > 0, mean_dist, 1.0)
    t = np.zeros(pts.shape[:-2] + (3, 3))
    t[..., 0, 0] = scale
    t[..., 1, 1] = scale
    t[..., 0, 2] = -scale * centroid[..., 0, 0]
    t[..., 1, 2] = -scale * centroid[..., 0, 1]
    t[..., 2, 2] = 1.0
    return t, mean_dist


def _apply_affine(t: np.ndarray, pts: np.ndarray) -> np.ndarray:
    return pts @ np.swapaxes(t[..., :2, :2], -1, -2) + t[..., None, :2, 2]


def _design_matrix(x0: np.ndarray, x1: np.ndarray) -> np.ndarray:
    n = x0.shape[-2]
    a = np.zeros(x0.shape[:-2] + (2 * n, 9))
    x, y = x0[..., 0], x0[..., 1]
    xp, yp = x1[..., 0], x1[..., 1]
    a[..., 0::2, 0] = -x
    a[..., 0::2, 1] = -y
    a[..., 0::2, 2] = -1.0
    a[..., 0::2, 6] = x * xp
    a[..., 0::2, 7] = y * xp
    a[..., 0::2, 8] = xp
    a[..., 1::2, 3] = -x
    a[..., 1::2, 4] = -y
    a[..., 1::2, 5] = -1.0
    a[..., 1::2, 6] = x * yp
    a[..., 1::2, 7] = y * yp
    a[..., 1::2, 8] = yp
    return a


def _solve_dlt(p0: np.ndarray, p1: np.ndarray):
    """Normalized DLT over a batch of point sets, shapes (..., n, 2).

    Returns unnormalized (..., 3, 3) matrices and the ratio of the second
    smallest to the largest eigenvalue of A^T A, ~0 when the null space is
    not one-dimensional.
    """
    t0, d0 = _hartley(p0)
    t1, d1 = _hartley(p1)
    a = _design_matrix(_apply_affine(t0, p0), _apply_affine(t1, p1))
    # null space of A is the smallest eigenvector of A^T A (9x9 symmetric)
    ata = np.swapaxes(a, -1, -2) @ a
    evals, evecs = np.linalg.eigh(ata)
    hn = evecs[..., :, 0].reshape(ata.shape[:-2] + (3, 3))
    h = np.linalg.inv(t1) @ hn @ t0
    top = np.maximum(evals[..., -1], np.finfo(float).tiny)
    gap = np.maximum(evals[..., 1], 0.0) / top
    spread_ok = (d0 > 0) & (d1 > 0)
    return h, np.where(spread_ok, gap, 0.0)


def _collinear(pts: np.ndarray) -> bool:
    centered = pts - pts.mean(axis=0)
    s = np.linalg.svd(centered, compute_uv=False)
    return s[0] == 0 or s[-1] <= 1e-9 * s[0]


def dlt_homography(c: Correspondences) -> Homography:
    """Least-squares homography through the normalized direct linear transform."""
    if len(c) < 4:
        raise InsufficientSamplesError(f"need at least 4 correspondences, got {len(c)}")
    if _collinear(c.p0) or _collinear(c.p1):
        raise DegenerateConfigurationError("points are collinear or coincident")
    h, gap = _solve_dlt(c.p0, c.p1)
    if gap < _RANK_TOL:
        raise DegenerateConfigurationError("correspondences do not determine a unique homography")
    return Homography(h)


def project_points(h: Homography, pts: np.ndarray) -> np.ndarray:
    pts = np.asarray(pts, dtype=np.float64)
    m = h.m
    w = m[2, 0] * pts[..., 0] + m[2, 1] * pts[..., 1] + m[2, 2]
    if np.any(np.abs(w) < _W_EPS):
        raise PointAtInfinityError("point maps to infinity")
    x = (m[0, 0] * pts[..., 0] + m[0, 1] * pts[..., 1] + m[0, 2]) / w
    y = (m[1, 0] * pts[..., 0] + m[1, 1] * pts[..., 1] + m[1, 2]) / w
    return np.stack([x, y], axis=-1)


def project(h: Homography, p) -> tuple[float, float]:
    x, y = project_points(h, np.asarray(p, dtype=np.float64))
    return float(x), float(y)


def _camera_flow64(h: Homography, width: int, height: int) -> tuple[np.ndarray, np.ndarray]:
    gy, gx = np.mgrid[0:height, 0:width].astype(np.float64)
    m = h.m
    w = m[2, 0] * gx + m[2, 1] * gy + m[2, 2]
    bad = np.abs(w) < _W_EPS
    if bad.any():
        rows, cols = np.nonzero(bad)
        raise PointAtInfinityError(
            f"grid maps to infinity in region x=[{cols.min()}, {cols.max()}], y=[{rows.min()}, {rows.max()}]"
        )
    x = (m[0, 0] * gx + m[0, 1] * gy + m[0, 2]) / w
    y = (m[1, 0] * gx + m[1, 1] * gy + m[1, 2]) / w
    return x - gx, y - gy


def camera_flow(h: Homography, width: int, height: int, pair=(0, 1)) -> FlowField:
    """Displacement every integer pixel undergoes under ``h``."""
    if width < 1 or height < 1:
        raise ValueError("grid dimensions must be >= 1")
    u, v = _camera_flow64(h, width, height)
    return FlowField(u, v, pair)


def _min_triangle_area(quads: np.ndarray) -> np.ndarray:
    """Smallest triangle area among the four triangles of each 4-point sample."""
    areas = []
    for i, j, k in ((0, 1, 2), (0, 1, 3), (0, 2, 3), (1, 2, 3)):
        a, b, c = quads[:, i], quads[:, j], quads[:, k]
        cross = (b[:, 0] - a[:, 0]) * (c[:, 1] - a[:, 1]) - (b[:, 1] - a[:, 1]) * (c[:, 0] - a[:, 0])
        areas.append(0.5 * np.abs(cross))
    return np.min(areas, axis=0)


def _draw_samples(n: int, iterations: int, seed: int) -> np.ndarray:
    """``iterations`` rows of 4 distinct indices in [0, n), via Floyd's algorithm."""
    rng = np.random.Generator(np.random.PCG64(seed))
    draws = rng.integers(0, np.arange(n - 3, n + 1), size=(iterations, 4))
    out = draws.copy()
    for col in range(1, 4):
        clash = np.any(out[:, :col] == draws[:, col, None], axis=1)
        out[:, col] = np.where(clash, n - 4 + col, draws[:, col])
    return out.astype(np.intp)


def _reprojection_errors(h: np.ndarray, p0: np.ndarray, p1: np.ndarray) -> np.ndarray:
    """Forward errors for a batch of matrices (k, 3, 3) over n points -> (k, n)."""
    x, y = p0[:, 0], p0[:, 1]
    w = h[:, 2, 0, None] * x + h[:, 2, 1, None] * y + h[:, 2, 2, None]
    px = h[:, 0, 0, None] * x + h[:, 0, 1, None] * y + h[:, 0, 2, None]
    py = h[:, 1, 0, None] * x + h[:, 1, 1, None] * y + h[:, 1, 2, None]
    with np.errstate(divide="ignore", invalid="ignore"):
        err = np.hypot(px / w - p1[:, 0], py / w - p1[:, 1])
    err[~np.isfinite(err)] = np.inf
    err[np.abs(w) < _W_EPS] = np.inf
    return err


def _score_hypotheses(c: Correspondences, cfg: RansacConfig):
    n = len(c)
    if n < 4:
        raise InsufficientSamplesError(f"need at least 4 correspondences, got {n}")
    samples = _draw_samples(n, cfg.iterations, cfg.seed)
    support = np.full(cfg.iterations, -1, dtype=np.int64)
    thr = cfg.reproj_threshold
    for start in range(0, cfg.iterations, _CHUNK):
        idx = samples[start : start + _CHUNK]
        q0 = c.p0[idx]
        q1 = c.p1[idx]
        ok = _min_triangle_area(q0) >= MIN_TRIANGLE_AREA
        h, gap = _solve_dlt(q0, q1)
        w22 = h[:, 2, 2]
        scale = np.abs(h).max(axis=(1, 2))
        ok &= (gap >= _RANK_TOL) & (np.abs(w22) >= _W_EPS * np.maximum(scale, 1.0))
        with np.errstate(divide="ignore", invalid="ignore"):
            h = h / np.where(ok, w22, 1.0)[:, None, None]
            ok &= np.all(np.isfinite(h), axis=(1, 2))
            ok &= np.abs(np.linalg.det(np.where(ok[:, None, None], h, np.eye(3)))) > MIN_DETERMINANT
        err = _reprojection_errors(np.where(ok[:, None, None], h, np.eye(3)), c.p0, c.p1)
        counts = (err < thr).sum(axis=1)
        support[start : start + len(idx)] = np.where(ok, counts, -1)
    return support, samples


def hypothesis_support(c: Correspondences, cfg: RansacConfig) -> np.ndarray:
    """Inlier count of every sampled hypothesis in draw order; -1 marks skipped samples."""
    return _score_hypotheses(c, cfg)[0]


REFIT_ROUNDS = 10


def ransac_homography(c: Correspondences, cfg: RansacConfig | None = None) -> RansacResult:
    """Fixed-iteration RANSAC; raises :class:`NoValidModel` when no model qualifies.

    The best-supported minimal sample (first one on ties) is refit on its
    inlier set, and refit and mask are alternated until the mask stops
    changing (at most ``REFIT_ROUNDS`` times).
    """
    cfg = cfg or RansacConfig()
    support, samples = _score_hypotheses(c, cfg)
    best = int(np.argmax(support))
    best_support = int(support[best])
    if best_support < 0:
        raise NoValidModel(0, "every minimal sample was degenerate")
    model = dlt_homography(Correspondences(c.p0[samples[best]], c.p1[samples[best]]))
    mask = _reprojection_errors(model.m[None], c.p0, c.p1)[0] < cfg.reproj_threshold
    # A single least-squares refit is pulled by near-threshold points at
    # motion boundaries; alternating refit and re-masking settles quickly.
    for _ in range(REFIT_ROUNDS):
        try:
            model = dlt_homography(Correspondences(c.p0[mask], c.p1[mask]))
        except (DegenerateConfigurationError, NormalizationError) as exc:
            raise NoValidModel(int(mask.sum()), f"refit failed: {exc}") from exc
        new_mask = _reprojection_errors(model.m[None], c.p0, c.p1)[0] < cfg.reproj_threshold
        if np.array_equal(new_mask, mask):
            break
        mask = new_mask
    count = int(mask.sum())
    if count < cfg.min_inliers or count < cfg.min_inlier_fraction * len(c):
        raise NoValidModel(count, "insufficient consensus")
    return RansacResult(model, mask, best_support)
