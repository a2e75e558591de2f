"""Synthetic sequences with known motion, for tests and the bundled demo scene."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.ndimage import gaussian_filter

from .imaging import Frame


def smooth_texture(height: int, width: int, rng: np.random.Generator, sigma: float = 3.0) -> np.ndarray:
    """Gaussian-filtered noise stretched to [0, 1]."""
    tex = gaussian_filter(rng.random((height, width)), sigma, mode="wrap")
    tex -= tex.min()
    top = tex.max()
    return tex / top if top > 0 else np.full_like(tex, 0.5)


def translated_pair(size: int, shift: tuple[int, int], seed: int = 0, sigma: float = 3.0) -> tuple[Frame, Frame]:
    """Two square crops of one texture; content moves by ``shift`` = (dx, dy) from the first to the second."""
    dx, dy = shift
    pad = max(abs(dx), abs(dy)) + 1
    tex = smooth_texture(size + 2 * pad, size + 2 * pad, np.random.default_rng(seed), sigma)
    a = tex[pad : pad + size, pad : pad + size]
    b = tex[pad - dy : pad - dy + size, pad - dx : pad - dx + size]
    return Frame(a), Frame(b)


@dataclass
class Scene:
    """A rendered sequence plus its ground truth.

    ``pan`` and ``patch_motion`` hold one (dx, dy) per consecutive pair;
    ``patch_boxes`` holds the patch's (x, y, size) in every frame.
    """

    frames: list[Frame]
    pan: list[tuple[int, int]]
    patch_motion: list[tuple[int, int]]
    patch_boxes: list[tuple[int, int, int]]


def render_scene(
    size: int,
    pan: list[tuple[int, int]],
    patch_motion: list[tuple[int, int]] | None = None,
    patch_size: int = 0,
    patch_origin: tuple[int, int] = (0, 0),
    seed: int = 0,
    sigma: float = 6.0,
    rgb: bool = False,
) -> Scene:
    """Render frames of a textured background viewed by a panning camera.

    ``pan[t]`` is the background displacement from frame t to t+1. An
    optional square patch moves by ``pan[t] + patch_motion[t]``.
    """
    n_pairs = len(pan)
    patch_motion = patch_motion or [(0, 0)] * n_pairs
    rng = np.random.default_rng(seed)
    total_x = sum(abs(p[0]) for p in pan)
    total_y = sum(abs(p[1]) for p in pan)
    margin_x, margin_y = total_x + 1, total_y + 1
    channels = 3 if rgb else 1
    canvas = np.stack(
        [smooth_texture(size + 2 * margin_y, size + 2 * margin_x, rng, sigma) for _ in range(channels)], axis=-1
    )
    patch_tex = np.stack(
        [smooth_texture(max(patch_size, 1), max(patch_size, 1), rng, sigma / 2) for _ in range(channels)], axis=-1
    )

    frames, boxes = [], []
    off_x, off_y = 0, 0
    px, py = patch_origin
    for t in range(n_pairs + 1):
        img = canvas[margin_y - off_y : margin_y - off_y + size, margin_x - off_x : margin_x - off_x + size].copy()
        if patch_size:
            x0, y0 = max(px, 0), max(py, 0)
            x1, y1 = min(px + patch_size, size), min(py + patch_size, size)
            if x1 > x0 and y1 > y0:
                img[y0:y1, x0:x1] = patch_tex[y0 - py : y1 - py, x0 - px : x1 - px]
        frames.append(Frame(img))
        boxes.append((px, py, patch_size))
        if t < n_pairs:
            off_x += pan[t][0]
            off_y += pan[t][1]
            px += pan[t][0] + patch_motion[t][0]
            py += pan[t][1] + patch_motion[t][1]
    return Scene(frames, list(pan), list(patch_motion), boxes)


def demo_scene(seed: int = 7) -> Scene:
    """The bundled 12-frame scene: 4 static pairs, then 7 pairs of camera pan with a patch moving on top."""
    pan = [(0, 0)] * 4 + [(6, 0)] * 7
    patch = [(0, 0)] * 4 + [(6, 0)] * 7
    return render_scene(256, pan, patch, patch_size=48, patch_origin=(40, 104), seed=seed, rgb=True)
