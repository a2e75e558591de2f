"""Point trajectories advected through a sequence of flow fields."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .denseflow import FlowField, bilinear_sample
from .errors import InvalidFlowError


@dataclass
class Trajectory:
    seed_point: tuple[float, float]
    points: list[tuple[float, float]]


def grid_seeds(width: int, height: int, stride: int) -> list[tuple[int, int]]:
    if stride < 1:
        raise ValueError("stride must be >= 1")
    return [(x, y) for y in range(0, height, stride) for x in range(0, width, stride)]


def trace_points(flows: list[FlowField], seeds) -> list[Trajectory]:
    """Forward-Euler advection, one step per field.

    Flow is sampled bilinearly at the clamped location; the positions
    themselves may leave the frame.
    """
    flows = list(flows)
    if not flows:
        raise InvalidFlowError("need at least one flow field to trace")
    shape = flows[0].u.shape
    if any(f.u.shape != shape for f in flows):
        raise InvalidFlowError("flow fields must share dimensions")
    h, w = shape
    pts = np.asarray(seeds, dtype=np.float64).reshape(-1, 2)
    outside = (pts[:, 0] < 0) | (pts[:, 0] > w - 1) | (pts[:, 1] < 0) | (pts[:, 1] > h - 1)
    if outside.any():
        x, y = pts[np.argmax(outside)]
        raise ValueError(f"seed ({x}, {y}) lies outside the {w}x{h} field")

    history = [pts.copy()]
    for f in flows:
        du = bilinear_sample(f.u, pts[:, 0], pts[:, 1])
        dv = bilinear_sample(f.v, pts[:, 0], pts[:, 1])
        pts = pts + np.stack([du, dv], axis=1)
        history.append(pts)
    stacked = np.stack(history, axis=1)
    return [
        Trajectory((float(s[0]), float(s[1])), [(float(x), float(y)) for x, y in track])
        for s, track in zip(history[0], stacked)
    ]
