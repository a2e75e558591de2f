"""Reversible flow <-> RGB encoding through HSV.

Direction goes to hue, normalized magnitude to saturation, and the value
channel is held at 1 so encoded frames never darken. The HSV -> RGB step is
the standard six-sector conversion: with ``i = floor(6h) mod 6`` and
``f = 6h - floor(6h)``, ``p = v(1 - s)``, ``q = v(1 - fs)``, ``t = v(1 - (1 - f)s)``,
sectors 0..5 give (v,t,p), (q,v,p), (p,v,t), (p,q,v), (t,p,v), (v,p,q).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .denseflow import FlowField
from .errors import ConfigurationError, InvalidFrameError
from .imaging import Frame

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class CodecConfig:
    eta: float = 64.0

    def __post_init__(self):
        if not self.eta > 0:
            raise ConfigurationError("eta must be > 0")


def hsv_to_rgb(h: np.ndarray, s: np.ndarray, v: np.ndarray) -> np.ndarray:
    h6 = np.asarray(h, dtype=np.float64) * 6.0
    sector = np.floor(h6)
    f = h6 - sector
    i = sector.astype(np.int64) % 6
    p = v * (1.0 - s)
    q = v * (1.0 - f * s)
    t = v * (1.0 - (1.0 - f) * s)
    r = np.choose(i, [v, q, p, p, t, v])
    g = np.choose(i, [t, v, v, q, p, p])
    b = np.choose(i, [p, p, t, v, v, q])
    return np.stack([r, g, b], axis=-1)


def rgb_to_hsv(rgb: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    rgb = np.asarray(rgb, dtype=np.float64)
    r, g, b = rgb[..., 0], rgb[..., 1], rgb[..., 2]
    v = rgb.max(axis=-1)
    c = v - rgb.min(axis=-1)
    s = np.where(v > 0, c / np.where(v > 0, v, 1.0), 0.0)
    safe_c = np.where(c > 0, c, 1.0)
    hr = ((g - b) / safe_c) % 6.0
    hg = (b - r) / safe_c + 2.0
    hb = (r - g) / safe_c + 4.0
    h6 = np.where(v == r, hr, np.where(v == g, hg, hb))
    h = np.where(c > 0, h6 / 6.0, 0.0)
    return h % 1.0, s, v


def encode_flow(flow: FlowField, cfg: CodecConfig | None = None) -> Frame:
    """Encode flow as an RGB frame; magnitudes above ``eta`` saturate."""
    cfg = cfg or CodecConfig()
    u = flow.u.astype(np.float64)
    v = flow.v.astype(np.float64)
    sat = np.clip(np.sqrt(u * u + v * v) / cfg.eta, 0.0, 1.0)
    theta = np.arctan2(v, u) + np.pi
    theta = np.where(theta >= TWO_PI, theta - TWO_PI, theta)
    hue = theta / TWO_PI
    rgb = hsv_to_rgb(hue, sat, np.ones_like(sat))
    return Frame(np.clip(rgb, 0.0, 1.0).astype(np.float32))


def decode_flow(image: Frame, cfg: CodecConfig | None = None, pair=(0, 1)) -> FlowField:
    cfg = cfg or CodecConfig()
    if image.channels != 3:
        raise InvalidFrameError("decoding needs a 3-channel image")
    hue, sat, _ = rgb_to_hsv(image.pixels)
    mag = sat * cfg.eta
    phi = hue * TWO_PI - np.pi
    zero = sat < 1.0 / 255.0
    u = np.where(zero, 0.0, mag * np.cos(phi))
    v = np.where(zero, 0.0, mag * np.sin(phi))
    return FlowField(u, v, pair)
