"""File formats: Middlebury ``.flo``, 8-bit images, and the JSON run manifest."""
from __future__ import annotations

import json
import struct
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image, UnidentifiedImageError

from .denseflow import FlowField
from .errors import FloFormatError, FloLengthError, ImageDecodeError, ManifestVersionError
from .imaging import Frame

FLO_MAGIC = 202021.25
FLO_HEADER = struct.Struct("<fii")
MANIFEST_VERSION = "1.0"
SUPPORTED_VERSIONS = frozenset({MANIFEST_VERSION})


def write_flo(flow: FlowField) -> bytes:
    h, w = flow.u.shape
    body = np.empty((h, w, 2), dtype="<f4")
    body[..., 0] = flow.u
    body[..., 1] = flow.v
    return FLO_HEADER.pack(FLO_MAGIC, w, h) + body.tobytes()


def read_flo(data: bytes, pair=(0, 1)) -> FlowField:
    if len(data) < FLO_HEADER.size:
        raise FloLengthError(FLO_HEADER.size, len(data))
    magic, w, h = FLO_HEADER.unpack_from(data)
    if magic != FLO_MAGIC:
        raise FloFormatError(f"bad magic {magic!r}, expected {FLO_MAGIC}")
    if w < 1 or h < 1:
        raise FloFormatError(f"invalid dimensions {w}x{h}")
    expected = FLO_HEADER.size + 8 * w * h
    if len(data) != expected:
        raise FloLengthError(expected, len(data))
    body = np.frombuffer(data, dtype="<f4", offset=FLO_HEADER.size).reshape(h, w, 2)
    return FlowField(body[..., 0], body[..., 1], pair)


def save_flo(flow: FlowField, path) -> None:
    Path(path).write_bytes(write_flo(flow))


def load_flo(path, pair=(0, 1)) -> FlowField:
    return read_flo(Path(path).read_bytes(), pair)


def quantize(pixels: np.ndarray) -> np.ndarray:
    return np.clip(np.round(np.asarray(pixels, dtype=np.float64) * 255.0), 0, 255).astype(np.uint8)


def read_image(path) -> Frame:
    try:
        with Image.open(path) as im:
            im.load()
            if im.mode in ("RGBA", "P", "CMYK", "YCbCr"):
                im = im.convert("RGB")
            elif im.mode == "LA":
                im = im.convert("L")
            if im.mode not in ("L", "RGB"):
                raise ImageDecodeError(f"{path}: unsupported image mode {im.mode}")
            arr = np.asarray(im, dtype=np.uint8)
    except (UnidentifiedImageError, OSError, SyntaxError) as exc:
        raise ImageDecodeError(f"{path}: {exc}") from exc
    return Frame((arr / 255.0).astype(np.float32))


def write_image(frame: Frame, path) -> None:
    q = quantize(frame.pixels)
    img = Image.fromarray(q[:, :, 0] if frame.channels == 1 else q)
    img.save(path, format="PNG")


@dataclass
class PairReport:
    pair: int
    valid: bool
    inlier_count: int
    file: str = ""


@dataclass
class ManifestDocument:
    source: str
    frame_count: int
    config: dict = field(default_factory=dict)
    pair_proxies: list[tuple[int, float]] = field(default_factory=list)
    selected: list[int] = field(default_factory=list)
    segments: list[tuple[int, int]] = field(default_factory=list)
    compensation: list[PairReport] = field(default_factory=list)
    # each entry: {"seed": [x, y], "points": [[x, y], ...]}
    trajectories: list[dict] = field(default_factory=list)
    version: str = MANIFEST_VERSION

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pair_proxies"] = [[int(i), float(p)] for i, p in self.pair_proxies]
        d["segments"] = [[int(a), int(b)] for a, b in self.segments]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ManifestDocument":
        if "version" not in d:
            raise ManifestVersionError("manifest has no version field")
        if d["version"] not in SUPPORTED_VERSIONS:
            raise ManifestVersionError(f"unsupported manifest version {d['version']!r}")
        return cls(
            source=d["source"],
            frame_count=int(d["frame_count"]),
            config=d.get("config", {}),
            pair_proxies=[(int(i), float(p)) for i, p in d.get("pair_proxies", [])],
            selected=[int(i) for i in d.get("selected", [])],
            segments=[(int(a), int(b)) for a, b in d.get("segments", [])],
            compensation=[PairReport(**r) for r in d.get("compensation", [])],
            trajectories=d.get("trajectories", []),
            version=d["version"],
        )


def dumps_manifest(m: ManifestDocument) -> str:
    return json.dumps(m.to_dict(), indent=2, sort_keys=True) + "\n"


def loads_manifest(text: str) -> ManifestDocument:
    return ManifestDocument.from_dict(json.loads(text))


def write_manifest(m: ManifestDocument, path) -> None:
    Path(path).write_text(dumps_manifest(m), encoding="utf-8")


def read_manifest(path) -> ManifestDocument:
    return loads_manifest(Path(path).read_text(encoding="utf-8"))
