"""Batch command line front-end.

Exit codes: 0 success, 1 usage error, 2 data error, 3 internal error.
Set ``FLOWFORGE_LOG`` (DEBUG, INFO, WARNING, ...) to control logging.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict
from pathlib import Path

from . import __version__
from .compensation import CompensationConfig, compensate_batch
from .denseflow import FlowField, LkConfig, lucas_kanade_dense
from .errors import ConfigurationError, FlowforgeError
from .flowcodec import CodecConfig, decode_flow, encode_flow
from .geometry import RansacConfig
from .imaging import Frame, to_grayscale
from .selection import SelectionConfig, effective_threshold, select_pairs
from .sequenceids import SequenceLayout, assign_position_ids
from .storage import (
    ManifestDocument,
    PairReport,
    load_flo,
    read_image,
    save_flo,
    write_image,
    write_manifest,
)
from .synthetic import demo_scene
from .trace import grid_seeds, trace_points

log = logging.getLogger("flowforge")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3
IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff", ".ppm", ".pgm"}


class UsageError(Exception):
    pass


class StageError(Exception):
    def __init__(self, stage, cause):
        super().__init__(f"stage '{stage}' failed: {cause}")
        self.stage = stage
        self.cause = cause


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def pair_name(t: int, suffix: str) -> str:
    return f"pair_{t:06d}{suffix}"


# --- config plumbing -------------------------------------------------------


def lk_config(args) -> LkConfig:
    return LkConfig(args.window_radius, args.levels, args.iterations, args.min_eigenvalue)


def compensation_config(args) -> CompensationConfig:
    ransac = RansacConfig(reproj_threshold=args.ransac_threshold, seed=args.seed)
    return CompensationConfig(
        ransac=ransac,
        stride=args.stride,
        noise_threshold=args.noise_threshold,
        thresholding_enabled=not args.no_threshold,
    )


def selection_config(args) -> SelectionConfig:
    return SelectionConfig(
        proxy_size=args.proxy_size,
        top_k_percent=args.top_k,
        threshold_px=args.motion_threshold,
        reference_width=args.reference_width,
    )


def config_echo(args) -> dict:
    """Effective configuration recorded in every manifest."""
    echo = {}
    if hasattr(args, "proxy_size"):
        echo["selection"] = asdict(selection_config(args))
    if hasattr(args, "stride"):
        echo["compensation"] = asdict(compensation_config(args))
    if hasattr(args, "eta"):
        echo["codec"] = asdict(CodecConfig(args.eta))
    if hasattr(args, "window_radius"):
        echo["lk"] = asdict(lk_config(args))
    if hasattr(args, "seed"):
        echo["seed"] = args.seed
    return echo


# --- file helpers ----------------------------------------------------------


def list_images(directory) -> list[Path]:
    d = Path(directory)
    if not d.is_dir():
        raise UsageError(f"not a directory: {d}")
    return sorted(p for p in d.iterdir() if p.is_file() and p.suffix.lower() in IMAGE_SUFFIXES)


def list_flows(directory) -> list[Path]:
    d = Path(directory)
    if not d.is_dir():
        raise UsageError(f"not a directory: {d}")
    return sorted(p for p in d.iterdir() if p.is_file() and p.suffix.lower() == ".flo")


def load_frames(directory, minimum=2) -> list[Frame]:
    paths = list_images(directory)
    if len(paths) < minimum:
        raise FlowforgeError(f"{directory}: need at least {minimum} frames, found {len(paths)}")
    frames = [read_image(p) for p in paths]
    shape = frames[0].pixels.shape[:2]
    for p, f in zip(paths, frames):
        if f.pixels.shape[:2] != shape:
            raise FlowforgeError(f"{p.name}: size {f.width}x{f.height} differs from {shape[1]}x{shape[0]}")
    return frames


def load_flow_dir(directory, minimum=1) -> tuple[list[Path], list[FlowField]]:
    paths = list_flows(directory)
    if len(paths) < minimum:
        raise FlowforgeError(f"{directory}: need at least {minimum} flow files, found {len(paths)}")
    flows = []
    for i, p in enumerate(paths):
        try:
            flows.append(load_flo(p, pair=(i, i + 1)))
        except FlowforgeError as exc:
            raise FlowforgeError(f"{p.name}: {exc}") from exc
    return paths, flows


def pmap(fn, items, workers):
    items = list(items)
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def estimate_flows(frames, pairs, cfg: LkConfig, workers: int) -> list[FlowField]:
    gray = {}
    for t in pairs:
        for i in (t, t + 1):
            if i not in gray:
                gray[i] = to_grayscale(frames[i])

    def one(t):
        f = lucas_kanade_dense(gray[t], gray[t + 1], cfg)
        return FlowField(f.u, f.v, (t, t + 1))

    return pmap(one, pairs, workers)


# --- commands --------------------------------------------------------------


def cmd_flow(args) -> int:
    cfg = lk_config(args)
    frames = load_frames(args.input_dir)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    flows = estimate_flows(frames, range(len(frames) - 1), cfg, args.workers)
    for f in flows:
        save_flo(f, out / pair_name(f.pair[0], ".flo"))
    log.info("wrote %d flow files to %s", len(flows), out)
    return EXIT_OK


def cmd_compensate(args) -> int:
    cfg = compensation_config(args)
    paths, flows = load_flow_dir(args.flow_dir)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    results = compensate_batch(flows, cfg, workers=args.workers)
    reports = []
    for i, (p, (f, rep)) in enumerate(zip(paths, results)):
        save_flo(f, out / p.name)
        reports.append(PairReport(i, rep.valid, rep.inlier_count, p.name))
    doc = ManifestDocument(
        source=str(args.flow_dir),
        frame_count=len(flows) + 1,
        config=config_echo(args),
        compensation=reports,
    )
    write_manifest(doc, out / "manifest.json")
    return EXIT_OK


def cmd_select(args) -> int:
    cfg = selection_config(args)
    frames = load_frames(args.input_dir)
    mm = select_pairs(frames, cfg, workers=args.workers)
    doc = ManifestDocument(
        source=str(args.input_dir),
        frame_count=len(frames),
        config=config_echo(args),
        pair_proxies=mm.pair_proxies,
        selected=mm.selected,
        segments=mm.segments,
    )
    manifest_out = Path(args.manifest_out)
    manifest_out.parent.mkdir(parents=True, exist_ok=True)
    write_manifest(doc, manifest_out)
    if args.figure:
        from .plotting import plot_motion_proxies

        plot_motion_proxies(mm.pair_proxies, mm.selected, effective_threshold(frames[0].width, cfg), args.figure)
    return EXIT_OK


def cmd_encode(args) -> int:
    cfg = CodecConfig(args.eta)
    paths, flows = load_flow_dir(args.flow_dir)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for p, f in zip(paths, flows):
        write_image(encode_flow(f, cfg), out / (p.stem + ".png"))
    return EXIT_OK


def cmd_decode(args) -> int:
    cfg = CodecConfig(args.eta)
    paths = list_images(args.image_dir)
    if not paths:
        raise FlowforgeError(f"{args.image_dir}: no images found")
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for i, p in enumerate(paths):
        frame = read_image(p)
        save_flo(decode_flow(frame, cfg, pair=(i, i + 1)), out / (p.stem + ".flo"))
    return EXIT_OK


def cmd_trace(args) -> int:
    paths, flows = load_flow_dir(args.flow_dir)
    seeds = grid_seeds(flows[0].width, flows[0].height, args.stride)
    trajectories = trace_points(flows, seeds)
    doc = ManifestDocument(
        source=str(args.flow_dir),
        frame_count=len(flows) + 1,
        config={"trace": {"stride": args.stride}},
        trajectories=[{"seed": list(t.seed_point), "points": [list(p) for p in t.points]} for t in trajectories],
    )
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_manifest(doc, out)
    if args.overlay:
        from .plotting import plot_trajectories

        background = read_image(args.frame).pixels if args.frame else None
        plot_trajectories(trajectories, args.overlay, background, flows[0].width, flows[0].height)
    return EXIT_OK


def cmd_pipeline(args) -> int:
    sel_cfg = selection_config(args)
    comp_cfg = compensation_config(args)
    codec = CodecConfig(args.eta)
    lk = lk_config(args)
    out = Path(args.out_dir)

    try:
        frames = load_frames(args.input_dir)
    except FlowforgeError as exc:
        raise StageError("read", exc) from exc
    try:
        mm = select_pairs(frames, sel_cfg, workers=args.workers)
    except FlowforgeError as exc:
        raise StageError("select", exc) from exc
    pairs = list(range(len(frames) - 1)) if args.force_all_pairs else list(mm.selected)
    log.info("selected %d of %d pairs", len(mm.selected), len(frames) - 1)

    try:
        flows = estimate_flows(frames, pairs, lk, args.workers)
    except FlowforgeError as exc:
        raise StageError("flow", exc) from exc
    try:
        results = compensate_batch(flows, comp_cfg, workers=args.workers, indices=pairs)
    except FlowforgeError as exc:
        raise StageError("compensate", exc) from exc

    out.mkdir(parents=True, exist_ok=True)
    reports = []
    if pairs:
        for sub in ("flow", "compensated", "encoded"):
            (out / sub).mkdir(exist_ok=True)
    for t, raw, (comp, rep) in zip(pairs, flows, results):
        save_flo(raw, out / "flow" / pair_name(t, ".flo"))
        save_flo(comp, out / "compensated" / pair_name(t, ".flo"))
        write_image(encode_flow(comp, codec), out / "encoded" / pair_name(t, ".png"))
        reports.append(PairReport(t, rep.valid, rep.inlier_count, pair_name(t, ".flo")))

    doc = ManifestDocument(
        source=str(args.input_dir),
        frame_count=len(frames),
        config=config_echo(args),
        pair_proxies=mm.pair_proxies,
        selected=mm.selected,
        segments=mm.segments,
        compensation=reports,
    )
    write_manifest(doc, out / "manifest.json")
    if not args.no_figures:
        from .plotting import plot_motion_proxies

        (out / "figures").mkdir(exist_ok=True)
        plot_motion_proxies(
            mm.pair_proxies,
            mm.selected,
            effective_threshold(frames[0].width, sel_cfg),
            out / "figures" / "motion_proxy.png",
        )
    return EXIT_OK


def cmd_ids(args) -> int:
    frames = []
    for grid in args.frame:
        try:
            rows, cols = (int(x) for x in grid.lower().split("x"))
        except ValueError as exc:
            raise UsageError(f"bad frame grid {grid!r}, expected ROWSxCOLS") from exc
        frames.append((rows, cols))
    ids = assign_position_ids(SequenceLayout(args.text_len, tuple(frames)))
    text = json.dumps([list(p) for p in ids]) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_synth(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for i, f in enumerate(demo_scene(args.seed).frames):
        write_image(f, out / f"frame_{i:04d}.png")
    return EXIT_OK


# --- parser ----------------------------------------------------------------


def _add_lk(p):
    d = LkConfig()
    p.add_argument("--window-radius", type=int, default=d.window_radius)
    p.add_argument("--levels", type=int, default=d.pyramid_levels)
    p.add_argument("--iterations", type=int, default=d.iterations_per_level)
    p.add_argument("--min-eigenvalue", type=float, default=d.min_eigenvalue)


def _add_compensation(p):
    d = CompensationConfig()
    p.add_argument("--ransac-threshold", type=float, default=d.ransac.reproj_threshold)
    p.add_argument("--stride", type=int, default=d.stride)
    p.add_argument("--noise-threshold", type=float, default=d.noise_threshold)
    p.add_argument("--no-threshold", action="store_true", help="skip post-compensation thresholding")


def _add_selection(p):
    d = SelectionConfig()
    p.add_argument("--proxy-size", type=int, default=d.proxy_size)
    p.add_argument("--top-k", type=float, default=d.top_k_percent)
    p.add_argument("--motion-threshold", type=float, default=d.threshold_px,
                   help="threshold in px at --reference-width")
    p.add_argument("--reference-width", type=int, default=d.reference_width)


def _add_common(p, seed=False):
    p.add_argument("--workers", type=int, default=1)
    if seed:
        p.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="flowforge", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"flowforge {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("flow", help="dense flow for every consecutive frame pair")
    p.add_argument("input_dir")
    p.add_argument("out_dir")
    _add_lk(p)
    _add_common(p)
    p.set_defaults(func=cmd_flow)

    p = sub.add_parser("compensate", help="remove camera motion from .flo files")
    p.add_argument("flow_dir")
    p.add_argument("out_dir")
    _add_compensation(p)
    _add_common(p, seed=True)
    p.set_defaults(func=cmd_compensate)

    p = sub.add_parser("select", help="motion-aware frame selection")
    p.add_argument("input_dir")
    p.add_argument("manifest_out")
    p.add_argument("--figure", help="also render the proxy chart to this PNG")
    _add_selection(p)
    _add_common(p)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("encode", help=".flo files to RGB images")
    p.add_argument("flow_dir")
    p.add_argument("out_dir")
    p.add_argument("--eta", type=float, default=CodecConfig().eta)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="RGB images back to .flo files")
    p.add_argument("image_dir")
    p.add_argument("out_dir")
    p.add_argument("--eta", type=float, default=CodecConfig().eta)
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("pipeline", help="select, estimate, compensate and encode in one run")
    p.add_argument("input_dir")
    p.add_argument("out_dir")
    _add_selection(p)
    _add_compensation(p)
    _add_lk(p)
    p.add_argument("--eta", type=float, default=CodecConfig().eta)
    p.add_argument("--force-all-pairs", action="store_true", help="estimate flow on every pair, not only selected ones")
    p.add_argument("--no-figures", action="store_true")
    _add_common(p, seed=True)
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("trace", help="advect grid points through a flow sequence")
    p.add_argument("flow_dir")
    p.add_argument("--stride", type=int, default=16)
    p.add_argument("--out", required=True, help="trajectory manifest (JSON)")
    p.add_argument("--overlay", help="render trajectories to this PNG")
    p.add_argument("--frame", help="background image for the overlay")
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("ids", help="dump (shift, row, col) position IDs")
    p.add_argument("--text-len", type=int, default=0)
    p.add_argument("--frame", action="append", default=[], metavar="ROWSxCOLS")
    p.add_argument("--out")
    p.set_defaults(func=cmd_ids)

    p = sub.add_parser("synth", help="write the bundled 12-frame synthetic scene")
    p.add_argument("out_dir")
    p.add_argument("--seed", type=int, default=7)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    level = os.environ.get("FLOWFORGE_LOG", "WARNING").upper()
    logging.basicConfig(
        level=level if isinstance(logging.getLevelName(level), int) else "WARNING",
        format="%(levelname)s %(name)s: %(message)s",
    )
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, ConfigurationError) as exc:
        print(f"flowforge: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except StageError as exc:
        print(f"flowforge: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (FlowforgeError, OSError) as exc:
        print(f"flowforge: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        log.debug("internal error", exc_info=True)
        print(f"flowforge: internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
