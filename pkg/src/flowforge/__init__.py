"""Motion preprocessing for flow-forecasting training data.

Dense Lucas-Kanade flow, homography-based camera-motion compensation,
motion-aware frame selection, a reversible flow/RGB codec, trajectory
tracing and (shift, row, col) position IDs.
"""

__version__ = "0.1.0"

from .compensation import CompensationConfig, CompensationReport, compensate_batch, compensate_flow, sample_correspondences
from .denseflow import FlowField, LkConfig, lucas_kanade_dense, motion_magnitudes
from .flowcodec import CodecConfig, decode_flow, encode_flow
from .geometry import (
    Correspondences,
    Homography,
    RansacConfig,
    camera_flow,
    dlt_homography,
    project,
    ransac_homography,
)
from .imaging import Frame, gradients, resize_bilinear, to_grayscale
from .selection import MotionManifest, SelectionConfig, motion_proxy, select_pairs, top_k_value
from .sequenceids import PositionId, SequenceLayout, assign_position_ids
from .trace import Trajectory, grid_seeds, trace_points

__all__ = [
    "CodecConfig",
    "CompensationConfig",
    "CompensationReport",
    "Correspondences",
    "FlowField",
    "Frame",
    "Homography",
    "LkConfig",
    "MotionManifest",
    "PositionId",
    "RansacConfig",
    "SelectionConfig",
    "SequenceLayout",
    "Trajectory",
    "assign_position_ids",
    "camera_flow",
    "compensate_batch",
    "compensate_flow",
    "decode_flow",
    "dlt_homography",
    "encode_flow",
    "gradients",
    "grid_seeds",
    "lucas_kanade_dense",
    "motion_magnitudes",
    "motion_proxy",
    "project",
    "ransac_homography",
    "resize_bilinear",
    "sample_correspondences",
    "select_pairs",
    "to_grayscale",
    "top_k_value",
    "trace_points",
]
