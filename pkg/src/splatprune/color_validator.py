"""Stage 2: depth-buffered color validation against masked images.

Per masked view, the kept Gaussians are depth-buffered (nearest center wins
each pixel, lower index breaking exact depth ties). At every object pixel
with a winner, the winner's SH DC color is compared to the image color.
A Gaussian survives the stage if it was never a front-layer winner at any
object pixel (occluded), or if it matched (delta < tau) at one or more
pixels in at least one view. Removal therefore needs positive evidence of
mismatch; background pixels contribute nothing.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ._parallel import map_ordered
from .camera_rig import CameraView
from .gaussian_store import GaussianCloud
from .mask_provider import MaskedView, MaskSet
from .projection_engine import project_points

logger = logging.getLogger(__name__)

# Degree-0 spherical harmonic basis coefficient: rgb = C0 * f_dc + 0.5.
SH_DC_COEFF = 0.28209479


def dc_color(f_dc) -> np.ndarray:
    """SH DC coefficients to RGB, clamped to [0, 1] to match image range."""
    c = SH_DC_COEFF * np.asarray(f_dc, dtype=np.float64) + 0.5
    return np.clip(c, 0.0, 1.0)


def color_delta(c, c_mask) -> float | np.ndarray:
    """Euclidean RGB distance; range [0, sqrt(3)]."""
    diff = np.asarray(c, dtype=np.float64) - np.asarray(c_mask, dtype=np.float64)
    return np.linalg.norm(diff, axis=-1)


@dataclass
class DepthBuffer:
    winner: np.ndarray   # (H, W) int64 Gaussian index, -1 where empty
    depth: np.ndarray    # (H, W) float64 minimal depth, +inf where empty


def build_depth_buffer(cloud: GaussianCloud, keep: np.ndarray,
                       view: CameraView) -> DepthBuffer:
    """Front-layer winner per pixel among kept Gaussians.

    Winner = minimal depth, ties broken by lower Gaussian index.
    """
    h, w = view.height, view.width
    winner = np.full((h, w), -1, dtype=np.int64)
    depth = np.full((h, w), np.inf)

    kept_idx = np.flatnonzero(np.asarray(keep, dtype=bool))
    if len(kept_idx) == 0:
        return DepthBuffer(winner=winner, depth=depth)
    proj = project_points(cloud.positions[kept_idx], view)
    sel = proj.valid
    if not sel.any():
        return DepthBuffer(winner=winner, depth=depth)

    gauss = kept_idx[sel]
    d = proj.depth[sel]
    flat = proj.py[sel] * w + proj.px[sel]

    # Sort by (pixel, depth, index); first row per pixel is the winner.
    order = np.lexsort((gauss, d, flat))
    flat_sorted = flat[order]
    pixels, first = np.unique(flat_sorted, return_index=True)
    win_g = gauss[order][first]
    win_d = d[order][first]
    winner.reshape(-1)[pixels] = win_g
    depth.reshape(-1)[pixels] = win_d
    return DepthBuffer(winner=winner, depth=depth)


@dataclass
class ColorEvidence:
    rendered_count: np.ndarray   # (N,) views where the Gaussian won >=1 object pixel
    match_count: np.ndarray      # (N,) views with >=1 object pixel at delta < tau


def _view_evidence(cloud: GaussianCloud, keep: np.ndarray, masked: MaskedView,
                   tau: float) -> tuple[np.ndarray, np.ndarray]:
    rendered = np.zeros(cloud.count, dtype=bool)
    matched = np.zeros(cloud.count, dtype=bool)
    if masked.masked_image is None:
        return rendered, matched
    buf = build_depth_buffer(cloud, keep, masked.view)
    ys, xs = np.nonzero(masked.mask & (buf.winner >= 0))
    if len(ys) == 0:
        return rendered, matched
    winners = buf.winner[ys, xs]
    delta = color_delta(dc_color(cloud.f_dc[winners]),
                        masked.masked_image[ys, xs].astype(np.float64))
    rendered[winners] = True
    matched[winners[delta < tau]] = True
    return rendered, matched


def validate_colors(cloud: GaussianCloud, keep: np.ndarray, masks: MaskSet,
                    tau: float = 0.40,
                    workers: int | None = 1) -> tuple[np.ndarray, ColorEvidence]:
    """Updated keep vector plus per-Gaussian evidence counts.

    Per-view (rendered, matched) flags merge by element-wise addition, so
    the result is independent of view processing order.
    """
    if tau <= 0:
        raise ValueError(f"color threshold must be > 0, got {tau}")
    keep = np.asarray(keep, dtype=bool)
    if not any(mv.masked_image is not None for mv in masks):
        logger.warning("no masked images available; color validation keeps everything")

    partials = map_ordered(lambda mv: _view_evidence(cloud, keep, mv, tau),
                           masks.entries, workers)
    rendered_count = np.zeros(cloud.count, dtype=np.int32)
    match_count = np.zeros(cloud.count, dtype=np.int32)
    for rendered, matched in partials:
        rendered_count += rendered
        match_count += matched

    new_keep = keep & ((rendered_count == 0) | (match_count >= 1))
    return new_keep, ColorEvidence(rendered_count=rendered_count,
                                   match_count=match_count)
