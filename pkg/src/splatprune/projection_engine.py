"""Pinhole projection of Gaussian centers into camera views.

Centers are projected as single points (no covariance footprint): the
whitelist and depth-buffer stages consume one pixel per Gaussian per view.
Pixel (px, py) = (floor(u), floor(v)), so pixel (0, 0) covers [0,1)x[0,1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .camera_rig import CameraView

# Depths closer to the image plane than this count as behind the camera;
# avoids division blow-up at d ~ 0.
DEPTH_EPS = 1e-8

_PIXEL_CLIP = 2.0 ** 62  # keeps floor(u) castable to int64 for extreme rays


@dataclass
class ProjectedPoint:
    u: float
    v: float
    px: int
    py: int
    depth: float
    valid: bool


@dataclass
class CloudProjection:
    """Structure-of-arrays result of projecting N points into one view."""

    u: np.ndarray        # (N,) continuous pixel x, NaN where depth-rejected
    v: np.ndarray        # (N,)
    px: np.ndarray       # (N,) int64, -1 where depth-rejected
    py: np.ndarray       # (N,)
    depth: np.ndarray    # (N,) camera-space z
    valid: np.ndarray    # (N,) bool

    def __len__(self) -> int:
        return len(self.depth)

    def __getitem__(self, i: int) -> ProjectedPoint:
        return ProjectedPoint(
            u=float(self.u[i]), v=float(self.v[i]),
            px=int(self.px[i]), py=int(self.py[i]),
            depth=float(self.depth[i]), valid=bool(self.valid[i]),
        )


def project_points(points: np.ndarray, view: CameraView) -> CloudProjection:
    """Project (N, 3) world points into a view."""
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 3)
    R_w2c, t_w2c = view.world_to_camera()
    x_cam = pts @ R_w2c.T + t_w2c
    depth = x_cam[:, 2]
    front = depth > DEPTH_EPS

    uvw = x_cam @ view.K.T
    u = np.full(len(pts), np.nan)
    v = np.full(len(pts), np.nan)
    np.divide(uvw[:, 0], depth, out=u, where=front)
    np.divide(uvw[:, 1], depth, out=v, where=front)

    px = np.full(len(pts), -1, dtype=np.int64)
    py = np.full(len(pts), -1, dtype=np.int64)
    if front.any():
        px[front] = np.clip(np.floor(u[front]), -_PIXEL_CLIP, _PIXEL_CLIP).astype(np.int64)
        py[front] = np.clip(np.floor(v[front]), -_PIXEL_CLIP, _PIXEL_CLIP).astype(np.int64)

    valid = front & (px >= 0) & (px < view.width) & (py >= 0) & (py < view.height)
    return CloudProjection(u=u, v=v, px=px, py=py, depth=depth, valid=valid)


def project_point(x, view: CameraView) -> ProjectedPoint:
    """Single-point convenience wrapper around project_points."""
    return project_points(np.asarray(x, dtype=np.float64).reshape(1, 3), view)[0]


def project_cloud(cloud, view: CameraView) -> CloudProjection:
    """Project every Gaussian center of a cloud; output order matches cloud order."""
    return project_points(cloud.positions, view)
