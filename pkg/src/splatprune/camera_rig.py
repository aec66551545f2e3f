"""Calibrated pinhole cameras: COLMAP text model and a native JSON rig format.

Poses are normalized to camera-to-world at load time. COLMAP stores
world-to-camera (Hamilton quaternion qw qx qy qz plus translation), so the
loader applies R_c2w = R_w2c^T and t_c2w = -R_w2c^T t_w2c.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    MissingCameraError,
    NonOrthonormalRotationError,
    RigParseError,
    UnsupportedCameraModelError,
)

logger = logging.getLogger(__name__)

ROTATION_TOL = 1e-5

# COLMAP camera models the pinhole pipeline can consume. Models with
# distortion coefficients are accepted only when every coefficient is 0.
_MODEL_PARAMS = {
    "SIMPLE_PINHOLE": (3, 0),   # f cx cy
    "PINHOLE": (4, 0),          # fx fy cx cy
    "SIMPLE_RADIAL": (3, 1),    # f cx cy | k
    "RADIAL": (3, 2),           # f cx cy | k1 k2
    "OPENCV": (4, 4),           # fx fy cx cy | k1 k2 p1 p2
}


@dataclass
class CameraView:
    """One calibrated pinhole view (camera-to-world pose)."""

    view_id: int | str
    image_name: str
    K: np.ndarray        # (3, 3) intrinsics, zero skew
    R_c2w: np.ndarray    # (3, 3)
    t_c2w: np.ndarray    # (3,)
    width: int
    height: int

    def __post_init__(self) -> None:
        self.K = np.asarray(self.K, dtype=np.float64).reshape(3, 3)
        self.R_c2w = np.asarray(self.R_c2w, dtype=np.float64).reshape(3, 3)
        self.t_c2w = np.asarray(self.t_c2w, dtype=np.float64).reshape(3)
        self.width = int(self.width)
        self.height = int(self.height)
        if self.width <= 0 or self.height <= 0:
            raise RigParseError(f"view {self.view_id}: nonpositive resolution")
        err = np.abs(self.R_c2w.T @ self.R_c2w - np.eye(3)).max()
        det = float(np.linalg.det(self.R_c2w))
        if err >= ROTATION_TOL or abs(det - 1.0) >= ROTATION_TOL:
            raise NonOrthonormalRotationError(
                f"view {self.view_id}: rotation not orthonormal "
                f"(|R^T R - I|_max={err:.2e}, det={det:.6f})"
            )
        fx, fy = self.K[0, 0], self.K[1, 1]
        if fx <= 0 or fy <= 0:
            raise RigParseError(f"view {self.view_id}: nonpositive focal length")
        cx, cy = self.K[0, 2], self.K[1, 2]
        if not (0 <= cx < self.width) or not (0 <= cy < self.height):
            logger.warning("view %s: principal point (%.1f, %.1f) outside %dx%d image",
                           self.view_id, cx, cy, self.width, self.height)

    def world_to_camera(self) -> tuple[np.ndarray, np.ndarray]:
        R_w2c = self.R_c2w.T
        return R_w2c, -R_w2c @ self.t_c2w

    @property
    def camera_center(self) -> np.ndarray:
        return self.t_c2w

    @property
    def name_stem(self) -> str:
        """Image base name used for extension-insensitive mask pairing."""
        return Path(self.image_name).stem


def world_to_camera(view: CameraView) -> tuple[np.ndarray, np.ndarray]:
    return view.world_to_camera()


def quat_to_rotmat(q) -> np.ndarray:
    """Hamilton (w, x, y, z) unit quaternion to rotation matrix."""
    w, x, y, z = np.asarray(q, dtype=np.float64)
    return np.array([
        [1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)],
        [2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)],
        [2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)],
    ])


def rotmat_to_quat(R: np.ndarray) -> np.ndarray:
    """Rotation matrix to Hamilton (w, x, y, z), w >= 0."""
    Rxx, Ryx, Rzx, Rxy, Ryy, Rzy, Rxz, Ryz, Rzz = np.asarray(R, dtype=np.float64).flat
    k = np.array([
        [Rxx - Ryy - Rzz, 0, 0, 0],
        [Ryx + Rxy, Ryy - Rxx - Rzz, 0, 0],
        [Rzx + Rxz, Rzy + Ryz, Rzz - Rxx - Ryy, 0],
        [Ryz - Rzy, Rzx - Rxz, Rxy - Ryx, Rxx + Ryy + Rzz],
    ]) / 3.0
    eigvals, eigvecs = np.linalg.eigh(k)
    q = eigvecs[[3, 0, 1, 2], np.argmax(eigvals)]
    return -q if q[0] < 0 else q


def _intrinsics(fx: float, fy: float, cx: float, cy: float) -> np.ndarray:
    return np.array([[fx, 0.0, cx], [0.0, fy, cy], [0.0, 0.0, 1.0]])


def _pinhole_params(model: str, params: list[float], where: str) -> tuple[float, float, float, float]:
    spec = _MODEL_PARAMS.get(model)
    if spec is None:
        raise UnsupportedCameraModelError(f"{where}: camera model {model!r} not supported")
    n_core, n_dist = spec
    if len(params) != n_core + n_dist:
        raise RigParseError(f"{where}: model {model} expects {n_core + n_dist} params, "
                            f"got {len(params)}")
    if n_dist and any(p != 0.0 for p in params[n_core:]):
        raise UnsupportedCameraModelError(
            f"{where}: {model} has nonzero distortion; undistort images first"
        )
    if n_core == 3:
        f, cx, cy = params[:3]
        return f, f, cx, cy
    fx, fy, cx, cy = params[:4]
    return fx, fy, cx, cy


def load_colmap_text(model_dir) -> list[CameraView]:
    """Parse cameras.txt + images.txt from a COLMAP text model directory."""
    model_dir = Path(model_dir)
    cameras_txt = model_dir / "cameras.txt"
    images_txt = model_dir / "images.txt"
    for p in (cameras_txt, images_txt):
        if not p.is_file():
            raise RigParseError(f"missing {p}")

    cameras: dict[int, tuple[int, int, np.ndarray]] = {}
    with open(cameras_txt) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            tokens = line.split()
            try:
                cam_id = int(tokens[0])
                model = tokens[1]
                width, height = int(tokens[2]), int(tokens[3])
                params = [float(t) for t in tokens[4:]]
            except (ValueError, IndexError) as exc:
                raise RigParseError(f"cameras.txt:{lineno}: {exc}") from exc
            fx, fy, cx, cy = _pinhole_params(model, params, f"cameras.txt:{lineno}")
            cameras[cam_id] = (width, height, _intrinsics(fx, fy, cx, cy))

    views: list[CameraView] = []
    with open(images_txt) as fh:
        expect_points = False
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if expect_points:
                # 2D-point line (possibly empty); skipped.
                expect_points = False
                continue
            if not line or line.startswith("#"):
                continue
            tokens = line.split()
            if len(tokens) < 10:
                raise RigParseError(f"images.txt:{lineno}: expected 10 fields, got {len(tokens)}")
            try:
                image_id = int(tokens[0])
                qvec = [float(t) for t in tokens[1:5]]
                tvec = np.array([float(t) for t in tokens[5:8]])
                cam_id = int(tokens[8])
            except ValueError as exc:
                raise RigParseError(f"images.txt:{lineno}: {exc}") from exc
            name = tokens[9]
            if cam_id not in cameras:
                raise MissingCameraError(
                    f"images.txt:{lineno}: image {name!r} references unknown camera {cam_id}"
                )
            width, height, K = cameras[cam_id]
            R_w2c = quat_to_rotmat(qvec)
            R_c2w = R_w2c.T
            views.append(CameraView(
                view_id=image_id, image_name=name, K=K,
                R_c2w=R_c2w, t_c2w=-R_c2w @ tvec,
                width=width, height=height,
            ))
            expect_points = True
    if not views:
        raise RigParseError(f"no images parsed from {images_txt}")
    return views


def write_colmap_text(views: list[CameraView], model_dir) -> None:
    """Emit cameras.txt / images.txt (one PINHOLE camera per view)."""
    model_dir = Path(model_dir)
    model_dir.mkdir(parents=True, exist_ok=True)
    with open(model_dir / "cameras.txt", "w") as fh:
        fh.write("# Camera list with one line of data per camera:\n")
        fh.write("#   CAMERA_ID, MODEL, WIDTH, HEIGHT, PARAMS[]\n")
        for i, v in enumerate(views, 1):
            fx, fy, cx, cy = v.K[0, 0], v.K[1, 1], v.K[0, 2], v.K[1, 2]
            fh.write(f"{i} PINHOLE {v.width} {v.height} "
                     f"{fx:.17g} {fy:.17g} {cx:.17g} {cy:.17g}\n")
    with open(model_dir / "images.txt", "w") as fh:
        fh.write("# Image list with two lines of data per image:\n")
        fh.write("#   IMAGE_ID, QW, QX, QY, QZ, TX, TY, TZ, CAMERA_ID, NAME\n")
        fh.write("#   POINTS2D[] as (X, Y, POINT3D_ID)\n")
        for i, v in enumerate(views, 1):
            R_w2c, t_w2c = v.world_to_camera()
            qw, qx, qy, qz = rotmat_to_quat(R_w2c)
            tx, ty, tz = t_w2c
            fh.write(f"{i} {qw:.17g} {qx:.17g} {qy:.17g} {qz:.17g} "
                     f"{tx:.17g} {ty:.17g} {tz:.17g} {i} {v.image_name}\n\n")


def load_cameras_json(path) -> list[CameraView]:
    """Native JSON rig: array of objects with fx/fy/cx/cy, R_c2w row-major, t_c2w."""
    try:
        with open(path) as fh:
            entries = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise RigParseError(f"cannot read rig JSON {path}: {exc}") from exc
    if not isinstance(entries, list) or not entries:
        raise RigParseError(f"{path}: expected a non-empty JSON array of views")
    views = []
    for i, e in enumerate(entries):
        try:
            views.append(CameraView(
                view_id=e["view_id"],
                image_name=e["image_name"],
                K=_intrinsics(e["fx"], e["fy"], e["cx"], e["cy"]),
                R_c2w=np.array(e["R_c2w"], dtype=np.float64).reshape(3, 3),
                t_c2w=np.array(e["t_c2w"], dtype=np.float64),
                width=e["width"], height=e["height"],
            ))
        except (KeyError, TypeError, ValueError) as exc:
            raise RigParseError(f"{path}: entry {i}: {exc}") from exc
    return views


def save_cameras_json(views: list[CameraView], path) -> None:
    entries = []
    for v in views:
        entries.append({
            "view_id": v.view_id,
            "image_name": v.image_name,
            "fx": v.K[0, 0], "fy": v.K[1, 1], "cx": v.K[0, 2], "cy": v.K[1, 2],
            "width": v.width, "height": v.height,
            "R_c2w": [float(x) for x in v.R_c2w.reshape(-1)],
            "t_c2w": [float(x) for x in v.t_c2w],
        })
    with open(path, "w") as fh:
        json.dump(entries, fh, indent=2)
        fh.write("\n")
