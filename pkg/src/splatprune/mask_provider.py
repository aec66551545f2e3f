"""Sparse binary object masks and their (optional) masked RGB images.

Masks pair with cameras by file base name, extension-insensitive; cameras
without masks simply stay unmasked (sparse supervision is the normal case).
Masks are binarized with a strict >127 threshold, resized nearest-neighbor
to the camera resolution; masked images are resized bilinearly and scaled
to [0, 1].
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .camera_rig import CameraView
from .errors import (
    AllBlackMaskError,
    DuplicateMaskError,
    NoMasksFoundError,
    UnpairedMaskError,
)

logger = logging.getLogger(__name__)

BINARIZE_THRESHOLD = 127
MASK_EXTENSIONS = {".png", ".pgm"}
IMAGE_EXTENSIONS = {".png", ".jpg", ".jpeg"}


@dataclass
class MaskedView:
    view: CameraView
    mask: np.ndarray                    # (H, W) bool, True = object pixel
    masked_image: np.ndarray | None     # (H, W, 3) float in [0, 1], or None

    def __post_init__(self) -> None:
        want = (self.view.height, self.view.width)
        if self.mask.shape != want:
            raise ValueError(f"mask shape {self.mask.shape} != camera {want}")
        if self.masked_image is not None and self.masked_image.shape[:2] != want:
            raise ValueError(
                f"masked image shape {self.masked_image.shape[:2]} != camera {want}"
            )
        if not self.mask.any():
            raise AllBlackMaskError(
                f"mask for {self.view.image_name!r} has no object pixel"
            )


@dataclass
class MaskSet:
    entries: list[MaskedView]

    def __post_init__(self) -> None:
        names = [e.view.image_name for e in self.entries]
        if len(set(names)) != len(names):
            raise ValueError("duplicate image names in mask set")

    @property
    def total_views(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)


def binarize(pixels: np.ndarray, threshold: int = BINARIZE_THRESHOLD) -> np.ndarray:
    """True exactly where pixel > threshold."""
    return np.asarray(pixels) > threshold


def _resize_mask(mask: np.ndarray, width: int, height: int) -> np.ndarray:
    if mask.shape == (height, width):
        return mask
    img = Image.fromarray(mask.astype(np.uint8) * 255, mode="L")
    out = img.resize((width, height), Image.NEAREST)
    return np.asarray(out) > BINARIZE_THRESHOLD


def _load_rgb(path: Path, width: int, height: int) -> np.ndarray:
    img = Image.open(path).convert("RGB")
    if img.size != (width, height):
        img = img.resize((width, height), Image.BILINEAR)
    return np.asarray(img, dtype=np.float32) / 255.0


def _index_files(directory: Path, extensions: set[str]) -> dict[str, Path]:
    files: dict[str, Path] = {}
    for p in sorted(directory.iterdir()):
        if p.is_file() and p.suffix.lower() in extensions:
            if p.stem in files:
                raise DuplicateMaskError(
                    f"both {files[p.stem].name} and {p.name} map to base {p.stem!r}"
                )
            files[p.stem] = p
    return files


def load_masks(mask_dir, image_dir=None, rig: list[CameraView] | None = None) -> MaskSet:
    """Pair mask files (and optional masked images) with cameras.

    Every mask must match a camera image name; cameras without masks are
    silently absent from the set.
    """
    if rig is None:
        raise ValueError("a camera rig is required to pair masks")
    mask_dir = Path(mask_dir)
    if not mask_dir.is_dir():
        raise NoMasksFoundError(f"mask directory {mask_dir} does not exist")
    mask_files = _index_files(mask_dir, MASK_EXTENSIONS)
    if not mask_files:
        raise NoMasksFoundError(f"no mask files (*.png, *.pgm) in {mask_dir}")

    by_stem: dict[str, list[CameraView]] = {}
    for view in rig:
        by_stem.setdefault(view.name_stem, []).append(view)

    image_files: dict[str, Path] = {}
    if image_dir is not None:
        image_files = _index_files(Path(image_dir), IMAGE_EXTENSIONS)

    entries: list[MaskedView] = []
    for stem, mask_path in mask_files.items():
        candidates = by_stem.get(stem)
        if not candidates:
            raise UnpairedMaskError(f"mask {mask_path.name!r} matches no camera image name")
        if len(candidates) > 1:
            raise UnpairedMaskError(
                f"mask {mask_path.name!r} is ambiguous: {len(candidates)} cameras share "
                f"base name {stem!r}"
            )
        view = candidates[0]
        raw = np.asarray(Image.open(mask_path).convert("L"))
        mask = _resize_mask(binarize(raw), view.width, view.height)
        image = None
        if image_files:
            img_path = image_files.get(stem)
            if img_path is not None:
                image = _load_rgb(img_path, view.width, view.height)
            else:
                logger.warning("no masked image found for %s; view contributes no "
                               "color evidence", mask_path.name)
        entries.append(MaskedView(view=view, mask=mask, masked_image=image))

    logger.info("paired %d masks against a %d-view rig", len(entries), len(rig))
    return MaskSet(entries=entries)
