"""Stage 1: keep Gaussians that land on object pixels in enough masked views.

A Gaussian scores one hit per masked view where its projection is valid and
the mask is true at the projected pixel. The whitelist keeps hit counts >= m
(m=1 is the plain any-view OR; m>=2 is the multi-view consistency mode).
A Gaussian with zero valid projections was never tested against any mask
and is removed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._parallel import map_ordered
from .gaussian_store import GaussianCloud
from .mask_provider import MaskedView, MaskSet
from .projection_engine import project_cloud


@dataclass
class StageRecord:
    name: str
    removed: int
    remaining: int


@dataclass
class SelectionState:
    """Keep-vector over the cloud plus per-stage removal tallies."""

    keep: np.ndarray                 # (N,) bool
    hit_counts: np.ndarray | None = None
    stage_log: list[StageRecord] = field(default_factory=list)

    @classmethod
    def full(cls, n: int) -> "SelectionState":
        return cls(keep=np.ones(n, dtype=bool))

    @property
    def remaining(self) -> int:
        return int(self.keep.sum())

    def record_stage(self, name: str, new_keep: np.ndarray) -> StageRecord:
        new_keep = np.asarray(new_keep, dtype=bool)
        if new_keep.shape != self.keep.shape:
            raise ValueError("stage keep vector has wrong length")
        if (new_keep & ~self.keep).any():
            raise ValueError(f"stage {name!r} tried to resurrect removed Gaussians")
        before = self.remaining
        self.keep = new_keep
        rec = StageRecord(name=name, removed=before - self.remaining,
                          remaining=self.remaining)
        self.stage_log.append(rec)
        return rec


def _view_hits(cloud: GaussianCloud, masked: MaskedView) -> np.ndarray:
    proj = project_cloud(cloud, masked.view)
    hits = np.zeros(cloud.count, dtype=np.int32)
    sel = proj.valid
    hits[sel] = masked.mask[proj.py[sel], proj.px[sel]]
    return hits


def accumulate_hits(cloud: GaussianCloud, masks: MaskSet,
                    workers: int | None = 1) -> np.ndarray:
    """Per-Gaussian count of masked views hit on an object pixel.

    Merged by element-wise integer addition, so view order and worker
    scheduling cannot change the result.
    """
    partials = map_ordered(lambda mv: _view_hits(cloud, mv), masks.entries, workers)
    total = np.zeros(cloud.count, dtype=np.int32)
    for part in partials:
        total += part
    return total


def whitelist(hit_counts: np.ndarray, m: int = 1) -> np.ndarray:
    """Keep vector: hit in at least m masked views."""
    if m < 1:
        raise ValueError(f"minimum view count must be >= 1, got {m}")
    return np.asarray(hit_counts) >= m
