"""Stage 3: geometric outlier removal over the kept Gaussians.

Two percentile rules operate on the same kept positions: distance from the
centroid (spatial) and mean distance to the k nearest neighbors (neighbor).
A value exactly equal to the percentile threshold is never removed, and
combined mode unions both removal sets computed on the same input.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree

from .errors import DegenerateSelectionError, EmptyInputError, TooFewPointsError


def percentile(values, p: float) -> float:
    """Linear-interpolation percentile: rank p/100*(n-1) on the sorted vector."""
    values = np.asarray(values, dtype=np.float64).reshape(-1)
    if len(values) == 0:
        raise EmptyInputError("percentile of an empty vector")
    if not 0.0 < p <= 100.0:
        raise ValueError(f"percentile must lie in (0, 100], got {p}")
    return float(np.percentile(values, p, method="linear"))


def spatial_outliers(positions: np.ndarray, p_spatial: float = 99.0) -> np.ndarray:
    """Remove vector: centroid distance strictly above the p-th percentile."""
    positions = np.asarray(positions, dtype=np.float64).reshape(-1, 3)
    if len(positions) < 2:
        raise DegenerateSelectionError(
            f"spatial outlier rule needs >= 2 kept Gaussians, got {len(positions)}"
        )
    centroid = positions.mean(axis=0)
    dist = np.linalg.norm(positions - centroid, axis=1)
    return dist > percentile(dist, p_spatial)


class NeighborIndex:
    """Exact k-nearest-neighbor queries over kept positions (3-D tree).

    Queries address points by index and exclude the query point itself.
    """

    def __init__(self, positions: np.ndarray, workers: int = 1):
        self.positions = np.asarray(positions, dtype=np.float64).reshape(-1, 3)
        self._tree = cKDTree(self.positions)
        self._workers = workers

    def __len__(self) -> int:
        return len(self.positions)

    def query(self, i: int, k: int) -> tuple[np.ndarray, np.ndarray]:
        """Indices and distances of the k nearest other points to point i."""
        idx, dist = self.query_all(k)
        return idx[i], dist[i]

    def query_all(self, k: int) -> tuple[np.ndarray, np.ndarray]:
        """(indices, distances), each (n, k'), k' = min(k, n-1), sorted by distance."""
        n = len(self)
        if n < 2:
            raise TooFewPointsError("need at least 2 points for neighbor queries")
        kq = min(k + 1, n)
        dist, idx = self._tree.query(self.positions, k=kq, workers=self._workers)
        # Push the self entry (matched by index, robust to duplicate coords)
        # to the back of each row, then keep the first k' columns.
        self_mask = idx == np.arange(n)[:, None]
        dist = np.where(self_mask, np.inf, dist)
        order = np.argsort(dist, axis=1, kind="stable")
        k_eff = min(k, n - 1)
        take = order[:, :k_eff]
        rows = np.arange(n)[:, None]
        return idx[rows, take], dist[rows, take]

    def mean_knn_distance(self, k: int) -> np.ndarray:
        _, dist = self.query_all(k)
        return dist.mean(axis=1)


def neighbor_outliers(positions: np.ndarray, k: int = 10,
                      p_neighbor: float = 95.0, workers: int = 1) -> np.ndarray:
    """Remove vector: mean k-NN distance strictly above the p-th percentile."""
    positions = np.asarray(positions, dtype=np.float64).reshape(-1, 3)
    if k < 1:
        raise ValueError(f"neighbor count must be >= 1, got {k}")
    if len(positions) <= k:
        raise TooFewPointsError(
            f"neighbor outlier rule needs more than k={k} kept Gaussians, "
            f"got {len(positions)}"
        )
    dbar = NeighborIndex(positions, workers=workers).mean_knn_distance(k)
    return dbar > percentile(dbar, p_neighbor)


def combined_outliers(positions: np.ndarray, *, k: int = 10,
                      p_spatial: float = 99.0, p_neighbor: float = 95.0,
                      workers: int = 1) -> np.ndarray:
    """Union of spatial and neighbor removals, both computed on the same input."""
    return (spatial_outliers(positions, p_spatial)
            | neighbor_outliers(positions, k, p_neighbor, workers=workers))
