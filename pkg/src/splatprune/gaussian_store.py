"""Binary PLY store for 3D Gaussian Splatting models.

Uses the de-facto layout written by the reference 3DGS trainer: one
``vertex`` element whose properties are all float32, in the order

    x y z nx ny nz f_dc_0..2 f_rest_0..44 opacity scale_0..2 rot_0..3

(62 floats, 248 bytes per Gaussian at SH degree 3). Normals are read and
discarded, and written back as zeros. Files with fewer ``f_rest``
properties (lower SH degree) are accepted and the declared count is
carried through.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    IoFailureError,
    LengthMismatchError,
    MalformedHeaderError,
    NonFiniteValueError,
    TruncatedBodyError,
    UnsupportedEncodingError,
)

logger = logging.getLogger(__name__)

SH_REST_DEFAULT = 45  # degree-3 spherical harmonics: (3+1)^2 - 1 bands, 3 channels
_FLOAT_TYPES = {"float", "float32"}


@dataclass
class GaussianCloud:
    """Columnar (structure-of-arrays) store of N Gaussians.

    positions are scanned N x M times during whitelist filtering, so each
    attribute lives in its own contiguous float32 array.
    """

    positions: np.ndarray   # (N, 3) world-space centers
    f_dc: np.ndarray        # (N, 3) SH degree-0 coefficients
    f_rest: np.ndarray      # (N, R) higher-order SH, carried opaquely
    opacity: np.ndarray     # (N,)  pre-sigmoid logits
    scales: np.ndarray      # (N, 3) log-scales
    rotations: np.ndarray   # (N, 4) quaternions, as stored
    comments: tuple[str, ...] = field(default=(), compare=False)

    def __post_init__(self) -> None:
        self.positions = np.ascontiguousarray(self.positions, dtype=np.float32)
        self.f_dc = np.ascontiguousarray(self.f_dc, dtype=np.float32)
        self.f_rest = np.ascontiguousarray(self.f_rest, dtype=np.float32)
        self.opacity = np.ascontiguousarray(self.opacity, dtype=np.float32).reshape(-1)
        self.scales = np.ascontiguousarray(self.scales, dtype=np.float32)
        self.rotations = np.ascontiguousarray(self.rotations, dtype=np.float32)
        n = len(self.positions)
        shapes = {
            "positions": (n, 3),
            "f_dc": (n, 3),
            "scales": (n, 3),
            "rotations": (n, 4),
        }
        for name, want in shapes.items():
            got = getattr(self, name).shape
            if got != want:
                raise ValueError(f"{name} has shape {got}, expected {want}")
        if self.f_rest.ndim != 2 or len(self.f_rest) != n:
            raise ValueError(f"f_rest has shape {self.f_rest.shape}, expected ({n}, R)")
        if len(self.opacity) != n:
            raise ValueError(f"opacity has length {len(self.opacity)}, expected {n}")

    @property
    def count(self) -> int:
        return len(self.positions)

    @property
    def sh_rest_count(self) -> int:
        return self.f_rest.shape[1]

    def subset(self, keep: np.ndarray) -> "GaussianCloud":
        """Rows where ``keep`` is true, in original order."""
        keep = np.asarray(keep, dtype=bool)
        if keep.shape != (self.count,):
            raise LengthMismatchError(
                f"keep vector has shape {keep.shape}, cloud holds {self.count} Gaussians"
            )
        return GaussianCloud(
            positions=self.positions[keep],
            f_dc=self.f_dc[keep],
            f_rest=self.f_rest[keep],
            opacity=self.opacity[keep],
            scales=self.scales[keep],
            rotations=self.rotations[keep],
        )

    def attribute_columns(self) -> dict[str, np.ndarray]:
        return {
            "positions": self.positions,
            "f_dc": self.f_dc,
            "f_rest": self.f_rest,
            "opacity": self.opacity,
            "scales": self.scales,
            "rotations": self.rotations,
        }


def subset(cloud: GaussianCloud, keep: np.ndarray) -> GaussianCloud:
    return cloud.subset(keep)


def _property_names(sh_rest: int) -> list[str]:
    names = ["x", "y", "z", "nx", "ny", "nz"]
    names += [f"f_dc_{i}" for i in range(3)]
    names += [f"f_rest_{i}" for i in range(sh_rest)]
    names += ["opacity"]
    names += [f"scale_{i}" for i in range(3)]
    names += [f"rot_{i}" for i in range(4)]
    return names


def _parse_header(fh) -> tuple[int, list[str], list[str]]:
    """Returns (vertex count, property names in declared order, comments)."""
    magic = fh.readline()
    if magic.strip() != b"ply":
        raise MalformedHeaderError("not a PLY file (missing 'ply' magic)")
    count = None
    props: list[str] = []
    comments: list[str] = []
    saw_format = False
    in_vertex = False
    for _ in range(10000):
        raw = fh.readline()
        if not raw:
            raise MalformedHeaderError("header ended before end_header")
        line = raw.decode("ascii", errors="replace").strip()
        if not line:
            continue
        if line == "end_header":
            break
        tokens = line.split()
        if tokens[0] == "format":
            saw_format = True
            if tokens[1:] != ["binary_little_endian", "1.0"]:
                raise UnsupportedEncodingError(
                    f"unsupported PLY format {' '.join(tokens[1:])!r}; "
                    "need binary_little_endian 1.0"
                )
        elif tokens[0] == "comment":
            comments.append(line[len("comment"):].strip())
        elif tokens[0] == "element":
            if tokens[1] != "vertex" or in_vertex:
                raise MalformedHeaderError(f"unexpected element {tokens[1]!r}")
            in_vertex = True
            count = int(tokens[2])
        elif tokens[0] == "property":
            if not in_vertex:
                raise MalformedHeaderError("property declared outside vertex element")
            if len(tokens) != 3 or tokens[1] not in _FLOAT_TYPES:
                raise MalformedHeaderError(f"unsupported property declaration {line!r}")
            props.append(tokens[2])
    else:
        raise MalformedHeaderError("header too long")
    if not saw_format:
        raise MalformedHeaderError("missing format line")
    if count is None:
        raise MalformedHeaderError("missing 'element vertex' declaration")
    return count, props, comments


def load_ply(path) -> GaussianCloud:
    """Load a 3DGS model from binary little-endian PLY.

    Raises MalformedHeaderError, UnsupportedEncodingError, TruncatedBodyError
    or NonFiniteValueError per failure mode.
    """
    path = Path(path)
    with open(path, "rb") as fh:
        count, props, comments = _parse_header(fh)
        body = fh.read()

    index = {name: i for i, name in enumerate(props)}
    if len(index) != len(props):
        raise MalformedHeaderError("duplicate property names in header")

    rest_ids = sorted(
        int(p[len("f_rest_"):]) for p in props if p.startswith("f_rest_")
    )
    sh_rest = len(rest_ids)
    if rest_ids != list(range(sh_rest)):
        raise MalformedHeaderError("f_rest properties are not contiguous from 0")
    if sh_rest > SH_REST_DEFAULT:
        raise MalformedHeaderError(
            f"{sh_rest} f_rest properties exceed the SH degree-3 layout ({SH_REST_DEFAULT})"
        )
    if sh_rest != SH_REST_DEFAULT:
        logger.warning("nonstandard SH layout: %d f_rest properties (expected %d)",
                       sh_rest, SH_REST_DEFAULT)

    required = [p for p in _property_names(sh_rest) if p not in ("nx", "ny", "nz")]
    missing = [p for p in required if p not in index]
    if missing:
        raise MalformedHeaderError(f"missing required properties: {missing}")
    known = set(_property_names(sh_rest))
    extra = [p for p in props if p not in known]
    if extra:
        logger.warning("ignoring %d unknown properties: %s", len(extra), extra[:8])

    stride = 4 * len(props)
    need = count * stride
    if len(body) < need:
        raise TruncatedBodyError(
            f"body holds {len(body)} bytes; {count} vertices x {stride} B/vertex need {need}"
        )
    if len(body) > need:
        logger.warning("ignoring %d trailing bytes after vertex data", len(body) - need)

    table = np.frombuffer(body[:need], dtype="<f4").reshape(count, len(props))
    if not np.isfinite(table).all():
        raise NonFiniteValueError(f"non-finite values in PLY body of {path.name}")

    def cols(names: list[str]) -> np.ndarray:
        if not names:
            return np.empty((count, 0), dtype=np.float32)
        return np.ascontiguousarray(table[:, [index[n] for n in names]])

    return GaussianCloud(
        positions=cols(["x", "y", "z"]),
        f_dc=cols([f"f_dc_{i}" for i in range(3)]),
        f_rest=cols([f"f_rest_{i}" for i in range(sh_rest)]),
        opacity=cols(["opacity"]).reshape(-1),
        scales=cols([f"scale_{i}" for i in range(3)]),
        rotations=cols([f"rot_{i}" for i in range(4)]),
        comments=tuple(comments),
    )


def save_ply(cloud: GaussianCloud, path) -> int:
    """Write the cloud in the reference binary layout. Returns bytes written."""
    n = cloud.count
    sh_rest = cloud.sh_rest_count
    lines = ["ply", "format binary_little_endian 1.0"]
    lines += [f"comment {c}" for c in cloud.comments]
    lines.append(f"element vertex {n}")
    lines += [f"property float {name}" for name in _property_names(sh_rest)]
    lines.append("end_header")
    header = ("\n".join(lines) + "\n").encode("ascii")

    table = np.empty((n, 17 + sh_rest), dtype="<f4")
    table[:, 0:3] = cloud.positions
    table[:, 3:6] = 0.0  # normals, zeroed like the reference tools
    table[:, 6:9] = cloud.f_dc
    table[:, 9:9 + sh_rest] = cloud.f_rest
    table[:, 9 + sh_rest] = cloud.opacity
    table[:, 10 + sh_rest:13 + sh_rest] = cloud.scales
    table[:, 13 + sh_rest:17 + sh_rest] = cloud.rotations

    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(table.tobytes())
    except OSError as exc:
        raise IoFailureError(f"failed writing {path}: {exc}") from exc
    return len(header) + table.nbytes
