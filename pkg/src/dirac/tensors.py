"""Dense tensor containers and shared utilities.

Axis convention used throughout the package: "x" is the row axis (extent H)
and "y" is the column axis (extent W).  Coordinates are absolute pixel units
indexed from 0; there is no normalized [-1, 1] convention anywhere.

Layout is row-major with the channel axis outermost, 64-bit floats on the
reference path.
"""

from __future__ import annotations

import os
import struct

import numpy as np

from .errors import InvalidArgumentError, ShapeMismatchError

_MAGIC = b"DACT"
_FORMAT_VERSION = 1
_DTYPE_F64 = 1
_HEADER_LEN = 16


class FeatureMap:
    """Immutable dense real tensor, channel-outermost.

    Sources are (C, H, W) or (C, D, H, W); 1D accumulator outputs
    (projection bins) are (C, L).
    """

    __slots__ = ("data",)

    def __init__(self, data) -> None:
        arr = np.ascontiguousarray(data, dtype=np.float64)
        if arr.ndim not in (2, 3, 4):
            raise ShapeMismatchError(
                "feature map must be (C,L), (C,H,W) or (C,D,H,W), "
                f"got shape {arr.shape}"
            )
        if any(s < 1 for s in arr.shape):
            raise InvalidArgumentError(f"all extents must be positive, got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise InvalidArgumentError("feature map contains non-finite values")
        arr.flags.writeable = False
        object.__setattr__(self, "data", arr)

    def __setattr__(self, name, value):
        raise AttributeError("FeatureMap is immutable")

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def dims(self) -> tuple[int, ...]:
        """Spatial extents (excluding the channel axis)."""
        return self.data.shape[1:]

    def __eq__(self, other) -> bool:
        return isinstance(other, FeatureMap) and np.array_equal(self.data, other.data)

    def __repr__(self) -> str:
        return f"FeatureMap(channels={self.channels}, dims={self.dims})"


class SamplingGrid:
    """Per-source-location target coordinates, shape (Q, *spatial).

    Q is the dimensionality of the target space and may exceed the
    dimensionality of the source the grid is paired with.
    """

    __slots__ = ("coords",)

    def __init__(self, coords) -> None:
        arr = np.ascontiguousarray(coords, dtype=np.float64)
        if arr.ndim < 2:
            raise ShapeMismatchError(
                f"grid coords need a leading Q axis plus spatial axes, got {arr.shape}"
            )
        if arr.shape[0] < 1:
            raise InvalidArgumentError("grid must carry at least one coordinate per location")
        if not np.all(np.isfinite(arr)):
            raise InvalidArgumentError("grid contains non-finite coordinates")
        arr.flags.writeable = False
        object.__setattr__(self, "coords", arr)

    def __setattr__(self, name, value):
        raise AttributeError("SamplingGrid is immutable")

    @property
    def coord_dims(self) -> int:
        return self.coords.shape[0]

    @property
    def spatial(self) -> tuple[int, ...]:
        return self.coords.shape[1:]

    def __repr__(self) -> str:
        return f"SamplingGrid(Q={self.coord_dims}, spatial={self.spatial})"


class GridSet:
    """Ordered, non-empty collection of grids sharing Q and spatial extents."""

    __slots__ = ("grids",)

    def __init__(self, grids) -> None:
        grids = tuple(grids)
        if not grids:
            raise InvalidArgumentError("grid set must contain at least one grid")
        q = grids[0].coord_dims
        spatial = grids[0].spatial
        for g in grids[1:]:
            if g.coord_dims != q or g.spatial != spatial:
                raise ShapeMismatchError(
                    "all grids in a set must share Q and spatial extents"
                )
        object.__setattr__(self, "grids", grids)

    def __setattr__(self, name, value):
        raise AttributeError("GridSet is immutable")

    def __len__(self) -> int:
        return len(self.grids)

    def __iter__(self):
        return iter(self.grids)

    def __getitem__(self, k) -> SamplingGrid:
        return self.grids[k]

    @property
    def coord_dims(self) -> int:
        return self.grids[0].coord_dims

    @property
    def spatial(self) -> tuple[int, ...]:
        return self.grids[0].spatial


def mesh_grid(dims) -> SamplingGrid:
    """Identity coordinates: the grid at location (i, j[, k]) equals (i, j[, k])."""
    dims = tuple(int(d) for d in dims)
    if len(dims) not in (2, 3):
        raise InvalidArgumentError(f"mesh_grid needs 2 or 3 extents, got {dims}")
    if any(d < 1 for d in dims):
        raise InvalidArgumentError(f"extents must be >= 1, got {dims}")
    axes = [np.arange(d, dtype=np.float64) for d in dims]
    return SamplingGrid(np.stack(np.meshgrid(*axes, indexing="ij"), axis=0))


def deterministic_sum(values) -> float:
    """Strict left-to-right sequential f64 summation.

    Parallel reduction paths must match this bit-exactly; the cost of the
    Python loop only matters for the reference path.
    """
    arr = np.asarray(values, dtype=np.float64).ravel()
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError("deterministic_sum requires finite inputs")
    total = 0.0
    for v in arr:
        total += float(v)
    return total


def write_tensor(path, fmap: FeatureMap) -> None:
    """Write the raw tensor format: 16-byte header, u32 LE extents, f64 LE data.

    Header: magic "DACT", version u8, rank u8 (number of extents, channel
    included), dtype u8 (1 = f64), then zero padding to 16 bytes.
    """
    shape = fmap.data.shape
    header = _MAGIC + struct.pack("<BBB", _FORMAT_VERSION, len(shape), _DTYPE_F64)
    header += b"\x00" * (_HEADER_LEN - len(header))
    payload = header + struct.pack(f"<{len(shape)}I", *shape)
    payload += fmap.data.astype("<f8").tobytes()
    tmp = f"{path}.tmp.{os.getpid()}"
    with open(tmp, "wb") as fh:
        fh.write(payload)
    os.replace(tmp, path)


def read_tensor(path) -> FeatureMap:
    """Read the raw tensor format written by :func:`write_tensor`."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < _HEADER_LEN or blob[:4] != _MAGIC:
        raise InvalidArgumentError(f"{path}: not a raw tensor file")
    version, rank, dtype = struct.unpack("<BBB", blob[4:7])
    if version != _FORMAT_VERSION:
        raise InvalidArgumentError(f"{path}: unsupported format version {version}")
    if dtype != _DTYPE_F64:
        raise InvalidArgumentError(f"{path}: unsupported dtype code {dtype}")
    off = _HEADER_LEN
    shape = struct.unpack(f"<{rank}I", blob[off : off + 4 * rank])
    off += 4 * rank
    n = int(np.prod(shape))
    data = np.frombuffer(blob, dtype="<f8", count=n, offset=off).reshape(shape)
    return FeatureMap(data)
