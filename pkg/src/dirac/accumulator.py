"""Directed accumulation: scatter source values into an accumulator space.

Forward: each source pixel (n, m) votes its value into the target cell(s)
addressed by every grid in the set,

    V[c, t...] = sum_k sum_n sum_m U[c,n,m] * prod_q K(G_q[k][n,m], t_q)

Backward is the matching gather: the gradient at a source pixel reads the
upstream tensor at that pixel's target coordinates, summed over grids.  The
two directions are exact adjoints of one another, which `adjoint_gap`
measures directly.

Accumulation order is fixed (grid, then corner, then row-major source order)
so results are bit-stable across runs; parallel variants must reproduce this
reduction exactly.
"""

from __future__ import annotations

import itertools

import numpy as np

from .errors import InvalidArgumentError, ShapeMismatchError
from .kernels import Kernel, kernel_eval
from .tensors import FeatureMap, GridSet, deterministic_sum

MAX_TARGET_RANK = 3


def _corner_terms(coords: np.ndarray, target_dims: tuple[int, ...], kernel: Kernel):
    """Yield (flat_target_index, weight, valid) per kernel support corner.

    `coords` has shape (Q, *spatial); indices are clipped into range and the
    `valid` mask marks in-bounds votes (out-of-bounds votes are dropped).
    """
    q = coords.shape[0]
    if kernel is Kernel.INTEGER:
        idx = np.floor(coords + 0.5).astype(np.int64)
        valid = np.ones(coords.shape[1:], dtype=bool)
        for axis, extent in enumerate(target_dims):
            valid &= (idx[axis] >= 0) & (idx[axis] < extent)
        clipped = [np.clip(idx[a], 0, target_dims[a] - 1) for a in range(q)]
        flat = np.ravel_multi_index(clipped, target_dims)
        yield flat, np.ones(coords.shape[1:]), valid
    else:
        base = np.floor(coords)
        for offsets in itertools.product((0.0, 1.0), repeat=q):
            corner = [base[a] + offsets[a] for a in range(q)]
            weight = np.ones(coords.shape[1:])
            valid = np.ones(coords.shape[1:], dtype=bool)
            for a in range(q):
                weight = weight * kernel_eval(kernel, coords[a], corner[a])
                valid &= (corner[a] >= 0) & (corner[a] < target_dims[a])
            clipped = [
                np.clip(corner[a].astype(np.int64), 0, target_dims[a] - 1) for a in range(q)
            ]
            flat = np.ravel_multi_index(clipped, target_dims)
            yield flat, weight, valid


def _check_grids(source_dims, grids: GridSet, target_dims) -> None:
    if grids.spatial != tuple(source_dims):
        raise ShapeMismatchError(
            f"grid spatial extents {grids.spatial} must equal source spatial "
            f"extents {tuple(source_dims)}"
        )
    if grids.coord_dims != len(target_dims):
        raise ShapeMismatchError(
            f"grid Q={grids.coord_dims} does not match target rank {len(target_dims)}"
        )
    if not 1 <= len(target_dims) <= MAX_TARGET_RANK:
        raise ShapeMismatchError(f"target rank must be 1..{MAX_TARGET_RANK}")
    if any(int(d) < 1 for d in target_dims):
        raise InvalidArgumentError(f"target extents must be >= 1, got {tuple(target_dims)}")


def accumulate(
    source: FeatureMap, grids: GridSet, kernel: Kernel, target_dims
) -> FeatureMap:
    """Forward directed accumulation of a (C,H,W) source into target_dims."""
    target_dims = tuple(int(d) for d in target_dims)
    if len(source.dims) != 2:
        raise ShapeMismatchError(f"source must be (C,H,W), got dims {source.dims}")
    _check_grids(source.dims, grids, target_dims)

    c = source.channels
    u = source.data.reshape(c, -1)
    out = np.zeros((c, int(np.prod(target_dims))))
    for grid in grids:
        for flat, weight, valid in _corner_terms(grid.coords, target_dims, kernel):
            sel = valid.ravel()
            idx = flat.ravel()[sel]
            wv = weight.ravel()[sel]
            for ch in range(c):
                np.add.at(out[ch], idx, u[ch][sel] * wv)
    return FeatureMap(out.reshape((c,) + target_dims))


def accumulate_backward(
    upstream: FeatureMap, grids: GridSet, kernel: Kernel, source_dims
) -> FeatureMap:
    """Gradient with respect to the source: a grid-sample-like read of the
    upstream tensor at each source pixel's target coordinates, summed over
    grids."""
    source_dims = tuple(int(d) for d in source_dims)
    _check_grids(source_dims, grids, upstream.dims)

    c = upstream.channels
    a = upstream.data.reshape(c, -1)
    grad = np.zeros((c,) + source_dims)
    for grid in grids:
        for flat, weight, valid in _corner_terms(grid.coords, upstream.dims, kernel):
            vals = a[:, flat] * weight
            grad = grad + np.where(valid, vals, 0.0)
    return FeatureMap(grad)


def adjoint_gap(
    source: FeatureMap,
    probe: FeatureMap,
    grids: GridSet,
    kernel: Kernel,
    eps: float = 1e-30,
) -> float:
    """Relative discrepancy of <forward(U), A> versus <U, backward(A)>."""
    if probe.channels != source.channels:
        raise ShapeMismatchError("probe channel count must match source")
    fwd = accumulate(source, grids, kernel, probe.dims)
    if fwd.data.shape != probe.data.shape:
        raise ShapeMismatchError("probe must be shaped like the forward output")
    lhs = deterministic_sum(fwd.data * probe.data)
    bwd = accumulate_backward(probe, grids, kernel, source.dims)
    rhs = deterministic_sum(source.data * bwd.data)
    return abs(lhs - rhs) / (abs(lhs) + eps)
