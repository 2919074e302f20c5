"""Grid sampling: the read-side dual of directed accumulation.

The output value at target position (i, j) is a kernel-weighted double sum
over the source:

    V[c,i,j] = sum_n sum_m U[c,n,m] * K(Gx[i,j], n) * K(Gy[i,j], m)

The grid's spatial extents define the output size here; coordinates falling
fully outside the source bounds contribute zero (zero padding).
"""

from __future__ import annotations

import numpy as np

from .errors import ShapeMismatchError
from .kernels import Kernel, kernel_derivative, kernel_eval
from .tensors import FeatureMap, SamplingGrid


def _check_2d(source: FeatureMap, grid: SamplingGrid) -> None:
    if len(source.dims) != 2:
        raise ShapeMismatchError(f"grid_sample needs a (C,H,W) source, got dims {source.dims}")
    if grid.coord_dims != 2:
        raise ShapeMismatchError(f"grid_sample needs Q=2 coordinates, got Q={grid.coord_dims}")


def _bilinear_corners(g):
    """Both integer neighbors of each coordinate (floor and floor+1)."""
    lo = np.floor(g)
    return lo, lo + 1.0


def grid_sample(source: FeatureMap, grid: SamplingGrid, kernel: Kernel) -> FeatureMap:
    """Read source values at grid coordinates; output shape (C, *grid.spatial)."""
    _check_2d(source, grid)
    u = source.data
    _, h, w = u.shape
    gx, gy = grid.coords
    out = np.zeros((source.channels,) + grid.spatial)

    if kernel is Kernel.INTEGER:
        ix = np.floor(gx + 0.5).astype(np.int64)
        iy = np.floor(gy + 0.5).astype(np.int64)
        valid = (ix >= 0) & (ix < h) & (iy >= 0) & (iy < w)
        vals = u[:, np.clip(ix, 0, h - 1), np.clip(iy, 0, w - 1)]
        out = np.where(valid, vals, 0.0)
    else:
        for nx in _bilinear_corners(gx):
            wx = kernel_eval(kernel, gx, nx)
            okx = (nx >= 0) & (nx < h)
            for ny in _bilinear_corners(gy):
                wy = kernel_eval(kernel, gy, ny)
                ok = okx & (ny >= 0) & (ny < w)
                weight = np.where(ok, wx * wy, 0.0)
                vals = u[
                    :,
                    np.clip(nx.astype(np.int64), 0, h - 1),
                    np.clip(ny.astype(np.int64), 0, w - 1),
                ]
                out = out + vals * weight
    return FeatureMap(out)


def grid_sample_backward(
    upstream: FeatureMap,
    source: FeatureMap,
    grid: SamplingGrid,
    kernel: Kernel,
) -> tuple[FeatureMap, SamplingGrid]:
    """Gradients of a grid_sample output with respect to source and grid.

    grad_source scatters the upstream values back through the same kernel
    weights; grad_grid applies the product rule with the kernel derivative
    (identically zero for the integer kernel).
    """
    _check_2d(source, grid)
    if upstream.channels != source.channels or upstream.dims != grid.spatial:
        raise ShapeMismatchError(
            f"upstream shape {upstream.data.shape} does not match "
            f"(C={source.channels}, {grid.spatial})"
        )
    u = source.data
    c, h, w = u.shape
    gx, gy = grid.coords
    up = upstream.data

    grad_source = np.zeros_like(u)
    grad_gx = np.zeros_like(gx)
    grad_gy = np.zeros_like(gy)

    if kernel is Kernel.INTEGER:
        ix = np.floor(gx + 0.5).astype(np.int64)
        iy = np.floor(gy + 0.5).astype(np.int64)
        valid = (ix >= 0) & (ix < h) & (iy >= 0) & (iy < w)
        flat = ix[valid] * w + iy[valid]
        gs = grad_source.reshape(c, -1)
        for ch in range(c):
            np.add.at(gs[ch], flat, up[ch][valid])
        grad_source = gs.reshape(u.shape)
    else:
        for nx in _bilinear_corners(gx):
            wx = kernel_eval(kernel, gx, nx)
            dwx = kernel_derivative(kernel, gx, nx)
            okx = (nx >= 0) & (nx < h)
            for ny in _bilinear_corners(gy):
                wy = kernel_eval(kernel, gy, ny)
                dwy = kernel_derivative(kernel, gy, ny)
                ok = okx & (ny >= 0) & (ny < w)
                ixc = np.clip(nx.astype(np.int64), 0, h - 1)
                iyc = np.clip(ny.astype(np.int64), 0, w - 1)
                vals = u[:, ixc, iyc]  # (C, H', W')

                weight = np.where(ok, wx * wy, 0.0)
                flat = (ixc * w + iyc)[ok]
                gs = grad_source.reshape(c, -1)
                for ch in range(c):
                    np.add.at(gs[ch], flat, (up[ch] * weight)[ok])
                grad_source = gs.reshape(u.shape)

                upv = np.sum(up * vals, axis=0)
                grad_gx += np.where(ok, upv * dwx * wy, 0.0)
                grad_gy += np.where(ok, upv * wx * dwy, 0.0)

    return FeatureMap(grad_source), SamplingGrid(np.stack([grad_gx, grad_gy]))
