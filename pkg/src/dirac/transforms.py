"""Classical accumulator-space transforms built on the shared operators.

Conventions (used by this module and its test oracles alike):
  - "x" is the row axis (extent H), "y" the column axis (extent W).
  - Projection coordinate at angle a: t = x*sin(a) + y*cos(a), so angle 0
    projects onto columns and pi/2 onto rows.
  - Line accumulator: rho = x*cos(theta) + y*sin(theta) with
    theta in [0, pi) and rho binned uniformly over [-diag, +diag],
    diag = sqrt((H-1)^2 + (W-1)^2).
"""

from __future__ import annotations

import math

import numpy as np

from .errors import InvalidArgumentError, ShapeMismatchError
from .accumulator import accumulate
from .kernels import Kernel
from .sampling import grid_sample
from .tensors import FeatureMap, GridSet, SamplingGrid, mesh_grid


def radon_projection(source: FeatureMap, angle: float, num_bins: int) -> FeatureMap:
    """Project a 2D map onto `num_bins` bins along direction `angle`.

    Each pixel's value is voted (integer kernel) into the bin of its rotated
    coordinate; at angles 0 and pi/2 this reduces to exact column and row
    sums when num_bins matches the corresponding extent.
    """
    if len(source.dims) != 2:
        raise ShapeMismatchError(f"radon_projection needs a 2D source, got {source.dims}")
    if int(num_bins) < 1:
        raise InvalidArgumentError("num_bins must be >= 1")
    if not math.isfinite(angle):
        raise InvalidArgumentError("angle must be finite")
    num_bins = int(num_bins)
    h, w = source.dims
    mesh = mesh_grid((h, w)).coords
    t = mesh[0] * math.sin(angle) + mesh[1] * math.cos(angle)
    # Corner extrema give the exact coordinate range at this angle.
    corners = [
        x * math.sin(angle) + y * math.cos(angle)
        for x in (0.0, h - 1.0)
        for y in (0.0, w - 1.0)
    ]
    tmin, tmax = min(corners), max(corners)
    if tmax > tmin and num_bins > 1:
        bins = (t - tmin) * ((num_bins - 1) / (tmax - tmin))
    else:
        bins = np.zeros_like(t)
    grids = GridSet([SamplingGrid(bins[np.newaxis])])
    return accumulate(source, grids, Kernel.INTEGER, (num_bins,))


def hough_lines(edge_map: FeatureMap, num_rho: int, num_theta: int) -> FeatureMap:
    """Vote edge values into a (rho, theta) line accumulator (integer kernel)."""
    if len(edge_map.dims) != 2:
        raise ShapeMismatchError(f"hough_lines needs a 2D edge map, got {edge_map.dims}")
    if int(num_rho) < 1 or int(num_theta) < 1:
        raise InvalidArgumentError("num_rho and num_theta must be >= 1")
    if np.any(edge_map.data < 0):
        raise InvalidArgumentError("edge map must be non-negative")
    num_rho, num_theta = int(num_rho), int(num_theta)
    h, w = edge_map.dims
    diag = math.hypot(h - 1.0, w - 1.0)
    mesh = mesh_grid((h, w)).coords
    grids = []
    for ti in range(num_theta):
        theta = ti * math.pi / num_theta
        rho = mesh[0] * math.cos(theta) + mesh[1] * math.sin(theta)
        if num_rho > 1 and diag > 0:
            rho_bin = (rho + diag) * ((num_rho - 1) / (2.0 * diag))
        else:
            rho_bin = np.zeros_like(rho)
        grids.append(SamplingGrid(np.stack([rho_bin, np.full_like(rho_bin, float(ti))])))
    return accumulate(edge_map, GridSet(grids), Kernel.INTEGER, (num_rho, num_theta))


def polar_resample(
    source: FeatureMap, center: tuple[float, float], num_r: int, num_phi: int
) -> FeatureMap:
    """Bilinear read of the source on a polar lattice around `center`.

    Output cell (r, phi) reads the source at center + r*(cos phi, sin phi)
    with r in whole pixels (r = row index) and phi = 2*pi*col/num_phi.
    """
    if len(source.dims) != 2:
        raise ShapeMismatchError(f"polar_resample needs a 2D source, got {source.dims}")
    if int(num_r) < 1 or int(num_phi) < 1:
        raise InvalidArgumentError("num_r and num_phi must be >= 1")
    h, w = source.dims
    cx, cy = float(center[0]), float(center[1])
    if not (0.0 <= cx <= h - 1 and 0.0 <= cy <= w - 1):
        raise InvalidArgumentError(f"center {center} outside source bounds {source.dims}")
    r = np.arange(int(num_r), dtype=np.float64)[:, np.newaxis]
    phi = np.arange(int(num_phi), dtype=np.float64)[np.newaxis, :] * (2.0 * math.pi / int(num_phi))
    gx = cx + r * np.cos(phi)
    gy = cy + r * np.sin(phi)
    grid = SamplingGrid(np.stack(np.broadcast_arrays(gx, gy)))
    return grid_sample(source, grid, Kernel.BILINEAR)
