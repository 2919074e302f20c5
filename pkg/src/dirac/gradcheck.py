"""Central finite-difference checks of the analytic backward passes.

The scalar loss is an inner product of the forward output with a fixed
random probe, so the analytic gradient is exactly the backward pass applied
to that probe.  Coordinates are drawn away from integer kink points of the
bilinear kernel so the central difference is valid.
"""

from __future__ import annotations

import numpy as np

from .accumulator import accumulate, accumulate_backward, adjoint_gap
from .kernels import Kernel
from .sampling import grid_sample, grid_sample_backward
from .tensors import FeatureMap, GridSet, SamplingGrid


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def _smooth_coords(rng, shape, extent: float) -> np.ndarray:
    """In-bounds coordinates with fractional parts in [0.2, 0.8]."""
    base = rng.integers(0, max(1, int(extent) - 1), size=shape).astype(np.float64)
    frac = rng.uniform(0.2, 0.8, size=shape)
    return np.minimum(base + frac, extent - 1.0)


def _max_rel_error(analytic: np.ndarray, numeric: np.ndarray) -> float:
    scale = max(float(np.max(np.abs(analytic))), 1e-12)
    return float(np.max(np.abs(analytic - numeric))) / scale


def check_accumulate_grad(
    size: int = 6, n_grids: int = 3, kernel: Kernel = Kernel.BILINEAR,
    seed: int = 0, h: float = 1e-5,
) -> float:
    """Max relative error of accumulate_backward vs central differences."""
    rng = _rng(seed)
    u = rng.standard_normal((1, size, size))
    grids = GridSet(
        [
            SamplingGrid(np.stack([_smooth_coords(rng, (size, size), size) for _ in range(2)]))
            for _ in range(n_grids)
        ]
    )
    probe = rng.standard_normal((1, size, size))

    def loss(arr):
        v = accumulate(FeatureMap(arr), grids, kernel, (size, size))
        return float(np.sum(v.data * probe))

    analytic = accumulate_backward(FeatureMap(probe), grids, kernel, (size, size)).data
    numeric = np.zeros_like(u)
    for idx in np.ndindex(u.shape):
        up, dn = u.copy(), u.copy()
        up[idx] += h
        dn[idx] -= h
        numeric[idx] = (loss(up) - loss(dn)) / (2.0 * h)
    return _max_rel_error(analytic, numeric)


def check_grid_sample_grads(
    size: int = 5, kernel: Kernel = Kernel.BILINEAR, seed: int = 0, h: float = 1e-5
) -> tuple[float, float]:
    """Max relative errors of (grad_source, grad_grid) vs central differences."""
    rng = _rng(seed)
    u = rng.standard_normal((1, size, size))
    coords = np.stack([_smooth_coords(rng, (size, size), size) for _ in range(2)])
    probe = rng.standard_normal((1, size, size))
    grid = SamplingGrid(coords)

    def loss(arr, crd):
        v = grid_sample(FeatureMap(arr), SamplingGrid(crd), kernel)
        return float(np.sum(v.data * probe))

    grad_src, grad_grid = grid_sample_backward(
        FeatureMap(probe), FeatureMap(u), grid, kernel
    )

    num_src = np.zeros_like(u)
    for idx in np.ndindex(u.shape):
        up, dn = u.copy(), u.copy()
        up[idx] += h
        dn[idx] -= h
        num_src[idx] = (loss(up, coords) - loss(dn, coords)) / (2.0 * h)
    err_src = _max_rel_error(grad_src.data, num_src)

    if kernel is Kernel.INTEGER:
        err_grid = float(np.max(np.abs(grad_grid.coords)))
    else:
        num_grid = np.zeros_like(coords)
        for idx in np.ndindex(coords.shape):
            up, dn = coords.copy(), coords.copy()
            up[idx] += h
            dn[idx] -= h
            num_grid[idx] = (loss(u, up) - loss(u, dn)) / (2.0 * h)
        err_grid = _max_rel_error(grad_grid.coords, num_grid)
    return err_src, err_grid


def gradcheck_report(
    size: int = 6, kernel: Kernel = Kernel.BILINEAR, seed: int = 0,
    n_grids: int = 3, h: float = 1e-5,
) -> dict:
    """All gradient and adjoint checks in one dict (CLI payload)."""
    rng = _rng(seed ^ 0x5EED)
    u = FeatureMap(rng.standard_normal((1, size, size)))
    probe = FeatureMap(rng.standard_normal((1, size, size)))
    grids = GridSet(
        [
            SamplingGrid(np.stack([_smooth_coords(rng, (size, size), size) for _ in range(2)]))
            for _ in range(n_grids)
        ]
    )
    err_acc = check_accumulate_grad(size, n_grids, kernel, seed, h)
    err_src, err_grid = check_grid_sample_grads(size, kernel, seed, h)
    return {
        "kernel": kernel.value,
        "size": size,
        "accumulate_grad_source_error": err_acc,
        "grid_sample_grad_source_error": err_src,
        "grid_sample_grad_grid_error": err_grid,
        "adjoint_gap": adjoint_gap(u, probe, grids, kernel),
    }
