"""Rim parameterization: vote feature and gradient-magnitude values along
each pixel's unit gradient direction at one or more radii.

For a source map U, Sobel filtering yields gradients (Ux, Uy), their
magnitude S = sqrt(Ux^2 + Uy^2), and unit gradients Ux/(S+eps), Uy/(S+eps).
One sampling grid per radius k shifts every pixel k steps along its unit
gradient:

    Gx[k] = k * unit_x + Mx,   Gy[k] = k * unit_y + My

Accumulating U and S through these grids with the integer kernel produces
v_u and v_s.  On a ring-like structure the shifted votes from the edge
intersect at the ring center, so v_s peaks there.

Sign convention: grids shift along +unit-gradient, i.e. toward increasing
intensity.  For a bright ring on a dark background the outer-edge gradients
point inward, so their votes land at the center:

        dark | RING | dark            outer edge: grad -> center
         ... o->   <-o ...            inner edge: grad -> away

Volumes are processed slice-wise along the leading (axial) spatial axis,
since only in-plane ring structure is of interest.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError, ShapeMismatchError
from .accumulator import accumulate
from .kernels import Kernel
from .tensors import FeatureMap, GridSet, SamplingGrid, mesh_grid

DEFAULT_RADII = (5, 7, 9, 11, 13, 15)

# Unnormalized 3x3 Sobel pair; row axis is "x", column axis is "y".
_SOBEL_X = np.array([[-1.0, -2.0, -1.0], [0.0, 0.0, 0.0], [1.0, 2.0, 1.0]])
_SOBEL_Y = _SOBEL_X.T


@dataclass(frozen=True)
class RimConfig:
    """Configuration of the rim accumulation transform.

    radii: distinct ascending shift distances in pixels.  full_range ignores
    `radii` and uses 1..max(H, W) of the source instead.  target_dims
    defaults to the source spatial extents.  per_radius_channels keeps one
    output channel per radius instead of summing over the grid set.
    """

    radii: tuple[int, ...] = DEFAULT_RADII
    epsilon: float = 1e-8
    target_dims: tuple[int, int] | None = None
    full_range: bool = False
    per_radius_channels: bool = False

    def __post_init__(self):
        radii = tuple(int(k) for k in self.radii)
        if not radii:
            raise InvalidArgumentError("radii must be non-empty")
        if any(k <= 0 for k in radii):
            raise InvalidArgumentError(f"radii must be positive, got {radii}")
        if len(set(radii)) != len(radii) or list(radii) != sorted(radii):
            raise InvalidArgumentError(f"radii must be distinct and ascending, got {radii}")
        if not self.epsilon > 0:
            raise InvalidArgumentError("epsilon must be positive")
        object.__setattr__(self, "radii", radii)

    def resolve_radii(self, dims) -> tuple[int, ...]:
        if self.full_range:
            return tuple(range(1, max(dims) + 1))
        return self.radii


@dataclass(frozen=True)
class GradientField:
    """Sobel gradients of a map plus magnitude and unit-gradient fields."""

    gx: FeatureMap
    gy: FeatureMap
    magnitude: FeatureMap
    unit_x: FeatureMap
    unit_y: FeatureMap


def _sobel2d(img: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """3x3 cross-correlation with replicate border padding."""
    p = np.pad(img, 1, mode="edge")
    out = np.zeros_like(img)
    for di in range(3):
        for dj in range(3):
            k = kernel[di, dj]
            if k != 0.0:
                out += k * p[di : di + img.shape[0], dj : dj + img.shape[1]]
    return out


def sobel_gradients(source: FeatureMap, epsilon: float = 1e-8) -> GradientField:
    """Per-channel Sobel gradients, magnitude, and unit-gradient fields."""
    if len(source.dims) != 2:
        raise ShapeMismatchError(f"sobel_gradients needs a 2D-spatial map, got {source.dims}")
    if min(source.dims) < 3:
        raise InvalidArgumentError(f"spatial extents must be >= 3, got {source.dims}")
    gx = np.stack([_sobel2d(ch, _SOBEL_X) for ch in source.data])
    gy = np.stack([_sobel2d(ch, _SOBEL_Y) for ch in source.data])
    mag = np.sqrt(gx * gx + gy * gy)
    ux = gx / (mag + epsilon)
    uy = gy / (mag + epsilon)
    return GradientField(
        gx=FeatureMap(gx),
        gy=FeatureMap(gy),
        magnitude=FeatureMap(mag),
        unit_x=FeatureMap(ux),
        unit_y=FeatureMap(uy),
    )


def build_rim_grids(field: GradientField, radii) -> GridSet:
    """One grid per radius k: every pixel shifted k steps along its unit
    gradient (identity mesh plus k times the unit-gradient field)."""
    radii = tuple(int(k) for k in radii)
    if not radii:
        raise InvalidArgumentError("radii must be non-empty")
    if any(k <= 0 for k in radii):
        raise InvalidArgumentError(f"radii must be positive, got {radii}")
    if field.unit_x.channels != 1:
        raise ShapeMismatchError("build_rim_grids expects a single-channel gradient field")
    ux = field.unit_x.data[0]
    uy = field.unit_y.data[0]
    mesh = mesh_grid(ux.shape).coords
    grids = []
    for k in radii:
        grids.append(SamplingGrid(np.stack([k * ux + mesh[0], k * uy + mesh[1]])))
    return GridSet(grids)


def _channel(fmap: FeatureMap, c: int) -> FeatureMap:
    return FeatureMap(fmap.data[c : c + 1])


def rim_transform(source: FeatureMap, cfg: RimConfig) -> tuple[FeatureMap, FeatureMap]:
    """Accumulate feature values (v_u) and gradient magnitudes (v_s) along
    unit-gradient directions; integer kernel throughout."""
    if len(source.dims) != 2:
        raise ShapeMismatchError(f"rim_transform needs a 2D-spatial source, got {source.dims}")
    target = tuple(cfg.target_dims) if cfg.target_dims is not None else source.dims
    radii = cfg.resolve_radii(source.dims)

    vu_parts, vs_parts = [], []
    for c in range(source.channels):
        u_c = _channel(source, c)
        field = sobel_gradients(u_c, cfg.epsilon)
        if cfg.per_radius_channels:
            for k in radii:
                grids = build_rim_grids(field, (k,))
                vu_parts.append(accumulate(u_c, grids, Kernel.INTEGER, target).data[0])
                vs_parts.append(
                    accumulate(field.magnitude, grids, Kernel.INTEGER, target).data[0]
                )
        else:
            grids = build_rim_grids(field, radii)
            vu_parts.append(accumulate(u_c, grids, Kernel.INTEGER, target).data[0])
            vs_parts.append(accumulate(field.magnitude, grids, Kernel.INTEGER, target).data[0])
    return FeatureMap(np.stack(vu_parts)), FeatureMap(np.stack(vs_parts))


def rim_transform_volume(
    source: FeatureMap, cfg: RimConfig
) -> tuple[FeatureMap, FeatureMap]:
    """Apply rim_transform independently to each axial slice of a (C,D,H,W)
    volume and restack."""
    if len(source.dims) != 3:
        raise ShapeMismatchError(f"volume transform needs (C,D,H,W), got dims {source.dims}")
    vu_slices, vs_slices = [], []
    for d in range(source.dims[0]):
        vu, vs = rim_transform(FeatureMap(source.data[:, d]), cfg)
        vu_slices.append(vu.data)
        vs_slices.append(vs.data)
    vu = np.stack(vu_slices, axis=1)
    vs = np.stack(vs_slices, axis=1)
    return FeatureMap(vu), FeatureMap(vs)
