"""Synthetic phantoms: ring (rim+) and smooth-disk (rim-) lesion patches,
the susceptibility-to-field forward model, and the augmentation pipeline.

All generators are pure functions of (spec, seed); the RNG is the Philox
counter-based generator so streams are reproducible bit-exactly and portable
across platforms.

Geometry conventions: 2D patches are (H, W) with center (x, y) in row/column
order; 3D patches are (D, H, W) with D the axial axis and center (z, x, y).
The axial axis is scaled by the voxel aspect ratio (3.0 / 0.75 = 4) when
computing radial distance, matching strongly anisotropic acquisition.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .errors import InvalidArgumentError, ShapeMismatchError
from .tensors import FeatureMap

AXIAL_ASPECT = 4.0  # 3.0 mm slices over 0.75 mm in-plane voxels

DEFAULT_PATCH_DIMS = (8, 32, 32)  # (D, H, W); in-plane 32x32, 8 axial slices


class LesionKind(enum.Enum):
    RIM_POSITIVE = "rim+"
    RIM_NEGATIVE = "rim-"


@dataclass(frozen=True)
class LesionSpec:
    kind: LesionKind
    center: tuple[float, ...]
    radius: float
    rim_width: float
    rim_intensity: float
    interior_intensity: float
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if not 5.0 <= self.radius <= 15.0:
            raise InvalidArgumentError(f"radius must lie in [5, 15], got {self.radius}")
        if not self.radius > self.rim_width > 0:
            raise InvalidArgumentError("require radius > rim_width > 0")
        if self.kind is LesionKind.RIM_POSITIVE and not (
            self.rim_intensity > self.interior_intensity
        ):
            raise InvalidArgumentError("rim+ requires rim_intensity > interior_intensity")
        if self.noise_sigma < 0:
            raise InvalidArgumentError("noise_sigma must be non-negative")
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(seed))


def _radial_distance(dims, center) -> np.ndarray:
    axes = [np.arange(d, dtype=np.float64) for d in dims]
    mesh = np.meshgrid(*axes, indexing="ij")
    if len(dims) == 3:
        dz = (mesh[0] - center[0]) * AXIAL_ASPECT
        dx = mesh[1] - center[1]
        dy = mesh[2] - center[2]
        return np.sqrt(dz * dz + dx * dx + dy * dy)
    dx = mesh[0] - center[0]
    dy = mesh[1] - center[1]
    return np.sqrt(dx * dx + dy * dy)


def generate_lesion(spec: LesionSpec, dims) -> tuple[FeatureMap, LesionSpec]:
    """Render a lesion patch of shape (1, *dims); deterministic per seed.

    rim+: an annulus of rim_intensity where |r - radius| <= rim_width/2 over
    an interior_intensity disk (sharp edges, strong radial gradients).
    rim-: a smooth cosine dome of the same footprint with no hyperintense
    annulus and correspondingly weak gradients.
    """
    dims = tuple(int(d) for d in dims)
    if len(dims) != len(spec.center):
        raise ShapeMismatchError(f"center {spec.center} does not match dims {dims}")
    if len(dims) not in (2, 3):
        raise InvalidArgumentError("dims must have 2 or 3 entries")

    half = spec.rim_width / 2.0
    extent = spec.radius + half
    # 2-pixel in-plane margin; the axial axis may crop the lesion (patches
    # are much shallower than they are wide).
    for d, c in zip(dims[-2:], spec.center[-2:]):
        if c - extent < 2.0 or c + extent > d - 3.0:
            raise InvalidArgumentError(
                f"lesion (center {spec.center}, reach {extent:.1f}) does not fit "
                f"inside dims {dims} with a 2-pixel margin"
            )
    if len(dims) == 3 and not 0.0 <= spec.center[0] <= dims[0] - 1:
        raise InvalidArgumentError(f"axial center {spec.center[0]} outside dims {dims}")

    r = _radial_distance(dims, spec.center)
    if spec.kind is LesionKind.RIM_POSITIVE:
        patch = np.where(r < spec.radius - half, spec.interior_intensity, 0.0)
        patch = np.where(np.abs(r - spec.radius) <= half, spec.rim_intensity, patch)
    else:
        outer = spec.radius + half
        dome = np.cos(0.5 * math.pi * np.clip(r / outer, 0.0, 1.0)) ** 2
        patch = spec.interior_intensity * dome

    if spec.noise_sigma > 0:
        patch = patch + spec.noise_sigma * _rng(spec.seed).standard_normal(dims)
    return FeatureMap(patch[np.newaxis]), spec


@dataclass(frozen=True)
class QsmPhantom:
    """Susceptibility map chi and the magnetic field it induces."""

    chi: FeatureMap
    field: FeatureMap
    noise_sigma: float


def dipole_kernel(dims) -> np.ndarray:
    """Unit dipole kernel in k-space: 1/3 - kz^2/|k|^2 with the DC term
    zeroed; z is the leading (axial) spatial axis."""
    dims = tuple(int(d) for d in dims)
    kz, kx, ky = np.meshgrid(*[np.fft.fftfreq(d) for d in dims], indexing="ij")
    k2 = kz * kz + kx * kx + ky * ky
    with np.errstate(divide="ignore", invalid="ignore"):
        d = 1.0 / 3.0 - (kz * kz) / k2
    d[k2 == 0.0] = 0.0
    return d


def qsm_forward(chi: FeatureMap, noise_sigma: float = 0.0, seed: int = 0) -> QsmPhantom:
    """Field b = chi convolved with the dipole kernel, plus Gaussian noise.

    The convolution is computed by frequency-domain multiplication, i.e. it
    is circular; the DC response is zeroed by convention.
    """
    if len(chi.dims) != 3:
        raise InvalidArgumentError(f"qsm_forward needs a 3D-spatial map, got dims {chi.dims}")
    if noise_sigma < 0:
        raise InvalidArgumentError("noise_sigma must be non-negative")
    d = dipole_kernel(chi.dims)
    b = np.stack(
        [np.real(np.fft.ifftn(np.fft.fftn(ch) * d)) for ch in chi.data]
    )
    if noise_sigma > 0:
        b = b + noise_sigma * _rng(seed).standard_normal(b.shape)
    return QsmPhantom(chi=chi, field=FeatureMap(b), noise_sigma=float(noise_sigma))


@dataclass(frozen=True)
class AugmentConfig:
    """Augmentation parameters; sigma pairs are (mean, std) of a normal
    truncated at 0, and blur kernel radius is floor(4*sigma + 0.5)."""

    flip: bool = True
    scale_range: tuple[float, float] = (0.95, 1.05)
    rotation_deg_range: tuple[float, float] = (-5.0, 5.0)
    blur_sigma_inplane: tuple[float, float] = (0.1, 0.95)
    blur_sigma_axial: tuple[float, float] = (0.03, 0.3)
    voxel_size: tuple[float, float, float] = (0.75, 0.75, 3.0)
    seed: int = 0


def blur_radius(sigma: float) -> int:
    return int(math.floor(4.0 * sigma + 0.5))


def _recenter(vol: np.ndarray) -> np.ndarray:
    mass = np.abs(vol).sum(axis=0)
    total = mass.sum()
    if total == 0.0:
        return vol
    com = ndimage.center_of_mass(mass)
    center = [(d - 1) / 2.0 for d in mass.shape]
    shift = [c - m for c, m in zip(center, com)]
    return np.stack([ndimage.shift(ch, shift, order=1, mode="constant") for ch in vol])


def augment(patch: FeatureMap, cfg: AugmentConfig) -> FeatureMap:
    """Recenter, randomly flip, apply a scaled in-plane rotation (trilinear
    resampling), and blur anisotropically.  Deterministic per cfg.seed.

    Draw order (fixed for reproducibility): flip axis (only when flip is
    enabled), scale, rotation, sigma_coronal, sigma_sagittal, sigma_axial.
    """
    if len(patch.dims) != 3:
        raise ShapeMismatchError(f"augment needs a (C,D,H,W) patch, got dims {patch.dims}")
    rng = _rng(cfg.seed)
    vol = _recenter(patch.data)

    if cfg.flip:
        axis = int(rng.integers(0, 3))
        vol = np.flip(vol, axis=axis + 1).copy()

    scale = float(rng.uniform(*cfg.scale_range))
    theta = math.radians(float(rng.uniform(*cfg.rotation_deg_range)))
    if scale != 1.0 or theta != 0.0:
        # Output-to-input map: inverse of (scale, then in-plane rotation),
        # about the patch center.  Axial axis only scales.
        cos_t, sin_t = math.cos(theta), math.sin(theta)
        inv = np.array(
            [
                [1.0 / scale, 0.0, 0.0],
                [0.0, cos_t / scale, sin_t / scale],
                [0.0, -sin_t / scale, cos_t / scale],
            ]
        )
        center = np.array([(d - 1) / 2.0 for d in patch.dims])
        offset = center - inv @ center
        vol = np.stack(
            [
                ndimage.affine_transform(ch, inv, offset=offset, order=1, mode="constant")
                for ch in vol
            ]
        )

    sig_h = max(0.0, float(rng.normal(*cfg.blur_sigma_inplane)))
    sig_w = max(0.0, float(rng.normal(*cfg.blur_sigma_inplane)))
    sig_z = max(0.0, float(rng.normal(*cfg.blur_sigma_axial)))
    for axis, sigma in ((1, sig_z), (2, sig_h), (3, sig_w)):
        radius = blur_radius(sigma)
        if sigma > 0 and radius >= 1:
            vol = ndimage.gaussian_filter1d(
                vol, sigma=sigma, axis=axis, mode="nearest", radius=radius
            )
    return FeatureMap(vol)
