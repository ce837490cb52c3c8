"""Transition-region quality metrics.

Geometric smoothness: a transition's cells are stacked into an
n x 50 x 50 volume (stack axis = z) and filtered with three 3x3x3
Sobel kernels (derivative [-1,0,1] along one axis, smoothing [1,2,1]
along the other two), valid boundary handling, giving gradient volumes
of shape (n-2) x 48 x 48. For each consecutive z-slice pair the RMSE of
the gradient difference is taken per direction, the three direction
RMSEs are summed and normalized by 3*rmse_max, the n-3 pair values are
averaged, and the score is C_s = (1 - mean) * 100. rmse_max = 32 is the
largest per-element gradient change a [0,1]-valued volume can produce
under this kernel (twice the sum of its positive coefficients).

Stiffness continuity: tensors are min-max normalized to flat 9-vectors
in [0,1] against training-set extrema, consecutive pairs are compared
by RMSE over the 9 components, the n-1 pair values are averaged, and
C_K = (1 - mean) * 100.

Both metrics live in [0, 100]; higher is smoother.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .homogenize import (
    DEFAULT_MATERIAL,
    HomogenizationError,
    MaterialModel,
    StiffnessStats,
    homogenize_cell,
    normalize_stiffness,
)


def _antisymmetry_axis(kernel: np.ndarray) -> int:
    for axis in range(3):
        if np.array_equal(np.flip(kernel, axis=axis), -kernel):
            return axis
    raise ValueError("kernel is not antisymmetric along any axis")


@dataclass(frozen=True)
class GradientKernel:
    """Three antisymmetric zero-sum 3x3x3 derivative kernels (x, y, z)."""

    kx: np.ndarray
    ky: np.ndarray
    kz: np.ndarray
    rmse_max: float

    def __post_init__(self):
        for k in (self.kx, self.ky, self.kz):
            if k.shape != (3, 3, 3):
                raise ValueError(f"kernel must be 3x3x3, got {k.shape}")
            _antisymmetry_axis(k)  # implies the coefficients sum to zero
        if self.rmse_max <= 0.0:
            raise ValueError("rmse_max must be positive")

    @classmethod
    def sobel(cls) -> "GradientKernel":
        s = np.array([1.0, 2.0, 1.0])
        d = np.array([-1.0, 0.0, 1.0])
        kx = np.einsum("a,b,c->abc", s, s, d)
        ky = np.einsum("a,b,c->abc", s, d, s)
        kz = np.einsum("a,b,c->abc", d, s, s)
        return cls(kx=kx, ky=ky, kz=kz, rmse_max=2.0 * kx[kx > 0].sum())


SOBEL = GradientKernel.sobel()


def _correlate_valid(volume: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """3D correlation keeping only fully covered voxels.

    Mirrored taps across the kernel's antisymmetry axis are paired as
    w * (V_plus - V_minus), so constant volumes cancel exactly instead
    of leaving round-off residue.
    """
    axis = _antisymmetry_axis(kernel)
    nz, ny, nx = (s - 2 for s in volume.shape)
    out = np.zeros((nz, ny, nx))
    for off in product(range(3), repeat=3):
        if off[axis] != 2:
            continue
        w = kernel[off]
        if w == 0.0:
            continue
        mirror = list(off)
        mirror[axis] = 0
        a, b, c = off
        am, bm, cm = mirror
        out += w * (
            volume[a : a + nz, b : b + ny, c : c + nx]
            - volume[am : am + nz, bm : bm + ny, cm : cm + nx]
        )
    return out


def _as_volume(cells) -> np.ndarray:
    vol = np.stack([np.asarray(c, dtype=np.float64) for c in cells])
    if vol.shape[1:] != (50, 50):
        raise ValueError(f"cells must be 50x50, got {vol.shape[1:]}")
    if vol.min() < 0.0 or vol.max() > 1.0:
        raise ValueError("cell densities must lie in [0, 1]")
    return vol


def gradient_volumes(cells, kernel: GradientKernel = SOBEL):
    """(G_x, G_y, G_z) gradient volumes of a cell stack, each (n-2, 48, 48)."""
    vol = _as_volume(cells)
    if vol.shape[0] < 3:
        raise ValueError(f"need at least 3 cells for gradients, got {vol.shape[0]}")
    return (
        _correlate_valid(vol, kernel.kx),
        _correlate_valid(vol, kernel.ky),
        _correlate_valid(vol, kernel.kz),
    )


@dataclass
class SmoothnessResult:
    pair_rmse: np.ndarray  # (n-3,) normalized per-pair values in [0,1]
    mean_rmse: float
    c_s: float


def geometric_smoothness(cells, kernel: GradientKernel = SOBEL) -> SmoothnessResult:
    """Geometric smoothness C_s of an ordered cell sequence (needs n >= 4)."""
    vol = _as_volume(cells)
    n = vol.shape[0]
    if n < 4:
        raise ValueError(f"geometric smoothness needs at least 4 cells, got {n}")
    gx, gy, gz = gradient_volumes(vol, kernel)
    pair = np.zeros(n - 3)
    for g in (gx, gy, gz):
        diff = np.diff(g, axis=0)  # (n-3, 48, 48)
        pair += np.sqrt(np.mean(diff**2, axis=(1, 2)))
    pair /= 3.0 * kernel.rmse_max
    mean = float(pair.mean())
    return SmoothnessResult(pair_rmse=pair, mean_rmse=mean, c_s=(1.0 - mean) * 100.0)


@dataclass
class ContinuityResult:
    pair_rmse: np.ndarray  # (n-1,) per-pair values in [0,1]
    mean_rmse: float
    c_k: float


def stiffness_continuity(
    tensors,
    stats: StiffnessStats,
    legacy_pair_divisor: bool = False,
) -> ContinuityResult:
    """Stiffness continuity C_K of an ordered tensor sequence (needs n >= 2).

    All n-1 consecutive pairs contribute and the mean divides by n-1.
    legacy_pair_divisor=True divides the pair sum by n-3 instead (the
    averaging rule the smoothness metric uses); it needs n >= 4 and can
    push the score outside [0, 100].
    """
    K = np.stack([normalize_stiffness(t, stats) for t in tensors])
    n = K.shape[0]
    if n < 2:
        raise ValueError(f"stiffness continuity needs at least 2 tensors, got {n}")
    pair = np.sqrt(np.mean(np.diff(K, axis=0) ** 2, axis=1))  # (n-1,)
    if legacy_pair_divisor:
        if n < 4:
            raise ValueError("legacy divisor n-3 needs at least 4 tensors")
        mean = float(pair.sum() / (n - 3))
    else:
        mean = float(pair.mean())
    return ContinuityResult(pair_rmse=pair, mean_rmse=mean, c_k=(1.0 - mean) * 100.0)


def transition_stiffness(
    region,
    material: MaterialModel = DEFAULT_MATERIAL,
    threshold: bool = True,
) -> list[np.ndarray]:
    """Homogenized tensors for every cell of a transition region.

    Decoded grayscale cells are thresholded at 0.5 by default before
    homogenization, matching the binary dataset convention. Results are
    cached on the region's `stiffnesses` attribute when present.
    """
    cells = list(region.cells) if hasattr(region, "cells") else list(region)
    if not cells:
        raise ValueError("transition region is empty")
    tensors = []
    for i, cell in enumerate(cells):
        c = np.asarray(cell, dtype=np.float64)
        if threshold:
            c = (c >= 0.5).astype(np.float64)
        try:
            tensors.append(homogenize_cell(c, material))
        except HomogenizationError as exc:
            raise HomogenizationError(f"cell {i}: {exc}", exc.residual) from exc
        except ValueError as exc:
            raise ValueError(f"cell {i}: {exc}") from exc
    if hasattr(region, "stiffnesses"):
        region.stiffnesses = tensors
    return tensors
