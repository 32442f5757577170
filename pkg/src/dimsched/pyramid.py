"""Burt-Adelson pyramid machinery for the band decomposition.

A 5-tap binomial kernel [1, 4, 6, 4, 1]/16 with reflect boundaries drives
both the Gaussian reduction and the zero-insertion expansion.  The
expansion doubles the kernel per axis so constants survive a round trip
exactly, which keeps the band images mean-shift invariant.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

KERNEL_ID = "binomial5"
_KERNEL = np.array([1.0, 4.0, 6.0, 4.0, 1.0]) / 16.0


def _blur(img: np.ndarray) -> np.ndarray:
    out = ndimage.correlate1d(img, _KERNEL, axis=0, mode="mirror")
    return ndimage.correlate1d(out, _KERNEL, axis=1, mode="mirror")


def reduce_once(img: np.ndarray) -> np.ndarray:
    """Blur and decimate by 2 (keeps even-index samples, ceil semantics)."""
    return _blur(img)[::2, ::2]


def expand_to(img: np.ndarray, shape: tuple[int, int]) -> np.ndarray:
    """Upsample to ``shape`` by zero insertion and doubled-kernel blur.

    ``shape`` must be the size the source was reduced from, i.e.
    ``ceil(shape/2) == img.shape`` per axis.
    """
    h, w = shape
    if img.shape != ((h + 1) // 2, (w + 1) // 2):
        raise ValueError(f"cannot expand {img.shape} to {shape}")
    up = np.zeros(shape, dtype=np.float64)
    up[::2, ::2] = img
    up = ndimage.correlate1d(up, _KERNEL * 2.0, axis=0, mode="mirror")
    up = ndimage.correlate1d(up, _KERNEL * 2.0, axis=1, mode="mirror")
    return up


def gaussian_pyramid(img: np.ndarray, n_levels: int) -> list[np.ndarray]:
    """Levels 0..n_levels of the Gaussian pyramid (level 0 is the input)."""
    levels = [np.asarray(img, dtype=np.float64)]
    for _ in range(n_levels):
        levels.append(reduce_once(levels[-1]))
    return levels


def laplacian_levels(gaussian: list[np.ndarray]) -> list[np.ndarray]:
    """Band images G_k - expand(G_{k+1}) for consecutive Gaussian levels."""
    return [
        g - expand_to(gn, g.shape) for g, gn in zip(gaussian[:-1], gaussian[1:])
    ]


def collapse(bands: list[np.ndarray], residual: np.ndarray) -> np.ndarray:
    """Reconstruct the original image from band images plus the residual."""
    img = residual
    for band in reversed(bands):
        img = band + expand_to(img, band.shape)
    return img
