"""Multiband perceived contrast and the contrast loss induced by dimming.

Pipeline per frame: band-decompose the luminance image, normalize each
band by its local adaptation luminance and by the CSF, pass the result
through a masking nonlinearity, then count the fraction of coefficients
above the visibility threshold.  Contrast loss compares that fraction
between a frame and its dimmed version.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .csf import CsfParams, DEFAULT_CSF, csf_sensitivity
from .display import LuminanceImage
from . import pyramid

__all__ = [
    "EPSILON",
    "DEFAULT_KNOTS",
    "BandLevel",
    "BandDecomposition",
    "ContrastPyramid",
    "LossTable",
    "build_band_decomposition",
    "perceived_contrast",
    "apply_masking",
    "masked_contrast",
    "visible_fraction",
    "visible_contrast",
    "contrast_loss",
    "precompute_loss_table",
    "interp_loss",
]

# Guard against singular normalization in dark regions, cd/m².
EPSILON = 1e-4

# Brightness factors at which per-frame loss is tabulated.  0.05 anchors
# the low end so the optimizer never extrapolates.
DEFAULT_KNOTS = (0.05, 0.2, 0.4, 0.6, 0.8, 1.0)

# Masking transducer self-parameters.
MASK_EXP_SELF = 0.7
MASK_EXP_NEIGHBOR = 0.2
MASK_WINDOW = 5


@dataclass(frozen=True)
class BandLevel:
    """One frequency band: signed luminance difference plus local adaptation."""

    delta_l: np.ndarray = field(repr=False)
    adapt_l: np.ndarray = field(repr=False)
    center_freq: float


@dataclass(frozen=True)
class BandDecomposition:
    """Band-limited luminance differences with per-band adaptation maps.

    ``levels[0]`` is the finest band; ``residual`` is the low-pass remainder
    kept only so the decomposition can be collapsed back to the input.
    """

    levels: tuple[BandLevel, ...]
    residual: np.ndarray = field(repr=False)
    ppd: float

    def collapse(self) -> np.ndarray:
        """Reconstruct the input luminance image."""
        return pyramid.collapse([lv.delta_l for lv in self.levels], self.residual)


@dataclass(frozen=True)
class ContrastPyramid:
    """Masked perceived contrast per band; optionally the pre-masking bands."""

    levels: tuple[np.ndarray, ...]
    raw: tuple[np.ndarray, ...] | None = None


def n_band_levels(height: int, width: int) -> int:
    """Band count for an image size: floor(log2(min side)) - 2."""
    return int(math.floor(math.log2(min(height, width)))) - 2


def build_band_decomposition(image: LuminanceImage, ppd: float) -> BandDecomposition:
    """Decompose a luminance image into frequency bands with adaptation maps.

    The adaptation map of band ``k`` is Gaussian level ``k + 2`` expanded
    back to the band's resolution.  Band ``k`` is centered at
    ``ppd / 2**(k+2)`` cycles/degree.

    Raises ``ValueError`` if the image is smaller than 16 px on a side or
    ``ppd`` is not positive.
    """
    if ppd <= 0:
        raise ValueError(f"pixels-per-degree must be > 0, got {ppd}")
    h, w = image.height, image.width
    if min(h, w) < 16:
        raise ValueError(f"image too small for band decomposition: {w}x{h}")

    n = n_band_levels(h, w)
    gauss = pyramid.gaussian_pyramid(image.values, n + 1)
    bands = pyramid.laplacian_levels(gauss[: n + 1])

    levels = []
    for k in range(n):
        adapt = pyramid.expand_to(gauss[k + 2], gauss[k + 1].shape)
        adapt = pyramid.expand_to(adapt, gauss[k].shape)
        levels.append(
            BandLevel(
                delta_l=bands[k],
                adapt_l=adapt,
                center_freq=ppd / 2.0 ** (k + 2),
            )
        )
    return BandDecomposition(levels=tuple(levels), residual=gauss[n], ppd=ppd)


def perceived_contrast(
    decomp: BandDecomposition,
    epsilon: float = EPSILON,
    csf: CsfParams = DEFAULT_CSF,
) -> list[np.ndarray]:
    """Raw perceived contrast per band: delta over adaptation, CSF-scaled.

    The result is in detection-threshold units; values above 1 in
    magnitude would be visible before masking.
    """
    out = []
    for lv in decomp.levels:
        adapt = np.maximum(lv.adapt_l, epsilon)
        sens = csf_sensitivity(lv.center_freq, adapt, csf)
        out.append(lv.delta_l / (lv.adapt_l + epsilon) * sens)
    return out


def apply_masking(raw: np.ndarray) -> np.ndarray:
    """Masking transducer: compress contrast by neighboring contrast energy.

    ``sign(C) |C|^0.7 / (1 + mean_{5x5} |C|^0.2)`` with the center pixel
    included in the 25-sample window and replicate padding at the edges.
    """
    mag = np.abs(raw)
    t = mag**MASK_EXP_NEIGHBOR
    neighborhood = ndimage.uniform_filter(t, size=MASK_WINDOW, mode="nearest")
    # |C|^0.7 == (|C|^0.2)^3.5, saving a second fractional power
    self_term = t * t * t * np.sqrt(t)
    return np.sign(raw) * self_term / (1.0 + neighborhood)


def masked_contrast(
    image: LuminanceImage,
    ppd: float,
    epsilon: float = EPSILON,
    csf: CsfParams = DEFAULT_CSF,
    keep_raw: bool = False,
) -> ContrastPyramid:
    """Full per-frame contrast pipeline: bands, CSF normalization, masking."""
    decomp = build_band_decomposition(image, ppd)
    raw = perceived_contrast(decomp, epsilon=epsilon, csf=csf)
    masked = tuple(apply_masking(level) for level in raw)
    return ContrastPyramid(levels=masked, raw=tuple(raw) if keep_raw else None)


def visible_fraction(pyr: ContrastPyramid, abs_threshold: bool = False) -> float:
    """Fraction of band coefficients above the visibility threshold.

    Per band, the mean of the indicator ``C_t > 1`` (or ``|C_t| > 1`` when
    ``abs_threshold``), then averaged over bands.  The low-pass residual
    never participates.
    """
    if len(pyr.levels) < 1:
        raise ValueError("need at least one band level")
    fractions = [
        float(np.mean((np.abs(level) if abs_threshold else level) > 1.0))
        for level in pyr.levels
    ]
    return float(np.mean(fractions))


def visible_contrast(
    image: LuminanceImage,
    ppd: float,
    epsilon: float = EPSILON,
    csf: CsfParams = DEFAULT_CSF,
    abs_threshold: bool = False,
) -> float:
    """Visible-contrast fraction of one frame (the pipeline's scalar output)."""
    return visible_fraction(
        masked_contrast(image, ppd, epsilon=epsilon, csf=csf),
        abs_threshold=abs_threshold,
    )


def contrast_loss(
    frame: LuminanceImage,
    b: float,
    ppd: float,
    epsilon: float = EPSILON,
    csf: CsfParams = DEFAULT_CSF,
    abs_threshold: bool = False,
) -> float:
    """Relative drop in visible contrast when the frame is dimmed by ``b``.

    A frame with no visible contrast at full brightness loses nothing by
    convention, so the result is 0 rather than a division by zero.
    """
    if not 0 < b <= 1:
        raise ValueError(f"dimming factor must be in (0, 1], got {b}")
    cv_ref = visible_contrast(frame, ppd, epsilon=epsilon, csf=csf, abs_threshold=abs_threshold)
    if cv_ref == 0.0:
        return 0.0
    dimmed = LuminanceImage(frame.values * b)
    cv_dim = visible_contrast(dimmed, ppd, epsilon=epsilon, csf=csf, abs_threshold=abs_threshold)
    return abs(1.0 - cv_dim / cv_ref)


@dataclass(frozen=True)
class LossTable:
    """Per-frame contrast loss sampled at fixed brightness factors.

    ``loss[i, k]`` is the loss of frame ``i`` dimmed to ``knots[k]``;
    ``mean_lum[i, k]`` the corresponding mean displayed luminance.
    """

    knots: np.ndarray = field(repr=False)
    loss: np.ndarray = field(repr=False)
    mean_lum: np.ndarray = field(repr=False)
    ppd: float = 25.0
    epsilon: float = EPSILON
    kernel_id: str = pyramid.KERNEL_ID
    csf: CsfParams = DEFAULT_CSF

    def __post_init__(self):
        knots = np.asarray(self.knots, dtype=np.float64)
        if np.any(np.diff(knots) <= 0):
            raise ValueError("knots must be strictly increasing")
        if np.any(knots <= 0) or np.any(knots > 1):
            raise ValueError("knots must lie in (0, 1]")
        if knots[-1] != 1.0:
            raise ValueError("knots must include 1.0")
        loss = np.asarray(self.loss, dtype=np.float64)
        mean_lum = np.asarray(self.mean_lum, dtype=np.float64)
        if loss.shape != mean_lum.shape or loss.ndim != 2 or loss.shape[1] != knots.size:
            raise ValueError("loss/mean_lum must be (frames, knots) matrices")
        object.__setattr__(self, "knots", knots)
        object.__setattr__(self, "loss", loss)
        object.__setattr__(self, "mean_lum", mean_lum)

    @property
    def frame_count(self) -> int:
        return self.loss.shape[0]

    @property
    def full_mean_lum(self) -> np.ndarray:
        """Per-frame mean displayed luminance at full brightness."""
        return self.mean_lum[:, -1]


def precompute_loss_table(
    frames: list[LuminanceImage],
    ppd: float,
    knots=DEFAULT_KNOTS,
    epsilon: float = EPSILON,
    csf: CsfParams = DEFAULT_CSF,
    abs_threshold: bool = False,
    workers: int = 1,
) -> LossTable:
    """Tabulate contrast loss for every frame at every brightness knot.

    Frames evaluate independently, so ``workers > 1`` fans the per-frame
    work out to a process pool; collection order is fixed, keeping the
    result identical to the sequential run.
    """
    if not frames:
        raise ValueError("no frames to tabulate")
    knots = np.asarray(knots, dtype=np.float64)

    args = [(f, knots, ppd, epsilon, csf, abs_threshold) for f in frames]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_loss_row, args, chunksize=4))
    else:
        rows = [_loss_row(a) for a in args]

    loss = np.empty((len(frames), knots.size))
    mean_lum = np.empty_like(loss)
    for i, row in enumerate(rows):
        if isinstance(row, Exception):
            raise RuntimeError(f"frame {i}: {row}") from row
        loss[i], mean_lum[i] = row
    return LossTable(
        knots=knots, loss=loss, mean_lum=mean_lum,
        ppd=ppd, epsilon=epsilon, csf=csf,
    )


def _loss_row(args):
    frame, knots, ppd, epsilon, csf, abs_threshold = args
    try:
        losses = np.array([
            contrast_loss(frame, float(b), ppd, epsilon=epsilon, csf=csf,
                          abs_threshold=abs_threshold)
            for b in knots
        ])
        return losses, knots * frame.mean()
    except Exception as exc:  # re-raised with the frame index attached
        return exc


def interp_loss(table: LossTable, frame: int, b: float) -> float:
    """Loss of ``table`` frame at brightness ``b``, linear between knots.

    Exact at the knots; below the lowest knot the value clamps to the
    lowest knot's loss.
    """
    if not 0 <= frame < table.frame_count:
        raise IndexError(f"frame index {frame} out of range 0..{table.frame_count - 1}")
    if not 0 < b <= 1:
        raise ValueError(f"dimming factor must be in (0, 1], got {b}")
    return float(np.interp(b, table.knots, table.loss[frame]))


def interp_loss_slope(table: LossTable, b: np.ndarray):
    """Vectorized interpolated losses and segment slopes for all frames.

    ``b`` holds one brightness per frame.  At a knot the slope of the
    right-hand segment applies (last segment at b = 1).  Used by the
    optimizer for exact piecewise-linear subgradients.
    """
    knots = table.knots
    b = np.clip(np.asarray(b, dtype=np.float64), knots[0], knots[-1])
    idx = np.clip(np.searchsorted(knots, b, side="right") - 1, 0, knots.size - 2)
    rows = np.arange(table.frame_count)
    l0 = table.loss[rows, idx]
    l1 = table.loss[rows, idx + 1]
    slope = (l1 - l0) / (knots[idx + 1] - knots[idx])
    return l0 + slope * (b - knots[idx]), slope
