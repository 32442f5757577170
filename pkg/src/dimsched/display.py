"""Display model: pixel-to-luminance encoding, dimming, and power draw.

The display maps normalized pixel values through a gamma curve onto a
physical luminance range, optionally lifted by ambient reflection.  Dimming
is a multiplicative scale on displayed luminance, and power draw follows an
affine model of the backlight luminance.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "DisplayModel",
    "LuminanceImage",
    "PowerModel",
    "DEFAULT_DISPLAY",
    "DEFAULT_POWER",
    "encode_to_luminance",
    "apply_dimming",
    "frame_power",
]


@dataclass(frozen=True)
class DisplayModel:
    """Gamma curve plus luminance range of a display.

    Parameters
    ----------
    gamma : float
        Display gamma exponent, > 0.
    l_max : float
        Peak luminance in cd/m².
    l_black : float
        Black level in cd/m², below ``l_max``.
    l_refl : float
        Ambient light reflected off the panel, cd/m².  Zero for VR optics.
    """

    gamma: float = 2.2
    l_max: float = 804.3
    l_black: float = 0.1
    l_refl: float = 0.0

    def __post_init__(self):
        if not self.gamma > 0:
            raise ValueError(f"gamma must be > 0, got {self.gamma}")
        if not self.l_max > self.l_black >= 0:
            raise ValueError(
                f"need l_max > l_black >= 0, got l_max={self.l_max}, l_black={self.l_black}"
            )
        if self.l_refl < 0:
            raise ValueError(f"l_refl must be >= 0, got {self.l_refl}")


@dataclass(frozen=True)
class PowerModel:
    """Affine luminance-to-watts model for a globally backlit panel.

    ``mode`` selects how frame power is accounted:

    * ``"backlight"`` (default): power depends only on the backlight level,
      i.e. on ``b * l_max``.  This is the model characterized for an LCD.
    * ``"content-mean"``: power follows the mean displayed luminance of the
      frame, an interface hook for self-emissive panels.  No measured
      default profile ships for this mode.
    """

    slope: float = 0.001858
    intercept: float = 0.2945
    mode: str = "backlight"

    def __post_init__(self):
        if self.slope < 0 or self.intercept < 0:
            raise ValueError("power slope and intercept must be >= 0")
        if self.mode not in ("backlight", "content-mean"):
            raise ValueError(f"unknown power mode: {self.mode!r}")

    def watts(self, luminance):
        """Power in watts at the given luminance (cd/m²)."""
        return self.slope * luminance + self.intercept


DEFAULT_DISPLAY = DisplayModel()
DEFAULT_POWER = PowerModel()


@dataclass(frozen=True)
class LuminanceImage:
    """A single frame in physical luminance (cd/m²), row-major float64."""

    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"luminance image must be 2-D, got shape {arr.shape}")
        if np.any(arr < 0) or not np.all(np.isfinite(arr)):
            raise ValueError("luminance values must be finite and >= 0")
        object.__setattr__(self, "values", arr)

    @property
    def height(self) -> int:
        return self.values.shape[0]

    @property
    def width(self) -> int:
        return self.values.shape[1]

    def mean(self) -> float:
        """Mean luminance over all pixels."""
        return float(self.values.mean())


def encode_to_luminance(pixel, model: DisplayModel = DEFAULT_DISPLAY):
    """Map normalized pixel values onto displayed luminance.

    Computes ``pixel**gamma * (l_max - l_black) + l_black + l_refl``.
    Accepts scalars or arrays of values in [0, 1]; range checking happens
    at image load, not here.
    """
    pixel = np.asarray(pixel, dtype=np.float64)
    lum = pixel**model.gamma * (model.l_max - model.l_black) + model.l_black + model.l_refl
    return lum if lum.ndim else float(lum)


def apply_dimming(image: LuminanceImage, b: float) -> LuminanceImage:
    """Scale a luminance image by a dimming factor ``b`` in (0, 1]."""
    if not 0 < b <= 1:
        raise ValueError(f"dimming factor must be in (0, 1], got {b}")
    return LuminanceImage(image.values * b)


def frame_power(
    b: float,
    display: DisplayModel = DEFAULT_DISPLAY,
    power: PowerModel = DEFAULT_POWER,
    mean_luminance: float | None = None,
) -> float:
    """Power in watts to show one frame at dimming factor ``b``.

    In backlight mode the draw depends on ``b * l_max`` only.  In
    content-mean mode the caller must pass the frame's full-brightness mean
    luminance, and the draw follows ``b * mean_luminance``.
    """
    if not 0 < b <= 1:
        raise ValueError(f"dimming factor must be in (0, 1], got {b}")
    if power.mode == "backlight":
        return float(power.watts(b * display.l_max))
    if mean_luminance is None:
        raise ValueError("content-mean power mode needs the frame mean luminance")
    return float(power.watts(b * mean_luminance))
