"""Fitting the visibility threshold for brightness-modulation rate.

Two stages mirror the calibration procedure: per-luminance logistic fits
of detection responses give 75%-detection threshold slopes, and a quartic
polynomial over luminance turns those thresholds into the modulation-rate
limit the scheduler enforces.

No measured data ships with the package.  The default curve is fitted to
SYNTHETIC plausibility points (see ``DEFAULT_THRESHOLD_POINTS``) and is
labeled as such in its provenance string; replace it with a fit of real
trial data for any perceptual claim.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import linalg, optimize

__all__ = [
    "ThresholdTrial",
    "CalibrationCurve",
    "NoThresholdError",
    "fit_logistic_threshold",
    "fit_threshold_curve",
    "max_rate",
    "default_curve",
    "DEFAULT_THRESHOLD_POINTS",
]

# Fixed lapse rate of the logistic observer model.
LAPSE = 0.02

# Synthetic (luminance cd/m², threshold slope cd/m²/s) plausibility points:
# roughly 5% of the adaptation luminance per second plus a dim-end floor,
# consistent with low sensitivity to gradual global changes in immersive
# viewing.  SYNTHETIC — not measured on any panel.
DEFAULT_THRESHOLD_POINTS = (
    (1.0, 0.55),
    (50.0, 3.2),
    (100.0, 6.0),
    (200.0, 11.5),
    (400.0, 22.0),
    (600.0, 32.0),
    (800.0, 41.0),
)


class NoThresholdError(ValueError):
    """Trial data admits no 75% detection threshold."""


@dataclass(frozen=True)
class ThresholdTrial:
    """One detection trial: a luminance ramp and the observer's response."""

    start_luminance: float
    slope: float
    detected: bool

    def __post_init__(self):
        if self.slope < 0:
            raise ValueError(f"slope must be >= 0, got {self.slope}")


@dataclass(frozen=True)
class CalibrationCurve:
    """Quartic luminance-to-threshold-slope curve with a clamped domain."""

    coeffs: np.ndarray = field(repr=False)  # ascending degree, length 5
    domain: tuple[float, float] = (1.0, 800.0)
    provenance: str = "unspecified"

    def __post_init__(self):
        coeffs = np.asarray(self.coeffs, dtype=np.float64)
        if coeffs.shape != (5,):
            raise ValueError("curve wants exactly 5 polynomial coefficients")
        lo, hi = self.domain
        if not (np.isfinite(lo) and np.isfinite(hi) and lo < hi):
            raise ValueError(f"bad domain {self.domain}")
        object.__setattr__(self, "coeffs", coeffs)
        object.__setattr__(self, "domain", (float(lo), float(hi)))


def _logistic(x):
    return 1.0 / (1.0 + np.exp(-x))


def _detection_prob(slope, mu, beta, lapse=LAPSE):
    return lapse / 2.0 + (1.0 - lapse) * _logistic((slope - mu) / beta)


def fit_logistic_threshold(trials: list[ThresholdTrial]) -> float:
    """75%-detection threshold slope from trials at one luminance.

    Maximum-likelihood fit of a logistic with a fixed 2% lapse rate; the
    returned slope solves detection probability = 0.75 analytically from
    the fitted midpoint and spread.

    Raises ``NoThresholdError`` when the responses never mix (all detected
    or none detected) or fewer than two distinct slopes were tested.
    """
    slopes = np.array([t.slope for t in trials], dtype=np.float64)
    detected = np.array([t.detected for t in trials], dtype=bool)
    if np.unique(slopes).size < 2:
        raise NoThresholdError("need trials at >= 2 distinct slopes")
    if detected.all() or not detected.any():
        raise NoThresholdError("responses never cross the threshold")

    def nll(params):
        mu, log_beta = params
        p = _detection_prob(slopes, mu, np.exp(log_beta))
        p = np.clip(p, 1e-12, 1.0 - 1e-12)
        return -np.sum(np.where(detected, np.log(p), np.log1p(-p)))

    span = slopes.max() - slopes.min()
    mu0 = 0.5 * (slopes[detected].min() + slopes[~detected].max())
    beta0 = max(span / 4.0, 1e-3)
    res = optimize.minimize(
        nll, x0=[mu0, np.log(beta0)], method="Nelder-Mead",
        options={"xatol": 1e-10, "fatol": 1e-12, "maxiter": 4000},
    )
    mu, beta = res.x[0], float(np.exp(res.x[1]))
    # p = 0.75 inverted through the lapse-adjusted logistic
    q = (0.75 - LAPSE / 2.0) / (1.0 - LAPSE)
    return float(mu + beta * np.log(q / (1.0 - q)))


def fit_threshold_curve(points) -> CalibrationCurve:
    """Least-squares quartic through (luminance, threshold slope) points.

    Uses a QR-based solve (LAPACK ``gelsy``) on the Vandermonde system,
    so five points with distinct luminances interpolate exactly.

    Raises ``ValueError`` when fewer than five distinct luminances leave
    the system rank-deficient.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 5:
        raise ValueError("need >= 5 (luminance, threshold) points")
    lum, thr = pts[:, 0], pts[:, 1]
    if np.unique(lum).size < 5:
        raise ValueError("need >= 5 distinct luminances for a quartic fit")
    vand = np.vander(lum, 5, increasing=True)
    coeffs, _, rank, _ = linalg.lstsq(vand, thr, lapack_driver="gelsy")
    if rank < 5:
        raise ValueError("rank-deficient quartic fit")
    return CalibrationCurve(
        coeffs=coeffs,
        domain=(float(lum.min()), float(lum.max())),
        provenance="fitted",
    )


def max_rate(curve: CalibrationCurve, adapt_luminance: float):
    """Maximum undetectable rate of mean-luminance change, cd/m² per second.

    The query luminance clamps to the curve domain and the evaluated
    polynomial clamps to zero, so the limit is always usable as a bound.
    Accepts scalars or arrays.
    """
    lum = np.clip(np.asarray(adapt_luminance, dtype=np.float64), *curve.domain)
    val = np.polynomial.polynomial.polyval(lum, curve.coeffs)
    val = np.maximum(val, 0.0)
    return val if val.ndim else float(val)


def max_rate_derivative(curve: CalibrationCurve, adapt_luminance: float):
    """Derivative of ``max_rate`` w.r.t. luminance (0 on clamped stretches)."""
    lum = np.asarray(adapt_luminance, dtype=np.float64)
    lo, hi = curve.domain
    clamped = np.clip(lum, lo, hi)
    inside = (lum >= lo) & (lum <= hi)
    positive = np.polynomial.polynomial.polyval(clamped, curve.coeffs) > 0
    der = np.polynomial.polynomial.polyval(
        clamped, np.polynomial.polynomial.polyder(curve.coeffs)
    )
    out = np.where(inside & positive, der, 0.0)
    return out if out.ndim else float(out)


def default_curve() -> CalibrationCurve:
    """The bundled SYNTHETIC threshold curve spanning 1-800 cd/m²."""
    fitted = fit_threshold_curve(DEFAULT_THRESHOLD_POINTS)
    return CalibrationCurve(
        coeffs=fitted.coeffs,
        domain=fitted.domain,
        provenance="synthetic-default-v1 (plausibility points, not measured)",
    )
