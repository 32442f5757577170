"""Barten contrast sensitivity function for foveal, static gratings.

Implements the closed-form CSF of Barten (2003), "Formula for the contrast
sensitivity of the human eye", with the standard published parameter set.
Sensitivity is the reciprocal of the Michelson threshold contrast, so a
contrast scaled by this function reads directly in detection-threshold
units: 1.0 marks the smallest reliably visible contrast.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np

__all__ = ["CsfParams", "DEFAULT_CSF", "csf_sensitivity"]


@dataclass(frozen=True)
class CsfParams:
    """Parameters of the Barten CSF.

    Defaults are the published standard-observer values; ``field_size``
    is the angular extent (degrees) assumed for the stimulus field.
    """

    k: float = 3.0  # signal-to-noise ratio at threshold
    T: float = 0.1  # eye integration time, s
    eta: float = 0.03  # quantum efficiency
    p: float = 1.285e6  # photon conversion factor, photons/(s·deg²·Td)
    phi_0: float = 3e-8  # neural noise spectral density, s·deg²
    u_0: float = 7.0  # lateral-inhibition cutoff, cycles/deg
    x_max: float = 12.0  # maximum integration area, deg
    n_max: float = 15.0  # maximum integrated cycles
    sigma_0: float = 0.5 / 60.0  # point-spread constant, deg
    c_ab: float = 0.08 / 60.0  # pupil blur coefficient, deg/mm
    field_size: float = 40.0  # stimulus field width/height, deg
    binocular: bool = True

    def to_dict(self) -> dict:
        return asdict(self)


DEFAULT_CSF = CsfParams()


def csf_sensitivity(freq, adapt, params: CsfParams = DEFAULT_CSF):
    """Contrast sensitivity at spatial frequency ``freq`` (cycles/degree)
    under adaptation luminance ``adapt`` (cd/m²).

    ``freq`` and ``adapt`` broadcast together; both must be positive.
    Returns the unitless sensitivity (always positive and finite).
    """
    u = np.asarray(freq, dtype=np.float64)
    lum = np.asarray(adapt, dtype=np.float64)
    if np.any(u <= 0):
        raise ValueError("spatial frequency must be > 0")
    if np.any(lum <= 0):
        raise ValueError("adaptation luminance must be > 0")

    x0 = params.field_size
    # de Groot-Gebhard pupil diameter in mm, driven by field luminance
    d = 5.0 - 3.0 * np.tanh(0.4 * np.log10(lum * (x0 * x0 / 1600.0)))
    d2 = d * d
    # retinal illuminance in Trolands with the Stiles-Crawford correction
    E = (np.pi / 4.0) * d2 * lum * (1.0 - d2 / 9.7**2 + d2 * d2 / 12.4**4)

    # optical MTF: exp of an affine function of d² at fixed frequency
    u2 = u * u
    m_opt = np.exp(-2.0 * np.pi**2 * u2 * params.sigma_0**2
                   - (2.0 * np.pi**2 * params.c_ab**2) * u2 * d2)
    m_lat = 1.0 - np.exp(-(u2 / params.u_0**2))

    inv_area = 1.0 / x0**2 + 1.0 / params.x_max**2 + u2 / params.n_max**2
    scale = (np.sqrt(2.0) if params.binocular else 1.0) / (2.0 * params.k)
    s = (scale * np.sqrt(params.T / inv_area)) * m_opt / np.sqrt(
        1.0 / (params.eta * params.p * E) + params.phi_0 / m_lat
    )
    return s if s.ndim else float(s)
