"""Physical-layer building blocks of the double-pass retroreflector link.

Geometry, turbulence statistics, deterministic losses and the SNR map.
All quantities are SI: meters, radians, watts, linear SNR.  Angles that
tables index in degrees are converted at the table boundary, not here.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np
from scipy.integrate import dblquad, quad

from .errors import DegenerateGeometryError, NonConvergentError

__all__ = [
    "LinkConfig",
    "Regime",
    "TurbulenceStats",
    "cn2_profile",
    "rytov_variance",
    "gg_params",
    "turbulence_stats",
    "beer_lambert",
    "beamwidth",
    "pointing_loss_approx",
    "pointing_loss_exact",
    "geometric_loss_gs",
    "h_constant",
    "upsilon_1",
    "snr_from_h",
    "equilateral_aperture",
]

CN2_WEAK_STRONG_SPLIT = 1e-14  # m^-2/3, boundary of the tabulated ranges


class Regime(Enum):
    WEAK_TO_MODERATE = "weak"
    MODERATE_TO_STRONG = "strong"


@dataclass(frozen=True)
class LinkConfig:
    """Full physical description of one ground-station <-> UAV link.

    Defaults follow the reference parameterization reproduced by the
    figure recipes where it is fixed; the values it leaves open (node
    heights, wind speed, noise variance) are documented choices, see
    README.
    """

    Z: float = 1000.0              # link length, m
    Z_hg: float = 2.0              # ground-station height, m
    Z_hu: float = 102.0            # UAV height, m
    wavelength: float = 1550e-9    # m
    theta_div: float = 0.4e-3      # full divergence angle, rad
    r_g: float = 0.08              # ground aperture radius, m
    A_r: float = 1e-4              # retroreflector effective area, m^2
    sigma_theta_e: float = 100e-6  # tracking-error SD, rad
    sigma_theta_o: float = math.radians(5.0)  # UAV orientation-jitter SD, rad
    zeta: float | None = None      # scattering coefficient, 1/m (exclusive with h_l)
    h_l: float | None = 0.7        # direct per-pass loss (exclusive with zeta)
    cn2_0: float = 5e-15           # ground refractive-index structure const, m^-2/3
    wind_v: float = 27.0           # strong-wind speed, m/s
    P_t: float = 0.1               # transmit optical power, W
    R_pd: float = 0.8              # photodetector responsivity, A/W
    sigma_n2: float = 1e-13        # receiver noise variance, A^2
    gamma_th: float = 10 ** 0.5    # SNR threshold, linear (5 dB)

    def __post_init__(self):
        if self.Z <= 0 or self.theta_div <= 0 or self.A_r <= 0 or self.r_g <= 0:
            raise ValueError("Z, theta_div, A_r and r_g must be positive")
        if not (self.Z_hu > self.Z_hg >= 0):
            raise ValueError("need Z_hu > Z_hg >= 0")
        if self.sigma_theta_e < 0 or self.sigma_theta_o < 0:
            raise ValueError("angle SDs must be non-negative")
        if (self.zeta is None) == (self.h_l is None):
            raise ValueError("give exactly one of zeta or h_l")
        if self.h_l is not None and not (0 < self.h_l <= 1):
            raise ValueError("per-pass loss h_l must lie in (0, 1]")
        if self.P_t <= 0 or self.R_pd <= 0 or self.sigma_n2 <= 0 or self.gamma_th < 0:
            raise ValueError("P_t, R_pd, sigma_n2 must be positive; gamma_th >= 0")
        w_z = self.theta_div * self.Z
        # Plane-wave reading of the aperture integral needs A_r << beam area.
        if self.A_r > 0.01 * math.pi * w_z ** 2 / 2:
            warnings.warn(
                f"A_r={self.A_r:g} m^2 is not small against the beam area "
                f"(w_z={w_z:g} m); the plane-wave pointing loss is inaccurate",
                stacklevel=2,
            )

    def with_(self, **kwargs) -> "LinkConfig":
        return replace(self, **kwargs)


@dataclass(frozen=True)
class TurbulenceStats:
    sigma_R2: float                # Rytov variance
    sigma_L2: float                # log-normal parameter, sigma_R2 / 4
    alpha: float                   # large-scale eddy count
    beta: float                    # small-scale eddy count
    regime: Regime

    def __post_init__(self):
        if self.sigma_R2 < 0:
            raise ValueError("sigma_R2 must be non-negative")


def cn2_profile(Z_h, cn2_0: float, wind_v: float):
    """Altitude profile of the refractive-index structure parameter.

    Three-term Hufnagel-Valley-style sum: a high-altitude wind-driven
    term, a fixed stratospheric term and the ground term decaying on a
    100 m scale.
    """
    Z_h = np.asarray(Z_h, dtype=float)
    out = (
        0.00594 * (wind_v / 27.0) ** 2 * (1e-5 * Z_h) ** 10 * np.exp(-Z_h / 1000.0)
        + 2.7e-16 * np.exp(-Z_h / 1500.0)
        + cn2_0 * np.exp(-Z_h / 100.0)
    )
    return float(out) if out.ndim == 0 else out


def rytov_variance(cfg: LinkConfig) -> float:
    """Rytov variance of one slant pass between the node heights.

    Evaluates the path integral of Cn^2 weighted by the (5/6)-power
    propagation kernel.  The prefactor 9 belongs to the model family
    implemented here; the common textbook plane-wave convention uses
    2.25 instead, so values differ by a constant across conventions.
    """
    Z_hd = cfg.Z_hu - cfg.Z_hg
    if Z_hd <= 0:
        raise DegenerateGeometryError("Z_hu must exceed Z_hg")

    def integrand(z_h):
        x = z_h - cfg.Z_hg
        return cn2_profile(z_h, cfg.cn2_0, cfg.wind_v) * (1.0 - x / Z_hd) ** (5.0 / 6.0) * x ** (5.0 / 6.0)

    val, err = quad(integrand, cfg.Z_hg, cfg.Z_hu, epsabs=0.0, epsrel=1e-9, limit=400)
    pref = 9.0 * (2.0 * math.pi / cfg.wavelength) ** (7.0 / 6.0) * (cfg.Z / Z_hd) ** (11.0 / 6.0)
    return pref * val


def gg_params(sigma_R2: float) -> tuple[float, float]:
    """Gamma-Gamma shape parameters (alpha, beta) for plane-wave scintillation.

    Standard Andrews & Phillips expressions; both diverge as the Rytov
    variance vanishes and decrease toward saturation as it grows.
    """
    if sigma_R2 <= 0:
        raise ValueError("gg_params requires sigma_R2 > 0")
    s = float(sigma_R2)
    alpha = 1.0 / math.expm1(0.49 * s / (1.0 + 1.11 * s ** 1.2) ** (7.0 / 6.0))
    beta = 1.0 / math.expm1(0.51 * s / (1.0 + 0.69 * s ** 1.2) ** (5.0 / 6.0))
    return alpha, beta


def turbulence_stats(cfg: LinkConfig, rule: str = "sigma_r2",
                     regime: Regime | str | None = None) -> TurbulenceStats:
    """Compute per-pass turbulence statistics and classify the regime.

    rule="sigma_r2": weak iff Rytov variance < 1 (default).
    rule="cn2": weak iff ground Cn^2 < 1e-14 (the tabulated-range rule).
    An explicit `regime` overrides either rule.
    """
    s_r2 = rytov_variance(cfg)
    s_l2 = s_r2 / 4.0
    alpha, beta = gg_params(s_r2) if s_r2 > 0 else (math.inf, math.inf)
    if regime is not None:
        reg = Regime(regime) if not isinstance(regime, Regime) else regime
    elif rule == "sigma_r2":
        reg = Regime.WEAK_TO_MODERATE if s_r2 < 1.0 else Regime.MODERATE_TO_STRONG
    elif rule == "cn2":
        reg = (Regime.WEAK_TO_MODERATE if cfg.cn2_0 < CN2_WEAK_STRONG_SPLIT
               else Regime.MODERATE_TO_STRONG)
    else:
        raise ValueError(f"unknown regime rule {rule!r}")
    return TurbulenceStats(s_r2, s_l2, alpha, beta, reg)


def beer_lambert(cfg: LinkConfig) -> float:
    """Per-pass atmospheric attenuation; both directions are identical."""
    if cfg.h_l is not None:
        return cfg.h_l
    return math.exp(-cfg.Z * cfg.zeta)


def beamwidth(cfg: LinkConfig) -> float:
    """Beam radius at the far end, w_z = theta_div * Z."""
    return cfg.theta_div * cfg.Z


def pointing_loss_approx(cfg: LinkConfig, d_px, d_py):
    """Collected-power fraction at the retroreflector, plane-wave reading.

    (2 A_r / (pi w_z^2)) exp(-2 d_p^2 / w_z^2) for displacement
    (d_px, d_py) of the beam center from the aperture center.
    """
    w_z = beamwidth(cfg)
    d2 = np.asarray(d_px, dtype=float) ** 2 + np.asarray(d_py, dtype=float) ** 2
    out = (2.0 * cfg.A_r / (math.pi * w_z ** 2)) * np.exp(-2.0 * d2 / w_z ** 2)
    return float(out) if out.ndim == 0 else out


def equilateral_aperture(area: float):
    """Vertices of an equilateral triangle of given area, centroid at the
    origin, one vertex on +y (orientation is immaterial in the plane-wave
    limit used everywhere else)."""
    side = math.sqrt(4.0 * area / math.sqrt(3.0))
    r_top = side / math.sqrt(3.0)
    return np.array(
        [
            [0.0, r_top],
            [-side / 2.0, -side / (2.0 * math.sqrt(3.0))],
            [side / 2.0, -side / (2.0 * math.sqrt(3.0))],
        ]
    )


def pointing_loss_exact(cfg: LinkConfig, d_px: float, d_py: float,
                        triangle=None) -> float:
    """Gaussian beam power collected by the displaced triangular aperture.

    2-D adaptive quadrature of the beam profile over the aperture; the
    default aperture is an equilateral triangle of area A_r.
    """
    w_z = beamwidth(cfg)
    tri = equilateral_aperture(cfg.A_r) if triangle is None else np.asarray(triangle, float)
    if tri.shape != (3, 2):
        raise ValueError("triangle must be three (x, y) vertices")
    ys = tri[:, 1]
    y_lo, y_hi = ys.min(), ys.max()

    # x-extent of the triangle at height y (convex, so min/max over edges)
    def x_limits(y):
        xs = []
        for i in range(3):
            (x0, y0), (x1, y1) = tri[i], tri[(i + 1) % 3]
            if (y0 - y) * (y1 - y) <= 0 and y0 != y1:
                xs.append(x0 + (y - y0) * (x1 - x0) / (y1 - y0))
        return (min(xs), max(xs)) if xs else (0.0, 0.0)

    amp = 2.0 / (math.pi * w_z ** 2)

    def f(x, y):
        return amp * math.exp(-2.0 * ((x - d_px) ** 2 + (y - d_py) ** 2) / w_z ** 2)

    val, err = dblquad(f, y_lo, y_hi, lambda y: x_limits(y)[0], lambda y: x_limits(y)[1],
                       epsabs=1e-10, epsrel=1e-9)
    if not np.isfinite(val) or err > max(1e-8, 1e-6 * abs(val)):
        raise NonConvergentError(f"aperture quadrature error {err:.2e} too large")
    return val


def geometric_loss_gs(cfg: LinkConfig) -> float:
    """Collected-power fraction at the ground aperture on the return pass."""
    return 2.0 * cfg.r_g ** 2 / (cfg.Z ** 2 * cfg.theta_div ** 2)


def h_constant(cfg: LinkConfig) -> float:
    """Deterministic part of the channel: both passes' attenuation and the
    ground-station geometric loss."""
    hl = beer_lambert(cfg)
    return hl * hl * geometric_loss_gs(cfg)


def upsilon_1(cfg: LinkConfig) -> float:
    """SNR scale factor: instantaneous SNR = upsilon_1 * h^2."""
    return 2.0 * cfg.R_pd ** 2 * cfg.P_t ** 2 / cfg.sigma_n2


def snr_from_h(cfg: LinkConfig, h):
    """Instantaneous electrical SNR for channel coefficient h >= 0."""
    h = np.asarray(h, dtype=float)
    if np.any(h < 0):
        raise ValueError("channel coefficient must be non-negative")
    out = upsilon_1(cfg) * h ** 2
    return float(out) if out.ndim == 0 else out
