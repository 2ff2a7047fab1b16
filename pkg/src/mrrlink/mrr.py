"""Retroreflector scattering model.

The reflector is three mutually perpendicular triangular mirrors; a
mirror whose plane is tilted by theta away from the incoming beam
returns the fraction 1 - tan|theta| of the power it collects, and the
three tilt angles are independent zero-mean normals with the UAV
orientation-jitter SD.  The module provides exact sampling of the
product coefficient, its measured-moment table, the moment-matched
log-normal density used by the weak-turbulence statistics, and the
piecewise-constant (sectorized) density used by the strong-turbulence
statistics.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import special as sp

from .errors import InsufficientSamplesError, NonPositiveBreakpointError
from .specfun import interp_table

__all__ = [
    "MrrMomentTable",
    "SectorModel",
    "hmrr_component",
    "sample_hmrr",
    "mrr_moments",
    "model_moments",
    "lognormal_hmrr_params",
    "lognormal_hmrr_pdf",
    "fit_sector_model",
    "sector_table",
    "TABLE_MOMENTS",
    "TABLE_SECTORS",
]

# Reference tabulation of the product coefficient's mean/SD versus
# jitter SD in degrees (5e7-sample simulation runs).
_MOM_SIGMA_DEG = np.arange(1.0, 12.0)
_MOM_MU = np.array([0.96, 0.93, 0.89, 0.86, 0.83, 0.80, 0.76, 0.73, 0.70, 0.66, 0.62])
_MOM_SD = np.array([0.0178, 0.035, 0.052, 0.066, 0.083, 0.094, 0.11, 0.12, 0.13, 0.145, 0.158])

# Sector densities B_n for N=8, tabulated at odd jitter SDs (degrees).
_SEC_SIGMA_DEG = np.array([1.0, 3.0, 5.0, 7.0, 9.0, 11.0])
_SEC_B = np.array(
    [
        [2.63, 0.85, 0.47, 0.29, 0.19, 0.10],
        [5.74, 1.99, 1.24, 0.91, 0.72, 0.58],
        [10.37, 3.73, 2.42, 1.87, 1.58, 1.42],
        [15.20, 5.49, 3.56, 2.75, 2.30, 2.07],
        [17.80, 6.19, 3.90, 2.94, 2.40, 2.06],
        [14.70, 4.99, 3.03, 2.20, 1.73, 1.42],
        [7.05, 2.45, 1.44, 1.00, 0.76, 0.60],
        [1.26, 0.40, 0.23, 0.15, 0.11, 0.08],
    ]
)

# Samples per deterministic RNG substream; fixed so that results do not
# depend on scheduling or worker count (see montecarlo module).
_BLOCK = 1 << 16


@dataclass(frozen=True)
class MrrMomentTable:
    """Mean/SD of the reflection coefficient versus jitter SD in degrees."""

    sigma_deg: np.ndarray
    mu: np.ndarray
    sd: np.ndarray

    def __post_init__(self):
        if not (len(self.sigma_deg) == len(self.mu) == len(self.sd)):
            raise ValueError("table columns must have equal length")

    @classmethod
    def from_csv(cls, path) -> "MrrMomentTable":
        """Load an override table (columns: sigma_deg, mu, sd)."""
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(data[:, 0].copy(), data[:, 1].copy(), data[:, 2].copy())


TABLE_MOMENTS = MrrMomentTable(_MOM_SIGMA_DEG, _MOM_MU, _MOM_SD)


@dataclass(frozen=True)
class SectorModel:
    """Piecewise-constant density of the reflection coefficient.

    V holds the N+1 breakpoints (V[-1] == 1); B the N densities.  The
    densities integrate to one over [V[0], 1] by construction.
    """

    V: np.ndarray
    B: np.ndarray

    def __post_init__(self):
        V, B = np.asarray(self.V, float), np.asarray(self.B, float)
        object.__setattr__(self, "V", V)
        object.__setattr__(self, "B", B)
        if len(V) != len(B) + 1:
            raise ValueError("need one more breakpoint than sectors")
        if np.any(np.diff(V) <= 0):
            raise ValueError("breakpoints must be strictly increasing")
        if abs(V[-1] - 1.0) > 1e-9:
            raise ValueError("last breakpoint must be 1")
        if np.any(B < 0):
            raise ValueError("sector densities must be non-negative")
        mass = float(np.sum(B * np.diff(V)))
        if abs(mass - 1.0) > 0.02:
            raise ValueError(f"sector densities integrate to {mass:.4f}, not 1")

    @property
    def n_sectors(self) -> int:
        return len(self.B)

    def pdf(self, h):
        h = np.asarray(h, dtype=float)
        idx = np.searchsorted(self.V, h, side="right") - 1
        ok = (idx >= 0) & (idx < len(self.B)) & (h <= 1.0)
        out = np.where(ok, self.B[np.clip(idx, 0, len(self.B) - 1)], 0.0)
        return float(out) if out.ndim == 0 else out


def hmrr_component(theta):
    """Directly-reflected power fraction of one mirror tilted by theta.

    1 - tan|theta|, clamped at zero.  Without the absolute value the
    factor would exceed one for negative tilts; reflectance cannot grow
    with misalignment of either sign, so the loss is symmetric.
    """
    theta = np.asarray(theta, dtype=float)
    if np.any(np.abs(theta) >= math.pi / 2):
        raise ValueError("|theta| must be below pi/2")
    out = np.maximum(0.0, 1.0 - np.tan(np.abs(theta)))
    return float(out) if out.ndim == 0 else out


def _block_normals(seed: int, index: int, rows: int, cols: int) -> np.ndarray:
    """Deterministic (seed, block-index)-keyed standard normals.

    Counter-based generator keyed per block, so any scheduling of blocks
    across workers reproduces the same stream.
    """
    bg = np.random.Philox(key=np.array([seed & 0xFFFFFFFFFFFFFFFF, index], dtype=np.uint64))
    u = np.random.Generator(bg).random((rows, cols))
    # Open-interval guard: ndtri(0) = -inf
    return sp.ndtri(np.clip(u, 1e-17, 1.0 - 1e-17))


def sample_hmrr(sigma_theta_o: float, n: int, seed: int = 0) -> np.ndarray:
    """Draw n reflection coefficients for jitter SD sigma_theta_o (radians).

    Product of three independent mirror factors; deterministic given the
    seed and independent of how blocks are scheduled.
    """
    if n < 1:
        raise ValueError("need n >= 1")
    if sigma_theta_o == 0.0:
        return np.ones(n)
    out = np.empty(n)
    pos = 0
    block = 0
    while pos < n:
        take = min(_BLOCK, n - pos)
        z = _block_normals(seed, block, _BLOCK, 3)[:take]
        theta = sigma_theta_o * z
        out[pos:pos + take] = np.prod(np.maximum(0.0, 1.0 - np.tan(np.abs(theta))), axis=1)
        pos += take
        block += 1
    return out


def mrr_moments(sigma_theta_o: float, table: MrrMomentTable = TABLE_MOMENTS):
    """Tabulated (mu, sd) of the reflection coefficient, interpolated.

    sigma_theta_o is in radians; the table is indexed in degrees over
    [min, max] of its rows.  Zero jitter returns (1, 0) by convention;
    out-of-range values clamp with a warning.
    """
    if sigma_theta_o == 0.0:
        return 1.0, 0.0
    deg = math.degrees(sigma_theta_o)
    lo, hi = table.sigma_deg[0], table.sigma_deg[-1]
    if deg < lo or deg > hi:
        warnings.warn(
            f"sigma_theta_o={deg:.2f} deg outside the table range "
            f"[{lo:g}, {hi:g}] deg; clamping", stacklevel=2,
        )
        deg = min(max(deg, lo), hi)
    return (interp_table(table.sigma_deg, table.mu, deg),
            interp_table(table.sigma_deg, table.sd, deg))


def model_moments(sigma_theta_o: float) -> tuple[float, float]:
    """Exact (mu, sd) of the sampled product model by quadrature.

    Useful as a self-consistent alternative to the tabulated moments: the
    published table differs from its own printed generative model by up
    to 0.036 in the mean at large jitter.
    """
    from scipy.integrate import quad

    if sigma_theta_o == 0.0:
        return 1.0, 0.0
    s = sigma_theta_o

    def half_normal_moment(power: int) -> float:
        # E[max(0, 1 - tan theta)^power] over theta ~ |N(0, s^2)|
        def f(t):
            dens = math.sqrt(2.0 / math.pi) / s * math.exp(-t * t / (2 * s * s))
            return max(0.0, 1.0 - math.tan(t)) ** power * dens

        hi = min(math.pi / 4, 12.0 * s)   # component hits zero at pi/4
        val, _ = quad(f, 0.0, hi, epsabs=1e-14, epsrel=1e-12, limit=300)
        return val

    m1 = half_normal_moment(1)
    m2 = half_normal_moment(2)
    mu = m1 ** 3
    var = m2 ** 3 - mu ** 2
    return mu, math.sqrt(max(var, 0.0))


def lognormal_hmrr_params(mu: float, sd: float) -> tuple[float, float]:
    """Location/scale of the moment-matched log-normal reflection density."""
    if mu <= 0:
        raise ValueError("mu must be positive")
    s2 = math.log1p(sd ** 2 / mu ** 2)
    loc = math.log(mu ** 2 / math.sqrt(mu ** 2 + sd ** 2))
    return loc, math.sqrt(s2)


def lognormal_hmrr_pdf(h, mu: float, sd: float):
    """Moment-matched log-normal density; its first two moments equal
    (mu, sd^2) exactly."""
    loc, scale = lognormal_hmrr_params(mu, sd)
    h = np.asarray(h, dtype=float)
    out = np.zeros_like(h)
    pos = h > 0
    hp = h[pos] if h.ndim else (h if h > 0 else None)
    if h.ndim == 0:
        if h <= 0:
            return 0.0
        return float(np.exp(-((np.log(h) - loc) ** 2) / (2 * scale ** 2))
                     / (h * scale * math.sqrt(2 * math.pi)))
    out[pos] = (np.exp(-((np.log(hp) - loc) ** 2) / (2 * scale ** 2))
                / (hp * scale * math.sqrt(2 * math.pi)))
    return out


def _uniform_sectors(mu: float, n_sectors: int) -> np.ndarray:
    """Equal-width breakpoints spanning [2 mu - 1, 1].

    The printed recursion for the breakpoints overshoots 1; equal widths
    (2 - 2 mu)/N reproduce the intended equal-width sector picture and
    end exactly at 1.
    """
    lo = 2.0 * mu - 1.0
    if lo < 0.0:
        raise NonPositiveBreakpointError(
            f"mean reflectance {mu:.3f} < 0.5 puts the first breakpoint at "
            f"{lo:.3f} < 0, outside the coefficient's support"
        )
    return lo + (1.0 - lo) / n_sectors * np.arange(n_sectors + 1)


def fit_sector_model(samples, n_sectors: int = 8, mu: float | None = None) -> SectorModel:
    """Fit the piecewise-constant density from reflection-coefficient samples.

    Breakpoints are uniform over [2 mu - 1, 1] with mu defaulting to the
    sample mean; densities are sector fractions over sector width,
    renormalized to integrate to one over the window.
    """
    samples = np.asarray(samples, dtype=float)
    if n_sectors < 2:
        raise ValueError("need at least two sectors")
    if samples.size < 10_000:
        raise InsufficientSamplesError(
            f"{samples.size} samples; need at least 1e4 for a stable fit"
        )
    if mu is None:
        mu = float(samples.mean())
    V = _uniform_sectors(mu, n_sectors)
    counts, _ = np.histogram(samples, bins=V)
    total = counts.sum()
    if total == 0:
        raise InsufficientSamplesError("no samples fall inside the sector window")
    width = np.diff(V)
    B = counts / total / width
    return SectorModel(V, B)


def sector_table(sigma_theta_o: float, n_sectors: int = 8,
                 moment_table: MrrMomentTable = TABLE_MOMENTS) -> SectorModel:
    """Tabulated sector model, interpolated in jitter SD (radians).

    Only N=8 is tabulated; densities are renormalized so the model
    integrates to one (the printed columns integrate to about 0.75).
    """
    if n_sectors != 8:
        raise ValueError("only the 8-sector table is available; fit from samples instead")
    deg = math.degrees(sigma_theta_o)
    if deg < _SEC_SIGMA_DEG[0] or deg > _SEC_SIGMA_DEG[-1]:
        raise ValueError(
            f"sigma_theta_o={deg:.2f} deg outside the sector table range "
            f"[{_SEC_SIGMA_DEG[0]:g}, {_SEC_SIGMA_DEG[-1]:g}] deg"
        )
    B = np.array([interp_table(_SEC_SIGMA_DEG, row, deg) for row in _SEC_B])
    mu, _ = mrr_moments(sigma_theta_o, moment_table)
    V = _uniform_sectors(mu, 8)
    B = B / np.sum(B * np.diff(V))
    return SectorModel(V, B)


TABLE_SECTORS = {float(s): np.array(_SEC_B[:, i]) for i, s in enumerate(_SEC_SIGMA_DEG)}
