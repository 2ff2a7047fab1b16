"""Closed-form channel statistics under weak-to-moderate turbulence.

The composed random part of the channel (two log-normal fading passes
times the moment-matched log-normal reflection coefficient) is itself
log-normal, and the pointing factor follows a power law; the resulting
channel density, CDF, SNR statistics, outage and OOK bit error rate all
reduce to Q-function/erfc expressions collected here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as sp
from scipy.integrate import quad

from .channel import LinkConfig, Regime, TurbulenceStats, beamwidth, h_constant, upsilon_1
from .errors import DegenerateDistributionError, NumericalOverflowError, RegimeMismatchError
from .specfun import log_q, q_function

__all__ = [
    "WeakModelConstants",
    "weak_constants",
    "pdf_h_weak",
    "cdf_h_weak",
    "pdf_snr_weak",
    "cdf_snr_weak",
    "outage_weak",
    "ber_weak",
]

# Largest exponent allowed inside the BER series before the closed form
# bails out to quadrature.
_MAX_LOG = 700.0


@dataclass(frozen=True)
class WeakModelConstants:
    """Derived constant bundle of the weak-turbulence channel density.

    C1 is the total log-domain variance, C2 the negated log-domain mean
    of the composed fading, C3 the reciprocal of the peak deterministic
    gain, K the pointing power-law exponent, and C4/C5 the resulting
    density prefactor and log-offset.  The sign of the K C2 cross term
    in C4 is fixed by normalization: with exp(-K C2) instead, the
    density integrates to e^{-2 K C2}, not 1 (checked in tests).
    """

    C1: float
    C2: float
    C3: float
    log_C4: float
    C5: float
    K: float
    h_c: float
    upsilon_1: float
    sigma_L2: float

    def __post_init__(self):
        if self.C1 <= 0 or self.C3 <= 0 or self.K <= 0:
            raise ValueError("C1, C3, K must be positive")
        if not (0 < self.h_c <= 1):
            raise ValueError("h_c must lie in (0, 1]")

    @property
    def C4(self) -> float:
        """Density prefactor; may overflow to inf for large K, in which
        case every consumer works from log_C4."""
        return math.exp(self.log_C4)


def weak_constants(cfg: LinkConfig, moments: tuple[float, float],
                   stats: TurbulenceStats) -> WeakModelConstants:
    """Assemble the constant bundle from config, reflection moments and
    turbulence statistics."""
    if stats.regime is not Regime.WEAK_TO_MODERATE:
        raise RegimeMismatchError("weak-regime constants need weak-regime statistics")
    mu, sd = moments
    if mu <= 0:
        raise ValueError("reflection mean must be positive")
    s_l2 = stats.sigma_L2
    if sd == 0.0 and s_l2 == 0.0:
        raise DegenerateDistributionError(
            "no spread in fading or reflection; the channel density is a point mass"
        )
    w_z = beamwidth(cfg)
    h_c = h_constant(cfg)
    K = w_z ** 2 / (cfg.Z ** 2 * cfg.sigma_theta_e ** 2)
    C1 = math.log1p(sd ** 2 / mu ** 2) + 8.0 * s_l2
    C2 = math.log(math.sqrt(mu ** 2 + sd ** 2) / mu ** 2) + 4.0 * s_l2
    C3 = math.pi * w_z ** 2 / (2.0 * cfg.A_r * h_c)
    log_C4 = math.log(K) + K * math.log(C3) + (C1 * K ** 2 + 2.0 * K * C2) / 2.0
    C5 = math.log(C3) + C1 * K + C2
    return WeakModelConstants(C1, C2, C3, log_C4, C5, K, h_c, upsilon_1(cfg), s_l2)


def pdf_h_weak(h, k: WeakModelConstants):
    """Channel density C4 h^{K-1} Q((ln h + C5)/sqrt(C1)), h > 0."""
    h = np.asarray(h, dtype=float)
    out = np.zeros_like(h)
    pos = h > 0
    lh = np.log(h, where=pos, out=np.full_like(h, -np.inf))
    # log-space: the power-law factor overflows long before the Q tail kicks in
    logf = (k.log_C4 + (k.K - 1.0) * lh
            + log_q((lh + k.C5) / math.sqrt(k.C1)))
    np.exp(logf, where=pos, out=out)
    return float(out) if out.ndim == 0 else out


def cdf_h_weak(h, k: WeakModelConstants):
    """Channel CDF, the two-term Q expression integrating the density."""
    h = np.asarray(h, dtype=float)
    if h.ndim == 0:
        if h <= 0:
            return 0.0
        return float(cdf_h_weak(h[None], k)[0])
    out = np.zeros_like(h)
    pos = h > 0
    lh = np.log(h[pos])
    sq = math.sqrt(k.C1)
    lt1 = k.K * (lh + k.C5) + log_q((lh + k.C5) / sq)
    lt2 = k.K ** 2 * k.C1 / 2.0 + log_q((k.K * k.C1 - lh - k.C5) / sq)
    m = np.maximum(lt1, lt2)
    log_pref = k.log_C4 - math.log(k.K) - k.K * k.C5
    val = np.exp(log_pref + m) * (np.exp(lt1 - m) + np.exp(lt2 - m))
    out[pos] = np.minimum(val, 1.0)
    return out


def pdf_snr_weak(gamma, k: WeakModelConstants):
    """SNR density under the square-law map gamma = upsilon_1 h^2."""
    g = np.asarray(gamma, dtype=float)
    out = np.zeros_like(g)
    pos = g > 0
    lg = np.log(g, where=pos, out=np.full_like(g, -np.inf))
    logf = (k.log_C4 - math.log(2.0) - (k.K / 2.0) * math.log(k.upsilon_1)
            + (k.K / 2.0 - 1.0) * lg
            + log_q((lg - math.log(k.upsilon_1) + 2.0 * k.C5) / (2.0 * math.sqrt(k.C1))))
    np.exp(logf, where=pos, out=out)
    return float(out) if out.ndim == 0 else out


def cdf_snr_weak(gamma, k: WeakModelConstants):
    """SNR CDF; identical to cdf_h_weak(sqrt(gamma/upsilon_1)).

    Written out through the substituted expression; the source text's
    printed form carries a sign typo on the ln(upsilon_1) term of the
    second Q argument, which the substitution fixes.
    """
    g = np.asarray(gamma, dtype=float)
    h = np.sqrt(np.maximum(g, 0.0) / k.upsilon_1)
    return cdf_h_weak(h, k)


def outage_weak(k: WeakModelConstants, gamma_th: float) -> float:
    """Probability that the instantaneous SNR falls below gamma_th."""
    if gamma_th < 0:
        raise ValueError("gamma_th must be non-negative")
    if gamma_th == 0:
        return 0.0
    return float(cdf_snr_weak(gamma_th, k))


def _log_erfc(x: float) -> float:
    """log erfc(x) for any real x, overflow-free."""
    if x >= 0.0:
        return math.log(sp.erfcx(x)) - x * x
    return math.log(2.0 - sp.erfcx(-x) * math.exp(-x * x))


def _ber_weak_quadrature(k: WeakModelConstants) -> float:
    """Direct integral of Q(sqrt(gamma)) against the SNR density."""
    ln_knee = math.log(k.upsilon_1) - 2.0 * k.C5

    def f(y):
        g = math.exp(y)
        return float(q_function(math.sqrt(g)) * pdf_snr_weak(g, k) * g)

    total = 0.0
    cuts = [-80.0, -20.0, 0.0, math.log(40.0), max(math.log(60.0), ln_knee + 10.0)]
    for a, b in zip(cuts[:-1], cuts[1:]):
        if b > a:
            val, _ = quad(f, a, b, epsabs=1e-300, epsrel=1e-10, limit=500)
            total += val
    return total


def ber_weak(k: WeakModelConstants, M: int = 20, gamma_max: float = 4.0,
             with_method: bool = False):
    """OOK bit error rate from the erfc-series closed form.

    The series keeps the SNR integral below gamma_max and expands the
    Q-function kernel to order M; the stated defaults (20, 4) follow the
    source method and lose the gamma > gamma_max contribution, which
    dominates at high SNR -- raise gamma_max (with M ~ 1.5 gamma_max)
    for a converged value.  Every term is assembled in log space with
    sign-aware summation; if a term still leaves the floating range the
    function falls back to direct quadrature and tags the result.
    """
    a = 1.0 / (2.0 * math.sqrt(2.0 * k.C1))
    b = k.K / 2.0
    L3 = math.log(gamma_max) - math.log(k.upsilon_1) + 2.0 * k.C5
    log_L1 = k.log_C4 - math.log(4.0) - (k.K / 2.0) * math.log(k.upsilon_1)
    log_L2 = math.log(0.5) + k.K * (math.log(k.upsilon_1) - 2.0 * k.C5) / 2.0

    def log_bracket(bm: float) -> float:
        # e^{bm^2/(4a^2)} erfc(bm/(2a) - a L3) + e^{bm L3} erfc(a L3);
        # the exponent bm^2/(4a^2) (= 2 C1 bm^2) is pinned by consistency
        # with the CDF's e^{K^2 C1/2} term and by quadrature.
        x1 = bm / (2.0 * a) - a * L3
        lt1 = bm * bm / (4.0 * a * a) + _log_erfc(x1)
        lt2 = bm * L3 + _log_erfc(a * L3)
        m = max(lt1, lt2)
        return m + math.log(math.exp(lt1 - m) + math.exp(lt2 - m))

    try:
        logs = [-math.log(b) + log_bracket(b)]
        signs = [1.0]
        for m_ in range(M + 1):
            bm = b + m_ + 0.5
            log_l1m = (-sp.gammaln(m_ + 1) - 0.5 * math.log(math.pi)
                       - math.log(2 * m_ + 1) - (m_ - 0.5) * math.log(2.0)
                       + (2 * m_ + 1) * (math.log(k.upsilon_1) - 2.0 * k.C5) / 2.0)
            term = log_l1m - math.log(bm) + log_bracket(bm)
            if term + log_L1 + log_L2 > _MAX_LOG:
                raise NumericalOverflowError(
                    f"series term m={m_} exceeds range; reduce M or gamma_max"
                )
            logs.append(term)
            signs.append(-1.0 if m_ % 2 == 0 else 1.0)
        peak = max(logs)
        acc = sum(s * math.exp(lg - peak) for lg, s in zip(logs, signs))
        value = math.exp(log_L1 + log_L2 + peak) * acc
        method = "series"
        # catastrophic cancellation leaves acc at roundoff scale
        if not (value > 0.0 and math.isfinite(value)) or acc < 1e-9:
            raise NumericalOverflowError("series lost all significance")
    except NumericalOverflowError:
        value = _ber_weak_quadrature(k)
        method = "quadrature-fallback"
    value = min(value, 0.5)
    return (value, method) if with_method else value
