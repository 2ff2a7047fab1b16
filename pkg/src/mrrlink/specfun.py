"""Special-function kernels used by the analytical channel models.

Everything here is a pure function of its arguments.  The elementary
kernels (Q-function, erf/erfc, modified Bessel K) wrap the well-tested
scipy implementations; the Meijer G-function is evaluated by direct
numerical Mellin-Barnes integration because the orders needed by the
channel statistics (up to G^{10,2}_{4,11} with repeated parameters) are
outside what series-based evaluators handle reliably.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from scipy import special as sp
from scipy.optimize import minimize_scalar

from .errors import InvalidOrderError, MismatchedLengthsError, NonConvergentError

__all__ = [
    "q_function",
    "log_q",
    "erf",
    "erfc",
    "gamma",
    "bessel_k",
    "MeijerGSpec",
    "meijer_g",
    "interp_table",
    "EPSILON",
]

# Parameter nudge used when repeated Meijer parameters are split for the
# epsilon-regularized evaluation path (see meijer_g(method="epsilon")).
EPSILON = 1e-6


def q_function(x):
    """Gaussian tail probability Q(x) = P(N(0,1) > x) = erfc(x/sqrt(2))/2."""
    return 0.5 * sp.erfc(np.asarray(x, dtype=float) / np.sqrt(2.0))


def log_q(x):
    """log Q(x), stable for large positive x where Q underflows."""
    return sp.log_ndtr(-np.asarray(x, dtype=float))


def erf(x):
    return sp.erf(x)


def erfc(x):
    return sp.erfc(x)


def gamma(x):
    return sp.gamma(x)


def bessel_k(nu: float, x):
    """Modified Bessel function of the second kind K_nu(x), x > 0.

    Even in nu; positive and decreasing in x.
    """
    x = np.asarray(x, dtype=float)
    if np.any(x <= 0.0):
        raise ValueError("bessel_k requires x > 0")
    out = sp.kv(nu, x)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class MeijerGSpec:
    """Order and parameter vectors of one Meijer G-function G^{m,n}_{p,q}.

    a_params has length p (first n entries are the "numerator" a's),
    b_params has length q (first m entries are the "numerator" b's).
    """

    m: int
    n: int
    a_params: tuple
    b_params: tuple

    def __post_init__(self):
        object.__setattr__(self, "a_params", tuple(float(v) for v in self.a_params))
        object.__setattr__(self, "b_params", tuple(float(v) for v in self.b_params))
        p, q = len(self.a_params), len(self.b_params)
        if not (0 <= self.n <= p and 0 <= self.m <= q):
            raise InvalidOrderError(
                f"need 0 <= n <= p and 0 <= m <= q, got m={self.m}, n={self.n}, p={p}, q={q}"
            )
        if self.m + self.n == 0:
            raise InvalidOrderError("m + n must be positive")
        # A pole of Gamma(b_j - t) colliding with a pole of Gamma(1 - a_i + t)
        # makes the defining contour impossible: a_i - b_j a positive integer.
        for ai in self.a_params[: self.n]:
            for bj in self.b_params[: self.m]:
                d = ai - bj
                if d >= 0.5 and abs(d - round(d)) < 1e-9:
                    raise InvalidOrderError(
                        f"a={ai} and b={bj} differ by a positive integer; "
                        "the contour poles coincide"
                    )

    @property
    def p(self) -> int:
        return len(self.a_params)

    @property
    def q(self) -> int:
        return len(self.b_params)

    @property
    def delta(self) -> float:
        """Exponential decay rate of the contour integrand (must be > 0)."""
        return self.m + self.n - 0.5 * (self.p + self.q)


def _chi_log(t, spec: MeijerGSpec):
    """log of the Mellin-Barnes gamma ratio at complex contour point(s) t."""
    t = np.asarray(t, dtype=complex)
    val = np.zeros_like(t)
    a, b, m, n = spec.a_params, spec.b_params, spec.m, spec.n
    for bj in b[:m]:
        val = val + sp.loggamma(bj - t)
    for ai in a[:n]:
        val = val + sp.loggamma(1.0 - ai + t)
    for bj in b[m:]:
        val = val - sp.loggamma(1.0 - bj + t)
    for ai in a[n:]:
        val = val - sp.loggamma(ai - t)
    return val


def _contour_abscissa(spec: MeijerGSpec, lnz: float) -> float:
    """Pick the real abscissa of the vertical contour.

    The contour must leave the poles of Gamma(b_j - t) on its right and
    those of Gamma(1 - a_i + t) on its left.  Within the admissible range
    we place it at the minimum of |integrand| (the real saddle), which
    keeps the oscillatory cancellation bounded even when the result is
    exponentially small.
    """
    hi = min(spec.b_params[: spec.m]) if spec.m else np.inf
    lo = max(ai - 1.0 for ai in spec.a_params[: spec.n]) if spec.n else -np.inf

    def g(c):
        return float(np.real(_chi_log(complex(c, 0.0), spec)) + c * lnz)

    if np.isfinite(lo) and np.isfinite(hi):
        if hi - lo <= 1e-12:
            raise InvalidOrderError("no admissible contour between pole families")
        band = hi - lo
        res = minimize_scalar(
            g, bounds=(lo + 0.05 * band, hi - 0.05 * band), method="bounded",
            options={"xatol": 1e-8},
        )
        c = float(res.x)
    else:
        # One side unbounded: expand away from the bounded edge until the
        # saddle is bracketed, then minimize.
        if np.isfinite(hi):
            edge, sgn = hi - 1e-3, -1.0
        else:
            edge, sgn = lo + 1e-3, 1.0
        w = 1.0
        while g(edge + sgn * 2 * w) < g(edge + sgn * w) and w < 1e8:
            w *= 2
        lo_b, hi_b = sorted((edge, edge + sgn * 2 * w))
        res = minimize_scalar(g, bounds=(lo_b, hi_b), method="bounded",
                              options={"xatol": 1e-8})
        c = float(res.x)
    # Keep clear of any exact pole of the numerator/denominator gammas.
    for v in spec.b_params + spec.a_params:
        for k in range(-3, 4):
            if abs(c - (v + k)) < 1e-9:
                c += 1.37e-7
    return c


def meijer_g(spec: MeijerGSpec, z: float, eps_rel: float = 1e-11,
             method: str = "direct") -> float:
    """Evaluate G^{m,n}_{p,q}(z | a; b) for real z > 0.

    method="direct" integrates along a saddle-anchored vertical contour;
    repeated parameters are harmless there because the contour never
    approaches the poles.  method="epsilon" instead splits repeated
    parameters by +/-EPSILON and Richardson-extrapolates the split to
    zero; it exists to cross-check the direct path on the logarithmic
    (coincident-pole) cases and gives the same answers.
    """
    if z <= 0.0 or not np.isfinite(z):
        raise ValueError("meijer_g requires finite z > 0")
    if method == "epsilon":
        return _meijer_g_epsilon(spec, z, eps_rel)
    if method != "direct":
        raise ValueError(f"unknown method {method!r}")
    if spec.delta <= 0:
        raise NonConvergentError(
            f"contour integrand does not decay (delta={spec.delta}); "
            "evaluate the reciprocal-argument form instead"
        )
    return _mellin_barnes(spec, float(z), eps_rel)


@lru_cache(maxsize=8)
def _gl_nodes(n: int):
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def _panels(T: float, width: float) -> np.ndarray:
    """Geometric panel boundaries [0, w, 2w, 4w, ...] capped at T."""
    edges = [0.0]
    step = max(width, 1e-3)
    while edges[-1] < T:
        edges.append(min(edges[-1] + step, T))
        step *= 2.0
    return np.asarray(edges)


def _mellin_barnes(spec: MeijerGSpec, z: float, eps_rel: float) -> float:
    lnz = np.log(z)
    c = _contour_abscissa(spec, lnz)
    log_peak = float(np.real(_chi_log(complex(c, 0.0), spec)) + c * lnz)
    rate = max(spec.delta * np.pi, 0.05)
    # Upper limit: exponential decay at `rate` per unit tau, plus the
    # Gaussian saddle width ~ sqrt(|c|) when the saddle sits far out.
    T = max(30.0, np.log(1e19) / rate, 14.0 * np.sqrt(abs(c) + 4.0))
    # Panel width tracks both the oscillation period and the peak width.
    width = min(2.0 * np.pi / (abs(lnz) + 1.0), np.sqrt(abs(c) + 1.0), 1.0)
    edges = _panels(T, width)

    def integrate(n_nodes: int) -> float:
        x, w = _gl_nodes(n_nodes)
        mid = 0.5 * (edges[:-1] + edges[1:])
        half = 0.5 * np.diff(edges)
        taus = (mid[:, None] + half[:, None] * x[None, :]).ravel()
        t = c + 1j * taus
        vals = np.exp(_chi_log(t, spec) + t * lnz - log_peak).real
        return float(np.sum(vals.reshape(len(mid), -1) * w[None, :] * half[:, None]))

    i1 = integrate(24)
    i2 = integrate(48)
    err = abs(i2 - i1)
    total = i2
    if err > max(eps_rel * 10 * abs(total), 1e-13):
        i3 = integrate(96)
        err = abs(i3 - i2)
        total = i3
    tail_bound = np.exp(-rate * T) / rate
    if not np.isfinite(total):
        raise NonConvergentError("Mellin-Barnes integral returned non-finite value")
    if err + tail_bound > max(1e-7 * abs(total), 1e-13):
        raise NonConvergentError(
            f"Mellin-Barnes integral error {err + tail_bound:.2e} "
            f"exceeds tolerance for value {total:.2e}"
        )
    return float(np.exp(log_peak) * total / np.pi)


def _split_repeats(values, eps: float):
    """Spread exactly-repeated entries of `values` symmetrically by eps."""
    vals = list(values)
    groups: dict[float, list[int]] = {}
    for i, v in enumerate(vals):
        groups.setdefault(v, []).append(i)
    for v, idx in groups.items():
        k = len(idx)
        if k > 1:
            offsets = (np.arange(k) - (k - 1) / 2.0) * eps
            for j, off in zip(idx, offsets):
                vals[j] = v + off
    return tuple(vals)


def _meijer_g_epsilon(spec: MeijerGSpec, z: float, eps_rel: float) -> float:
    def eval_at(eps):
        s = replace(
            spec,
            a_params=_split_repeats(spec.a_params, eps),
            b_params=_split_repeats(spec.b_params, eps),
        )
        return _mellin_barnes(s, z, eps_rel)

    v1 = eval_at(EPSILON)
    v2 = eval_at(EPSILON / 2)
    # Splitting is symmetric, so the leading error is O(eps^2).
    return (4.0 * v2 - v1) / 3.0


@lru_cache(maxsize=4096)
def _meijer_cached(m, n, a, b, z):
    return meijer_g(MeijerGSpec(m, n, a, b), z)


def meijer_g_cached(m: int, n: int, a, b, z: float) -> float:
    """Memoized meijer_g for the hot analytic-model loops."""
    return _meijer_cached(int(m), int(n), tuple(a), tuple(b), float(z))


def interp_table(xs, ys, x):
    """Piecewise-linear interpolation, clamped at the table endpoints."""
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise MismatchedLengthsError(
            f"xs and ys must be 1-D and equal length, got {xs.shape} vs {ys.shape}"
        )
    if xs.size < 2:
        raise MismatchedLengthsError("need at least two table nodes")
    if np.any(np.diff(xs) <= 0):
        raise ValueError("xs must be strictly increasing")
    out = np.interp(x, xs, ys)
    return float(out) if np.ndim(x) == 0 else out
