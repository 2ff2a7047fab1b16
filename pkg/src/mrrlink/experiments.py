"""Config-driven experiment runs: sweeps, the divergence optimizer and
the tracking-jitter/beamwidth outage map.

Grid points are independent and may be computed by a worker pool; rows
are always emitted in grid order and all randomness is seed-keyed, so
output files are byte-identical for any worker count.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .channel import LinkConfig, Regime, turbulence_stats
from .errors import NonPositiveBreakpointError
from .montecarlo import SimPlan, draw_channel, mc_ber, mc_outage
from .mrr import mrr_moments, sector_table
from .strong import (
    ber_strong,
    cdf_h_strong,
    cdf_snr_strong,
    outage_strong,
    pdf_h_strong,
    pdf_snr_strong,
    strong_constants,
)
from .weak import (
    WeakModelConstants,
    ber_weak,
    cdf_h_weak,
    cdf_snr_weak,
    outage_weak,
    pdf_h_weak,
    pdf_snr_weak,
    weak_constants,
)

__all__ = [
    "ExperimentSpec",
    "ExperimentResult",
    "run_experiment",
    "OptResult",
    "optimize_divergence",
    "heatmap",
    "golden_section",
    "SWEEP_AXES",
    "METRICS",
    "ENGINES",
]

SWEEP_AXES = ("Pt", "theta_div", "sigma_theta_e", "sigma_theta_o", "Z", "A_r", "Cn2", "w_z")
METRICS = ("pdf_h", "cdf_h", "pdf_snr", "cdf_snr", "outage", "ber")
ENGINES = ("analytic", "montecarlo")

# Flag thresholds for analytic-vs-MC agreement (scalar metrics are only
# judged above their resolvable floors at desk-scale sample counts).
_OUTAGE_FLOOR = 1e-4
_BER_FLOOR = 1e-7
_REL_TOL = 0.10
_KS_TOL = 0.02


@dataclass(frozen=True)
class ExperimentSpec:
    """One reproducible sweep: a base link, an axis with its grid, and
    which metrics/engines to evaluate."""

    base: LinkConfig
    sweep_axis: str
    grid: tuple
    metrics: tuple = ("outage",)
    engines: tuple = ("analytic", "montecarlo")
    output_path: str | None = None
    seed: int = 0
    n_samples: int = 1_000_000
    regime: str | None = None           # "weak" | "strong" | None = auto
    bins: int = 80
    ber_terms: int = 20
    ber_gamma_max: float = 4.0
    label: str = ""

    def __post_init__(self):
        if self.sweep_axis not in SWEEP_AXES:
            raise ValueError(f"sweep axis must be one of {SWEEP_AXES}, got {self.sweep_axis!r}")
        if len(self.grid) == 0:
            raise ValueError("grid must be non-empty")
        if list(self.grid) != sorted(self.grid):
            raise ValueError("grid must be sorted ascending")
        if not self.metrics or any(m not in METRICS for m in self.metrics):
            raise ValueError(f"metrics must be a non-empty subset of {METRICS}")
        if not self.engines or any(e not in ENGINES for e in self.engines):
            raise ValueError(f"engines must be a non-empty subset of {ENGINES}")


@dataclass
class ExperimentResult:
    spec: ExperimentSpec
    rows: list = field(default_factory=list)  # dicts, one per output row
    flags: list = field(default_factory=list)
    errors: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.flags


def apply_axis(cfg: LinkConfig, axis: str, value: float) -> LinkConfig:
    if axis == "Pt":
        return cfg.with_(P_t=value)
    if axis == "theta_div":
        return cfg.with_(theta_div=value)
    if axis == "sigma_theta_e":
        return cfg.with_(sigma_theta_e=value)
    if axis == "sigma_theta_o":
        return cfg.with_(sigma_theta_o=value)
    if axis == "Z":
        return cfg.with_(Z=value)
    if axis == "A_r":
        return cfg.with_(A_r=value)
    if axis == "Cn2":
        return cfg.with_(cn2_0=value)
    if axis == "w_z":
        return cfg.with_(theta_div=value / cfg.Z)
    raise ValueError(f"unknown sweep axis {axis!r}")


def _constants_for(cfg: LinkConfig, regime: str | None):
    stats = turbulence_stats(cfg, regime=regime)
    if stats.regime is Regime.WEAK_TO_MODERATE:
        moments = mrr_moments(cfg.sigma_theta_o)
        return weak_constants(cfg, moments, stats), stats
    sectors = sector_table(cfg.sigma_theta_o)
    return strong_constants(cfg, stats, sectors), stats


def _analytic_scalar(k, metric: str, cfg: LinkConfig, spec: ExperimentSpec) -> float:
    weak = isinstance(k, WeakModelConstants)
    if metric == "outage":
        return outage_weak(k, cfg.gamma_th) if weak else outage_strong(k, cfg.gamma_th)
    if metric == "ber":
        if weak:
            return ber_weak(k, M=spec.ber_terms, gamma_max=spec.ber_gamma_max)
        return ber_strong(k)
    raise ValueError(metric)


_PDF_FNS = {
    (True, "pdf_h"): pdf_h_weak, (True, "cdf_h"): cdf_h_weak,
    (True, "pdf_snr"): pdf_snr_weak, (True, "cdf_snr"): cdf_snr_weak,
    (False, "pdf_h"): pdf_h_strong, (False, "cdf_h"): cdf_h_strong,
    (False, "pdf_snr"): pdf_snr_strong, (False, "cdf_snr"): cdf_snr_strong,
}


def _grid_point_rows(spec: ExperimentSpec, value: float):
    """All output rows for one grid value.  Pure function of its inputs."""
    cfg = apply_axis(spec.base, spec.sweep_axis, value)
    rows: list[dict] = []
    flags: list[str] = []
    errors: list[str] = []
    scalar_metrics = [m for m in spec.metrics if m in ("outage", "ber")]
    dist_metrics = [m for m in spec.metrics if m not in ("outage", "ber")]

    k = None
    if "analytic" in spec.engines:
        try:
            k, _ = _constants_for(cfg, spec.regime)
        except (NonPositiveBreakpointError, ValueError) as exc:
            errors.append(f"{spec.sweep_axis}={value:g}: analytic constants failed: {exc}")

    mc_samples = None
    if "montecarlo" in spec.engines:
        plan = SimPlan(cfg, n_samples=spec.n_samples, seed=spec.seed)
        if dist_metrics:
            mc_samples = draw_channel(plan)

    def add(metric, engine, x, val, lo=math.nan, hi=math.nan, flag=""):
        rows.append({
            "sweep_axis": spec.sweep_axis, "sweep_value": value, "label": spec.label,
            "metric": metric, "engine": engine, "x": x, "value": val,
            "ci_low": lo, "ci_high": hi, "flag": flag,
        })

    for metric in scalar_metrics:
        a_val = mc_est = None
        if k is not None:
            try:
                a_val = _analytic_scalar(k, metric, cfg, spec)
            except Exception as exc:  # recorded, run continues
                errors.append(f"{spec.sweep_axis}={value:g}: analytic {metric} failed: {exc}")
        if "montecarlo" in spec.engines:
            plan = SimPlan(cfg, n_samples=spec.n_samples, seed=spec.seed)
            mc_est = (mc_outage(plan, cfg.gamma_th) if metric == "outage" else mc_ber(plan))
        flag = ""
        if a_val is not None and mc_est is not None:
            floor = _OUTAGE_FLOOR if metric == "outage" else _BER_FLOOR
            if mc_est.value >= floor:
                lo = min(mc_est.ci_low, mc_est.value * (1 - _REL_TOL))
                hi = max(mc_est.ci_high, mc_est.value * (1 + _REL_TOL))
                if not (lo <= a_val <= hi):
                    flag = "tolerance"
                    flags.append(f"{spec.sweep_axis}={value:g} {metric}: "
                                 f"analytic {a_val:.3e} outside [{lo:.3e}, {hi:.3e}]")
        if a_val is not None:
            add(metric, "analytic", math.nan, a_val, flag=flag)
        if mc_est is not None:
            add(metric, "montecarlo", math.nan, mc_est.value, mc_est.ci_low, mc_est.ci_high)

    if dist_metrics:
        h_mc = g_mc = None
        if mc_samples is not None:
            h_mc, g_mc = mc_samples
        for metric in dist_metrics:
            samples = None
            if mc_samples is not None:
                samples = h_mc if metric.endswith("_h") else g_mc
            if samples is not None:
                edges = np.linspace(0.0, float(samples.max()) * 1.001, spec.bins + 1)
            elif k is not None:
                # support guess from the analytic model scale
                top = 20.0 / k.C3 if isinstance(k, WeakModelConstants) else \
                    20.0 * 2.0 * k.A_r * k.h_c / (math.pi * k.w_z ** 2)
                if metric.endswith("_snr"):
                    top = k.upsilon_1 * top ** 2
                edges = np.linspace(0.0, top, spec.bins + 1)
            else:
                continue
            centers = 0.5 * (edges[:-1] + edges[1:])
            ana_vals = None
            if k is not None:
                fn = _PDF_FNS[(isinstance(k, WeakModelConstants), metric)]
                ana_vals = np.asarray(fn(centers, k))
                for x, v in zip(centers, ana_vals):
                    add(metric, "analytic", float(x), float(v))
            mc_vals = None
            if samples is not None:
                if metric.startswith("pdf"):
                    counts, _ = np.histogram(samples, bins=edges)
                    mc_vals = counts / len(samples) / np.diff(edges)
                else:
                    mc_vals = (np.searchsorted(np.sort(samples), centers, side="right")
                               / len(samples))
                for x, v in zip(centers, mc_vals):
                    add(metric, "montecarlo", float(x), float(v))
            if ana_vals is not None and mc_vals is not None and metric.startswith("cdf"):
                # bin centers already carry both curves; compare there
                ks = float(np.abs(ana_vals - mc_vals).max())
                if ks > _KS_TOL:
                    flags.append(f"{spec.sweep_axis}={value:g} {metric}: KS={ks:.3f} > {_KS_TOL}")
                    rows[-1]["flag"] = "tolerance"
    return rows, flags, errors


def run_experiment(spec: ExperimentSpec, workers: int = 1) -> ExperimentResult:
    """Evaluate the sweep; write CSV (+ JSON sidecar) when output_path set."""
    result = ExperimentResult(spec)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_grid_point_rows, [spec] * len(spec.grid), spec.grid))
    else:
        parts = [_grid_point_rows(spec, v) for v in spec.grid]
    for rows, flags, errors in parts:       # grid order preserved
        result.rows.extend(rows)
        result.flags.extend(flags)
        result.errors.extend(errors)
    if spec.output_path:
        write_outputs(result, spec.output_path)
    return result


_CSV_COLUMNS = ("sweep_axis", "sweep_value", "label", "metric", "engine",
                "x", "value", "ci_low", "ci_high", "flag")


def _fmt(v) -> str:
    if isinstance(v, float):
        if math.isnan(v):
            return ""
        return f"{v:.12g}"
    return str(v)


def write_outputs(result, path: str, extra_meta: dict | None = None) -> None:
    """Deterministic CSV plus a JSON sidecar with the resolved setup."""
    rows = result.rows if hasattr(result, "rows") else result
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(_CSV_COLUMNS) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(row[c]) for c in _CSV_COLUMNS) + "\n")
    meta: dict = {"version": __version__}
    if hasattr(result, "spec"):
        spec = result.spec
        meta.update({
            "base_config": {k: v for k, v in vars(spec.base).items()},
            "sweep_axis": spec.sweep_axis,
            "grid": list(spec.grid),
            "metrics": list(spec.metrics),
            "engines": list(spec.engines),
            "seed": spec.seed,
            "n_samples": spec.n_samples,
            "regime": spec.regime,
            "label": spec.label,
            "flags": list(result.flags),
            "errors": list(result.errors),
        })
    if extra_meta:
        meta.update(extra_meta)
    with open(path + ".json", "w", encoding="utf-8", newline="\n") as fh:
        json.dump(meta, fh, sort_keys=True, indent=2, default=str)
        fh.write("\n")


def golden_section(f, a: float, b: float, tol: float) -> tuple[float, float]:
    """Minimize a unimodal f on [a, b] to within tol; returns (x, f(x))."""
    inv_phi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - (b - a) * inv_phi
    d = a + (b - a) * inv_phi
    fc, fd = f(c), f(d)
    while abs(b - a) > tol:
        if fc < fd:
            b, d, fd = d, c, fc
            c = b - (b - a) * inv_phi
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + (b - a) * inv_phi
            fd = f(d)
    x = 0.5 * (a + b)
    return x, f(x)


@dataclass(frozen=True)
class OptResult:
    theta_opt: float
    value: float
    interior: bool
    message: str = ""


def optimize_divergence(cfg: LinkConfig, objective: str = "outage",
                        bracket: tuple[float, float] = (0.1e-3, 2e-3),
                        tol: float = 1e-6, regime: str | None = None) -> OptResult:
    """Find the divergence angle minimizing analytic outage or BER.

    Golden-section search on the closed-form objective; if the minimum
    sits at a bracket edge the objective is monotone there and the edge
    is reported rather than claimed optimal.
    """
    if objective not in ("outage", "ber"):
        raise ValueError("objective must be 'outage' or 'ber'")
    lo, hi = bracket
    if not (0 < lo < hi):
        raise ValueError("bracket must satisfy 0 < lo < hi")

    def f(theta):
        c = cfg.with_(theta_div=theta)
        k, _ = _constants_for(c, regime)
        if objective == "outage":
            val = (outage_weak(k, c.gamma_th) if isinstance(k, WeakModelConstants)
                   else outage_strong(k, c.gamma_th))
        else:
            val = (ber_weak(k, M=60, gamma_max=40.0) if isinstance(k, WeakModelConstants)
                   else ber_strong(k))
        # log objective: outage/BER span many decades
        return math.log(max(val, 1e-300))

    x, fx = golden_section(f, lo, hi, tol)
    interior = (x - lo > 2 * tol) and (hi - x > 2 * tol)
    if not interior:
        edge = lo if x - lo <= 2 * tol else hi
        fe = f(edge)
        return OptResult(edge, math.exp(fe), False,
                         f"objective is monotone on the bracket; best edge {edge:g} rad")
    return OptResult(x, math.exp(fx), True)


def heatmap(cfg: LinkConfig, sigma_e_grid, wz_grid, metric: str = "outage",
            regime: str | None = None) -> np.ndarray:
    """Matrix of the analytic metric over (tracking jitter) x (beamwidth).

    Rows follow sigma_e_grid, columns wz_grid; each cell is exactly the
    standalone closed-form evaluation for that configuration.
    """
    if metric not in ("outage", "ber"):
        raise ValueError("heatmap metric must be 'outage' or 'ber'")
    out = np.empty((len(sigma_e_grid), len(wz_grid)))
    for i, se in enumerate(sigma_e_grid):
        for j, wz in enumerate(wz_grid):
            c = cfg.with_(sigma_theta_e=float(se), theta_div=float(wz) / cfg.Z)
            k, _ = _constants_for(c, regime)
            if metric == "outage":
                out[i, j] = (outage_weak(k, c.gamma_th) if isinstance(k, WeakModelConstants)
                             else outage_strong(k, c.gamma_th))
            else:
                out[i, j] = (ber_weak(k, M=60, gamma_max=40.0)
                             if isinstance(k, WeakModelConstants) else ber_strong(k))
    return out
