"""Channel modeling toolkit for retroreflector-based UAV-to-ground
free-space optical links.

The double-pass channel (interrogator beam up, modulated retroreflection
back) is the product of deterministic losses, two independent fading
passes, a pointing factor driven by the ground tracker's angular jitter,
and the retroreflector's orientation-dependent reflection coefficient.
The package provides closed-form channel/SNR statistics in both fading
regimes, a reproducible Monte-Carlo engine that serves as their oracle,
and a sweep/optimization layer reproducing the reference figures.
"""

__version__ = "0.1.0"

from .channel import (
    LinkConfig,
    Regime,
    TurbulenceStats,
    beamwidth,
    beer_lambert,
    cn2_profile,
    geometric_loss_gs,
    gg_params,
    h_constant,
    pointing_loss_approx,
    pointing_loss_exact,
    rytov_variance,
    snr_from_h,
    turbulence_stats,
    upsilon_1,
)
from .experiments import (
    ExperimentSpec,
    OptResult,
    heatmap,
    optimize_divergence,
    run_experiment,
)
from .montecarlo import (
    EmpiricalDistribution,
    FadingModel,
    MCEstimate,
    PointingModel,
    SimPlan,
    draw_channel,
    empirical_cdf,
    empirical_pdf,
    mc_ber,
    mc_outage,
    sample_channel,
)
from .mrr import (
    MrrMomentTable,
    SectorModel,
    fit_sector_model,
    hmrr_component,
    lognormal_hmrr_pdf,
    model_moments,
    mrr_moments,
    sample_hmrr,
    sector_table,
)
from .specfun import MeijerGSpec, bessel_k, erf, erfc, interp_table, meijer_g, q_function
from .strong import (
    StrongModelConstants,
    ber_strong,
    cdf_h_strong,
    cdf_h_strong_simple,
    cdf_snr_strong,
    cdf_snr_strong_simple,
    outage_strong,
    pdf_h_strong,
    pdf_h_strong_simple,
    pdf_snr_strong,
    pdf_snr_strong_simple,
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
