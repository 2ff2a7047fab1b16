"""Link-geometry, turbulence and loss tests.

Derived expectations are frozen from mpmath quadrature at 30 digits and
fine-grid Riemann sums (see values marked 'oracle').
"""

import math

import numpy as np
import pytest

from mrrlink.channel import (
    LinkConfig,
    Regime,
    beamwidth,
    beer_lambert,
    cn2_profile,
    equilateral_aperture,
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
from mrrlink.errors import DegenerateGeometryError

# mpmath 30-dps oracles
CN2_AT_100 = 3.93138129767296e-15        # cn2_profile(100, 1e-14, 27)
RYTOV_TABLE_CFG = 0.10646449599051222    # lambda=1550nm Z=1000 hg=2 hu=102 cn2=5e-15 V=27
TRIANGLE_4CM2_W01 = 0.0250775128712      # fine-grid Riemann sum, d=0


def cfg(**kw) -> LinkConfig:
    return LinkConfig(**kw)


class TestCn2Profile:
    def test_ground_value(self):
        # wind term vanishes at Z_h = 0 through the (1e-5 Z_h)^10 factor
        assert cn2_profile(0.0, 1e-14, 27.0) == pytest.approx(1e-14 + 2.7e-16, rel=1e-12)

    def test_decays_aloft(self):
        assert cn2_profile(1e6, 1e-14, 27.0) < 1e-60

    def test_oracle_value(self):
        assert cn2_profile(100.0, 1e-14, 27.0) == pytest.approx(CN2_AT_100, rel=1e-12)


class TestRytov:
    def test_zero_profile(self):
        # kill all three terms: cn2_0 = 0 and evaluate above the wind bump
        c = cfg(cn2_0=0.0, Z_hg=60000.0, Z_hu=60100.0)
        assert rytov_variance(c) < 1e-12

    def test_prefactor_scaling_in_Z(self):
        c1 = cfg(Z=1000.0)
        c2 = cfg(Z=2000.0)
        assert rytov_variance(c2) / rytov_variance(c1) == pytest.approx(2 ** (11 / 6), rel=1e-9)

    def test_oracle_value(self):
        c = cfg(wavelength=1550e-9, Z=1000.0, Z_hg=2.0, Z_hu=102.0, cn2_0=5e-15, wind_v=27.0)
        assert rytov_variance(c) == pytest.approx(RYTOV_TABLE_CFG, rel=1e-8)

    def test_increasing_in_Z(self):
        vals = [rytov_variance(cfg(Z=z)) for z in np.linspace(500, 1500, 6)]
        assert all(b > a for a, b in zip(vals, vals[1:]))

    def test_degenerate_geometry(self):
        # construction rejects equal heights, so force the state past
        # validation to exercise the quadrature guard itself
        c = cfg()
        object.__setattr__(c, "Z_hu", c.Z_hg)
        with pytest.raises(DegenerateGeometryError):
            rytov_variance(c)

    def test_degenerate_rejected_at_construction(self):
        with pytest.raises(ValueError):
            cfg(Z_hg=5.0, Z_hu=5.0)


class TestGGParams:
    def test_small_rytov_diverges(self):
        a, b = gg_params(1e-8)
        assert a > 1e6 and b > 1e6

    def test_oracle_at_one(self):
        a, b = gg_params(1.0)
        assert a == pytest.approx(4.393859025, abs=1e-6)
        assert b == pytest.approx(2.56363198, abs=1e-6)

    def test_alpha_at_least_beta(self):
        for s in np.geomspace(0.01, 30, 40):
            a, b = gg_params(float(s))
            assert a >= b > 0

    def test_domain(self):
        with pytest.raises(ValueError):
            gg_params(0.0)


class TestLosses:
    def test_beer_lambert_lossless(self):
        assert beer_lambert(cfg(h_l=None, zeta=0.0)) == 1.0

    def test_beer_lambert_direct_mode(self):
        assert beer_lambert(cfg(h_l=0.7)) == 0.7

    def test_beer_lambert_exponential(self):
        assert beer_lambert(cfg(h_l=None, zeta=1e-3, Z=1000.0)) == pytest.approx(math.exp(-1), rel=1e-12)

    def test_passes_identical(self):
        c = cfg(h_l=None, zeta=2e-4)
        assert beer_lambert(c) == beer_lambert(c)

    @pytest.mark.parametrize("theta,z,want", [(0.4e-3, 1000.0, 0.4), (2e-3, 500.0, 1.0),
                                              (0.1e-3, 1500.0, 0.15)])
    def test_beamwidth(self, theta, z, want):
        assert beamwidth(cfg(theta_div=theta, Z=z)) == pytest.approx(want, rel=1e-12)

    @pytest.mark.parametrize("r_g,z,theta,want", [
        (0.08, 1000.0, 0.4e-3, 0.08),
        (0.08, 500.0, 2e-3, 0.0128),
    ])
    def test_geometric_loss(self, r_g, z, theta, want):
        assert geometric_loss_gs(cfg(r_g=r_g, Z=z, theta_div=theta)) == pytest.approx(want, rel=1e-12)

    def test_quartering_with_divergence(self):
        c1, c2 = cfg(theta_div=0.4e-3), cfg(theta_div=0.8e-3)
        assert geometric_loss_gs(c2) == pytest.approx(geometric_loss_gs(c1) / 4, rel=1e-12)


class TestPointing:
    def test_center_value(self):
        c = cfg(A_r=1e-4, theta_div=0.4e-3, Z=1000.0)
        assert pointing_loss_approx(c, 0.0, 0.0) == pytest.approx(2e-4 / (math.pi * 0.16), rel=1e-12)

    def test_two_sigma_attenuation(self):
        c = cfg(theta_div=0.4e-3, Z=1000.0)
        w = beamwidth(c)
        ratio = pointing_loss_approx(c, w, 0.0) / pointing_loss_approx(c, 0.0, 0.0)
        assert ratio == pytest.approx(math.exp(-2.0), rel=1e-12)

    def test_bounded_by_center(self):
        c = cfg()
        amax = pointing_loss_approx(c, 0.0, 0.0)
        for d in np.linspace(0, 2, 15):
            v = pointing_loss_approx(c, d, -d / 2)
            assert 0 < v <= amax

    def test_exact_matches_disc_closed_form_small_aperture(self):
        # disc of equal area, radius << w_z: closed form 1 - exp(-2 rho^2 / w^2)
        c = cfg(A_r=1e-4, theta_div=0.4e-3, Z=1000.0)
        rho2 = c.A_r / math.pi
        disc = 1.0 - math.exp(-2.0 * rho2 / beamwidth(c) ** 2)
        approx = pointing_loss_approx(c, 0.0, 0.0)
        assert approx == pytest.approx(disc, rel=1e-3)

    def test_exact_oracle_equilateral(self):
        with pytest.warns(UserWarning):  # deliberately outside the plane-wave regime
            c = cfg(A_r=4e-4, theta_div=0.1e-3, Z=1000.0)  # w_z = 0.1
        got = pointing_loss_exact(c, 0.0, 0.0)
        assert got == pytest.approx(TRIANGLE_4CM2_W01, rel=1e-5)

    def test_exact_to_approx_plane_wave_limit(self):
        c = cfg(A_r=1e-6, theta_div=0.4e-3, Z=1000.0)  # A_r = 1e-6 << w^2
        exact = pointing_loss_exact(c, 0.05, -0.03)
        approx = pointing_loss_approx(c, 0.05, -0.03)
        assert exact == pytest.approx(approx, rel=1e-2)

    def test_aperture_area(self):
        tri = equilateral_aperture(4e-4)
        x, y = tri[:, 0], tri[:, 1]
        area = 0.5 * abs(x[0] * (y[1] - y[2]) + x[1] * (y[2] - y[0]) + x[2] * (y[0] - y[1]))
        assert area == pytest.approx(4e-4, rel=1e-12)

    def test_plane_wave_warning(self):
        with pytest.warns(UserWarning):
            cfg(A_r=4e-4, theta_div=0.1e-3, Z=1000.0)


class TestSnr:
    def test_zero_channel(self):
        assert snr_from_h(cfg(), 0.0) == 0.0

    def test_unit_channel_is_upsilon1(self):
        c = cfg()
        assert snr_from_h(c, 1.0) == pytest.approx(upsilon_1(c), rel=1e-14)

    def test_table_style_arithmetic(self):
        # sigma_n2 read as 10^-1.1 mA^2; gamma = upsilon_1 * h^2 exactly
        c = cfg(P_t=0.1, R_pd=0.8, sigma_n2=10 ** -1.1 * 1e-6)
        assert upsilon_1(c) == pytest.approx(161142.45271, rel=1e-9)
        assert snr_from_h(c, 1e-4) == pytest.approx(upsilon_1(c) * 1e-8, rel=1e-12)

    def test_monotone_in_h_and_power(self):
        c = cfg()
        hs = np.linspace(1e-6, 1e-3, 20)
        vals = snr_from_h(c, hs)
        assert np.all(np.diff(vals) > 0)
        p_vals = [snr_from_h(cfg(P_t=p), 1e-4) for p in np.linspace(0.01, 1.0, 10)]
        assert all(b > a for a, b in zip(p_vals, p_vals[1:]))

    def test_negative_h_rejected(self):
        with pytest.raises(ValueError):
            snr_from_h(cfg(), -1e-3)


class TestRegime:
    def test_sigma_r2_rule(self):
        weak = turbulence_stats(cfg(cn2_0=5e-15))
        assert weak.regime is Regime.WEAK_TO_MODERATE
        strong = turbulence_stats(cfg(cn2_0=1e-13))
        assert strong.regime is Regime.MODERATE_TO_STRONG

    def test_cn2_rule(self):
        st = turbulence_stats(cfg(cn2_0=1e-14), rule="cn2")
        assert st.regime is Regime.MODERATE_TO_STRONG
        st = turbulence_stats(cfg(cn2_0=9.9e-15), rule="cn2")
        assert st.regime is Regime.WEAK_TO_MODERATE

    def test_override(self):
        st = turbulence_stats(cfg(cn2_0=1e-14), regime="strong")
        assert st.regime is Regime.MODERATE_TO_STRONG
        assert st.sigma_L2 == pytest.approx(st.sigma_R2 / 4)

    def test_exclusive_loss_inputs(self):
        with pytest.raises(ValueError):
            LinkConfig(zeta=1e-4, h_l=0.7)
        with pytest.raises(ValueError):
            LinkConfig(zeta=None, h_l=None)


def test_h_constant_composition():
    c = cfg(h_l=0.7, r_g=0.08, Z=1000.0, theta_div=0.4e-3)
    assert h_constant(c) == pytest.approx(0.7 * 0.7 * 0.08, rel=1e-12)
