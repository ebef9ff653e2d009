import math
from dataclasses import replace

import pytest
from hypothesis import given, strategies as st

from fsosn import link_budget as lb
from fsosn.geometry import elevation_from_slant

import golden

PARAMS = lb.LinkBudgetParams()


class TestGains:
    def test_transmitter_gain_value(self):
        assert lb.transmitter_gain(15e-6) == pytest.approx(7.111e10, rel=1e-3)

    def test_transmitter_gain_unit_case(self):
        assert lb.transmitter_gain(4.0) == 1.0

    def test_halving_divergence_quadruples_gain(self):
        assert lb.transmitter_gain(7.5e-6) == pytest.approx(4 * lb.transmitter_gain(15e-6))

    def test_receiver_gain_value(self):
        assert lb.receiver_gain(80.0, 1550.0) == pytest.approx(2.628e10, rel=1e-3)

    def test_receiver_gain_unit_case(self):
        d_mm = 1550e-9 / math.pi * 1e3
        assert lb.receiver_gain(d_mm, 1550.0) == pytest.approx(1.0, rel=1e-12)

    def test_doubling_diameter_quadruples_gain(self):
        assert lb.receiver_gain(160.0, 1550.0) == pytest.approx(4 * lb.receiver_gain(80.0, 1550.0))


class TestPointingLoss:
    def test_zero_error_is_unity(self):
        assert lb.pointing_loss(7.1e10, 0.0) == 1.0

    def test_transmit_value(self):
        assert lb.pointing_loss(lb.transmitter_gain(15e-6), 1e-6) == pytest.approx(0.9314, abs=1e-4)

    def test_receive_value(self):
        assert lb.pointing_loss(lb.receiver_gain(80.0, 1550.0), 1e-6) == pytest.approx(0.9741, abs=1e-4)


class TestFreeSpacePathLoss:
    def test_values(self):
        assert lb.free_space_path_loss(1550.0, 2410.3) == pytest.approx(2.619e-27, rel=1e-3)
        assert lb.free_space_path_loss(1550.0, 968.3) == pytest.approx(1.623e-26, rel=1e-3)

    def test_inverse_square(self):
        assert lb.free_space_path_loss(1550.0, 2000.0) == pytest.approx(
            lb.free_space_path_loss(1550.0, 1000.0) / 4.0, rel=1e-12)

    def test_rejects_nonpositive_distance(self):
        with pytest.raises(ValueError):
            lb.free_space_path_loss(1550.0, 0.0)


class TestMieScattering:
    def test_extinction_ratio_at_station_height(self):
        assert lb.mie_extinction_ratio(0.1, 1.55) == pytest.approx(0.1228, abs=1e-3)

    def test_sea_level_equals_constant_coefficient(self):
        assert lb.mie_extinction_ratio(0.0, 1.55) == pytest.approx(0.1321, abs=1e-3)

    def test_wavelength_validity_band(self):
        with pytest.raises(ValueError):
            lb.mie_extinction_ratio(0.1, 0.4)
        with pytest.raises(ValueError):
            lb.mie_extinction_ratio(0.1, 2.5)

    def test_attenuation_values(self):
        assert lb.mie_attenuation(0.1228, 90.0) == pytest.approx(0.8844, abs=1e-3)
        assert lb.mie_attenuation(0.1228, 27.3) == pytest.approx(0.7654, abs=1e-3)

    def test_zero_extinction_is_transparent(self):
        assert lb.mie_attenuation(0.0, 45.0) == 1.0

    def test_rejects_grazing_elevation(self):
        with pytest.raises(ValueError):
            lb.mie_attenuation(0.1, 0.0)


class TestGeometricScattering:
    def test_visibility_values(self):
        assert lb.visibility(lb.THIN_CIRRUS) == pytest.approx(290.9, rel=0.01)
        assert lb.visibility(lb.CUMULUS) == pytest.approx(0.0281, rel=0.01)

    def test_visibility_unit_case(self):
        w = lb.WeatherProfile("unit", number_cm3=1.0, water_gm3=1.002 ** (1 / 0.6473))
        assert lb.visibility(w) == pytest.approx(1.0, rel=1e-12)

    def test_attenuation_coefficient_values(self):
        v = lb.visibility(lb.THIN_CIRRUS)
        assert lb.geometric_attenuation_coefficient(v, 1550.0, 1.6) == pytest.approx(
            2.561e-3, rel=0.01)
        vc = lb.visibility(lb.CUMULUS)
        assert lb.geometric_attenuation_coefficient(vc, 1550.0, 1.6) == pytest.approx(26.5, rel=0.02)

    def test_reference_wavelength_coefficient(self):
        assert lb.geometric_attenuation_coefficient(10.0, 550.0, 1.6) == pytest.approx(0.391)

    def test_attenuation_values(self):
        assert lb.geometric_attenuation(2.561e-3, 38.51) == pytest.approx(0.9061, abs=1e-3)
        assert lb.geometric_attenuation(1.0, 0.0) == 1.0

    def test_opaque_cloud_clamps_to_zero(self):
        assert lb.geometric_attenuation(26.5, 38.5) == 0.0


class TestAtmosphericLoss:
    def test_uplink_thin_cirrus(self):
        assert lb.atmospheric_loss("up", 31.1, 0.1, lb.THIN_CIRRUS, 1550.0) == pytest.approx(
            0.9061, abs=1e-3)

    def test_downlink_thin_cirrus(self):
        assert lb.atmospheric_loss("down", 27.3, 0.1, lb.THIN_CIRRUS, 1550.0) == pytest.approx(
            0.6850, abs=2e-3)

    def test_uplink_at_zenith_closed_form(self):
        w = lb.THIN_CIRRUS
        theta_a = lb.geometric_attenuation_coefficient(lb.visibility(w), 1550.0, w.particle_coeff)
        assert lb.atmospheric_loss("up", 90.0, 0.1, w, 1550.0) == pytest.approx(
            math.exp(-theta_a * 19.9), rel=1e-12)

    def test_downlink_never_exceeds_uplink(self):
        for elev in (10.0, 30.0, 60.0, 90.0):
            up = lb.atmospheric_loss("up", elev, 0.1, lb.THIN_CIRRUS, 1550.0)
            down = lb.atmospheric_loss("down", elev, 0.1, lb.THIN_CIRRUS, 1550.0)
            assert down <= up

    def test_unknown_direction_rejected(self):
        with pytest.raises(ValueError):
            lb.atmospheric_loss("sideways", 30.0, 0.1, lb.THIN_CIRRUS, 1550.0)


class TestReceivedPower:
    def test_isl_value(self):
        # -35.5 dBm + 3 dB = -32.5 dBm
        assert lb.received_power(PARAMS, "isl") == pytest.approx(5.623e-7, rel=1e-3)

    def test_updown_value(self):
        assert lb.received_power(PARAMS, "updown") == pytest.approx(1.122e-6, rel=1e-3)

    def test_zero_margin_gives_sensitivity(self):
        p = replace(PARAMS, margin_isl_db=0.0)
        assert lb.received_power(p, "isl") == pytest.approx(
            lb.dbm_to_watts(PARAMS.sensitivity_dbm), rel=1e-12)

    @given(st.floats(-100.0, 50.0))
    def test_dbm_round_trip(self, p_dbm):
        assert lb.watts_to_dbm(lb.dbm_to_watts(p_dbm)) == pytest.approx(p_dbm, rel=1e-12, abs=1e-12)


class TestTransmissionPower:
    def test_isl_power_table_values(self):
        d1 = 8.04 * golden.LIGHT_KM_PER_MS
        assert lb.lisl_transmission_power(PARAMS, d1) * 1e3 == pytest.approx(198.26, rel=0.01)
        d2 = 3.94 * golden.LIGHT_KM_PER_MS
        assert lb.lisl_transmission_power(PARAMS, d2) * 1e3 == pytest.approx(47.67, rel=0.01)

    def test_isl_power_quadratic_in_distance(self):
        assert lb.lisl_transmission_power(PARAMS, 2000.0) == pytest.approx(
            4 * lb.lisl_transmission_power(PARAMS, 1000.0), rel=1e-12)

    def test_uplink_power_table_value(self):
        d = 3.23 * golden.LIGHT_KM_PER_MS
        e = elevation_from_slant(d, 550.0, 0.1)
        p = lb.updown_transmission_power(PARAMS, "up", d, e, 0.1, lb.THIN_CIRRUS)
        assert p * 1e3 == pytest.approx(70.42, rel=0.01)

    def test_downlink_power_table_value(self):
        d = 3.53 * golden.LIGHT_KM_PER_MS
        e = elevation_from_slant(d, 550.0, 0.1)
        p = lb.updown_transmission_power(PARAMS, "down", d, e, 0.1, lb.THIN_CIRRUS)
        assert p * 1e3 == pytest.approx(111.49, rel=0.01)

    def test_vacuum_reduces_to_isl_budget(self):
        # P_ud * L_A / P_isl must equal the received-power ratio exactly
        d, elev = 1200.0, 40.0
        l_a = lb.atmospheric_loss("up", elev, 0.1, lb.THIN_CIRRUS, 1550.0)
        p_ud = lb.updown_transmission_power(PARAMS, "up", d, elev, 0.1, lb.THIN_CIRRUS)
        p_isl = lb.lisl_transmission_power(PARAMS, d)
        ratio = lb.received_power(PARAMS, "updown") / lb.received_power(PARAMS, "isl")
        assert p_ud * l_a / p_isl == pytest.approx(ratio, rel=1e-12)

    def test_downlink_needs_at_least_uplink_power(self):
        for elev in (26.0, 40.0, 70.0):
            for d in (700.0, 1000.0):
                up = lb.updown_transmission_power(PARAMS, "up", d, elev, 0.1, lb.THIN_CIRRUS)
                down = lb.updown_transmission_power(PARAMS, "down", d, elev, 0.1, lb.THIN_CIRRUS)
                assert down >= up

    def test_cumulus_is_infeasible(self):
        with pytest.raises(lb.InfeasibleLinkError):
            lb.updown_transmission_power(PARAMS, "up", 1000.0, 30.0, 0.1, lb.CUMULUS)

    @given(st.floats(5.0, 90.0), st.floats(100.0, 2500.0))
    def test_losses_in_unit_interval_and_power_positive(self, elev, d):
        l_a = lb.atmospheric_loss("down", elev, 0.1, lb.THIN_CIRRUS, 1550.0)
        assert 0.0 < l_a <= 1.0
        assert lb.lisl_transmission_power(PARAMS, d) > 0.0

    def test_divergence_must_exceed_jitter(self):
        with pytest.raises(ValueError):
            lb.LinkBudgetParams(divergence_rad=0.5e-6)
