"""Optical-power mathematics for laser satellite links.

Transmission power for an inter-satellite link is

    P_T = P_R / (G_T G_R L_T L_R L_PS eta_T eta_R)

and for an uplink/downlink the free-space loss is taken over the slant
distance and an atmospheric attenuation factor L_A is added:

    P_T = P_R / (G_T G_R L_T L_R L_A L_PG eta_T eta_R)

Uplinks see geometrical (cloud/fog) scattering only; downlinks see Mie
scattering plus geometrical scattering.

Unit discipline (the source conventions mix units silently, so every
function declares its own): the Mie polynomial takes the wavelength in
micrometers, the visibility-based attenuation coefficient takes it in
nanometers, and gains/path losses work in SI internally. Distances cross
the API in km, powers in Watts.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .geometry import troposphere_path_length

ATTENUATION_FLOOR = 1e-300  # below this a loss factor is clamped to exactly 0


class InfeasibleLinkError(ValueError):
    """Raised when a link's attenuation has collapsed to zero (no finite
    transmission power closes the budget)."""


@dataclass(frozen=True)
class LinkBudgetParams:
    """Optical-terminal constants shared by every link in a scenario."""
    wavelength_nm: float = 1550.0
    eta_t: float = 0.8                 # transmitter optics efficiency
    eta_r: float = 0.8                 # receiver optics efficiency
    divergence_rad: float = 15e-6      # full transmit divergence angle
    rx_diameter_mm: float = 80.0
    pointing_err_t_rad: float = 1e-6
    pointing_err_r_rad: float = 1e-6
    sensitivity_dbm: float = -35.5     # OOK @ 10 Gbps @ 1e-12 BER
    margin_isl_db: float = 3.0
    margin_updown_db: float = 6.0
    data_rate_gbps: float = 10.0

    def __post_init__(self):
        for name in ("wavelength_nm", "eta_t", "eta_r", "divergence_rad",
                     "rx_diameter_mm", "data_rate_gbps"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.divergence_rad < self.pointing_err_t_rad:
            raise ValueError("divergence angle must exceed the pointing jitter")


@dataclass(frozen=True)
class WeatherProfile:
    """Cloud scenario for the atmospheric attenuation model.

    `number_cm3` is the cloud number concentration (cm^-3) and
    `water_gm3` the liquid water content (g/m^3); their product drives
    the visibility. `particle_coeff` is the Kim-model particle-size
    coefficient and `tropo_alt_km` the height of the troposphere layer.
    """
    name: str
    number_cm3: float
    water_gm3: float
    particle_coeff: float = 1.6
    tropo_alt_km: float = 20.0

    def __post_init__(self):
        if self.number_cm3 <= 0 or self.water_gm3 <= 0:
            raise ValueError("cloud concentration and water content must be positive")


THIN_CIRRUS = WeatherProfile("thin-cirrus", number_cm3=0.5, water_gm3=3.128e-4)
CIRRUS = WeatherProfile("cirrus", number_cm3=0.0255, water_gm3=0.06405)
CUMULUS = WeatherProfile("cumulus", number_cm3=250.0, water_gm3=1.0)

WEATHER_PRESETS = {w.name: w for w in (THIN_CIRRUS, CIRRUS, CUMULUS)}


def dbm_to_watts(p_dbm: float) -> float:
    return 10.0 ** (p_dbm / 10.0) * 1e-3


def watts_to_dbm(p_w: float) -> float:
    if p_w <= 0:
        raise ValueError("power must be positive")
    return 10.0 * math.log10(p_w * 1e3)


def transmitter_gain(divergence_rad: float) -> float:
    """G_T = 16 / Theta^2 for a full divergence angle Theta (rad)."""
    if divergence_rad <= 0:
        raise ValueError("divergence must be positive")
    return 16.0 / divergence_rad ** 2


def receiver_gain(rx_diameter_mm: float, wavelength_nm: float) -> float:
    """G_R = (pi D / lambda)^2 with both lengths in consistent units."""
    if rx_diameter_mm <= 0 or wavelength_nm <= 0:
        raise ValueError("diameter and wavelength must be positive")
    d_m = rx_diameter_mm * 1e-3
    lam_m = wavelength_nm * 1e-9
    return (math.pi * d_m / lam_m) ** 2


def pointing_loss(gain: float, pointing_err_rad: float) -> float:
    """L = exp(-G theta^2); 1 for perfect pointing."""
    if gain <= 0:
        raise ValueError("gain must be positive")
    if pointing_err_rad < 0:
        raise ValueError("pointing error must be >= 0")
    return math.exp(-gain * pointing_err_rad ** 2)


def free_space_path_loss(wavelength_nm: float, distance_km: float) -> float:
    """L_P = (lambda / (4 pi d))^2 over a distance in km."""
    if distance_km <= 0:
        raise ValueError("distance must be positive")
    lam_m = wavelength_nm * 1e-9
    return (lam_m / (4.0 * math.pi * distance_km * 1e3)) ** 2


def mie_extinction_ratio(gs_alt_km: float, wavelength_um: float) -> float:
    """Extinction ratio of the Mie-scattering layer above a station.

    Cubic in the station altitude with wavelength-dependent empirical
    coefficients; the fit is only trusted for wavelengths in
    [0.5, 2.0] um.
    """
    if gs_alt_km < 0:
        raise ValueError("ground-station altitude must be >= 0")
    if not 0.5 <= wavelength_um <= 2.0:
        raise ValueError(f"wavelength {wavelength_um} um outside the fit's validity band")
    lam = wavelength_um
    a = -0.000545 * lam ** 2 + 0.002 * lam - 0.0038
    b = 0.00628 * lam ** 2 - 0.0232 * lam + 0.00439
    c = -0.028 * lam ** 2 + 0.101 * lam - 0.18
    d = -0.228 * lam ** 3 + 0.922 * lam ** 2 - 1.26 * lam + 0.719
    h = gs_alt_km
    return a * h ** 3 + b * h ** 2 + c * h + d


def mie_attenuation(extinction_ratio: float, elevation_deg: float) -> float:
    """I_m = exp(-rho / sin e)."""
    if elevation_deg <= 0.0 or elevation_deg > 90.0:
        raise ValueError(f"elevation {elevation_deg} outside (0, 90]")
    v = math.exp(-extinction_ratio / math.sin(math.radians(elevation_deg)))
    return 0.0 if v < ATTENUATION_FLOOR else v


def visibility(w: WeatherProfile) -> float:
    """Visibility in km from the cloud concentration/water-content product:
    V = 1.002 / (N L_W)^0.6473."""
    return 1.002 / (w.number_cm3 * w.water_gm3) ** 0.6473


def geometric_attenuation_coefficient(visibility_km: float, wavelength_nm: float,
                                      particle_coeff: float) -> float:
    """Attenuation coefficient (1/km): theta_A = (3.91/V) (lambda/550)^-phi,
    wavelength in nm."""
    if visibility_km <= 0:
        raise ValueError("visibility must be positive")
    return (3.91 / visibility_km) * (wavelength_nm / 550.0) ** (-particle_coeff)


def geometric_attenuation(coeff_per_km: float, path_km: float) -> float:
    """Beer-Lambert factor I_g = exp(-theta_A d_A), clamped to 0 on underflow."""
    if coeff_per_km < 0 or path_km < 0:
        raise ValueError("coefficient and path length must be >= 0")
    v = math.exp(-coeff_per_km * path_km)
    return 0.0 if v < ATTENUATION_FLOOR else v


def atmospheric_loss(direction: str, elevation_deg: float, gs_alt_km: float,
                     w: WeatherProfile, wavelength_nm: float) -> float:
    """Atmospheric attenuation factor for a ground link.

    Uplink: geometrical scattering only. Downlink: Mie scattering times
    geometrical scattering. Returns a factor in [0, 1]; exactly 0 when the
    cloud layer is opaque.
    """
    if direction not in ("up", "down"):
        raise ValueError(f"direction must be 'up' or 'down', got {direction!r}")
    theta_a = geometric_attenuation_coefficient(visibility(w), wavelength_nm, w.particle_coeff)
    d_a = troposphere_path_length(elevation_deg, gs_alt_km, w.tropo_alt_km)
    i_g = geometric_attenuation(theta_a, d_a)
    if direction == "up":
        return i_g
    rho = mie_extinction_ratio(gs_alt_km, wavelength_nm * 1e-3)
    return mie_attenuation(rho, elevation_deg) * i_g


def received_power(params: LinkBudgetParams, link_kind: str) -> float:
    """Required received power (W): sensitivity plus the link margin."""
    if link_kind == "isl":
        margin = params.margin_isl_db
    elif link_kind == "updown":
        margin = params.margin_updown_db
    else:
        raise ValueError(f"link kind must be 'isl' or 'updown', got {link_kind!r}")
    return dbm_to_watts(params.sensitivity_dbm + margin)


def _static_chain(params: LinkBudgetParams) -> float:
    """Product of the distance-independent budget factors."""
    g_t = transmitter_gain(params.divergence_rad)
    g_r = receiver_gain(params.rx_diameter_mm, params.wavelength_nm)
    l_t = pointing_loss(g_t, params.pointing_err_t_rad)
    l_r = pointing_loss(g_r, params.pointing_err_r_rad)
    return g_t * g_r * l_t * l_r * params.eta_t * params.eta_r


def lisl_transmission_power(params: LinkBudgetParams, distance_km: float) -> float:
    """Transmission power (W) to close an inter-satellite link of the given
    length. Exactly quadratic in the distance."""
    p_r = received_power(params, "isl")
    return p_r / (_static_chain(params) * free_space_path_loss(params.wavelength_nm, distance_km))


def updown_transmission_power(params: LinkBudgetParams, direction: str, distance_km: float,
                              elevation_deg: float, gs_alt_km: float,
                              w: WeatherProfile) -> float:
    """Transmission power (W) to close an uplink or downlink.

    Raises InfeasibleLinkError when the atmospheric attenuation has been
    clamped to zero (opaque cloud): no finite power closes the link.
    """
    l_a = atmospheric_loss(direction, elevation_deg, gs_alt_km, w, params.wavelength_nm)
    if l_a == 0.0:
        raise InfeasibleLinkError(
            f"{direction}link opaque under {w.name} at elevation {elevation_deg:.2f} deg"
        )
    p_r = received_power(params, "updown")
    l_pg = free_space_path_loss(params.wavelength_nm, distance_km)
    return p_r / (_static_chain(params) * l_a * l_pg)
