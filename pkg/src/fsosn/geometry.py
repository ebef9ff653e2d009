"""Shared geometric substrate: spherical-Earth frames, visibility, orbital period.

All positions are Earth-centered Earth-fixed (ECEF) Cartesian vectors in km,
represented as numpy arrays of shape (3,) or (N, 3). The Earth is modeled as
a sphere of radius 6378 km throughout; mixing in an ellipsoid would break the
slant-range and visibility relations this package is built on.

Angles cross API boundaries in degrees and are converted to radians
internally.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

Vec3 = np.ndarray  # shape (3,), km, ECEF


@dataclass(frozen=True)
class EarthConstants:
    """Physical constants for the spherical-Earth model."""
    radius_km: float = 6378.0
    atmosphere_km: float = 80.0          # LISL visibility shell above the surface
    grav_const: float = 6.673e-11        # N m^2 / kg^2
    earth_mass_kg: float = 5.98e24
    light_speed_m_s: float = 299_792_458.0
    rotation_rad_s: float = 7.2921159e-5  # sidereal rate


EARTH = EarthConstants()


@dataclass(frozen=True)
class GeoPoint:
    """Geodetic point on the spherical Earth.

    latitude_deg in [-90, 90], longitude_deg in [-180, 180],
    altitude_km >= 0.
    """
    latitude_deg: float
    longitude_deg: float
    altitude_km: float = 0.0

    def __post_init__(self):
        if not -90.0 <= self.latitude_deg <= 90.0:
            raise ValueError(f"latitude {self.latitude_deg} outside [-90, 90]")
        if not -180.0 <= self.longitude_deg <= 180.0:
            raise ValueError(f"longitude {self.longitude_deg} outside [-180, 180]")
        if self.altitude_km < 0.0:
            raise ValueError("altitude must be >= 0")


def geodetic_to_ecef(p: GeoPoint) -> Vec3:
    """Convert a geodetic point to an ECEF position vector (km).

    Spherical conversion; the norm of the result is exactly
    radius + altitude.
    """
    lat = math.radians(p.latitude_deg)
    lon = math.radians(p.longitude_deg)
    r = EARTH.radius_km + p.altitude_km
    clat = math.cos(lat)
    return np.array([
        r * clat * math.cos(lon),
        r * clat * math.sin(lon),
        r * math.sin(lat),
    ])


def slant_distance(elevation_deg: float, sat_alt_km: float, gs_alt_km: float = 0.0) -> float:
    """Line-of-sight distance (km) from a ground station to a satellite.

    Args:
        elevation_deg: elevation of the satellite above the station's local
            horizon, in (0, 90].
        sat_alt_km: satellite altitude above the surface.
        gs_alt_km: ground-station altitude above the surface.

    The relation is the spherical-triangle identity
    d = R (sqrt(((R+H)/R)^2 - cos^2 e) - sin e) with R the station's
    geocentric radius and H the satellite height above the station.
    """
    if elevation_deg <= 0.0 or elevation_deg > 90.0:
        raise ValueError(f"elevation {elevation_deg} outside (0, 90]")
    if sat_alt_km <= gs_alt_km:
        raise ValueError("satellite must be above the ground station")
    R = EARTH.radius_km + gs_alt_km
    H = sat_alt_km - gs_alt_km
    e = math.radians(elevation_deg)
    return R * (math.sqrt(((R + H) / R) ** 2 - math.cos(e) ** 2) - math.sin(e))


def elevation_from_slant(distance_km: float, sat_alt_km: float, gs_alt_km: float = 0.0) -> float:
    """Invert slant_distance: elevation angle (deg) at which the satellite
    sits `distance_km` away.

    Uses the closed-form identity sin e = ((R+H)^2 - R^2 - d^2) / (2 R d),
    the exact inverse of the slant relation on the sphere.
    """
    R = EARTH.radius_km + gs_alt_km
    Rs = EARTH.radius_km + sat_alt_km
    d = distance_km
    if d <= 0.0:
        raise ValueError("distance must be positive")
    s = (Rs * Rs - R * R - d * d) / (2.0 * R * d)
    if not -1.0 <= s <= 1.0:
        raise ValueError(f"no elevation solution for d={distance_km} km at h={sat_alt_km} km")
    return math.degrees(math.asin(s))


def elevation_angle(gs: Vec3, sat: Vec3) -> float:
    """Elevation (deg) of `sat` above the local horizontal plane at `gs`.

    Negative values indicate the satellite is below the horizon.
    """
    gs = np.asarray(gs, dtype=float)
    sat = np.asarray(sat, dtype=float)
    rg = float(np.linalg.norm(gs))
    rs = float(np.linalg.norm(sat))
    d = float(np.linalg.norm(sat - gs))
    if rs <= rg:
        raise ValueError("satellite radius must exceed ground-station radius")
    s = (rs * rs - rg * rg - d * d) / (2.0 * rg * d)
    s = min(1.0, max(-1.0, s))
    return math.degrees(math.asin(s))


def elevation_angles(gs: Vec3, sats: np.ndarray) -> np.ndarray:
    """Vectorized elevation_angle for an (N, 3) satellite position array."""
    gs = np.asarray(gs, dtype=float)
    rg = np.linalg.norm(gs)
    rs2 = np.einsum("ij,ij->i", sats, sats)
    diff = sats - gs
    d = np.sqrt(np.einsum("ij,ij->i", diff, diff))
    s = (rs2 - rg * rg - d * d) / (2.0 * rg * d)
    return np.degrees(np.arcsin(np.clip(s, -1.0, 1.0)))


def max_lisl_range(sat_alt_km: float) -> float:
    """Maximum laser inter-satellite link range (km), visibility-limited.

    Two satellites at altitude h can see each other as long as the chord
    between them clears the atmosphere shell:
    D = 2 sqrt((r+h)^2 - (r+h_a)^2).
    """
    if sat_alt_km <= EARTH.atmosphere_km:
        raise ValueError("satellite altitude must exceed the atmosphere height")
    ro = EARTH.radius_km + sat_alt_km
    ra = EARTH.radius_km + EARTH.atmosphere_km
    return 2.0 * math.sqrt(ro * ro - ra * ra)


def orbital_period(sat_alt_km: float) -> float:
    """Circular-orbit period (s) at the given altitude: T = 2 pi sqrt(a^3/mu)."""
    if sat_alt_km < 0.0:
        raise ValueError("altitude must be >= 0")
    a_m = (EARTH.radius_km + sat_alt_km) * 1000.0
    mu = EARTH.grav_const * EARTH.earth_mass_kg
    return 2.0 * math.pi * math.sqrt(a_m ** 3 / mu)


def mean_motion(sat_alt_km: float) -> float:
    """Circular-orbit mean motion (rad/s) at the given altitude."""
    return 2.0 * math.pi / orbital_period(sat_alt_km)


def troposphere_path_length(elevation_deg: float, gs_alt_km: float, tropo_alt_km: float) -> float:
    """Path length (km) of a slant beam through the troposphere layer.

    d = (h_A - h_E) csc(e); valid for elevation in (0, 90].
    """
    if elevation_deg <= 0.0 or elevation_deg > 90.0:
        raise ValueError(f"elevation {elevation_deg} outside (0, 90]")
    if tropo_alt_km <= gs_alt_km:
        raise ValueError("troposphere top must be above the ground station")
    return (tropo_alt_km - gs_alt_km) / math.sin(math.radians(elevation_deg))
