"""Walker-delta constellation generation and circular-orbit propagation.

A Walker delta shell i:T/P/F places T satellites in P evenly spaced planes
at inclination i. Plane p has RAAN 2*pi*p/P; satellite k of plane p starts
at argument of latitude 2*pi*k/S + 2*pi*F*p/T (S satellites per plane).
Satellites move on circular two-body orbits and are rotated into ECEF by
the sidereal Earth rotation; the epoch aligns plane 0, satellite 0 with
the ascending node at longitude 0 at t = 0.

The epoch is a simulation choice: per-slot paths depend on it, while
statistics taken over a full orbital period are comparable across epochs.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import EARTH, mean_motion, orbital_period


@dataclass(frozen=True)
class WalkerParams:
    """Walker delta shell description."""
    inclination_deg: float
    total_sats: int
    planes: int
    phasing_f: int
    altitude_km: float

    def __post_init__(self):
        if self.total_sats % self.planes != 0:
            raise ValueError(
                f"total satellites ({self.total_sats}) not divisible by planes ({self.planes})"
            )
        if not 0 <= self.phasing_f <= self.planes - 1:
            raise ValueError(f"phasing parameter {self.phasing_f} outside [0, {self.planes - 1}]")

    @property
    def sats_per_plane(self) -> int:
        return self.total_sats // self.planes


# Shell parameters from the public FCC filings. The Starlink phasing is set
# to the value that yields the documented permanent-link structure (six
# permanent neighbors at 1575 km, ten at 1731 km); see tests.
STARLINK_P1V3 = WalkerParams(53.0, 1584, 22, 1, 550.0)
KUIPER_SHELL2 = WalkerParams(42.0, 1296, 36, 11, 610.0)

CONSTELLATION_PRESETS = {
    "starlink-p1v3": STARLINK_P1V3,
    "kuiper-shell2": KUIPER_SHELL2,
}

# Minimum ground-station elevation angle per shell design.
MIN_ELEVATION_PRESETS = {
    "starlink-p1v3": 25.0,
    "kuiper-shell2": 35.0,
}


@dataclass(frozen=True)
class Constellation:
    """Generated shell: per-satellite epoch elements.

    Satellite ids run 0..total_sats-1 with id = plane*sats_per_plane + slot;
    `raan` and `arg_lat0` are radians, indexed by satellite id.
    """
    params: WalkerParams
    raan: np.ndarray = field(repr=False)
    arg_lat0: np.ndarray = field(repr=False)

    @property
    def n_sats(self) -> int:
        return self.params.total_sats

    @property
    def orbit_radius_km(self) -> float:
        return EARTH.radius_km + self.params.altitude_km

    @property
    def period_s(self) -> float:
        return orbital_period(self.params.altitude_km)


@dataclass(frozen=True)
class SnapshotPositions:
    """ECEF positions (km) of every satellite at one time slot.

    `positions` has shape (n_sats, 3); row index is the satellite id.
    """
    time_slot: float
    positions: np.ndarray


def generate(params: WalkerParams) -> Constellation:
    """Build the epoch elements of a Walker delta shell."""
    S = params.sats_per_plane
    ids = np.arange(params.total_sats)
    plane = ids // S
    slot = ids % S
    raan = 2.0 * np.pi * plane / params.planes
    arg_lat0 = 2.0 * np.pi * slot / S + 2.0 * np.pi * params.phasing_f * plane / params.total_sats
    return Constellation(params=params, raan=raan, arg_lat0=np.mod(arg_lat0, 2.0 * np.pi))


def inertial_positions(c: Constellation, t: float) -> np.ndarray:
    """Satellite positions (km, inertial frame) at time t seconds."""
    n = mean_motion(c.params.altitude_km)
    u = c.arg_lat0 + n * t
    inc = math.radians(c.params.inclination_deg)
    ci, si = math.cos(inc), math.sin(inc)
    cu, su = np.cos(u), np.sin(u)
    cO, sO = np.cos(c.raan), np.sin(c.raan)
    r = c.orbit_radius_km
    x = r * (cO * cu - sO * su * ci)
    y = r * (sO * cu + cO * su * ci)
    z = r * (su * si)
    return np.column_stack([x, y, z])


def propagate(c: Constellation, t: float) -> SnapshotPositions:
    """Advance the constellation to time t and express it in ECEF.

    Circular two-body motion along each inclined orbit, then a rotation by
    -omega_E * t about the z axis to account for Earth rotation.
    """
    if t < 0:
        raise ValueError("time must be >= 0")
    xyz = inertial_positions(c, t)
    a = EARTH.rotation_rad_s * t
    ca, sa = math.cos(a), math.sin(a)
    ecef = np.empty_like(xyz)
    ecef[:, 0] = ca * xyz[:, 0] + sa * xyz[:, 1]
    ecef[:, 1] = -sa * xyz[:, 0] + ca * xyz[:, 1]
    ecef[:, 2] = xyz[:, 2]
    return SnapshotPositions(time_slot=t, positions=ecef)


def permanent_neighbor_count(c: Constellation, lisl_range_km: float,
                             stride_s: float = 60.0) -> np.ndarray:
    """Count, per satellite, the neighbors that stay within range.

    A neighbor is permanent if the pair distance is <= lisl_range_km at
    every sampled instant across one orbital period (default stride 60 s;
    pair distances in a rigid shell vary smoothly, so a fine stride adds
    nothing).

    Returns an int array indexed by satellite id.
    """
    r = c.orbit_radius_km
    # distance <= range  <=>  unit-vector dot product >= threshold
    thresh = 1.0 - lisl_range_km ** 2 / (2.0 * r * r)
    permanent: np.ndarray | None = None
    for t in np.arange(0.0, c.period_s, stride_s):
        X = inertial_positions(c, float(t)) / r
        within = (X @ X.T) >= thresh
        permanent = within if permanent is None else (permanent & within)
    assert permanent is not None
    np.fill_diagonal(permanent, False)
    return permanent.sum(axis=1)
