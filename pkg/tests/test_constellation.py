import math
from dataclasses import replace

import numpy as np
import pytest

from fsosn import constellation as cn
from fsosn.geometry import EARTH, orbital_period


def test_starlink_preset_shape():
    c = cn.generate(cn.STARLINK_P1V3)
    assert c.params.planes == 22
    assert c.params.sats_per_plane == 72
    assert c.n_sats == 1584


def test_kuiper_preset_shape():
    c = cn.generate(cn.KUIPER_SHELL2)
    assert c.params.planes == 36
    assert c.params.sats_per_plane == 36
    assert c.n_sats == 1296


def test_four_sat_walker_unrolled():
    c = cn.generate(cn.WalkerParams(90.0, 4, 2, 0, 550.0))
    assert np.allclose(sorted(set(np.round(c.raan, 12))), [0.0, math.pi])
    for plane in (0, 1):
        phases = sorted(c.arg_lat0[2 * plane:2 * plane + 2])
        assert np.allclose(phases, [0.0, math.pi])


def test_phasing_offsets_between_planes():
    p = cn.WalkerParams(53.0, 1584, 22, 17, 550.0)
    c = cn.generate(p)
    # satellite 0 of plane 1 leads satellite 0 of plane 0 by 2 pi f / T
    assert c.arg_lat0[72] - c.arg_lat0[0] == pytest.approx(2 * math.pi * 17 / 1584)
    assert c.raan[72] - c.raan[0] == pytest.approx(2 * math.pi / 22)


def test_invalid_params_rejected():
    with pytest.raises(ValueError):
        cn.WalkerParams(53.0, 1585, 22, 17, 550.0)
    with pytest.raises(ValueError):
        cn.WalkerParams(53.0, 1584, 22, 22, 550.0)


class TestPropagate:
    def test_epoch_positions(self):
        c = cn.generate(cn.WalkerParams(90.0, 4, 2, 0, 550.0))
        snap = cn.propagate(c, 0.0)
        r = c.orbit_radius_km
        # plane 0 (raan 0): sats at arg-lat 0 and pi on the x/z circle
        assert np.allclose(snap.positions[0], [r, 0.0, 0.0], atol=1e-9)
        assert np.allclose(snap.positions[1], [-r, 0.0, 0.0], atol=1e-6)
        # polar orbit: z = r sin(u)
        assert snap.positions[0][2] == pytest.approx(0.0, abs=1e-9)

    def test_radius_invariant(self):
        c = cn.generate(cn.STARLINK_P1V3)
        for t in (0.0, 137.0, 2900.5):
            snap = cn.propagate(c, t)
            radii = np.linalg.norm(snap.positions, axis=1)
            assert np.max(np.abs(radii - c.orbit_radius_km)) < 1e-6

    def test_period_closure_inertial(self):
        c = cn.generate(cn.STARLINK_P1V3)
        T = orbital_period(550.0)
        x0 = cn.inertial_positions(c, 0.0)
        xT = cn.inertial_positions(c, T)
        assert np.max(np.linalg.norm(xT - x0, axis=1)) < 1e-3
        # in ECEF the Earth has rotated away in the meantime
        eT = cn.propagate(c, T).positions
        assert np.max(np.linalg.norm(eT - x0, axis=1)) > 1000.0

    def test_rotation_equivariance(self):
        c = cn.generate(cn.KUIPER_SHELL2)
        t1, t2 = 600.0, 314.0
        n = 2 * math.pi / c.period_s
        shifted = cn.Constellation(
            params=c.params,
            raan=np.mod(c.raan - EARTH.rotation_rad_s * t1, 2 * math.pi),
            arg_lat0=np.mod(c.arg_lat0 + n * t1, 2 * math.pi),
        )
        # shifting the epoch by t1 (advance phases, rewind RAAN by the frame
        # rotation) must reproduce the t1+t2 snapshot exactly
        a = cn.propagate(c, t1 + t2).positions
        b = cn.propagate(shifted, t2).positions
        assert np.max(np.linalg.norm(a - b, axis=1)) < 1e-6

    def test_intra_plane_rigid_ring(self):
        c = cn.generate(cn.STARLINK_P1V3)
        expected = 2 * c.orbit_radius_km * math.sin(math.pi / 72)
        for t in (0.0, 431.0, 1999.0):
            X = cn.propagate(c, t).positions
            d = np.linalg.norm(X[0] - X[1], axis=0)
            assert d == pytest.approx(expected, abs=1e-6)
            d2 = np.linalg.norm(X[70] - X[71])
            assert d2 == pytest.approx(expected, abs=1e-6)

    def test_negative_time_rejected(self):
        c = cn.generate(cn.WalkerParams(90.0, 4, 2, 0, 550.0))
        with pytest.raises(ValueError):
            cn.propagate(c, -1.0)


def test_permanent_neighbor_counts_uniform():
    c = cn.generate(cn.STARLINK_P1V3)
    counts = cn.permanent_neighbor_count(c, 1575.0, stride_s=300.0)
    # Walker delta symmetry: every satellite sees the same structure
    assert counts.min() == counts.max() == 6
